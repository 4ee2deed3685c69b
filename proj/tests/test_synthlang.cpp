#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "lift/model/text.hpp"
#include "lift/synthlang/corpus.hpp"
#include "lift/synthlang/language.hpp"

using namespace lift::synth;
using lift::num::Rng;

namespace {

WorldConfig small_world() {
  WorldConfig cfg;
  cfg.seed = 1;
  cfg.n_high = 2;
  cfg.n_medium = 1;
  cfg.n_low = 1;
  cfg.n_families = 2;
  cfg.n_scripts = 2;
  return cfg;
}

const LanguageSpec& non_english_family(const std::vector<LanguageSpec>& langs) {
  for (const auto& l : langs)
    if (l.family != 0) return l;
  throw std::runtime_error("no non-english-family language");
}

}  // namespace

TEST_CASE("build_language_family basics") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  CHECK(langs.size() == 4);
  CHECK(langs[0].id == "en");
  CHECK(langs[0].is_english());
  CHECK(langs[0].script == 0);
  CHECK(langs[0].tier == Tier::high);

  // english lexicon is the identity
  for (const auto& [k, v] : langs[0].gold_lexicon) CHECK(k == v);

  // determinism
  auto again = build_language_family(g, small_world());
  for (size_t i = 0; i < langs.size(); ++i) {
    CHECK(langs[i].id == again[i].id);
    CHECK(langs[i].gold_lexicon == again[i].gold_lexicon);
  }

  // family coverage
  std::set<int> families, scripts;
  for (const auto& l : langs) {
    families.insert(l.family);
    scripts.insert(l.script);
  }
  CHECK(families.size() == 2);
  CHECK(scripts.size() == 2);
}

TEST_CASE("lexicons are bijective and family overlap holds") {
  const auto& g = default_grammar();
  WorldConfig cfg;
  cfg.seed = 7;
  cfg.n_high = 3;
  cfg.n_medium = 2;
  cfg.n_low = 3;
  auto langs = build_language_family(g, cfg);
  const auto vocab = g.content_words();

  for (const auto& l : langs) {
    std::set<std::string> images;
    for (const auto& w : vocab) images.insert(l.gold_lexicon.at(w));
    CHECK(images.size() == vocab.size());  // bijection
  }

  // same family => same word order and >= 30% shared entries
  for (const auto& a : langs) {
    for (const auto& b : langs) {
      if (a.id >= b.id || a.family != b.family) continue;
      CHECK(a.word_order == b.word_order);
      int shared = 0;
      for (const auto& w : vocab)
        if (a.gold_lexicon.at(w) == b.gold_lexicon.at(w)) ++shared;
      CHECK(static_cast<double>(shared) / vocab.size() >= cfg.family_overlap - 1e-9);
    }
  }

  // non-english-family cipher languages have no fixed points
  const auto& cipher = non_english_family(langs);
  for (const auto& w : vocab) CHECK(cipher.gold_lexicon.at(w) != w);
}

TEST_CASE("answer arithmetic") {
  const auto& g = default_grammar();
  const auto& add = g.find_template("p_add");
  SlotFill fill;
  fill.words[{static_cast<int>(Pos::PROPN), 0}] = "ana";
  fill.words[{static_cast<int>(Pos::N), 0}] = "apples";
  fill.numbers = {3, 4};
  CHECK(answer_of(add, fill) == Rational(7));

  const auto& share = g.find_template("p_share");
  SlotFill sf;
  sf.words[{static_cast<int>(Pos::PROPN), 0}] = "ben";
  sf.words[{static_cast<int>(Pos::N), 0}] = "coins";
  sf.numbers = {10, 2};
  CHECK(answer_of(share, sf) == Rational(5));

  // multi-step fixture checked against independent arithmetic
  const auto& ms = g.find_template("p_mul_add");
  SlotFill mf;
  mf.words[{static_cast<int>(Pos::PROPN), 0}] = "eva";
  mf.words[{static_cast<int>(Pos::N), 0}] = "pens";
  mf.numbers = {3, 4, 5};
  CHECK(answer_of(ms, mf) == Rational(3 * 4 + 5));

  SlotFill zero;
  zero.words = sf.words;
  zero.numbers = {10, 0};
  CHECK_THROWS_AS(answer_of(share, zero), lift::ValueError);
}

TEST_CASE("rendering: identity english, ciphers, permutations, invariants") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  const auto& en = langs[0];
  const auto& tmpl = g.find_template("p_give");
  SlotFill fill;
  fill.words[{static_cast<int>(Pos::PROPN), 0}] = "ana";
  fill.words[{static_cast<int>(Pos::PROPN), 1}] = "ben";
  fill.words[{static_cast<int>(Pos::N), 0}] = "apples";
  fill.numbers = {12, 5};

  auto base = realize_base(tmpl, fill);
  auto en_tokens = render_tokens(g, tmpl, fill, en);
  CHECK(en_tokens == base.tokens);  // identity language

  // every content token differs from base in a cipher language
  const auto& cipher = non_english_family(langs);
  auto ci_tokens = render_tokens(g, tmpl, fill, cipher);
  CHECK(ci_tokens.size() == base.tokens.size());

  // digits and punctuation byte-identical across languages
  for (const auto& lang : langs) {
    auto toks = render_tokens(g, tmpl, fill, lang);
    std::multiset<std::string> digits_punct_base, digits_punct_lang;
    for (size_t i = 0; i < base.tokens.size(); ++i) {
      if (base.tags[i] == Pos::NUM || base.tags[i] == Pos::PUNCT)
        digits_punct_base.insert(base.tokens[i]);
    }
    for (const auto& t : toks) {
      if (!t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t == "." || t == "?"))
        digits_punct_lang.insert(t);
    }
    CHECK(digits_punct_base == digits_punct_lang);
  }

  // SOV family: the verb segment lands after the object segment
  const LanguageSpec* sov = nullptr;
  for (const auto& l : langs)
    if (l.word_order == WordOrder::sov) sov = &l;
  REQUIRE(sov != nullptr);
  // first sentence of p_give base order: ana has 12 apples .
  // in SOV the verb surface must come after the object tokens
  auto sov_tokens = render_tokens(g, tmpl, fill, *sov);
  auto verb_surface = surface_form(*sov, "has", Pos::V);
  auto obj_surface = surface_form(*sov, "apples", Pos::N);
  auto vi = std::find(sov_tokens.begin(), sov_tokens.end(), verb_surface);
  auto oi = std::find(sov_tokens.begin(), sov_tokens.end(), obj_surface);
  REQUIRE(vi != sov_tokens.end());
  REQUIRE(oi != sov_tokens.end());
  CHECK(oi < vi);
}

TEST_CASE("rendering is invertible for content words") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  for (const auto& lang : langs) {
    std::map<std::string, std::string> inverse;
    for (const auto& [pos, words] : g.content_vocab) {
      for (const auto& w : words) {
        auto s = surface_form(lang, w, pos);
        CHECK(inverse.emplace(s, w).second);  // injective over full vocabulary
      }
    }
  }
}

TEST_CASE("gold_lexicon composition") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  const auto& en = langs[0];
  const auto& a = langs[1];
  const auto& b = langs[2];

  auto id_map = gold_lexicon(g, a, a);
  for (const auto& [k, v] : id_map) CHECK(k == v);

  // ("english", L) is L's lexicon+script over content words
  auto en_to_a = gold_lexicon(g, en, a);
  for (const auto& [pos, words] : g.content_vocab) {
    for (const auto& w : words) CHECK(en_to_a.at(w) == surface_form(a, w, pos));
  }

  // (A->B) o (B->C) == (A->C), exhaustively
  auto a_to_b = gold_lexicon(g, a, b);
  auto b_to_en = gold_lexicon(g, b, en);
  auto a_to_en = gold_lexicon(g, a, en);
  for (const auto& [src, mid] : a_to_b) CHECK(b_to_en.at(mid) == a_to_en.at(src));
}

TEST_CASE("monolingual corpus") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  CHECK_THROWS_AS(generate_monolingual_corpus(g, langs[0], 0, 5), lift::ValueError);

  auto c1 = generate_monolingual_corpus(g, langs[1], 200, 5);
  auto c2 = generate_monolingual_corpus(g, langs[1], 200, 5);
  CHECK(c1.size() == 200);
  for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i].tokens == c2[i].tokens);

  // unigram distribution of nouns roughly uniform over the noun list
  auto cen = generate_monolingual_corpus(g, langs[0], 4000, 11);
  std::map<std::string, int> noun_counts;
  int total = 0;
  for (const auto& s : cen) {
    for (size_t i = 0; i < s.base_tokens.size(); ++i) {
      if (s.pos_tags[i] == Pos::N) {
        ++noun_counts[s.base_tokens[i]];
        ++total;
      }
    }
  }
  const auto& nouns = g.content_vocab.at(Pos::N);
  double expect = static_cast<double>(total) / nouns.size();
  int covered = 0;
  for (const auto& n : nouns) {
    auto it = noun_counts.find(n);
    if (it != noun_counts.end() && it->second > 0.3 * expect && it->second < 3.0 * expect) ++covered;
  }
  CHECK(covered >= static_cast<int>(nouns.size()) - 2);
}

TEST_CASE("eval set") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  auto evalset = make_eval_set(g, langs, 100, 3);
  CHECK(evalset.size() == 100);

  int pairs = 0;
  std::set<std::pair<std::string, SlotFill>> seen;
  for (const auto& p : evalset) {
    pairs += static_cast<int>(p.surface_text.size());
    CHECK(seen.insert({p.template_id, p.fill}).second);  // no duplicates
    CHECK(p.surface_text.size() == langs.size());
    CHECK(p.gold_answer.is_integer());
    CHECK(p.gold_answer.num >= 0);
  }
  CHECK(pairs == 100 * static_cast<int>(langs.size()));

  // determinism
  auto again = make_eval_set(g, langs, 100, 3);
  for (size_t i = 0; i < evalset.size(); ++i) {
    CHECK(evalset[i].template_id == again[i].template_id);
    CHECK(evalset[i].surface_text == again[i].surface_text);
  }
}

TEST_CASE("task dataset traces") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  auto tasks = make_task_dataset(g, langs[0], 50, 9);
  CHECK(tasks.size() == 50);
  for (const auto& t : tasks) {
    CHECK(t.response_text.find("\\boxed{" + t.answer + "}") != std::string::npos);
    CHECK(t.problem_text.find('?') != std::string::npos);
  }
}

TEST_CASE("tokenizer round trips") {
  using lift::model::detokenize;
  using lift::model::tokenize_text;
  auto toks = tokenize_text("Ana has 12 apples. \\boxed{345} (and only) x:");
  std::vector<std::string> expect = {"ana", "has", "1", "2",   "apples", ".", "\\boxed{", "3",
                                     "4",   "5",   "}", "(",   "and",    "only", ")",     "x",
                                     ":"};
  CHECK(toks == expect);
  CHECK(detokenize({"3", "+", "4", "=", "7", ".", "\\boxed{", "7", "}"}) == "3 + 4 = 7. \\boxed{7}");
  CHECK(detokenize({"1", "2", "apples"}) == "12 apples");
}

TEST_CASE("vocabularies") {
  const auto& g = default_grammar();
  auto langs = build_language_family(g, small_world());
  auto ev = lift::model::build_encoder_vocab(g, langs);
  auto dv = lift::model::build_decoder_vocab(g, langs);
  CHECK(ev.mask >= 0);
  CHECK(dv.bos >= 0);
  CHECK(dv.eos >= 0);

  // every rendering of every language tokenizes into the encoder vocab
  auto evalset = make_eval_set(g, langs, 20, 4);
  for (const auto& p : evalset) {
    for (const auto& [lang, text] : p.surface_text) {
      for (const auto& tok : lift::model::tokenize_text(text)) {
        CHECK(ev.ids.count(tok) == 1);
      }
    }
  }
  // english text and prompts tokenize into the decoder vocab
  auto tasks = make_task_dataset(g, langs[0], 20, 4);
  for (const auto& t : tasks) {
    for (const auto& tok : lift::model::tokenize_text(lift::model::math_prompt(t.problem_text))) {
      CHECK(dv.ids.count(tok) == 1);
    }
    for (const auto& tok : lift::model::tokenize_text(t.response_text)) {
      CHECK(dv.ids.count(tok) == 1);
    }
  }
}
