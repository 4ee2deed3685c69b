#include "lift/synthlang/language.hpp"

#include <algorithm>
#include <set>

#include "lift/numcore/rng.hpp"

namespace lift::synth {

using lift::num::Rng;

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::low: return "low";
    case Tier::medium: return "medium";
    case Tier::high: return "high";
  }
  return "?";
}

Tier tier_from_name(const std::string& name) {
  if (name == "low") return Tier::low;
  if (name == "medium") return Tier::medium;
  if (name == "high") return Tier::high;
  throw ValueError("unknown tier: " + name);
}

const char* word_order_name(WordOrder w) {
  switch (w) {
    case WordOrder::svo: return "svo";
    case WordOrder::sov: return "sov";
    case WordOrder::vso: return "vso";
    case WordOrder::ovs: return "ovs";
  }
  return "?";
}

namespace {

WordOrder family_word_order(int family) {
  static const WordOrder orders[] = {WordOrder::svo, WordOrder::sov, WordOrder::vso,
                                     WordOrder::ovs};
  return orders[family % 4];
}

// Fixed-point-free mapping of `domain` words onto `pool` words. Retries the
// shuffle until no word maps to itself.
std::map<std::string, std::string> derange(const std::vector<std::string>& domain,
                                           std::vector<std::string> pool, Rng& rng) {
  if (domain.size() != pool.size()) throw ConfigError("derangement size mismatch");
  if (domain.size() == 1 && domain[0] == pool[0]) {
    throw ConfigError("vocabulary too small for a fixed-point-free bijection");
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    rng.shuffle(pool);
    bool ok = true;
    for (size_t i = 0; i < domain.size(); ++i) {
      if (domain[i] == pool[i]) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::map<std::string, std::string> m;
      for (size_t i = 0; i < domain.size(); ++i) m[domain[i]] = pool[i];
      return m;
    }
  }
  throw ConfigError("vocabulary too small for a fixed-point-free bijection");
}

std::string make_code(Rng& rng, std::set<std::string>& used) {
  static const std::string cons = "bcdfghjklmnprstvz";
  static const std::string vow = "aeiou";
  for (;;) {
    std::string code;
    code += cons[rng.next_below(cons.size())];
    code += vow[rng.next_below(vow.size())];
    if (code != "en" && !used.count(code)) {
      used.insert(code);
      return code;
    }
  }
}

}  // namespace

std::vector<LanguageSpec> build_language_family(const GrammarSpec& grammar,
                                                const WorldConfig& cfg) {
  if (cfg.n_high < 1 || cfg.n_medium < 1 || cfg.n_low < 1) {
    throw ConfigError("world: every tier needs at least one language");
  }
  const int total = cfg.n_high + cfg.n_medium + cfg.n_low;
  if (total < cfg.n_families || total < cfg.n_scripts) {
    throw ConfigError("world: not enough languages to cover every family/script group");
  }
  if (cfg.family_overlap < 0.0 || cfg.family_overlap >= 1.0) {
    throw ConfigError("world: family_overlap in [0,1)");
  }

  Rng rng(cfg.seed);
  const std::vector<std::string> vocab = grammar.content_words();
  const size_t shared_count =
      static_cast<size_t>(std::ceil(cfg.family_overlap * static_cast<double>(vocab.size())));
  if (shared_count + 2 > vocab.size()) {
    throw ConfigError("vocabulary too small for the requested family overlap");
  }
  const std::vector<std::string> shared_slice(vocab.begin(), vocab.begin() + shared_count);
  const std::vector<std::string> rest_slice(vocab.begin() + shared_count, vocab.end());

  // Family-shared lexicon slices. english's family keeps the identity there.
  std::vector<std::map<std::string, std::string>> family_shared(cfg.n_families);
  for (int f = 0; f < cfg.n_families; ++f) {
    if (f == 0) {
      for (const auto& w : shared_slice) family_shared[f][w] = w;
    } else if (!shared_slice.empty()) {
      family_shared[f] = derange(shared_slice, shared_slice, rng);
    }
  }

  std::vector<LanguageSpec> langs;
  std::set<std::string> used_codes;
  std::vector<int> script_members(cfg.n_scripts, 0);
  int idx = 0;
  auto add_language = [&](Tier tier) {
    LanguageSpec spec;
    spec.tier = tier;
    if (idx == 0) {
      spec.id = "en";
      spec.family = 0;
      spec.script = 0;
      spec.char_offset = 0;
      script_members[0] += 1;
      for (const auto& w : vocab) spec.gold_lexicon[w] = w;
    } else {
      spec.id = make_code(rng, used_codes);
      spec.family = idx % cfg.n_families;
      spec.script = idx % cfg.n_scripts;
      // Languages in one script group use nearby but distinct rotations, so
      // the group is a recognizable "writing system" while surface strings
      // stay language-specific (no systematic cross-language homographs).
      int rank = script_members[spec.script]++;
      spec.char_offset = (3 + spec.script * 6 + rank) % 26;
      if (spec.char_offset == 0) spec.char_offset = 1;
      spec.gold_lexicon = family_shared[spec.family];
      auto rest = derange(rest_slice, rest_slice, rng);
      spec.gold_lexicon.insert(rest.begin(), rest.end());
    }
    spec.word_order = family_word_order(spec.family);
    langs.push_back(std::move(spec));
    ++idx;
  };

  for (int i = 0; i < cfg.n_high; ++i) add_language(Tier::high);
  for (int i = 0; i < cfg.n_medium; ++i) add_language(Tier::medium);
  for (int i = 0; i < cfg.n_low; ++i) add_language(Tier::low);
  return langs;
}

std::string apply_char_offset(int offset, const std::string& word) {
  if (offset == 0) return word;
  std::string out = word;
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + offset) % 26);
  }
  return out;
}

std::string surface_form(const LanguageSpec& lang, const std::string& base_word, Pos pos) {
  if (pos == Pos::NUM || pos == Pos::PUNCT) return base_word;
  if (pos == Pos::PROPN) return apply_char_offset(lang.char_offset, base_word);
  auto it = lang.gold_lexicon.find(base_word);
  if (it == lang.gold_lexicon.end()) throw IndexError("word not in lexicon: " + base_word);
  return apply_char_offset(lang.char_offset, it->second);
}

std::map<std::string, std::string> gold_lexicon(const GrammarSpec& grammar,
                                                const LanguageSpec& src, const LanguageSpec& tgt) {
  std::map<std::string, std::string> out;
  for (const auto& [pos, words] : grammar.content_vocab) {
    for (const auto& w : words) {
      out[surface_form(src, w, pos)] = surface_form(tgt, w, pos);
    }
  }
  return out;
}

namespace {

std::vector<int> role_positions(const Sentence& s) {
  std::vector<int> pos;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i].role != Role::F) pos.push_back(static_cast<int>(i));
  }
  return pos;
}

// Reorder the S/V/O segments of a sentence into the language's word order;
// fixed segments keep their slots. Templates are authored in english (SVO)
// surface order, so SVO is the identity permutation.
std::vector<const Segment*> permute_segments(const Sentence& s, WordOrder order) {
  std::vector<const Segment*> out(s.size());
  for (size_t i = 0; i < s.size(); ++i) out[i] = &s[i];
  if (order == WordOrder::svo) return out;
  std::vector<int> movable = role_positions(s);
  if (movable.empty()) return out;

  std::vector<Role> target;
  switch (order) {
    case WordOrder::svo: target = {Role::S, Role::V, Role::O}; break;
    case WordOrder::sov: target = {Role::S, Role::O, Role::V}; break;
    case WordOrder::vso: target = {Role::V, Role::S, Role::O}; break;
    case WordOrder::ovs: target = {Role::O, Role::V, Role::S}; break;
  }
  // Segments of each role, in template order, placed into movable slots by
  // the target role sequence.
  std::vector<const Segment*> ordered;
  for (Role r : target) {
    for (int p : movable) {
      if (s[p].role == r) ordered.push_back(&s[p]);
    }
  }
  for (size_t k = 0; k < movable.size(); ++k) out[movable[k]] = ordered[k];
  return out;
}

}  // namespace

std::vector<std::string> render_tokens(const GrammarSpec& grammar, const SentenceTemplate& tmpl,
                                       const SlotFill& fill, const LanguageSpec& lang) {
  (void)grammar;
  std::vector<std::string> out;
  for (const Sentence& s : tmpl.sentences) {
    for (const Segment* segm : permute_segments(s, lang.word_order)) {
      for (const TemplateToken& t : segm->tokens) {
        std::string base;
        if (!t.is_slot()) {
          base = t.literal;
        } else if (t.pos == Pos::NUM) {
          if (t.slot >= static_cast<int>(fill.numbers.size()))
            throw ConfigError("template slot not filled");
          base = std::to_string(fill.numbers[t.slot]);
        } else {
          base = fill.word(t.pos, t.slot);
        }
        out.push_back(surface_form(lang, base, t.pos));
      }
    }
  }
  return out;
}

ProblemInstance render_problem(const GrammarSpec& grammar, const SentenceTemplate& tmpl,
                               const SlotFill& fill, const std::vector<LanguageSpec>& langs) {
  ProblemInstance inst;
  inst.template_id = tmpl.id;
  inst.fill = fill;
  inst.gold_answer = answer_of(tmpl, fill);
  BaseRealization base = realize_base(tmpl, fill);
  inst.base_tokens = std::move(base.tokens);
  inst.pos_tags = std::move(base.tags);
  for (const LanguageSpec& lang : langs) {
    inst.surface_text[lang.id] = join_tokens(render_tokens(grammar, tmpl, fill, lang));
  }
  return inst;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace lift::synth
