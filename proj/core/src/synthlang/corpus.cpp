#include "lift/synthlang/corpus.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

namespace lift::synth {

using lift::num::Rng;
using nlohmann::json;

SlotFill sample_fill(const GrammarSpec& grammar, const SentenceTemplate& tmpl, Rng& rng) {
  SlotFill fill;
  for (Pos p : {Pos::N, Pos::V, Pos::ADJ, Pos::ADV, Pos::ADP, Pos::PRON, Pos::AUX, Pos::CONJ}) {
    int n = tmpl.n_slots(p);
    if (n == 0) continue;
    const auto& words = grammar.content_vocab.at(p);
    // Distinct words across slots of the same POS.
    std::vector<size_t> picked;
    for (int s = 0; s < n; ++s) {
      size_t w;
      do {
        w = rng.next_below(words.size());
      } while (std::find(picked.begin(), picked.end(), w) != picked.end());
      picked.push_back(w);
      fill.words[{static_cast<int>(p), s}] = words[w];
    }
  }
  {
    int n = tmpl.n_slots(Pos::PROPN);
    std::vector<size_t> picked;
    for (int s = 0; s < n; ++s) {
      size_t w;
      do {
        w = rng.next_below(grammar.name_list.size());
      } while (std::find(picked.begin(), picked.end(), w) != picked.end());
      picked.push_back(w);
      fill.words[{static_cast<int>(Pos::PROPN), s}] = grammar.name_list[w];
    }
  }
  int n_nums = tmpl.n_slots(Pos::NUM);
  fill.numbers.assign(n_nums, 0);
  std::vector<bool> done(n_nums, false);
  // Unconstrained slots first, then slots that depend on them.
  for (int pass = 0; pass < 2; ++pass) {
    for (int s = 0; s < n_nums; ++s) {
      if (done[s]) continue;
      const auto& spec = s < static_cast<int>(tmpl.num_slots.size())
                             ? tmpl.num_slots[s]
                             : SentenceTemplate::NumSlotSpec{};
      bool dependent = spec.multiple_of >= 0 || spec.must_not_exceed >= 0;
      if (pass == 0 && dependent) continue;
      if (spec.multiple_of >= 0) {
        int64_t base = fill.numbers[spec.multiple_of];
        int64_t q = spec.lo + static_cast<int64_t>(rng.next_below(spec.hi - spec.lo + 1));
        fill.numbers[s] = base * q;
      } else if (spec.must_not_exceed >= 0) {
        int64_t hi = std::min<int64_t>(spec.hi, fill.numbers[spec.must_not_exceed]);
        int64_t lo = std::min<int64_t>(spec.lo, hi);
        fill.numbers[s] = lo + static_cast<int64_t>(rng.next_below(hi - lo + 1));
      } else {
        fill.numbers[s] = spec.lo + static_cast<int64_t>(rng.next_below(spec.hi - spec.lo + 1));
      }
      done[s] = true;
    }
  }
  return fill;
}

std::vector<CorpusSentence> generate_monolingual_corpus(const GrammarSpec& grammar,
                                                        const LanguageSpec& lang, int n_sentences,
                                                        uint64_t seed) {
  if (n_sentences < 1) throw ValueError("corpus needs n_sentences >= 1");
  Rng rng(seed);
  auto statements = grammar.statement_templates();
  std::vector<CorpusSentence> out;
  out.reserve(n_sentences);
  for (int i = 0; i < n_sentences; ++i) {
    const SentenceTemplate& tmpl = *statements[rng.next_below(statements.size())];
    SlotFill fill = sample_fill(grammar, tmpl, rng);
    CorpusSentence cs;
    cs.lang = lang.id;
    BaseRealization base = realize_base(tmpl, fill);
    cs.base_tokens = std::move(base.tokens);
    cs.pos_tags = std::move(base.tags);
    cs.tokens = render_tokens(grammar, tmpl, fill, lang);
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<ProblemInstance> make_eval_set(const GrammarSpec& grammar,
                                           const std::vector<LanguageSpec>& langs, int n_problems,
                                           uint64_t seed) {
  if (n_problems < 1) throw ValueError("eval set needs n_problems >= 1");
  if (langs.empty()) throw ValueError("eval set needs at least one language");
  Rng rng(seed);
  auto problems = grammar.problem_templates();
  std::set<std::pair<std::string, SlotFill>> used;
  std::vector<ProblemInstance> out;
  while (static_cast<int>(out.size()) < n_problems) {
    const SentenceTemplate& tmpl = *problems[rng.next_below(problems.size())];
    SlotFill fill = sample_fill(grammar, tmpl, rng);
    if (!used.insert({tmpl.id, fill}).second) continue;  // duplicate: rejection-sample again
    out.push_back(render_problem(grammar, tmpl, fill, langs));
  }
  return out;
}

namespace {

std::string trace_of(const SentenceTemplate& tmpl, const SlotFill& fill) {
  std::vector<Rational> results;
  auto operand = [&](int ref) -> Rational {
    return ref >= 0 ? Rational(fill.numbers[ref]) : results[-ref - 1];
  };
  std::string text;
  for (const ArithStep& s : tmpl.arithmetic) {
    Rational a = operand(s.lhs), b = operand(s.rhs);
    Rational r;
    switch (s.op) {
      case '+': r = a + b; break;
      case '-': r = a - b; break;
      case '*': r = a * b; break;
      case '/': r = a / b; break;
    }
    results.push_back(r);
    text += a.str() + " " + s.op + " " + b.str() + " = " + r.str() + " . ";
  }
  text += "\\boxed{" + results.back().str() + "}";
  return text;
}

}  // namespace

std::vector<TaskRecord> make_task_dataset(const GrammarSpec& grammar, const LanguageSpec& english,
                                          int n_records, uint64_t seed) {
  if (n_records < 1) throw ValueError("task dataset needs n_records >= 1");
  Rng rng(seed);
  auto problems = grammar.problem_templates();
  std::vector<TaskRecord> out;
  out.reserve(n_records);
  for (int i = 0; i < n_records; ++i) {
    const SentenceTemplate& tmpl = *problems[rng.next_below(problems.size())];
    SlotFill fill = sample_fill(grammar, tmpl, rng);
    TaskRecord rec;
    rec.template_id = tmpl.id;
    rec.problem_text = join_tokens(render_tokens(grammar, tmpl, fill, english));
    rec.response_text = trace_of(tmpl, fill);
    rec.answer = answer_of(tmpl, fill).str();
    out.push_back(std::move(rec));
  }
  return out;
}

std::string corpus_to_jsonl(const std::vector<CorpusSentence>& corpus) {
  std::ostringstream os;
  for (const auto& cs : corpus) {
    json j;
    j["lang"] = cs.lang;
    j["text"] = join_tokens(cs.tokens);
    json tags = json::array();
    for (Pos p : cs.pos_tags) tags.push_back(pos_name(p));
    j["pos_tags"] = tags;
    j["base_text"] = join_tokens(cs.base_tokens);
    os << j.dump() << "\n";
  }
  return os.str();
}

std::string eval_set_to_jsonl(const std::vector<ProblemInstance>& problems) {
  std::ostringstream os;
  for (const auto& p : problems) {
    for (const auto& [lang, text] : p.surface_text) {
      json j;
      j["lang"] = lang;
      j["text"] = text;
      j["answer"] = p.gold_answer.str();
      j["template_id"] = p.template_id;
      os << j.dump() << "\n";
    }
  }
  return os.str();
}

std::vector<CorpusSentence> corpus_from_jsonl(const std::string& text) {
  std::vector<CorpusSentence> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    CorpusSentence cs;
    cs.lang = j.at("lang").get<std::string>();
    std::istringstream ts(j.at("text").get<std::string>());
    std::string tok;
    while (ts >> tok) cs.tokens.push_back(tok);
    if (j.contains("base_text")) {
      std::istringstream bs(j.at("base_text").get<std::string>());
      while (bs >> tok) cs.base_tokens.push_back(tok);
    }
    if (j.contains("pos_tags")) {
      for (const auto& t : j.at("pos_tags")) cs.pos_tags.push_back(pos_from_name(t.get<std::string>()));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace lift::synth
