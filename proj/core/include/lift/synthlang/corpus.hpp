#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lift/numcore/rng.hpp"
#include "lift/synthlang/language.hpp"

namespace lift::synth {

// Deterministic slot filling honoring the template's operand constraints.
SlotFill sample_fill(const GrammarSpec& grammar, const SentenceTemplate& tmpl,
                     lift::num::Rng& rng);

struct CorpusSentence {
  std::string lang;
  std::vector<std::string> tokens;       // surface tokens (post word-order + script)
  std::vector<std::string> base_tokens;  // english-order base tokens
  std::vector<Pos> pos_tags;             // aligned to base_tokens
};

// Deterministic monolingual corpus drawn from the statement templates.
std::vector<CorpusSentence> generate_monolingual_corpus(const GrammarSpec& grammar,
                                                        const LanguageSpec& lang,
                                                        int n_sentences, uint64_t seed);

// Parallel multilingual eval set: every problem rendered in every language,
// no duplicate (template, fill) pairs.
std::vector<ProblemInstance> make_eval_set(const GrammarSpec& grammar,
                                           const std::vector<LanguageSpec>& langs, int n_problems,
                                           uint64_t seed);

// English math instruction records: problem text plus a step-by-step trace
// ending in the boxed answer.
struct TaskRecord {
  std::string template_id;
  std::string problem_text;   // english rendering
  std::string response_text;  // derivation + "\boxed{answer}"
  std::string answer;
};
std::vector<TaskRecord> make_task_dataset(const GrammarSpec& grammar, const LanguageSpec& english,
                                          int n_records, uint64_t seed);

// JSONL serialization (one record per line).
std::string corpus_to_jsonl(const std::vector<CorpusSentence>& corpus);
std::string eval_set_to_jsonl(const std::vector<ProblemInstance>& problems);
std::vector<CorpusSentence> corpus_from_jsonl(const std::string& text);

}  // namespace lift::synth
