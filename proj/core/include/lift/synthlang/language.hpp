#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lift/synthlang/grammar.hpp"

namespace lift::synth {

enum class Tier { low, medium, high };
const char* tier_name(Tier t);
Tier tier_from_name(const std::string& name);

enum class WordOrder { svo, sov, vso, ovs };
const char* word_order_name(WordOrder w);

struct LanguageSpec {
  std::string id;                                   // short code; "en" is english
  Tier tier = Tier::high;
  int family = 0;
  int script = 0;                                   // script group id; 0 holds english
  int char_offset = 0;                              // per-language a-z rotation, 0 for english
  WordOrder word_order = WordOrder::svo;
  std::map<std::string, std::string> gold_lexicon;  // base word -> word form (pre-script)

  bool is_english() const { return id == "en"; }
};

struct WorldConfig {
  uint64_t seed = 1;
  int n_high = 3;      // includes english
  int n_medium = 2;
  int n_low = 3;
  int n_families = 4;
  int n_scripts = 4;
  double family_overlap = 0.30;
};

// Deterministic synthetic language family. The first high-tier language is
// english: identity lexicon, identity script, SVO. Same-family languages
// share word order and at least `family_overlap` of their lexicon entries;
// outside shared slices lexicons are fixed-point-free permutations of the
// content vocabulary.
std::vector<LanguageSpec> build_language_family(const GrammarSpec& grammar, const WorldConfig& cfg);

// Per-character rotation over a-z; digits, punctuation and '\\' pass through.
std::string apply_char_offset(int offset, const std::string& word);

// Surface form of a base word in a language: lexicon then script. Digits,
// punctuation and unknown words pass through the script stage only as the
// rules allow (digits/punct byte-identical, names script-transformed).
std::string surface_form(const LanguageSpec& lang, const std::string& base_word, Pos pos);

// Exact surface-to-surface translation map between two languages over the
// content vocabulary (the composition tgt_lexicon after src_lexicon^-1).
std::map<std::string, std::string> gold_lexicon(const GrammarSpec& grammar,
                                                const LanguageSpec& src,
                                                const LanguageSpec& tgt);

// One language's rendering of a filled template: lexicon mapping, word-order
// permutation, script transform. Digits and punctuation byte-identical to the
// base rendering.
std::vector<std::string> render_tokens(const GrammarSpec& grammar, const SentenceTemplate& tmpl,
                                       const SlotFill& fill, const LanguageSpec& lang);

struct ProblemInstance {
  std::string template_id;
  SlotFill fill;
  std::map<std::string, std::string> surface_text;  // lang id -> text
  Rational gold_answer;
  std::vector<std::string> base_tokens;
  std::vector<Pos> pos_tags;                        // aligned to base_tokens
};

ProblemInstance render_problem(const GrammarSpec& grammar, const SentenceTemplate& tmpl,
                               const SlotFill& fill, const std::vector<LanguageSpec>& langs);

// Space-joined text form of surface tokens (multi-digit numbers stay fused).
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace lift::synth
