#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lift/errors.hpp"

namespace lift::synth {

enum class Pos { N, V, ADJ, ADV, ADP, PRON, AUX, CONJ, NUM, PROPN, PUNCT };

const char* pos_name(Pos p);
Pos pos_from_name(const std::string& name);

// Exact rational arithmetic for gold answers.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n) : num(n), den(1) {}
  Rational(int64_t n, int64_t d);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

  bool is_integer() const { return den == 1; }
  std::string str() const;
};

// One token of a template: either a fixed word (with its POS) or a slot to
// be filled by a word of the given POS. Slots of the same (pos, index) refer
// to the same filled word everywhere in the template.
struct TemplateToken {
  Pos pos;
  int slot = -1;              // -1: literal
  std::string literal;

  static TemplateToken lit(Pos p, std::string w) { return {p, -1, std::move(w)}; }
  static TemplateToken fill(Pos p, int idx) { return {p, idx, {}}; }
  bool is_slot() const { return slot >= 0; }
};

// Word-order permutation operates on segment roles within a sentence.
enum class Role { S, V, O, F };

struct Segment {
  Role role;
  std::vector<TemplateToken> tokens;
};

using Sentence = std::vector<Segment>;

// Arithmetic over NUM slots: a chain of binary steps; operands reference
// either a NUM slot (>= 0) or a previous step's result (~step via -1-k).
struct ArithStep {
  char op;   // + - * /
  int lhs;   // slot index, or -(k+1) for step k's result
  int rhs;
};

struct SentenceTemplate {
  std::string id;
  bool is_problem = false;    // problem templates carry arithmetic + question
  std::vector<Sentence> sentences;
  std::vector<ArithStep> arithmetic;
  // inclusive operand ranges and constraints used by the fill sampler
  struct NumSlotSpec {
    int lo = 2, hi = 15;
    int multiple_of = -1;      // slot value = (that slot's value) * q, q in [lo, hi]
    int must_not_exceed = -1;  // slot value <= that slot's value
  };
  std::vector<NumSlotSpec> num_slots;
  int n_slots(Pos p) const;
};

// A concrete fill: word choices per (pos, slot) plus integers for NUM slots.
struct SlotFill {
  std::map<std::pair<int, int>, std::string> words;  // (pos, slot) -> word
  std::vector<int64_t> numbers;

  const std::string& word(Pos p, int slot) const;
  bool operator==(const SlotFill& o) const { return words == o.words && numbers == o.numbers; }
  bool operator<(const SlotFill& o) const {
    return std::tie(words, numbers) < std::tie(o.words, o.numbers);
  }
};

struct GrammarSpec {
  std::map<Pos, std::vector<std::string>> content_vocab;  // open + closed classes
  std::vector<std::string> name_list;                     // proper nouns
  std::vector<std::string> stop_list;                     // closed-class scaffolding
  std::vector<SentenceTemplate> templates;                // statements + problems

  std::vector<std::string> content_words() const;         // canonical order
  const SentenceTemplate& find_template(const std::string& id) const;
  std::vector<const SentenceTemplate*> statement_templates() const;
  std::vector<const SentenceTemplate*> problem_templates() const;
};

// The fixed grammar of the synthetic world.
const GrammarSpec& default_grammar();

// Exact rational evaluation of a template's arithmetic over the fill.
Rational answer_of(const SentenceTemplate& tmpl, const SlotFill& fill);

// Base-language (english) realization: tokens in template order plus aligned
// POS tags. NUM fills render as digit strings.
struct BaseRealization {
  std::vector<std::string> tokens;
  std::vector<Pos> tags;
};
BaseRealization realize_base(const SentenceTemplate& tmpl, const SlotFill& fill);

}  // namespace lift::synth
