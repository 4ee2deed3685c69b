#include "lift/synthlang/grammar.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace lift::synth {

const char* pos_name(Pos p) {
  switch (p) {
    case Pos::N: return "N";
    case Pos::V: return "V";
    case Pos::ADJ: return "ADJ";
    case Pos::ADV: return "ADV";
    case Pos::ADP: return "ADP";
    case Pos::PRON: return "PRON";
    case Pos::AUX: return "AUX";
    case Pos::CONJ: return "CONJ";
    case Pos::NUM: return "NUM";
    case Pos::PROPN: return "PROPN";
    case Pos::PUNCT: return "PUNCT";
  }
  return "?";
}

Pos pos_from_name(const std::string& name) {
  for (Pos p : {Pos::N, Pos::V, Pos::ADJ, Pos::ADV, Pos::ADP, Pos::PRON, Pos::AUX, Pos::CONJ,
                Pos::NUM, Pos::PROPN, Pos::PUNCT}) {
    if (name == pos_name(p)) return p;
  }
  throw ValueError("unknown POS tag: " + name);
}

Rational::Rational(int64_t n, int64_t d) : num(n), den(d) {
  if (den == 0) throw ValueError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}
Rational Rational::operator-(const Rational& o) const {
  return Rational(num * o.den - o.num * den, den * o.den);
}
Rational Rational::operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }
Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw ValueError("division by zero");
  return Rational(num * o.den, den * o.num);
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

int SentenceTemplate::n_slots(Pos p) const {
  int mx = -1;
  for (const Sentence& s : sentences)
    for (const Segment& seg : s)
      for (const TemplateToken& t : seg.tokens)
        if (t.is_slot() && t.pos == p) mx = std::max(mx, t.slot);
  return mx + 1;
}

const std::string& SlotFill::word(Pos p, int slot) const {
  auto it = words.find({static_cast<int>(p), slot});
  if (it == words.end()) throw ConfigError("template slot not filled");
  return it->second;
}

std::vector<std::string> GrammarSpec::content_words() const {
  std::vector<std::string> out;
  for (const auto& [pos, list] : content_vocab) {
    (void)pos;
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

const SentenceTemplate& GrammarSpec::find_template(const std::string& id) const {
  for (const auto& t : templates)
    if (t.id == id) return t;
  throw ValueError("unknown template: " + id);
}

std::vector<const SentenceTemplate*> GrammarSpec::statement_templates() const {
  std::vector<const SentenceTemplate*> out;
  for (const auto& t : templates)
    if (!t.is_problem) out.push_back(&t);
  return out;
}

std::vector<const SentenceTemplate*> GrammarSpec::problem_templates() const {
  std::vector<const SentenceTemplate*> out;
  for (const auto& t : templates)
    if (t.is_problem) out.push_back(&t);
  return out;
}

namespace {

using TT = TemplateToken;

Segment seg(Role r, std::vector<TT> toks) { return Segment{r, std::move(toks)}; }

TT w(Pos p, const char* word) { return TT::lit(p, word); }
TT name(int i) { return TT::fill(Pos::PROPN, i); }
TT noun(int i) { return TT::fill(Pos::N, i); }
TT num(int i) { return TT::fill(Pos::NUM, i); }

Sentence question_have(int obj, int who) {
  return {seg(Role::F, {w(Pos::ADV, "how"), w(Pos::ADJ, "many"), noun(obj)}),
          seg(Role::V, {w(Pos::AUX, "does")}), seg(Role::S, {name(who)}),
          seg(Role::O, {w(Pos::V, "have"), w(Pos::ADV, "now")}),
          seg(Role::F, {w(Pos::PUNCT, "?")})};
}

Sentence stmt_has(int who, int n, int obj) {
  return {seg(Role::S, {name(who)}), seg(Role::V, {w(Pos::V, "has")}),
          seg(Role::O, {num(n), noun(obj)}), seg(Role::F, {w(Pos::PUNCT, ".")})};
}

GrammarSpec build_default_grammar() {
  GrammarSpec g;
  g.content_vocab[Pos::N] = {"apples", "books", "coins", "pens",    "cards", "stones", "shells",
                             "balls",  "cakes", "hats",  "keys",    "maps",  "nuts",   "eggs",
                             "cups",   "boxes", "stars", "rings",   "seeds", "toys",   "plums",
                             "socks",  "kites", "bags",  "friends", "packs", "jars",   "shelves",
                             "friend"};
  g.content_vocab[Pos::V] = {"has",   "have",  "gets",  "get",   "gives", "buys",   "sells",
                             "finds", "loses", "eats",  "makes", "takes", "keeps",  "wins",
                             "needs", "counts", "shares"};
  g.content_vocab[Pos::ADJ] = {"red",   "blue",  "green", "small", "big",  "old", "new",
                               "shiny", "round", "flat",  "many",  "more", "each"};
  g.content_vocab[Pos::ADV] = {"now", "today", "still", "also", "again", "later", "how", "then"};
  g.content_vocab[Pos::ADP] = {"to", "from", "with", "in", "on", "at", "for", "of"};
  g.content_vocab[Pos::PRON] = {"she", "he", "they", "it", "we", "you"};
  g.content_vocab[Pos::AUX] = {"does", "do", "is", "are", "did"};
  g.content_vocab[Pos::CONJ] = {"and", "but", "or", "so"};
  g.name_list = {"ana", "ben", "caro", "dan", "eva", "finn", "gia", "hugo", "ida", "jon", "kira",
                 "leo"};
  g.stop_list = {".", "?"};

  auto dot = seg(Role::F, {w(Pos::PUNCT, ".")});
  auto qm = seg(Role::F, {w(Pos::PUNCT, "?")});

  // Statement templates: the monolingual corpus and code-switch source pool.
  {
    SentenceTemplate t;
    t.id = "s_has_adj";
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "has")}),
                    seg(Role::O, {num(0), TT::fill(Pos::ADJ, 0), noun(0)}), dot}};
    t.num_slots = {{2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_verb_to";
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {TT::fill(Pos::V, 0)}),
                    seg(Role::O, {num(0), noun(0)}),
                    seg(Role::F, {TT::fill(Pos::ADP, 0), name(1)}), dot}};
    t.num_slots = {{2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_pron_adv";
    t.sentences = {{seg(Role::S, {TT::fill(Pos::PRON, 0)}), seg(Role::V, {TT::fill(Pos::V, 0)}),
                    seg(Role::O, {noun(0), TT::fill(Pos::ADV, 0)}), dot}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_conj_pair";
    t.sentences = {{seg(Role::S, {name(0), TT::fill(Pos::CONJ, 0), name(1)}),
                    seg(Role::V, {TT::fill(Pos::V, 0)}), seg(Role::O, {num(0), noun(0)}), dot}};
    t.num_slots = {{2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_copula";
    t.sentences = {
        {seg(Role::S, {TT::fill(Pos::PRON, 0)}), seg(Role::V, {TT::fill(Pos::AUX, 0)}),
         seg(Role::O, {TT::fill(Pos::ADJ, 0), TT::fill(Pos::CONJ, 0), TT::fill(Pos::ADJ, 1)}),
         dot}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_question";
    t.sentences = {{seg(Role::F, {w(Pos::ADV, "how"), w(Pos::ADJ, "many"), noun(0)}),
                    seg(Role::V, {TT::fill(Pos::AUX, 0)}), seg(Role::S, {name(0)}),
                    seg(Role::O, {TT::fill(Pos::V, 0)}), qm}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_adp_obj";
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {TT::fill(Pos::V, 0)}),
                    seg(Role::O, {num(0), noun(0)}),
                    seg(Role::F, {TT::fill(Pos::ADP, 0), noun(1)}), dot}};
    t.num_slots = {{2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_pron_num";
    t.sentences = {{seg(Role::S, {TT::fill(Pos::PRON, 0)}), seg(Role::V, {TT::fill(Pos::V, 0)}),
                    seg(Role::O, {num(0), noun(0)}), seg(Role::F, {TT::fill(Pos::ADV, 0)}), dot}};
    t.num_slots = {{2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_aux_adv";
    t.sentences = {
        {seg(Role::S, {name(0)}),
         seg(Role::V, {TT::fill(Pos::AUX, 0), TT::fill(Pos::ADV, 0), TT::fill(Pos::V, 0)}),
         seg(Role::O, {noun(0)}), dot}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "s_two_obj";
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {TT::fill(Pos::V, 0)}),
                    seg(Role::O, {TT::fill(Pos::ADJ, 0), noun(0), TT::fill(Pos::CONJ, 0),
                                  TT::fill(Pos::ADJ, 1), noun(1)}),
                    dot}};
    g.templates.push_back(t);
  }

  // Problem templates. Arithmetic operands reference NUM slots (>= 0) or a
  // previous step's result (-1 for step 0, -2 for step 1, ...).
  {
    SentenceTemplate t;
    t.id = "p_add";
    t.is_problem = true;
    t.sentences = {stmt_has(0, 0, 0),
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "gets")}),
                    seg(Role::O, {num(1), w(Pos::ADJ, "more"), noun(0)}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'+', 0, 1}};
    t.num_slots = {{2, 15, -1, -1}, {2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_give";
    t.is_problem = true;
    t.sentences = {stmt_has(0, 0, 0),
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "gives")}),
                    seg(Role::O, {num(1), noun(0)}), seg(Role::F, {w(Pos::ADP, "to"), name(1)}),
                    dot},
                   question_have(0, 0)};
    t.arithmetic = {{'-', 0, 1}};
    t.num_slots = {{2, 15, -1, -1}, {2, 15, -1, 0}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_eat";
    t.is_problem = true;
    t.sentences = {stmt_has(0, 0, 0),
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "eats")}),
                    seg(Role::O, {num(1), noun(0)}), seg(Role::F, {w(Pos::ADV, "later")}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'-', 0, 1}};
    t.num_slots = {{2, 15, -1, -1}, {2, 15, -1, 0}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_mul";
    t.is_problem = true;
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "has")}),
                    seg(Role::O, {num(0), w(Pos::N, "bags")}),
                    seg(Role::F, {w(Pos::ADP, "with"), num(1), noun(0), w(Pos::ADJ, "each")}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'*', 0, 1}};
    t.num_slots = {{2, 9, -1, -1}, {2, 5, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_share";
    t.is_problem = true;
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "shares")}),
                    seg(Role::O, {num(0), noun(0)}),
                    seg(Role::F, {w(Pos::ADP, "with"), num(1), w(Pos::N, "friends")}), dot},
                   {seg(Role::F, {w(Pos::ADV, "how"), w(Pos::ADJ, "many"), noun(0)}),
                    seg(Role::V, {w(Pos::AUX, "does")}),
                    seg(Role::S, {w(Pos::ADJ, "each"), w(Pos::N, "friend")}),
                    seg(Role::O, {w(Pos::V, "get")}), qm}};
    t.arithmetic = {{'/', 0, 1}};
    // slot 0 is a multiple of slot 1; its lo/hi give the quotient range
    t.num_slots = {{2, 8, 1, -1}, {2, 6, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_add_sub";
    t.is_problem = true;
    t.sentences = {stmt_has(0, 0, 0),
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "gets")}),
                    seg(Role::O, {num(1), w(Pos::ADJ, "more"), noun(0)}), dot},
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "loses")}),
                    seg(Role::O, {num(2), noun(0)}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'+', 0, 1}, {'-', -1, 2}};
    t.num_slots = {{2, 15, -1, -1}, {2, 15, -1, -1}, {2, 15, -1, 0}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_sub_add";
    t.is_problem = true;
    t.sentences = {stmt_has(0, 0, 0),
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "gives")}),
                    seg(Role::O, {num(1), noun(0)}), seg(Role::F, {w(Pos::ADP, "to"), name(1)}),
                    dot},
                   {seg(Role::F, {w(Pos::ADV, "then")}), seg(Role::S, {name(0)}),
                    seg(Role::V, {w(Pos::V, "finds")}),
                    seg(Role::O, {num(2), w(Pos::ADJ, "more"), noun(0)}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'-', 0, 1}, {'+', -1, 2}};
    t.num_slots = {{2, 15, -1, -1}, {2, 15, -1, 0}, {2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  {
    SentenceTemplate t;
    t.id = "p_mul_add";
    t.is_problem = true;
    t.sentences = {{seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "has")}),
                    seg(Role::O, {num(0), w(Pos::N, "bags")}),
                    seg(Role::F, {w(Pos::ADP, "with"), num(1), noun(0), w(Pos::ADJ, "each")}), dot},
                   {seg(Role::S, {name(0)}), seg(Role::V, {w(Pos::V, "finds")}),
                    seg(Role::O, {num(2), w(Pos::ADJ, "more"), noun(0)}), dot},
                   question_have(0, 0)};
    t.arithmetic = {{'*', 0, 1}, {'+', -1, 2}};
    t.num_slots = {{2, 9, -1, -1}, {2, 5, -1, -1}, {2, 15, -1, -1}};
    g.templates.push_back(t);
  }
  return g;
}

}  // namespace

const GrammarSpec& default_grammar() {
  static const GrammarSpec g = build_default_grammar();
  return g;
}

Rational answer_of(const SentenceTemplate& tmpl, const SlotFill& fill) {
  if (tmpl.arithmetic.empty()) throw ValueError("template has no arithmetic");
  std::vector<Rational> results;
  auto operand = [&](int ref) -> Rational {
    if (ref >= 0) {
      if (ref >= static_cast<int>(fill.numbers.size())) throw ConfigError("missing NUM slot");
      return Rational(fill.numbers[ref]);
    }
    int k = -ref - 1;
    if (k >= static_cast<int>(results.size())) throw ConfigError("arithmetic references later step");
    return results[k];
  };
  for (const ArithStep& s : tmpl.arithmetic) {
    Rational a = operand(s.lhs), b = operand(s.rhs);
    switch (s.op) {
      case '+': results.push_back(a + b); break;
      case '-': results.push_back(a - b); break;
      case '*': results.push_back(a * b); break;
      case '/': results.push_back(a / b); break;
      default: throw ValueError("unknown arithmetic op");
    }
  }
  return results.back();
}

BaseRealization realize_base(const SentenceTemplate& tmpl, const SlotFill& fill) {
  BaseRealization out;
  for (const Sentence& s : tmpl.sentences) {
    for (const Segment& segm : s) {
      for (const TemplateToken& t : segm.tokens) {
        if (!t.is_slot()) {
          out.tokens.push_back(t.literal);
        } else if (t.pos == Pos::NUM) {
          if (t.slot >= static_cast<int>(fill.numbers.size()))
            throw ConfigError("template slot not filled");
          out.tokens.push_back(std::to_string(fill.numbers[t.slot]));
        } else {
          out.tokens.push_back(fill.word(t.pos, t.slot));
        }
        out.tags.push_back(t.pos);
      }
    }
  }
  return out;
}

}  // namespace lift::synth
