#include "lift/model/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace lift::model {

using synth::GrammarSpec;
using synth::LanguageSpec;
using synth::Pos;

int Vocab::add(const std::string& tok) {
  auto it = ids.find(tok);
  if (it != ids.end()) return it->second;
  int id = static_cast<int>(tokens.size());
  tokens.push_back(tok);
  ids.emplace(tok, id);
  return id;
}

int Vocab::id_or_unk(const std::string& tok) const {
  auto it = ids.find(tok);
  return it == ids.end() ? unk : it->second;
}

int Vocab::id_or_throw(const std::string& tok) const {
  auto it = ids.find(tok);
  if (it == ids.end()) throw IndexError("token not in vocabulary: " + tok);
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw IndexError("token id out of range");
  return tokens[id];
}

namespace {

const char* kDigits[] = {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
const char* kPunct[] = {".", "?", ":", ",", "(", ")"};
const char* kOps[] = {"+", "-", "*", "/", "=", "\\boxed{", "}"};
const char* kPromptWords[] = {"translate", "the", "following", "code-switched", "sentence",
                              "from",      "to",  "pure",      "solve",         "math",
                              "problem",   "make", "sure",     "put",           "answer",
                              "and",       "only", "inside"};

void add_shared(Vocab& v) {
  for (const char* d : kDigits) v.add(d);
  for (const char* p : kPunct) v.add(p);
}

}  // namespace

Vocab build_encoder_vocab(const GrammarSpec& grammar, const std::vector<LanguageSpec>& langs) {
  Vocab v;
  v.pad = v.add("<pad>");
  v.unk = v.add("<unk>");
  v.mask = v.add("<mask>");
  add_shared(v);
  std::set<std::string> surfaces;
  for (const auto& lang : langs) {
    for (const auto& [pos, words] : grammar.content_vocab) {
      for (const auto& w : words) surfaces.insert(synth::surface_form(lang, w, pos));
    }
    for (const auto& n : grammar.name_list) {
      surfaces.insert(synth::surface_form(lang, n, Pos::PROPN));
    }
  }
  for (const auto& s : surfaces) v.add(s);
  return v;
}

Vocab build_decoder_vocab(const GrammarSpec& grammar, const std::vector<LanguageSpec>& langs) {
  Vocab v;
  v.pad = v.add("<pad>");
  v.unk = v.add("<unk>");
  v.bos = v.add("<bos>");
  v.eos = v.add("<eos>");
  v.enc_start = v.add("<enc_start>");
  v.enc_end = v.add("<enc_end>");
  add_shared(v);
  for (const char* o : kOps) v.add(o);
  for (const char* w : kPromptWords) v.add(w);
  for (const auto& [pos, words] : grammar.content_vocab) {
    (void)pos;
    for (const auto& w : words) v.add(w);
  }
  for (const auto& n : grammar.name_list) v.add(n);
  for (const auto& lang : langs) v.add(lang.id);
  return v;
}

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_punct_char(char c) {
  for (const char* p : kPunct)
    if (c == p[0]) return true;
  return false;
}

void emit_piece(const std::string& piece, std::vector<std::string>& out);

void emit_word(const std::string& word, std::vector<std::string>& out) {
  if (word.empty()) return;
  if (all_digits(word)) {
    for (char c : word) out.push_back(std::string(1, c));
    return;
  }
  if (word.rfind("\\boxed{", 0) == 0) {
    out.push_back("\\boxed{");
    std::string inner = word.substr(7);
    if (!inner.empty() && inner.back() == '}') {
      inner.pop_back();
      emit_piece(inner, out);
      out.push_back("}");
    } else {
      emit_piece(inner, out);
    }
    return;
  }
  std::string lower = word;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  out.push_back(lower);
}

void emit_piece(const std::string& piece, std::vector<std::string>& out) {
  if (piece.empty()) return;
  size_t b = 0, e = piece.size();
  std::vector<std::string> lead, trail;
  while (b < e && is_punct_char(piece[b]) && piece.compare(b, 7, "\\boxed{") != 0) {
    lead.push_back(std::string(1, piece[b]));
    ++b;
  }
  while (e > b && is_punct_char(piece[e - 1])) {
    // keep the closing brace of \boxed{...} attached; it is peeled in emit_word
    trail.push_back(std::string(1, piece[e - 1]));
    --e;
  }
  std::string core = piece.substr(b, e - b);
  // "}"-terminated boxed cores keep their brace
  for (auto& t : lead) out.push_back(std::move(t));
  emit_word(core, out);
  for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.push_back(std::move(*it));
}

}  // namespace

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  std::string piece;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      emit_piece(piece, out);
      piece.clear();
    } else {
      piece += c;
    }
  }
  emit_piece(piece, out);
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool in_box = false;
  bool prev_digit = false;
  for (const auto& t : tokens) {
    bool digit = t.size() == 1 && std::isdigit(static_cast<unsigned char>(t[0]));
    bool attach = in_box || (digit && prev_digit) || (t.size() == 1 && is_punct_char(t[0])) ||
                  t == "}";
    if (!out.empty() && !attach) out += ' ';
    out += t;
    if (t == "\\boxed{") in_box = true;
    if (t == "}") in_box = false;
    prev_digit = digit;
  }
  return out;
}

std::vector<int> encode_tokens(const Vocab& v, const std::vector<std::string>& words) {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(v.id_or_unk(w));
  return ids;
}

std::string translate_prompt(const std::string& src_label, const std::string& tgt_label,
                             const std::string& sentence) {
  return "Translate the following code-switched sentence from " + src_label + " to pure " +
         tgt_label + ":\n" + src_label + ": " + sentence + "\n" + tgt_label + ":";
}

std::string translate_prefix(const std::string& src_label, const std::string& tgt_label) {
  return "Translate the following code-switched sentence from " + src_label + " to pure " +
         tgt_label + ":\n" + src_label + ":";
}

std::string math_prompt(const std::string& problem) {
  return "Solve the following math problem. Make sure to put the answer (and only the answer) "
         "inside \\boxed{}.\n\n" +
         problem;
}

std::string math_prefix() {
  return "Solve the following math problem. Make sure to put the answer (and only the answer) "
         "inside \\boxed{}.";
}

}  // namespace lift::model
