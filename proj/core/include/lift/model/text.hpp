#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lift/synthlang/language.hpp"

namespace lift::model {

// Word-level vocabulary with reserved specials. The encoder vocabulary covers
// every synthetic surface form; the decoder vocabulary is english-only plus
// digits, operators and prompt scaffolding.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> ids;
  int pad = 0;
  int unk = 1;
  int mask = -1;       // encoder only
  int bos = -1;        // decoder only
  int eos = -1;
  int enc_start = -1;  // reserved ids; embeddings live in the alignment group
  int enc_end = -1;

  int size() const { return static_cast<int>(tokens.size()); }
  int add(const std::string& tok);
  int id_or_unk(const std::string& tok) const;
  int id_or_throw(const std::string& tok) const;
  const std::string& token(int id) const;
};

Vocab build_encoder_vocab(const synth::GrammarSpec& grammar,
                          const std::vector<synth::LanguageSpec>& langs);
Vocab build_decoder_vocab(const synth::GrammarSpec& grammar,
                          const std::vector<synth::LanguageSpec>& langs);

// Deterministic word tokenizer: whitespace split, punctuation peeled,
// digit strings split per digit, \boxed{...} split into marker tokens,
// everything lowercased.
std::vector<std::string> tokenize_text(const std::string& text);

// Inverse for display: digit runs fuse, \boxed{...} fuses, punctuation
// attaches to the preceding word.
std::string detokenize(const std::vector<std::string>& tokens);

std::vector<int> encode_tokens(const Vocab& v, const std::vector<std::string>& words);

// Instruction templates. The *_prompt forms are the byte-exact dataset
// strings; the *_prefix forms are the instruction context fed to the decoder
// when the content travels through the encoder instead.
std::string translate_prompt(const std::string& src_label, const std::string& tgt_label,
                             const std::string& sentence);
std::string translate_prefix(const std::string& src_label, const std::string& tgt_label);
std::string math_prompt(const std::string& problem);
std::string math_prefix();

}  // namespace lift::model
