#pragma once

#include <string>
#include <vector>

#include "lift/model/model.hpp"
#include "lift/model/text.hpp"

namespace lift::train {

// Greedy generation with the content routed through the encoder + alignment
// layer (the Eq-1 splice). `instruction` is the decoder-side prefix.
template <typename T>
std::string solve_via_encoder(const lift::model::LiftModel<T>& m, const lift::model::Vocab& ev,
                              const lift::model::Vocab& dv, const std::string& instruction,
                              const std::string& content, int max_new_tokens = 32) {
  auto enc_ids = lift::model::encode_tokens(ev, lift::model::tokenize_text(content));
  auto q_ids = lift::model::encode_tokens(dv, lift::model::tokenize_text(instruction));
  auto ids = m.generate_greedy(
      [&](lift::model::Binder<T>& b) {
        auto X = m.encode(b, enc_ids);
        auto Xh = m.align(b, X);
        auto Q = m.embed_instruction(b, q_ids);
        return m.splice(b, Q, Xh);
      },
      max_new_tokens);
  std::vector<std::string> words;
  for (int id : ids) {
    if (id == m.config().eos_id) break;
    words.push_back(dv.token(id));
  }
  return lift::model::detokenize(words);
}

// Greedy generation with everything through the decoder's token embeddings.
template <typename T>
std::string solve_via_tokens(const lift::model::LiftModel<T>& m, const lift::model::Vocab& dv,
                             const std::string& full_prompt, int max_new_tokens = 32) {
  auto p_ids = lift::model::encode_tokens(dv, lift::model::tokenize_text(full_prompt));
  std::vector<int> ctx_ids;
  ctx_ids.push_back(m.config().bos_id);
  ctx_ids.insert(ctx_ids.end(), p_ids.begin(), p_ids.end());
  auto ids = m.generate_greedy(
      [&](lift::model::Binder<T>& b) { return m.embed_instruction(b, ctx_ids); }, max_new_tokens);
  std::vector<std::string> words;
  for (int id : ids) {
    if (id == m.config().eos_id) break;
    words.push_back(dv.token(id));
  }
  return lift::model::detokenize(words);
}

// Mean-pooled representation of a text in the decoder's input space.
// Layer 0 is the alignment-layer output itself; layer k >= 1 pools the
// aligned segment after k decoder blocks over a minimal spliced input.
template <typename T>
std::vector<double> mean_pooled_representation(const lift::model::LiftModel<T>& m,
                                               const lift::model::Vocab& ev,
                                               const lift::model::Vocab& dv,
                                               const std::string& text, int layer = 0) {
  auto enc_ids = lift::model::encode_tokens(ev, lift::model::tokenize_text(text));
  lift::num::Graph<T> g;
  lift::model::Binder<T> b{&g, lift::model::TrainMask{}, nullptr};
  auto X = m.encode(b, enc_ids);
  auto Xh = m.align(b, X);
  int begin_row = 0;
  auto rows = Xh;
  if (layer > 0) {
    auto q_ids = lift::model::encode_tokens(dv, lift::model::tokenize_text(lift::model::math_prefix()));
    auto Q = m.embed_instruction(b, q_ids);
    lift::model::SpliceInfo info;
    auto spliced = m.splice(b, Q, Xh, &info);
    rows = m.decoder_hidden_at(b, spliced, layer);
    begin_row = info.enc_start_pos + 1;
  }
  const auto& v = g.value(rows);
  const int l_x = static_cast<int>(enc_ids.size());
  std::vector<double> out(v.cols(), 0.0);
  for (int i = 0; i < l_x; ++i)
    for (int j = 0; j < v.cols(); ++j) out[j] += static_cast<double>(v.at(begin_row + i, j));
  for (auto& x : out) x /= l_x;
  return out;
}

}  // namespace lift::train
