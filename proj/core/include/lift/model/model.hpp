#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lift/model/config.hpp"
#include "lift/model/params.hpp"
#include "lift/numcore/graph.hpp"

namespace lift::model {

// Which parameter groups receive gradients in the current pass.
struct TrainMask {
  bool align = false;
  bool encoder = false;
  bool decoder = false;

  bool on(Group g) const {
    switch (g) {
      case Group::align: return align;
      case Group::encoder: return encoder;
      case Group::decoder: return decoder;
    }
    return false;
  }
};

// Binds model parameters into one tape. Gradients of trainable groups flow
// into `sinks` (usually the parameters' own grad buffers; training lanes pass
// shadow buffers instead). Frozen groups never materialize gradients.
template <typename T>
struct Binder {
  lift::num::Graph<T>* g = nullptr;
  TrainMask mask;
  std::vector<lift::num::Tensor<T>>* sinks = nullptr;  // indexed by Parameter::index

  int use(const Parameter<T>& p) const {
    lift::num::Tensor<T>* sink = nullptr;
    if (mask.on(p.group) && sinks != nullptr) sink = &(*sinks)[p.index];
    return g->param(p.value, sink);
  }
};

// Layout of the spliced decoder input [<bos>; Q; <enc_start>; X_hat; <enc_end>].
struct SpliceInfo {
  int l_q = 0;
  int l_x = 0;
  int bos_pos = 0;
  int enc_start_pos = 0;
  int enc_end_pos = 0;
  int total_len = 0;

  static SpliceInfo of(int l_q, int l_x) {
    SpliceInfo s;
    s.l_q = l_q;
    s.l_x = l_x;
    s.bos_pos = 0;
    s.enc_start_pos = 1 + l_q;
    s.enc_end_pos = 1 + l_q + 1 + l_x;
    s.total_len = l_q + l_x + 3;
    return s;
  }
};

// Frozen-encoder + alignment-layer + decoder-LM stack over the tape.
template <typename T>
class LiftModel {
 public:
  using Var = typename lift::num::Graph<T>::VarId;

  LiftModel(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.enc_vocab <= 0 || cfg_.dec_vocab <= 0) {
      throw ConfigError("model needs vocabulary sizes");
    }
    lift::num::Rng rng(seed);
    build(rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }

  // --- encoder ------------------------------------------------------------

  // Hidden states of the frozen multilingual encoder, one row per token.
  Var encode(const Binder<T>& b, const std::vector<int>& enc_ids) const {
    if (enc_ids.empty()) throw ValueError("encode: empty input");
    check_len(static_cast<int>(enc_ids.size()));
    Var x = embed(b, *enc_tok_, *enc_pos_, enc_ids, 0);
    for (const auto& layer : enc_layers_) x = block(b, layer, x, /*causal=*/false, cfg_.enc_heads);
    return ln(b, *enc_lnf_g_, *enc_lnf_b_, x);
  }

  // Masked-token prediction logits (encoder pretraining head).
  Var encoder_mlm_logits(const Binder<T>& b, const std::vector<int>& enc_ids) const {
    Var h = encode(b, enc_ids);
    return b.g->add_bias(b.g->matmul(h, b.use(*enc_head_w_)), b.use(*enc_head_b_));
  }

  // --- alignment ----------------------------------------------------------

  // Position-wise map from encoder space (d1) to decoder embedding space (d2).
  Var align(const Binder<T>& b, Var X) const {
    if (b.g->value(X).cols() != cfg_.d1) throw ShapeError("align: input width != d1");
    Var h = b.g->add_bias(b.g->matmul(X, b.use(*align_w_[0])), b.use(*align_b_[0]));
    for (size_t i = 1; i < align_w_.size(); ++i) {
      h = b.g->add_bias(b.g->matmul(b.g->gelu(h), b.use(*align_w_[i])), b.use(*align_b_[i]));
    }
    return h;
  }

  // --- decoder ------------------------------------------------------------

  Var embed_instruction(const Binder<T>& b, const std::vector<int>& dec_ids) const {
    if (dec_ids.empty()) throw ValueError("embed_instruction: empty input");
    return b.g->embedding_rows(b.use(*dec_tok_), dec_ids);
  }

  // Eq-1-shaped input: [<bos>; Q; <enc_start>; X_hat; <enc_end>]. Boundary
  // rows come from the alignment group, <bos> from the decoder table.
  Var splice(const Binder<T>& b, Var Q, Var Xhat, SpliceInfo* info = nullptr) const {
    const int l_q = b.g->value(Q).rows();
    const int l_x = b.g->value(Xhat).rows();
    if (l_q < 1 || l_x < 1) throw ShapeError("splice: empty segment");
    if (b.g->value(Q).cols() != cfg_.d2 || b.g->value(Xhat).cols() != cfg_.d2) {
      throw ShapeError("splice: segment width != d2");
    }
    Var bos = b.g->embedding_rows(b.use(*dec_tok_), {cfg_.bos_id});
    Var out = b.g->concat_rows(
        {bos, Q, b.use(*boundary_start_), Xhat, b.use(*boundary_end_)});
    if (info != nullptr) *info = SpliceInfo::of(l_q, l_x);
    return out;
  }

  // Causal decoder forward over pre-assembled embedding rows; positions are
  // assigned by final sequence index.
  Var decoder_hidden(const Binder<T>& b, Var rows) const {
    const int len = b.g->value(rows).rows();
    check_len(len);
    std::vector<int> pos_ids(len);
    for (int i = 0; i < len; ++i) pos_ids[i] = i;
    Var x = b.g->add(rows, b.g->embedding_rows(b.use(*dec_pos_), pos_ids));
    for (const auto& layer : dec_layers_) x = block(b, layer, x, /*causal=*/true, cfg_.dec_heads);
    return ln(b, *dec_lnf_g_, *dec_lnf_b_, x);
  }

  Var decoder_logits(const Binder<T>& b, Var rows) const {
    Var h = decoder_hidden(b, rows);
    return b.g->add_bias(b.g->matmul(h, b.use(*dec_head_w_)), b.use(*dec_head_b_));
  }

  // Hidden states after the first `n_blocks` decoder blocks (no final norm).
  Var decoder_hidden_at(const Binder<T>& b, Var rows, int n_blocks) const {
    const int len = b.g->value(rows).rows();
    check_len(len);
    if (n_blocks < 0 || n_blocks > cfg_.dec_layers) throw ValueError("bad decoder layer index");
    std::vector<int> pos_ids(len);
    for (int i = 0; i < len; ++i) pos_ids[i] = i;
    Var x = b.g->add(rows, b.g->embedding_rows(b.use(*dec_pos_), pos_ids));
    for (int l = 0; l < n_blocks; ++l) x = block(b, dec_layers_[l], x, true, cfg_.dec_heads);
    return x;
  }

  // Teacher-forced mean NLL over response positions only.
  Var lm_loss(const Binder<T>& b, Var context_rows, const std::vector<int>& response_ids) const {
    if (response_ids.empty()) throw ValueError("lm_loss: empty response");
    const int ctx = b.g->value(context_rows).rows();
    const int total = ctx + static_cast<int>(response_ids.size());
    if (total > cfg_.max_seq) throw ValueError("lm_loss: sequence exceeds max length (truncation)");
    Var resp = b.g->embedding_rows(b.use(*dec_tok_), response_ids);
    Var rows = b.g->concat_rows({context_rows, resp});
    Var logits = decoder_logits(b, rows);
    // position p predicts token p+1; only response tokens carry loss
    std::vector<int> targets(total, kIgnore);
    for (size_t i = 0; i < response_ids.size(); ++i) targets[ctx - 1 + i] = response_ids[i];
    targets.pop_back();
    Var used = b.g->slice_rows(logits, 0, total - 1);
    return b.g->cross_entropy_mean(used, targets, kIgnore);
  }

  // Greedy decoding from pre-assembled context rows until <eos> or budget.
  std::vector<int> generate_greedy(const std::function<Var(Binder<T>&)>& context_builder,
                                   int max_new_tokens) const {
    if (max_new_tokens < 1) throw ValueError("generate: budget must be >= 1");
    std::vector<int> out;
    for (int step = 0; step < max_new_tokens; ++step) {
      lift::num::Graph<T> g;
      Binder<T> b{&g, TrainMask{}, nullptr};
      Var ctx = context_builder(b);
      Var rows = out.empty()
                     ? ctx
                     : g.concat_rows({ctx, g.embedding_rows(b.use(*dec_tok_), out)});
      if (g.value(rows).rows() >= cfg_.max_seq) break;
      Var logits = decoder_logits(b, rows);
      const auto& lv = g.value(logits);
      int best = 0;
      T best_v = lv.at(lv.rows() - 1, 0);
      for (int j = 1; j < lv.cols(); ++j) {
        if (lv.at(lv.rows() - 1, j) > best_v) {
          best_v = lv.at(lv.rows() - 1, j);
          best = j;
        }
      }
      out.push_back(best);
      if (best == cfg_.eos_id) break;
    }
    return out;
  }

  static constexpr int kIgnore = -100;

 private:
  struct Layer {
    Parameter<T>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    Parameter<T>*ln1_g, *ln1_b, *ln2_g, *ln2_b;
    Parameter<T>*mlp_w1, *mlp_b1, *mlp_w2, *mlp_b2;
  };

  void check_len(int len) const {
    if (len > cfg_.max_seq) throw ValueError("sequence exceeds max length");
  }

  Var embed(const Binder<T>& b, const Parameter<T>& tok, const Parameter<T>& pos,
            const std::vector<int>& ids, int pos_offset) const {
    std::vector<int> pos_ids(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) pos_ids[i] = static_cast<int>(i) + pos_offset;
    return b.g->add(b.g->embedding_rows(b.use(tok), ids),
                    b.g->embedding_rows(b.use(pos), pos_ids));
  }

  Var ln(const Binder<T>& b, const Parameter<T>& gain, const Parameter<T>& bias, Var x) const {
    return b.g->layer_norm(x, b.use(gain), b.use(bias));
  }

  Var attention(const Binder<T>& b, const Layer& L, Var x, bool causal, int d, int heads) const {
    auto* g = b.g;
    const int len = g->value(x).rows();
    const int dh = d / heads;
    Var q = g->add_bias(g->matmul(x, b.use(*L.wq)), b.use(*L.bq));
    Var k = g->add_bias(g->matmul(x, b.use(*L.wk)), b.use(*L.bk));
    Var v = g->add_bias(g->matmul(x, b.use(*L.wv)), b.use(*L.bv));
    Var mask = -1;
    if (causal && len > 1) {
      lift::num::Tensor<T> m(len, len);
      for (int i = 0; i < len; ++i)
        for (int j = i + 1; j < len; ++j) m.at(i, j) = T(-1e9);
      mask = g->constant(std::move(m));
    }
    std::vector<Var> heads_out;
    for (int h = 0; h < heads; ++h) {
      Var qh = g->slice_cols(q, h * dh, (h + 1) * dh);
      Var kh = g->slice_cols(k, h * dh, (h + 1) * dh);
      Var vh = g->slice_cols(v, h * dh, (h + 1) * dh);
      Var scores = g->scale(g->matmul(qh, g->transpose(kh)),
                            static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))));
      if (mask >= 0) scores = g->add(scores, mask);
      heads_out.push_back(g->matmul(g->softmax_rows(scores), vh));
    }
    Var cat = heads == 1 ? heads_out[0] : g->concat_cols(heads_out);
    return g->add_bias(g->matmul(cat, b.use(*L.wo)), b.use(*L.bo));
  }

  Var block(const Binder<T>& b, const Layer& L, Var x, bool causal, int heads) const {
    auto* g = b.g;
    const int d = g->value(x).cols();
    Var a = attention(b, L, ln(b, *L.ln1_g, *L.ln1_b, x), causal, d, heads);
    x = g->add(x, a);
    Var h = ln(b, *L.ln2_g, *L.ln2_b, x);
    h = g->add_bias(g->matmul(h, b.use(*L.mlp_w1)), b.use(*L.mlp_b1));
    h = g->add_bias(g->matmul(g->gelu(h), b.use(*L.mlp_w2)), b.use(*L.mlp_b2));
    return g->add(x, h);
  }

  Layer make_layer(Group grp, const std::string& prefix, int d, lift::num::Rng& rng) {
    Layer L;
    auto lin = [&](const std::string& n, int in, int out, double scale = 1.0) {
      auto w = init_fan_in<T>(in, out, rng);
      if (scale != 1.0) {
        for (auto& v : w.vec()) v = static_cast<T>(v * scale);
      }
      return &store_.add(grp, prefix + "." + n, std::move(w));
    };
    auto bias = [&](const std::string& n, int w) {
      return &store_.add(grp, prefix + "." + n, init_const<T>(1, w, T(0)));
    };
    // residual-branch output projections start near zero so a fresh block is
    // close to the identity and the token stream survives depth
    L.wq = lin("attn.wq", d, d);
    L.bq = bias("attn.bq", d);
    L.wk = lin("attn.wk", d, d);
    L.bk = bias("attn.bk", d);
    L.wv = lin("attn.wv", d, d);
    L.bv = bias("attn.bv", d);
    L.wo = lin("attn.wo", d, d, 0.1);
    L.bo = bias("attn.bo", d);
    L.ln1_g = &store_.add(grp, prefix + ".ln1.g", init_const<T>(1, d, T(1)));
    L.ln1_b = bias("ln1.b", d);
    L.ln2_g = &store_.add(grp, prefix + ".ln2.g", init_const<T>(1, d, T(1)));
    L.ln2_b = bias("ln2.b", d);
    L.mlp_w1 = lin("mlp.w1", d, 4 * d);
    L.mlp_b1 = bias("mlp.b1", 4 * d);
    L.mlp_w2 = lin("mlp.w2", 4 * d, d, 0.1);
    L.mlp_b2 = bias("mlp.b2", d);
    return L;
  }

  void build(lift::num::Rng& rng) {
    // encoder (psi)
    enc_tok_ = &store_.add(Group::encoder, "tok", init_normal<T>(cfg_.enc_vocab, cfg_.d1, rng));
    enc_pos_ = &store_.add(Group::encoder, "pos", init_normal<T>(cfg_.max_seq, cfg_.d1, rng));
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      enc_layers_.push_back(make_layer(Group::encoder, "layer" + std::to_string(l), cfg_.d1, rng));
    }
    enc_lnf_g_ = &store_.add(Group::encoder, "lnf.g", init_const<T>(1, cfg_.d1, T(1)));
    enc_lnf_b_ = &store_.add(Group::encoder, "lnf.b", init_const<T>(1, cfg_.d1, T(0)));
    enc_head_w_ =
        &store_.add(Group::encoder, "head.w", init_fan_in<T>(cfg_.d1, cfg_.enc_vocab, rng));
    enc_head_b_ = &store_.add(Group::encoder, "head.b", init_const<T>(1, cfg_.enc_vocab, T(0)));

    // alignment layer + boundary tokens (theta)
    int n_affine = cfg_.align_variant == AlignVariant::linear
                       ? 1
                       : (cfg_.align_variant == AlignVariant::mlp2 ? 2 : 3);
    for (int i = 0; i < n_affine; ++i) {
      int in = i == 0 ? cfg_.d1 : cfg_.align_hidden;
      int out = i == n_affine - 1 ? cfg_.d2 : cfg_.align_hidden;
      align_w_.push_back(
          &store_.add(Group::align, "proj" + std::to_string(i) + ".w", init_fan_in<T>(in, out, rng)));
      align_b_.push_back(
          &store_.add(Group::align, "proj" + std::to_string(i) + ".b", init_const<T>(1, out, T(0))));
    }
    boundary_start_ = &store_.add(Group::align, "enc_start", init_normal<T>(1, cfg_.d2, rng));
    boundary_end_ = &store_.add(Group::align, "enc_end", init_normal<T>(1, cfg_.d2, rng));

    // decoder (phi)
    dec_tok_ = &store_.add(Group::decoder, "tok", init_normal<T>(cfg_.dec_vocab, cfg_.d2, rng));
    dec_pos_ = &store_.add(Group::decoder, "pos", init_normal<T>(cfg_.max_seq, cfg_.d2, rng));
    for (int l = 0; l < cfg_.dec_layers; ++l) {
      dec_layers_.push_back(make_layer(Group::decoder, "layer" + std::to_string(l), cfg_.d2, rng));
    }
    dec_lnf_g_ = &store_.add(Group::decoder, "lnf.g", init_const<T>(1, cfg_.d2, T(1)));
    dec_lnf_b_ = &store_.add(Group::decoder, "lnf.b", init_const<T>(1, cfg_.d2, T(0)));
    dec_head_w_ =
        &store_.add(Group::decoder, "head.w", init_fan_in<T>(cfg_.d2, cfg_.dec_vocab, rng));
    dec_head_b_ = &store_.add(Group::decoder, "head.b", init_const<T>(1, cfg_.dec_vocab, T(0)));
  }

  ModelConfig cfg_;
  ParamStore<T> store_;
  Parameter<T>*enc_tok_, *enc_pos_, *enc_lnf_g_, *enc_lnf_b_, *enc_head_w_, *enc_head_b_;
  std::vector<Layer> enc_layers_;
  std::vector<Parameter<T>*> align_w_, align_b_;
  Parameter<T>*boundary_start_, *boundary_end_;
  Parameter<T>*dec_tok_, *dec_pos_, *dec_lnf_g_, *dec_lnf_b_, *dec_head_w_, *dec_head_b_;
  std::vector<Layer> dec_layers_;
};

}  // namespace lift::model
