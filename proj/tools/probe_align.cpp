// Isolation probe: can the alignment MLP regress frozen-encoder word states
// onto the decoder's token embeddings? Bypasses the LM loss entirely.

#include <cstdio>
#include <map>

#include "lift/model/model.hpp"
#include "lift/model/text.hpp"
#include "lift/numcore/optimizer.hpp"
#include "lift/synthlang/corpus.hpp"
#include "lift/trainer/train.hpp"

using namespace lift;
using model::Binder;
using model::LiftModel;
using model::TrainMask;

int main() {
  synth::WorldConfig wc;
  wc.seed = 1;
  wc.n_high = 2;
  wc.n_medium = 1;
  wc.n_low = 1;
  wc.n_families = 2;
  wc.n_scripts = 2;
  const auto& g = synth::default_grammar();
  auto langs = synth::build_language_family(g, wc);
  auto ev = model::build_encoder_vocab(g, langs);
  auto dv = model::build_decoder_vocab(g, langs);

  model::ModelConfig mc;
  mc.enc_vocab = ev.size();
  mc.dec_vocab = dv.size();
  mc.max_seq = 160;
  LiftModel<float> m(mc, 42);

  // encoder pretrain (same budget as the calibration probe)
  std::vector<std::vector<int>> mlm;
  for (const auto& lang : langs) {
    auto c = synth::generate_monolingual_corpus(g, lang, 700, 900 + lang.family);
    for (const auto& s : c) mlm.push_back(model::encode_tokens(ev, s.tokens));
  }
  if (std::getenv("LIFT_PROBE_SKIP_TRAIN") == nullptr) {
    train::StageConfig ec;
    ec.trainable.encoder = true;
    ec.base_lr = 3e-3;
    ec.epochs = 20;
    ec.batch_size = 16;
    ec.grad_clip = 1.0;
    ec.seed = 12;
    auto er = train::train_mlm(m, mlm, ec);
    std::printf("encoder mlm loss %.3f -> %.3f\n", er.first_epoch_loss, er.last_epoch_loss);
  } else {
    std::printf("encoder left untrained\n");
  }

  // separability: per-surface mean states from two disjoint context pools
  // should be mutual nearest neighbors
  {
    auto rep_of = [&](uint64_t seed) {
      std::map<std::string, std::vector<double>> sums;
      std::map<std::string, int> counts;
      for (const auto& lang : langs) {
        auto corpus = synth::generate_monolingual_corpus(g, lang, 250, seed + lang.script);
        for (const auto& s : corpus) {
          auto ids = model::encode_tokens(ev, s.tokens);
          lift::num::Graph<float> gr;
          Binder<float> b{&gr, TrainMask{}, nullptr};
          auto h = gr.value(m.encode(b, ids));
          for (size_t i = 0; i < s.tokens.size(); ++i) {
            std::string key = lang.id + "/" + s.tokens[i];
            auto& acc = sums[key];
            if (acc.empty()) acc.assign(mc.d1, 0.0);
            for (int j = 0; j < mc.d1; ++j) acc[j] += h.at(static_cast<int>(i), j);
            counts[key] += 1;
          }
        }
      }
      for (auto& [k, acc] : sums)
        for (auto& v : acc) v /= counts[k];
      return sums;
    };
    auto A = rep_of(5000), B = rep_of(6000);
    int hits = 0, total = 0;
    for (const auto& [key, ra] : A) {
      if (!B.count(key)) continue;
      ++total;
      double best = 1e30;
      std::string arg;
      for (const auto& [kb, rb] : B) {
        double d = 0;
        for (int j = 0; j < mc.d1; ++j) d += (ra[j] - rb[j]) * (ra[j] - rb[j]);
        if (d < best) {
          best = d;
          arg = kb;
        }
      }
      if (arg == key) ++hits;
    }
    std::printf("encoder state separability (1-NN across context pools): %.3f (%d/%d)\n",
                static_cast<double>(hits) / total, hits, total);
  }

  // linear readout: per-occurrence hidden state -> english base word class
  {
    std::map<std::string, std::string> inv_all;  // lang/surface -> base
    for (const auto& lang : langs) {
      for (const auto& [pos, words] : g.content_vocab)
        for (const auto& w : words) inv_all[lang.id + "/" + synth::surface_form(lang, w, pos)] = w;
    }
    std::vector<std::pair<std::vector<float>, int>> occ;
    for (const auto& lang : langs) {
      auto corpus = synth::generate_monolingual_corpus(g, lang, 300, 7000 + lang.script);
      for (const auto& s : corpus) {
        auto ids = model::encode_tokens(ev, s.tokens);
        lift::num::Graph<float> gr;
        Binder<float> b{&gr, TrainMask{}, nullptr};
        auto h = gr.value(m.encode(b, ids));
        for (size_t i = 0; i < s.tokens.size(); ++i) {
          auto it = inv_all.find(lang.id + "/" + s.tokens[i]);
          if (it == inv_all.end()) continue;
          std::vector<float> row(mc.d1);
          for (int j = 0; j < mc.d1; ++j) row[j] = h.at(static_cast<int>(i), j);
          occ.push_back({std::move(row), dv.id_or_throw(it->second)});
        }
      }
    }
    lift::num::Rng rr(3);
    rr.shuffle(occ);
    size_t split = occ.size() * 4 / 5;
    lift::num::Tensor<float> W(mc.d1, dv.size());
    lift::num::Tensor<float> bias(1, dv.size());
    auto st = lift::num::make_adamw_state<float>({&W, &bias}, lift::num::AdamWConfig{});
    for (int step = 0; step < 400; ++step) {
      int bn = 256;
      lift::num::Tensor<float> X(bn, mc.d1);
      std::vector<int> y(bn);
      for (int k = 0; k < bn; ++k) {
        const auto& o = occ[rr.next_below(split)];
        for (int j = 0; j < mc.d1; ++j) X.at(k, j) = o.first[j];
        y[k] = o.second;
      }
      lift::num::Graph<float> gr;
      lift::num::Tensor<float> gw(mc.d1, dv.size()), gb(1, dv.size());
      auto wid = gr.param(W, &gw);
      auto bid = gr.param(bias, &gb);
      auto loss = gr.cross_entropy_mean(gr.add_bias(gr.matmul(gr.constant(X), wid), bid), y, -1);
      gr.backward(loss);
      lift::num::adamw_step<float>({&W, &bias}, {&gw, &gb}, st, 1e-2);
    }
    int hits = 0;
    for (size_t i = split; i < occ.size(); ++i) {
      double best = -1e30;
      int arg = -1;
      for (int v = 0; v < dv.size(); ++v) {
        double s = bias.at(0, v);
        for (int j = 0; j < mc.d1; ++j) s += occ[i].first[j] * W.at(j, v);
        if (s > best) {
          best = s;
          arg = v;
        }
      }
      if (arg == occ[i].second) ++hits;
    }
    std::printf("linear readout of english word from encoder state: %.3f (%d/%zu)\n",
                static_cast<double>(hits) / (occ.size() - split), hits, occ.size() - split);
  }

  // mean contextual encoder state per surface word, per language
  struct Pair {
    std::vector<float> rep;   // d1
    int target_id;            // decoder vocab id of the english base word
  };
  std::vector<Pair> pairs;
  for (const auto& lang : langs) {
    auto corpus = synth::generate_monolingual_corpus(g, lang, 400, 31 + lang.script);
    std::map<std::string, std::pair<std::vector<double>, int>> sums;
    for (const auto& s : corpus) {
      auto ids = model::encode_tokens(ev, s.tokens);
      lift::num::Graph<float> gr;
      Binder<float> b{&gr, TrainMask{}, nullptr};
      auto h = gr.value(m.encode(b, ids));
      for (size_t i = 0; i < s.tokens.size(); ++i) {
        auto& slot = sums[s.tokens[i]];
        if (slot.first.empty()) slot.first.assign(mc.d1, 0.0);
        for (int j = 0; j < mc.d1; ++j) slot.first[j] += h.at(static_cast<int>(i), j);
        slot.second += 1;
      }
    }
    // base word for each surface: invert the language's rendering
    std::map<std::string, std::string> inv;
    for (const auto& [pos, words] : g.content_vocab)
      for (const auto& w : words) inv[synth::surface_form(lang, w, pos)] = w;
    for (auto& [surface, acc] : sums) {
      auto it = inv.find(surface);
      if (it == inv.end()) continue;  // names, digits, punct
      Pair p;
      p.rep.resize(mc.d1);
      for (int j = 0; j < mc.d1; ++j) p.rep[j] = static_cast<float>(acc.first[j] / acc.second);
      p.target_id = dv.id_or_throw(it->second);
      pairs.push_back(std::move(p));
    }
  }
  std::printf("regression pairs: %zu\n", pairs.size());

  // train align params on MSE to the (random-init, fixed) decoder embeddings
  auto theta = m.store().in_group(model::Group::align);
  std::vector<lift::num::Tensor<float>*> vals;
  std::vector<lift::num::Tensor<float>*> grads;
  for (auto* p : theta) {
    if (p->name.rfind("align.proj", 0) == 0) {
      vals.push_back(&p->value);
      grads.push_back(&p->grad);
    }
  }
  auto opt = lift::num::make_adamw_state<float>(vals, lift::num::AdamWConfig{});
  const auto& emb = m.store().find("decoder.tok")->value;

  lift::num::Rng order_rng(5);
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int step = 0; step < 600; ++step) {
    order_rng.shuffle(order);
    int bn = 32;
    lift::num::Tensor<float> X(bn, mc.d1), Y(bn, mc.d2);
    for (int k = 0; k < bn; ++k) {
      const Pair& p = pairs[order[k % order.size()]];
      for (int j = 0; j < mc.d1; ++j) X.at(k, j) = p.rep[j];
      for (int j = 0; j < mc.d2; ++j) Y.at(k, j) = emb.at(p.target_id, j);
    }
    lift::num::Graph<float> gr;
    std::vector<lift::num::Tensor<float>> sinks(m.store().size());
    for (size_t i = 0; i < m.store().size(); ++i) {
      const auto& p = m.store().at(i);
      if (p.group == model::Group::align)
        sinks[i] = lift::num::Tensor<float>(p.value.rows(), p.value.cols());
    }
    TrainMask mask;
    mask.align = true;
    Binder<float> b{&gr, mask, &sinks};
    auto xhat = m.align(b, gr.constant(X));
    auto diff = gr.add(xhat, gr.scale(gr.constant(Y), -1.0f));
    auto loss = gr.mean_all(gr.mul(diff, diff));
    gr.backward(loss);
    std::vector<const lift::num::Tensor<float>*> gptrs;
    for (auto* p : theta)
      if (p->name.rfind("align.proj", 0) == 0) gptrs.push_back(&sinks[p->index]);
    lift::num::adamw_step<float>(vals, gptrs, opt, 3e-3);
    if (step % 200 == 0) std::printf("  step %d mse %.5f\n", step, gr.value(loss).item());
  }

  // retrieval: nearest decoder embedding of align(rep) == target?
  int hits = 0;
  for (const Pair& p : pairs) {
    lift::num::Graph<float> gr;
    Binder<float> b{&gr, TrainMask{}, nullptr};
    lift::num::Tensor<float> x(1, mc.d1);
    for (int j = 0; j < mc.d1; ++j) x.at(0, j) = p.rep[j];
    auto y = gr.value(m.align(b, gr.constant(x)));
    double best = 1e30;
    int arg = -1;
    for (int v = 0; v < emb.rows(); ++v) {
      double d = 0;
      for (int j = 0; j < mc.d2; ++j) {
        double diff = y.at(0, j) - emb.at(v, j);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        arg = v;
      }
    }
    if (arg == p.target_id) ++hits;
  }
  std::printf("word-level retrieval through align: %.3f (%d/%zu)\n",
              static_cast<double>(hits) / pairs.size(), hits, pairs.size());
  return 0;
}
