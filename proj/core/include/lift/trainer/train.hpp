#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lift/model/model.hpp"
#include "lift/numcore/optimizer.hpp"
#include "lift/numcore/rng.hpp"
#include "lift/numcore/schedule.hpp"

namespace lift::train {

struct StageConfig {
  lift::model::TrainMask trainable;
  lift::num::ScheduleSpec::Kind schedule_kind = lift::num::ScheduleSpec::Kind::constant;
  double base_lr = 3e-3;
  double warmup_ratio = 0.0;
  double min_lr = 0.0;
  int epochs = 3;
  int batch_size = 16;
  double weight_decay = 0.0;
  double grad_clip = 0.0;  // 0 disables clipping
  uint64_t seed = 1;

  void validate() const {
    if (!trainable.align && !trainable.encoder && !trainable.decoder) {
      throw ConfigError("stage: trainable_groups must be nonempty");
    }
    if (batch_size < 1) throw ConfigError("stage: batch_size >= 1");
    if (epochs < 1) throw ConfigError("stage: epochs >= 1");
  }
};

// One supervised sequence. encoder_path routes the content through the
// frozen encoder + alignment layer (Eq-1 splice); otherwise prompt and
// response travel through the decoder's token embeddings.
struct TrainItem {
  bool encoder_path = false;
  std::vector<int> prompt_ids;    // decoder vocabulary (instruction context)
  std::vector<int> enc_ids;       // encoder vocabulary (spliced content)
  std::vector<int> response_ids;  // decoder vocabulary, ends with <eos>
};

struct LogEntry {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  std::vector<LogEntry> log;
  double first_epoch_loss = 0.0;
  double last_epoch_loss = 0.0;
};

namespace detail {

// Gradient accumulation runs in a fixed number of lanes so results do not
// depend on the machine's thread count: item i belongs to lane i % kLanes,
// lane buffers merge in lane order.
constexpr int kLanes = 4;

template <typename T>
using LossFn =
    std::function<typename lift::num::Graph<T>::VarId(int item_index, lift::model::Binder<T>&)>;

template <typename T>
TrainResult run_batches(lift::model::LiftModel<T>& model, int n_items, const StageConfig& cfg,
                        const LossFn<T>& item_loss) {
  cfg.validate();
  auto& store = model.store();

  std::vector<lift::num::Tensor<T>*> trainable;
  for (size_t i = 0; i < store.size(); ++i) {
    if (cfg.trainable.on(store.at(i).group)) trainable.push_back(&store.at(i).value);
  }
  std::vector<lift::num::Tensor<T>*> grads;
  for (size_t i = 0; i < store.size(); ++i) {
    if (cfg.trainable.on(store.at(i).group)) grads.push_back(&store.at(i).grad);
  }

  lift::num::AdamWConfig opt_cfg;
  opt_cfg.weight_decay = cfg.weight_decay;
  auto opt = lift::num::make_adamw_state<T>(trainable, opt_cfg);

  const int n_batches = (n_items + cfg.batch_size - 1) / cfg.batch_size;
  lift::num::ScheduleSpec sched;
  sched.kind = cfg.schedule_kind;
  sched.base_lr = cfg.base_lr;
  sched.warmup_ratio = cfg.warmup_ratio;
  sched.min_lr = cfg.min_lr;
  sched.total_steps = static_cast<int64_t>(cfg.epochs) * n_batches;
  lift::num::validate(sched);

  // lane shadows, allocated once for trainable parameters
  std::vector<std::vector<lift::num::Tensor<T>>> shadows(kLanes);
  for (int l = 0; l < kLanes; ++l) {
    shadows[l].resize(store.size());
    for (size_t i = 0; i < store.size(); ++i) {
      const auto& p = store.at(i);
      if (cfg.trainable.on(p.group)) {
        shadows[l][i] = lift::num::Tensor<T>(p.value.rows(), p.value.cols());
      }
    }
  }

  TrainResult result;
  std::vector<int> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    lift::num::Rng shuffle_rng(
        lift::num::derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int epoch_items = 0;
    for (int bstart = 0; bstart < n_items; bstart += cfg.batch_size) {
      const int bend = std::min(n_items, bstart + cfg.batch_size);
      const int bn = bend - bstart;
      double lane_loss[kLanes] = {0, 0, 0, 0};
      std::string lane_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1) num_threads(std::min(kLanes, omp_get_max_threads()))
#endif
      for (int lane = 0; lane < kLanes; ++lane) {
        for (int k = bstart + lane; k < bend; k += kLanes) {
          try {
            lift::num::Graph<T> g;
            lift::model::Binder<T> b{&g, cfg.trainable, &shadows[lane]};
            auto loss = item_loss(order[k], b);
            lane_loss[lane] += static_cast<double>(g.value(loss).item());
            g.backward(loss);
          } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (lane_error.empty()) lane_error = e.what();
          }
        }
      }
      if (!lane_error.empty()) throw NumericError("training failed: " + lane_error);

      // deterministic merge, mean over batch items
      const T inv = static_cast<T>(1.0 / bn);
      for (size_t i = 0; i < store.size(); ++i) {
        auto& p = store.at(i);
        if (!cfg.trainable.on(p.group)) continue;
        for (int lane = 0; lane < kLanes; ++lane) {
          auto& sh = shadows[lane][i];
          for (int64_t e = 0; e < sh.size(); ++e) p.grad.vec()[e] += sh.vec()[e] * inv;
          sh.fill(T(0));
        }
      }

      double batch_loss = (lane_loss[0] + lane_loss[1] + lane_loss[2] + lane_loss[3]) / bn;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("divergence: non-finite loss at step " + std::to_string(step) +
                           " (seed " + std::to_string(cfg.seed) + ")");
      }

      if (cfg.grad_clip > 0.0) {
        double sq = 0.0;
        for (auto* gr : grads)
          for (int64_t e = 0; e < gr->size(); ++e) {
            double v = static_cast<double>(gr->vec()[e]);
            sq += v * v;
          }
        double norm = std::sqrt(sq);
        if (norm > cfg.grad_clip) {
          T s = static_cast<T>(cfg.grad_clip / norm);
          for (auto* gr : grads)
            for (auto& v : gr->vec()) v *= s;
        }
      }

      double lr = lift::num::lr_at_step(sched, step);
      std::vector<const lift::num::Tensor<T>*> cgrads(grads.begin(), grads.end());
      lift::num::adamw_step<T>(trainable, cgrads, opt, lr);
      for (auto* gr : grads) gr->fill(T(0));

      result.log.push_back(LogEntry{step, lr, batch_loss});
      epoch_loss += batch_loss * bn;
      epoch_items += bn;
      ++step;
    }
    double mean = epoch_loss / epoch_items;
    if (epoch == 0) result.first_epoch_loss = mean;
    result.last_epoch_loss = mean;
  }
  return result;
}

}  // namespace detail

// Supervised LM training over spliced or token-path items.
template <typename T>
TrainResult train_lm(lift::model::LiftModel<T>& model, const std::vector<TrainItem>& items,
                     const StageConfig& cfg) {
  if (items.empty()) throw ValueError("train_lm: empty dataset");
  const auto& mc = model.config();
  detail::LossFn<T> fn = [&](int idx, lift::model::Binder<T>& b) {
    const TrainItem& it = items[idx];
    typename lift::num::Graph<T>::VarId ctx;
    if (it.encoder_path) {
      auto X = model.encode(b, it.enc_ids);
      auto Xh = model.align(b, X);
      auto Q = model.embed_instruction(b, it.prompt_ids);
      ctx = model.splice(b, Q, Xh);
    } else {
      std::vector<int> ids;
      ids.reserve(it.prompt_ids.size() + 1);
      ids.push_back(mc.bos_id);
      ids.insert(ids.end(), it.prompt_ids.begin(), it.prompt_ids.end());
      ctx = model.embed_instruction(b, ids);
    }
    return model.lm_loss(b, ctx, it.response_ids);
  };
  return detail::run_batches(model, static_cast<int>(items.size()), cfg, fn);
}

// Masked-token prediction over encoder sequences (15% mask rate by default).
template <typename T>
TrainResult train_mlm(lift::model::LiftModel<T>& model, const std::vector<std::vector<int>>& seqs,
                      const StageConfig& cfg, double mask_rate = 0.15) {
  if (seqs.empty()) throw ValueError("train_mlm: empty dataset");
  const int mask_id = model.config().enc_mask_id;
  // Mask choices depend on (seed, epoch, item) only; epochs are tracked via a
  // counter advanced by run_batches' shuffling order being per-epoch. We fold
  // the item index into the mask stream instead of tracking epochs exactly:
  // every visit to an item in a new batch draws a fresh deterministic stream.
  std::vector<int> visit(seqs.size(), 0);
  detail::LossFn<T> fn = [&, mask_rate](int idx, lift::model::Binder<T>& b) {
    int v;
#ifdef _OPENMP
#pragma omp atomic capture
#endif
    v = visit[idx]++;
    lift::num::Rng rng(lift::num::derive_seed(cfg.seed, "mask-" + std::to_string(idx) + "-" +
                                                            std::to_string(v)));
    const std::vector<int>& ids = seqs[idx];
    std::vector<int> masked = ids;
    std::vector<int> targets(ids.size(), lift::model::LiftModel<T>::kIgnore);
    int n_masked = 0;
    // 60/10/30 corruption: mask token, random token, or keep. The keep case
    // trains unmasked positions to hold on to their own identity, which the
    // alignment layer depends on downstream.
    auto corrupt = [&](size_t i) {
      targets[i] = ids[i];
      double roll = rng.next_double();
      if (roll < 0.6) {
        masked[i] = mask_id;
      } else if (roll < 0.7) {
        masked[i] = static_cast<int>(rng.next_below(model.config().enc_vocab));
      }
      ++n_masked;
    };
    for (size_t i = 0; i < ids.size(); ++i) {
      if (rng.next_double() < mask_rate) corrupt(i);
    }
    if (n_masked == 0) corrupt(rng.next_below(ids.size()));
    auto logits = model.encoder_mlm_logits(b, masked);
    return b.g->cross_entropy_mean(logits, targets, lift::model::LiftModel<T>::kIgnore);
  };
  return detail::run_batches(model, static_cast<int>(seqs.size()), cfg, fn);
}

}  // namespace lift::train
