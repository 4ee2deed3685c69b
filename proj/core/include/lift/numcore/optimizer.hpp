#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lift/numcore/tensor.hpp"

namespace lift::num {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Per-parameter first/second moments plus the shared step counter.
template <typename T>
struct AdamWState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  int64_t t = 0;
  AdamWConfig cfg;
};

template <typename T>
AdamWState<T> make_adamw_state(const std::vector<Tensor<T>*>& params, AdamWConfig cfg) {
  AdamWState<T> st;
  st.cfg = cfg;
  for (const Tensor<T>* p : params) {
    st.m.emplace_back(p->rows(), p->cols());
    st.v.emplace_back(p->rows(), p->cols());
  }
  return st;
}

// One AdamW step over a parameter list: biased-moment update with bias
// correction, decoupled weight decay applied separately from the adaptive
// term. Rejects the step (state untouched) if any gradient is non-finite.
template <typename T>
void adamw_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
                AdamWState<T>& st, double lr) {
  if (params.size() != grads.size() || params.size() != st.m.size()) {
    throw ShapeError("adamw_step: parameter/gradient/state count mismatch");
  }
  if (lr < 0.0) throw ValueError("adamw_step: negative lr");
  for (const Tensor<T>* g : grads) {
    if (!g->all_finite()) throw NumericError("adamw_step: non-finite gradient, step rejected");
  }
  st.t += 1;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<T>& p = *params[pi];
    const Tensor<T>& g = *grads[pi];
    if (!p.same_shape(g) || !p.same_shape(st.m[pi])) {
      throw ShapeError("adamw_step: shape mismatch");
    }
    T* pm = st.m[pi].data();
    T* pv = st.v[pi].data();
    T* pp = p.data();
    const T* pg = g.data();
    for (int64_t i = 0; i < p.size(); ++i) {
      double gi = static_cast<double>(pg[i]);
      double m = b1 * static_cast<double>(pm[i]) + (1.0 - b1) * gi;
      double v = b2 * static_cast<double>(pv[i]) + (1.0 - b2) * gi * gi;
      pm[i] = static_cast<T>(m);
      pv[i] = static_cast<T>(v);
      double mhat = m / bc1;
      double vhat = v / bc2;
      double upd = lr * mhat / (std::sqrt(vhat) + st.cfg.eps);
      double decay = lr * st.cfg.weight_decay * static_cast<double>(pp[i]);
      pp[i] = static_cast<T>(static_cast<double>(pp[i]) - upd - decay);
    }
  }
}

}  // namespace lift::num
