#pragma once

// Central finite-difference gradient oracle. Test-only: rebuilds the graph
// from perturbed copies of the inputs, so it stays independent of the tape's
// backward implementation.

#include <functional>
#include <string>
#include <vector>

#include "lift/numcore/graph.hpp"
#include "lift/numcore/rng.hpp"

namespace lift::test {

using GraphD = lift::num::Graph<double>;
using TensorD = lift::num::Tensor<double>;

struct FdReport {
  double max_rel_err = 0.0;
  std::string where;
};

// build(graph, input_ids) must return a scalar loss var.
inline FdReport fd_check(
    const std::function<int(GraphD&, const std::vector<int>&)>& build,
    const std::vector<TensorD>& inputs, double eps = 1e-4) {
  std::vector<TensorD> analytic;
  {
    GraphD g;
    std::vector<int> ids;
    for (const TensorD& t : inputs) ids.push_back(g.input(t));
    int loss = build(g, ids);
    g.backward(loss);
    for (int id : ids) analytic.push_back(g.grad(id));
  }
  FdReport rep;
  for (size_t ti = 0; ti < inputs.size(); ++ti) {
    for (int64_t ei = 0; ei < inputs[ti].size(); ++ei) {
      auto eval = [&](double delta) {
        std::vector<TensorD> pert = inputs;
        pert[ti].vec()[ei] += delta;
        GraphD g;
        std::vector<int> ids;
        for (const TensorD& t : pert) ids.push_back(g.input(t));
        return g.value(build(g, ids)).item();
      };
      double fd = (eval(eps) - eval(-eps)) / (2.0 * eps);
      double an = analytic[ti].vec()[ei];
      double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.where = "input " + std::to_string(ti) + " elem " + std::to_string(ei);
      }
    }
  }
  return rep;
}

inline TensorD random_tensor(int r, int c, lift::num::Rng& rng, double scale = 1.0) {
  TensorD t(r, c);
  for (auto& v : t.vec()) v = rng.next_normal() * scale;
  return t;
}

}  // namespace lift::test
