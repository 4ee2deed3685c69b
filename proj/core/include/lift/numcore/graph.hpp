#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "lift/numcore/tensor.hpp"

namespace lift::num {

// Define-by-run reverse-mode tape over dense matrices. Values are computed
// eagerly when an op is recorded; backward() replays the tape in reverse.
// A Graph is single-threaded and lives for one forward/backward pass.
//
// Gradient semantics: node-local grads are reset at each backward() call;
// external sinks registered via param() accumulate across calls until the
// caller zeroes them.
template <typename T>
class Graph {
 public:
  using VarId = int;

  Graph() = default;
  Graph(const Graph&) = delete;             // backward closures capture this
  Graph& operator=(const Graph&) = delete;

  VarId constant(Tensor<T> v) { return push_leaf(std::move(v), false, nullptr); }

  VarId input(Tensor<T> v) { return push_leaf(std::move(v), true, nullptr); }

  // Leaf whose value lives outside the tape (a model parameter). The tape
  // reads it by reference; backward() adds the gradient into *grad_sink.
  // grad_sink == nullptr marks a frozen parameter: no gradient is ever
  // materialized for it.
  VarId param(const Tensor<T>& value, Tensor<T>* grad_sink) {
    nodes_.push_back(Node{});
    Node& n = nodes_.back();
    n.external = &value;
    n.requires_grad = grad_sink != nullptr;
    n.grad_sink = grad_sink;
    return static_cast<VarId>(nodes_.size() - 1);
  }

  const Tensor<T>& value(VarId id) const {
    const Node& n = nodes_.at(id);
    return n.external != nullptr ? *n.external : n.owned;
  }

  // Node-local gradient of the last backward() pass.
  const Tensor<T>& grad(VarId id) const { return nodes_.at(id).grad; }

  bool requires_grad(VarId id) const { return nodes_.at(id).requires_grad; }

  VarId matmul(VarId a, VarId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (va.cols() != vb.rows()) throw ShapeError("matmul inner dims differ");
    Tensor<T> out(va.rows(), vb.cols());
    matmul_into(va, vb, out, false);
    return push_op(std::move(out), {a, b}, [this, a, b](const Tensor<T>& g) {
      if (needs(a)) matmul_nt_into(g, value(b), grad_buf(a));
      if (needs(b)) matmul_tn_into(value(a), g, grad_buf(b));
    });
  }

  VarId transpose(VarId a) {
    const Tensor<T>& va = value(a);
    Tensor<T> out(va.cols(), va.rows());
    for (int i = 0; i < va.rows(); ++i)
      for (int j = 0; j < va.cols(); ++j) out.at(j, i) = va.at(i, j);
    return push_op(std::move(out), {a}, [this, a](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) da.at(j, i) += g.at(i, j);
    });
  }

  VarId add(VarId a, VarId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("add shape mismatch");
    Tensor<T> out = va;
    out.add_inplace(vb);
    return push_op(std::move(out), {a, b}, [this, a, b](const Tensor<T>& g) {
      if (needs(a)) grad_buf(a).add_inplace(g);
      if (needs(b)) grad_buf(b).add_inplace(g);
    });
  }

  // a (m x n) + bias (1 x n) broadcast over rows.
  VarId add_bias(VarId a, VarId bias) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(bias);
    if (vb.rows() != 1 || vb.cols() != va.cols()) throw ShapeError("add_bias wants 1 x cols");
    Tensor<T> out = va;
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) out.at(i, j) += vb.at(0, j);
    return push_op(std::move(out), {a, bias}, [this, a, bias](const Tensor<T>& g) {
      if (needs(a)) grad_buf(a).add_inplace(g);
      if (needs(bias)) {
        Tensor<T>& db = grad_buf(bias);
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) db.at(0, j) += g.at(i, j);
      }
    });
  }

  VarId mul(VarId a, VarId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("mul shape mismatch");
    Tensor<T> out = va;
    for (int64_t i = 0; i < out.size(); ++i) out.vec()[i] *= vb.vec()[i];
    return push_op(std::move(out), {a, b}, [this, a, b](const Tensor<T>& g) {
      if (needs(a)) {
        Tensor<T>& da = grad_buf(a);
        const Tensor<T>& vb = value(b);
        for (int64_t i = 0; i < g.size(); ++i) da.vec()[i] += g.vec()[i] * vb.vec()[i];
      }
      if (needs(b)) {
        Tensor<T>& db = grad_buf(b);
        const Tensor<T>& va = value(a);
        for (int64_t i = 0; i < g.size(); ++i) db.vec()[i] += g.vec()[i] * va.vec()[i];
      }
    });
  }

  VarId scale(VarId a, T s) {
    Tensor<T> out = value(a);
    for (auto& v : out.vec()) v *= s;
    return push_op(std::move(out), {a}, [this, a, s](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (int64_t i = 0; i < g.size(); ++i) da.vec()[i] += s * g.vec()[i];
    });
  }

  // Row-wise softmax with max subtraction.
  VarId softmax_rows(VarId a) {
    const Tensor<T>& va = value(a);
    Tensor<T> out(va.rows(), va.cols());
    const int n = va.cols();
    for (int i = 0; i < va.rows(); ++i) {
      T mx = va.at(i, 0);
      for (int j = 1; j < n; ++j) mx = std::max(mx, va.at(i, j));
      T sum = T(0);
      for (int j = 0; j < n; ++j) {
        T e = std::exp(va.at(i, j) - mx);
        out.at(i, j) = e;
        sum += e;
      }
      for (int j = 0; j < n; ++j) out.at(i, j) /= sum;
    }
    VarId id = push_op(std::move(out), {a}, nullptr);
    nodes_[id].backward_fn = [this, a, id](const Tensor<T>& g) {
      if (!needs(a)) return;
      const Tensor<T>& y = value(id);
      Tensor<T>& da = grad_buf(a);
      for (int i = 0; i < y.rows(); ++i) {
        T dot = T(0);
        for (int j = 0; j < y.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
        for (int j = 0; j < y.cols(); ++j) da.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
      }
    };
    return id;
  }

  VarId gelu(VarId a) {
    const Tensor<T>& va = value(a);
    Tensor<T> out = va;
    for (auto& v : out.vec()) {
      double x = static_cast<double>(v);
      v = static_cast<T>(0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)));
    }
    return push_op(std::move(out), {a}, [this, a](const Tensor<T>& g) {
      if (!needs(a)) return;
      const Tensor<T>& va = value(a);
      Tensor<T>& da = grad_buf(a);
      for (int64_t i = 0; i < g.size(); ++i) {
        double x = static_cast<double>(va.vec()[i]);
        double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        da.vec()[i] += g.vec()[i] * static_cast<T>(cdf + x * pdf);
      }
    });
  }

  // Per-row layer normalization with learned gain/bias (each 1 x cols).
  VarId layer_norm(VarId a, VarId gain, VarId bias) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vg = value(gain);
    const Tensor<T>& vb = value(bias);
    const int n = va.cols();
    if (vg.rows() != 1 || vg.cols() != n || vb.rows() != 1 || vb.cols() != n) {
      throw ShapeError("layer_norm gain/bias want 1 x cols");
    }
    auto xhat = std::make_shared<Tensor<T>>(va.rows(), n);
    auto inv_std = std::make_shared<std::vector<T>>(va.rows());
    Tensor<T> out(va.rows(), n);
    for (int i = 0; i < va.rows(); ++i) {
      T mean = T(0);
      for (int j = 0; j < n; ++j) mean += va.at(i, j);
      mean /= T(n);
      T var = T(0);
      for (int j = 0; j < n; ++j) {
        T d = va.at(i, j) - mean;
        var += d * d;
      }
      var /= T(n);
      T is = T(1) / std::sqrt(var + T(kLnEps));
      (*inv_std)[i] = is;
      for (int j = 0; j < n; ++j) {
        T xh = (va.at(i, j) - mean) * is;
        xhat->at(i, j) = xh;
        out.at(i, j) = vg.at(0, j) * xh + vb.at(0, j);
      }
    }
    return push_op(std::move(out), {a, gain, bias},
                   [this, a, gain, bias, xhat, inv_std](const Tensor<T>& g) {
                     const Tensor<T>& vg = value(gain);
                     const int n = xhat->cols();
                     if (needs(gain) || needs(bias)) {
                       for (int i = 0; i < g.rows(); ++i)
                         for (int j = 0; j < n; ++j) {
                           if (needs(gain)) grad_buf(gain).at(0, j) += g.at(i, j) * xhat->at(i, j);
                           if (needs(bias)) grad_buf(bias).at(0, j) += g.at(i, j);
                         }
                     }
                     if (!needs(a)) return;
                     Tensor<T>& da = grad_buf(a);
                     for (int i = 0; i < g.rows(); ++i) {
                       T mean_dxh = T(0), mean_dxh_xh = T(0);
                       for (int j = 0; j < n; ++j) {
                         T dxh = g.at(i, j) * vg.at(0, j);
                         mean_dxh += dxh;
                         mean_dxh_xh += dxh * xhat->at(i, j);
                       }
                       mean_dxh /= T(n);
                       mean_dxh_xh /= T(n);
                       for (int j = 0; j < n; ++j) {
                         T dxh = g.at(i, j) * vg.at(0, j);
                         da.at(i, j) += (*inv_std)[i] * (dxh - mean_dxh - xhat->at(i, j) * mean_dxh_xh);
                       }
                     }
                   });
  }

  // Gather rows of a table by index; gradient scatters back.
  VarId embedding_rows(VarId table, std::vector<int> ids) {
    const Tensor<T>& vt = value(table);
    Tensor<T> out(static_cast<int>(ids.size()), vt.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= vt.rows()) throw IndexError("embedding id out of range");
      for (int j = 0; j < vt.cols(); ++j) out.at(static_cast<int>(i), j) = vt.at(ids[i], j);
    }
    auto idv = std::make_shared<std::vector<int>>(std::move(ids));
    return push_op(std::move(out), {table}, [this, table, idv](const Tensor<T>& g) {
      if (!needs(table)) return;
      Tensor<T>& dt = grad_buf(table);
      for (size_t i = 0; i < idv->size(); ++i)
        for (int j = 0; j < g.cols(); ++j) dt.at((*idv)[i], j) += g.at(static_cast<int>(i), j);
    });
  }

  VarId concat_rows(const std::vector<VarId>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows of nothing");
    int cols = value(parts[0]).cols();
    int rows = 0;
    for (VarId p : parts) {
      if (value(p).cols() != cols) throw ShapeError("concat_rows col mismatch");
      rows += value(p).rows();
    }
    Tensor<T> out(rows, cols);
    int r = 0;
    for (VarId p : parts) {
      const Tensor<T>& vp = value(p);
      for (int i = 0; i < vp.rows(); ++i, ++r)
        for (int j = 0; j < cols; ++j) out.at(r, j) = vp.at(i, j);
    }
    auto ps = std::make_shared<std::vector<VarId>>(parts);
    return push_op(std::move(out), parts, [this, ps](const Tensor<T>& g) {
      int r = 0;
      for (VarId p : *ps) {
        int pr = value(p).rows();
        if (needs(p)) {
          Tensor<T>& dp = grad_buf(p);
          for (int i = 0; i < pr; ++i)
            for (int j = 0; j < g.cols(); ++j) dp.at(i, j) += g.at(r + i, j);
        }
        r += pr;
      }
    });
  }

  VarId slice_rows(VarId a, int r0, int r1) {
    const Tensor<T>& va = value(a);
    if (r0 < 0 || r1 > va.rows() || r0 >= r1) throw IndexError("slice_rows range");
    Tensor<T> out(r1 - r0, va.cols());
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < va.cols(); ++j) out.at(i - r0, j) = va.at(i, j);
    return push_op(std::move(out), {a}, [this, a, r0](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) da.at(r0 + i, j) += g.at(i, j);
    });
  }

  VarId slice_cols(VarId a, int c0, int c1) {
    const Tensor<T>& va = value(a);
    if (c0 < 0 || c1 > va.cols() || c0 >= c1) throw IndexError("slice_cols range");
    Tensor<T> out(va.rows(), c1 - c0);
    for (int i = 0; i < va.rows(); ++i)
      for (int j = c0; j < c1; ++j) out.at(i, j - c0) = va.at(i, j);
    return push_op(std::move(out), {a}, [this, a, c0](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) da.at(i, c0 + j) += g.at(i, j);
    });
  }

  VarId concat_cols(const std::vector<VarId>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols of nothing");
    int rows = value(parts[0]).rows();
    int cols = 0;
    for (VarId p : parts) {
      if (value(p).rows() != rows) throw ShapeError("concat_cols row mismatch");
      cols += value(p).cols();
    }
    Tensor<T> out(rows, cols);
    int c = 0;
    for (VarId p : parts) {
      const Tensor<T>& vp = value(p);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < vp.cols(); ++j) out.at(i, c + j) = vp.at(i, j);
      c += vp.cols();
    }
    auto ps = std::make_shared<std::vector<VarId>>(parts);
    return push_op(std::move(out), parts, [this, ps](const Tensor<T>& g) {
      int c = 0;
      for (VarId p : *ps) {
        int pc = value(p).cols();
        if (needs(p)) {
          Tensor<T>& dp = grad_buf(p);
          for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < pc; ++j) dp.at(i, j) += g.at(i, c + j);
        }
        c += pc;
      }
    });
  }

  VarId sum_all(VarId a) {
    const Tensor<T>& va = value(a);
    T s = T(0);
    for (T v : va.vec()) s += v;
    return push_op(Tensor<T>::scalar(s), {a}, [this, a](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (auto& v : da.vec()) v += g.item();
    });
  }

  VarId mean_all(VarId a) {
    const Tensor<T>& va = value(a);
    T s = T(0);
    for (T v : va.vec()) s += v;
    T denom = static_cast<T>(va.size());
    return push_op(Tensor<T>::scalar(s / denom), {a}, [this, a, denom](const Tensor<T>& g) {
      if (!needs(a)) return;
      Tensor<T>& da = grad_buf(a);
      for (auto& v : da.vec()) v += g.item() / denom;
    });
  }

  // Mean token negative log-likelihood over positions whose target is not
  // ignore_index. Fused stable log-softmax + gather.
  VarId cross_entropy_mean(VarId logits, const std::vector<int>& targets, int ignore_index) {
    const Tensor<T>& x = value(logits);
    if (static_cast<int>(targets.size()) != x.rows()) {
      throw ShapeError("cross_entropy targets length != logit rows");
    }
    const int v = x.cols();
    auto probs = std::make_shared<Tensor<T>>(x.rows(), v);
    auto tgts = std::make_shared<std::vector<int>>(targets);
    int n_valid = 0;
    double loss = 0.0;
    for (int i = 0; i < x.rows(); ++i) {
      int t = targets[i];
      if (t == ignore_index) continue;
      if (t < 0 || t >= v) throw IndexError("cross_entropy target out of range");
      ++n_valid;
      T mx = x.at(i, 0);
      for (int j = 1; j < v; ++j) mx = std::max(mx, x.at(i, j));
      T sum = T(0);
      for (int j = 0; j < v; ++j) {
        T e = std::exp(x.at(i, j) - mx);
        probs->at(i, j) = e;
        sum += e;
      }
      for (int j = 0; j < v; ++j) probs->at(i, j) /= sum;
      loss += static_cast<double>(mx) + std::log(static_cast<double>(sum)) -
              static_cast<double>(x.at(i, t));
    }
    if (n_valid == 0) throw ValueError("cross_entropy: every position ignored, mean undefined");
    loss /= n_valid;
    auto ign = ignore_index;
    return push_op(Tensor<T>::scalar(static_cast<T>(loss)), {logits},
                   [this, logits, probs, tgts, n_valid, ign](const Tensor<T>& g) {
                     if (!needs(logits)) return;
                     Tensor<T>& dx = grad_buf(logits);
                     T gs = g.item() / static_cast<T>(n_valid);
                     for (int i = 0; i < dx.rows(); ++i) {
                       int t = (*tgts)[i];
                       if (t == ign) continue;
                       for (int j = 0; j < dx.cols(); ++j) dx.at(i, j) += gs * probs->at(i, j);
                       dx.at(i, t) -= gs;
                     }
                   });
  }

  // Reverse sweep from a scalar loss. Node-local grads are rebuilt on each
  // call; external sinks accumulate.
  void backward(VarId loss) {
    Node& ln = nodes_.at(loss);
    if (value(loss).size() != 1) throw ShapeError("backward wants a scalar loss");
    if (!ln.requires_grad) return;
    for (size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (n.requires_grad) {
        const Tensor<T>& v = value(static_cast<VarId>(i));
        n.grad = Tensor<T>(v.rows(), v.cols());
      }
    }
    ln.grad = Tensor<T>::scalar(T(1));
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !n.backward_fn) continue;
      n.backward_fn(n.grad);
    }
    for (Node& n : nodes_) {
      if (n.grad_sink != nullptr) n.grad_sink->add_inplace(n.grad);
    }
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  static constexpr double kLnEps = 1e-5;

  struct Node {
    Tensor<T> owned;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    Tensor<T>* grad_sink = nullptr;
    bool requires_grad = false;
    std::function<void(const Tensor<T>&)> backward_fn;
  };

  bool needs(VarId id) const { return nodes_[id].requires_grad; }
  Tensor<T>& grad_buf(VarId id) { return nodes_[id].grad; }

  VarId push_leaf(Tensor<T> v, bool requires_grad, Tensor<T>* sink) {
    nodes_.push_back(Node{});
    Node& n = nodes_.back();
    n.owned = std::move(v);
    n.requires_grad = requires_grad;
    n.grad_sink = sink;
    return static_cast<VarId>(nodes_.size() - 1);
  }

  VarId push_op(Tensor<T> v, const std::vector<VarId>& parents,
                std::function<void(const Tensor<T>&)> bw) {
    bool rg = false;
    for (VarId p : parents) rg = rg || nodes_.at(p).requires_grad;
    nodes_.push_back(Node{});
    Node& n = nodes_.back();
    n.owned = std::move(v);
    n.requires_grad = rg;
    n.backward_fn = std::move(bw);
    return static_cast<VarId>(nodes_.size() - 1);
  }

  // dA += G * B^T  (G: m x n, B: k x n, dA: m x k)
  void matmul_nt_into(const Tensor<T>& g, const Tensor<T>& b, Tensor<T>& da) {
    const int m = g.rows(), n = g.cols(), k = b.rows();
    for (int i = 0; i < m; ++i) {
      const T* grow = g.data() + static_cast<int64_t>(i) * n;
      T* darow = da.data() + static_cast<int64_t>(i) * k;
      for (int kk = 0; kk < k; ++kk) {
        const T* brow = b.data() + static_cast<int64_t>(kk) * n;
        T acc = T(0);
        for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
        darow[kk] += acc;
      }
    }
  }

  // dB += A^T * G  (A: m x k, G: m x n, dB: k x n)
  void matmul_tn_into(const Tensor<T>& a, const Tensor<T>& g, Tensor<T>& db) {
    const int m = a.rows(), k = a.cols(), n = g.cols();
    for (int i = 0; i < m; ++i) {
      const T* arow = a.data() + static_cast<int64_t>(i) * k;
      const T* grow = g.data() + static_cast<int64_t>(i) * n;
      for (int kk = 0; kk < k; ++kk) {
        const T aik = arow[kk];
        if (aik == T(0)) continue;
        T* dbrow = db.data() + static_cast<int64_t>(kk) * n;
        for (int j = 0; j < n; ++j) dbrow[j] += aik * grow[j];
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace lift::num
