#pragma once

#include <deque>
#include <string>
#include <vector>

#include "lift/numcore/rng.hpp"
#include "lift/numcore/tensor.hpp"

namespace lift::model {

// The three trainable groups: alignment layer + boundary tokens, the
// multilingual encoder, and the decoder LM.
enum class Group { align, encoder, decoder };
const char* group_name(Group g);
Group group_from_name(const std::string& s);

template <typename T>
struct Parameter {
  int index = 0;  // position in the store, used by optimizers and shadows
  Group group = Group::decoder;
  std::string name;  // group-qualified, e.g. "align.proj1.w"
  lift::num::Tensor<T> value;
  lift::num::Tensor<T> grad;
};

// Owns every model parameter with stable addresses and a stable order.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(Group g, const std::string& name, lift::num::Tensor<T> init) {
    params_.push_back(Parameter<T>{});
    Parameter<T>& p = params_.back();
    p.index = static_cast<int>(params_.size()) - 1;
    p.group = g;
    p.name = std::string(group_name(g)) + "." + name;
    p.grad = lift::num::Tensor<T>(init.rows(), init.cols());
    p.value = std::move(init);
    return p;
  }

  size_t size() const { return params_.size(); }
  Parameter<T>& at(size_t i) { return params_[i]; }
  const Parameter<T>& at(size_t i) const { return params_[i]; }

  std::vector<Parameter<T>*> all() {
    std::vector<Parameter<T>*> out;
    for (auto& p : params_) out.push_back(&p);
    return out;
  }

  std::vector<Parameter<T>*> in_group(Group g) {
    std::vector<Parameter<T>*> out;
    for (auto& p : params_)
      if (p.group == g) out.push_back(&p);
    return out;
  }

  std::vector<const Parameter<T>*> in_group(Group g) const {
    std::vector<const Parameter<T>*> out;
    for (const auto& p : params_)
      if (p.group == g) out.push_back(&p);
    return out;
  }

  Parameter<T>* find(const std::string& qualified_name) {
    for (auto& p : params_)
      if (p.name == qualified_name) return &p;
    return nullptr;
  }

  int64_t count_in_group(Group g) const {
    int64_t n = 0;
    for (const auto& p : params_)
      if (p.group == g) n += p.value.size();
    return n;
  }

  int64_t count_total() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.fill(T(0));
  }

 private:
  std::deque<Parameter<T>> params_;  // deque: stable addresses as it grows
};

// Initializers. Embeddings draw from N(0, 0.02^2); linear weights use
// fan-in-scaled uniform; biases start at zero.
template <typename T>
lift::num::Tensor<T> init_normal(int r, int c, lift::num::Rng& rng, double std_dev = 0.02) {
  lift::num::Tensor<T> t(r, c);
  for (auto& v : t.vec()) v = static_cast<T>(rng.next_normal() * std_dev);
  return t;
}

template <typename T>
lift::num::Tensor<T> init_fan_in(int fan_in, int fan_out, lift::num::Rng& rng) {
  lift::num::Tensor<T> t(fan_in, fan_out);
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.vec()) v = static_cast<T>((rng.next_double() * 2.0 - 1.0) * bound);
  return t;
}

template <typename T>
lift::num::Tensor<T> init_const(int r, int c, T value) {
  lift::num::Tensor<T> t(r, c);
  t.fill(value);
  return t;
}

}  // namespace lift::model
