#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "lift/numcore/graph.hpp"
#include "lift/numcore/optimizer.hpp"
#include "lift/numcore/rng.hpp"
#include "lift/numcore/schedule.hpp"

using lift::num::Graph;
using lift::num::Rng;
using lift::num::ScheduleSpec;
using lift::num::Tensor;
using lift::test::fd_check;
using lift::test::random_tensor;

using GD = Graph<double>;
using TD = Tensor<double>;

TEST_CASE("matmul values") {
  GD g;
  auto a = g.constant(TD::from_rows({{1, 2}, {3, 4}}));
  auto id2 = g.constant(TD::from_rows({{1, 0}, {0, 1}}));
  auto c = g.matmul(a, id2);
  CHECK(g.value(c).at(0, 0) == 1);
  CHECK(g.value(c).at(0, 1) == 2);
  CHECK(g.value(c).at(1, 0) == 3);
  CHECK(g.value(c).at(1, 1) == 4);

  // hand dot products
  auto b = g.constant(TD::from_rows({{5}, {6}}));
  auto d = g.matmul(a, b);
  CHECK(g.value(d).at(0, 0) == 17);
  CHECK(g.value(d).at(1, 0) == 39);

  auto zero = g.constant(TD(2, 3));
  auto e = g.matmul(a, zero);
  for (double v : g.value(e).vec()) CHECK(v == 0.0);

  auto bad = g.constant(TD(3, 2));
  CHECK_THROWS_AS(g.matmul(a, bad), lift::ShapeError);
}

TEST_CASE("softmax rows") {
  GD g;
  auto x = g.constant(TD::from_rows({{0, 0, 0}}));
  auto y = g.softmax_rows(x);
  for (int j = 0; j < 3; ++j) CHECK(g.value(y).at(0, j) == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto x2 = g.constant(TD::from_rows({{0.0, std::log(2.0)}}));
  auto y2 = g.softmax_rows(x2);
  CHECK(g.value(y2).at(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(g.value(y2).at(0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("softmax shift invariance and row sums") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    TD x = random_tensor(3, 5, rng, 3.0);
    TD shifted = x;
    double c = rng.next_normal() * 10.0;
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 3; ++i) shifted.at(i, j) += c;
    GD g;
    auto a = g.softmax_rows(g.constant(x));
    auto b = g.softmax_rows(g.constant(shifted));
    for (int i = 0; i < 3; ++i) {
      double sum = 0;
      for (int j = 0; j < 5; ++j) {
        CHECK(g.value(a).at(i, j) == doctest::Approx(g.value(b).at(i, j)).epsilon(1e-9));
        sum += g.value(a).at(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("cross entropy values and errors") {
  GD g;
  auto uniform = g.constant(TD(1, 4));
  auto l1 = g.cross_entropy_mean(uniform, {2}, -1);
  CHECK(g.value(l1).item() == doctest::Approx(std::log(4.0)).epsilon(1e-9));

  auto peaked = g.constant(TD::from_rows({{10, 0, 0}}));
  auto l2 = g.cross_entropy_mean(peaked, {0}, -1);
  CHECK(g.value(l2).item() == doctest::Approx(9.08e-5).epsilon(1e-2));

  CHECK_THROWS_AS(g.cross_entropy_mean(peaked, {-1}, -1), lift::ValueError);  // all ignored
  CHECK_THROWS_AS(g.cross_entropy_mean(peaked, {3}, -1), lift::IndexError);   // target >= v

  // nonnegative on random inputs
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    GD gg;
    auto lg = gg.constant(random_tensor(4, 6, rng, 2.0));
    auto loss = gg.cross_entropy_mean(lg, {0, 5, 2, 3}, -1);
    CHECK(gg.value(loss).item() >= 0.0);
  }
}

TEST_CASE("backward basics") {
  // d/dx sum(x) = ones
  GD g;
  auto x = g.input(TD::from_rows({{1, 2}, {3, 4}}));
  auto s = g.sum_all(x);
  g.backward(s);
  for (double v : g.grad(x).vec()) CHECK(v == 1.0);

  // softmax-CE gradient equals p - onehot
  GD g2;
  TD logits = TD::from_rows({{0.3, -1.2, 2.0}});
  auto lx = g2.input(logits);
  auto loss = g2.cross_entropy_mean(lx, {1}, -1);
  g2.backward(loss);
  auto sm = g2.softmax_rows(g2.constant(logits));
  for (int j = 0; j < 3; ++j) {
    double expect = g2.value(sm).at(0, j) - (j == 1 ? 1.0 : 0.0);
    CHECK(g2.grad(lx).at(0, j) == doctest::Approx(expect).epsilon(1e-9));
  }

  // non-scalar loss rejected
  GD g3;
  auto y = g3.input(TD(2, 2));
  CHECK_THROWS_AS(g3.backward(y), lift::ShapeError);
}

TEST_CASE("backward accumulates into sinks until cleared") {
  TD p = TD::from_rows({{1.0, 2.0}});
  TD sink(1, 2);
  GD g;
  auto v = g.param(p, &sink);
  auto loss = g.sum_all(v);
  g.backward(loss);
  g.backward(loss);
  CHECK(sink.at(0, 0) == 2.0);
  CHECK(sink.at(0, 1) == 2.0);
}

// Finite-difference sweep over every differentiable op, >= 5 seeded inputs each.
TEST_CASE("gradient suite: central finite differences at f64") {
  constexpr double kTol = 1e-4;
  Rng rng(20240501);

  auto run = [&](const char* name, auto builder, std::vector<TD> inputs) {
    auto rep = fd_check(builder, inputs);
    INFO(name << " worst at " << rep.where);
    CHECK(rep.max_rel_err < kTol);
  };

  for (int trial = 0; trial < 5; ++trial) {
    run("matmul",
        [](GD& g, const std::vector<int>& in) { return g.sum_all(g.matmul(in[0], in[1])); },
        {random_tensor(3, 4, rng), random_tensor(4, 2, rng)});

    run("transpose",
        [](GD& g, const std::vector<int>& in) {
          return g.sum_all(g.mul(g.transpose(in[0]), in[1]));
        },
        {random_tensor(3, 4, rng), random_tensor(4, 3, rng)});

    run("add",
        [](GD& g, const std::vector<int>& in) {
          return g.mean_all(g.mul(g.add(in[0], in[1]), in[0]));
        },
        {random_tensor(3, 3, rng), random_tensor(3, 3, rng)});

    run("add_bias",
        [](GD& g, const std::vector<int>& in) {
          return g.mean_all(g.gelu(g.add_bias(in[0], in[1])));
        },
        {random_tensor(4, 3, rng), random_tensor(1, 3, rng)});

    run("mul_scale",
        [](GD& g, const std::vector<int>& in) {
          return g.sum_all(g.scale(g.mul(in[0], in[1]), 0.7));
        },
        {random_tensor(2, 5, rng), random_tensor(2, 5, rng)});

    run("softmax_rows",
        [](GD& g, const std::vector<int>& in) {
          return g.sum_all(g.mul(g.softmax_rows(in[0]), in[1]));
        },
        {random_tensor(3, 6, rng), random_tensor(3, 6, rng)});

    run("gelu",
        [](GD& g, const std::vector<int>& in) { return g.mean_all(g.gelu(in[0])); },
        {random_tensor(4, 4, rng)});

    run("layer_norm",
        [](GD& g, const std::vector<int>& in) {
          return g.mean_all(g.mul(g.layer_norm(in[0], in[1], in[2]), in[3]));
        },
        {random_tensor(3, 8, rng), random_tensor(1, 8, rng, 0.5), random_tensor(1, 8, rng, 0.5),
         random_tensor(3, 8, rng)});

    run("embedding_rows",
        [](GD& g, const std::vector<int>& in) {
          return g.sum_all(g.mul(g.embedding_rows(in[0], {2, 0, 2, 1}), in[1]));
        },
        {random_tensor(4, 5, rng), random_tensor(4, 5, rng)});

    run("concat_slice_rows",
        [](GD& g, const std::vector<int>& in) {
          auto cat = g.concat_rows({in[0], in[1]});
          return g.sum_all(g.mul(g.slice_rows(cat, 1, 4), g.slice_rows(cat, 0, 3)));
        },
        {random_tensor(2, 3, rng), random_tensor(3, 3, rng)});

    run("concat_slice_cols",
        [](GD& g, const std::vector<int>& in) {
          auto cat = g.concat_cols({in[0], in[1]});
          return g.sum_all(g.mul(g.slice_cols(cat, 1, 4), g.slice_cols(cat, 0, 3)));
        },
        {random_tensor(3, 2, rng), random_tensor(3, 3, rng)});

    run("cross_entropy_mean",
        [](GD& g, const std::vector<int>& in) {
          return g.cross_entropy_mean(in[0], {1, -1, 3, 0}, -1);
        },
        {random_tensor(4, 5, rng, 1.5)});

    run("mean_all",
        [](GD& g, const std::vector<int>& in) { return g.mean_all(g.mul(in[0], in[0])); },
        {random_tensor(3, 3, rng)});
  }
}

TEST_CASE("adamw hand-checked steps") {
  using lift::num::AdamWConfig;
  using lift::num::adamw_step;
  using lift::num::make_adamw_state;

  TD p = TD::scalar(1.0);
  TD gr = TD::scalar(1.0);
  auto st = make_adamw_state<double>({&p}, AdamWConfig{});
  adamw_step<double>({&p}, {&gr}, st, 0.1);
  CHECK(p.item() == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(st.t == 1);

  TD p2 = TD::scalar(1.0);
  AdamWConfig wd;
  wd.weight_decay = 0.01;
  auto st2 = make_adamw_state<double>({&p2}, wd);
  adamw_step<double>({&p2}, {&gr}, st2, 0.1);
  CHECK(p2.item() == doctest::Approx(0.899).epsilon(1e-6));

  // zero grad, zero decay: identity on parameters
  TD p3 = TD::from_rows({{0.5, -0.25}});
  TD g0(1, 2);
  auto st3 = make_adamw_state<double>({&p3}, AdamWConfig{});
  adamw_step<double>({&p3}, {&g0}, st3, 0.1);
  CHECK(p3.at(0, 0) == 0.5);
  CHECK(p3.at(0, 1) == -0.25);

  // NaN grads poison the step
  TD pn = TD::scalar(1.0);
  TD gn = TD::scalar(std::nan(""));
  auto stn = make_adamw_state<double>({&pn}, AdamWConfig{});
  CHECK_THROWS_AS(adamw_step<double>({&pn}, {&gn}, stn, 0.1), lift::NumericError);
  CHECK(pn.item() == 1.0);
  CHECK(stn.t == 0);
}

TEST_CASE("lr schedules") {
  using lift::num::lr_at_step;
  ScheduleSpec c;
  c.kind = ScheduleSpec::Kind::constant;
  c.base_lr = 0.02;
  c.total_steps = 100;
  lift::num::validate(c);
  for (int s : {0, 1, 50, 100}) CHECK(lr_at_step(c, s) == 0.02);

  ScheduleSpec cos;
  cos.kind = ScheduleSpec::Kind::cosine_with_warmup;
  cos.base_lr = 1.0;
  cos.warmup_ratio = 0.1;
  cos.total_steps = 100;
  cos.min_lr = 0.0;
  lift::num::validate(cos);
  CHECK(lr_at_step(cos, 0) == 0.0);
  CHECK(lr_at_step(cos, 10) == doctest::Approx(1.0));          // ramp endpoint
  CHECK(lr_at_step(cos, 100) == doctest::Approx(0.0));         // decayed to min
  CHECK(lr_at_step(cos, 55) == doctest::Approx(0.5));          // midpoint of decay
  CHECK(lr_at_step(cos, 5) == doctest::Approx(0.5));           // mid ramp
  CHECK_THROWS_AS(lr_at_step(cos, 101), lift::IndexError);

  ScheduleSpec bad = cos;
  bad.warmup_ratio = 0.999;
  bad.total_steps = 1;
  CHECK_THROWS_AS(lift::num::validate(bad), lift::ValueError);
}

TEST_CASE("seeded training loop is bit-deterministic") {
  auto run_once = [](uint64_t seed) {
    Rng rng(seed);
    TD w = random_tensor(4, 4, rng, 0.1);
    TD x = random_tensor(2, 4, rng);
    auto st = lift::num::make_adamw_state<double>({&w}, lift::num::AdamWConfig{});
    for (int step = 0; step < 25; ++step) {
      TD gr(4, 4);
      GD g;
      auto wid = g.param(w, &gr);
      auto xid = g.constant(x);
      auto loss = g.mean_all(g.mul(g.matmul(xid, wid), g.matmul(xid, wid)));
      g.backward(loss);
      lift::num::adamw_step<double>({&w}, {&gr}, st, 1e-2);
    }
    return w;
  };
  TD a = run_once(99);
  TD b = run_once(99);
  for (int64_t i = 0; i < a.size(); ++i) CHECK(a.vec()[i] == b.vec()[i]);
}
