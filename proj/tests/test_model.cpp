#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "lift/model/model.hpp"
#include "lift/model/text.hpp"
#include "lift/trainer/checkpoint.hpp"
#include "lift/trainer/train.hpp"

using namespace lift::model;
using lift::num::Graph;
using lift::num::Rng;
using lift::num::Tensor;

namespace {

ModelConfig tiny_config(int d = 16, int vocab_e = 23, int vocab_d = 19) {
  ModelConfig c;
  c.d1 = d;
  c.d2 = d;
  c.enc_layers = 2;
  c.enc_heads = 2;
  c.dec_layers = 2;
  c.dec_heads = 2;
  c.align_hidden = 2 * d;
  c.max_seq = 64;
  c.enc_vocab = vocab_e;
  c.dec_vocab = vocab_d;
  return c;
}

}  // namespace

TEST_CASE("splice layout across a property sweep") {
  auto cfg = tiny_config();
  cfg.max_seq = 192;
  LiftModel<double> m(cfg, 42);
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    int l_q = 1 + static_cast<int>(rng.next_below(64));
    int l_x = 1 + static_cast<int>(rng.next_below(64));
    auto info = SpliceInfo::of(l_q, l_x);
    CHECK(info.total_len == l_q + l_x + 3);
    CHECK(info.bos_pos == 0);
    CHECK(info.enc_start_pos == 1 + l_q);
    CHECK(info.enc_end_pos == 1 + l_q + 1 + l_x);
    CHECK(info.enc_end_pos == info.total_len - 1);
  }

  // concrete assembly: rows come from the right places
  Graph<double> g;
  Binder<double> b{&g, TrainMask{}, nullptr};
  std::vector<int> q_ids = {7, 8, 9};
  auto Q = m.embed_instruction(b, q_ids);
  Tensor<double> xh(5, cfg.d2);
  for (auto& v : xh.vec()) v = 0.25;
  auto Xh = g.input(xh);
  SpliceInfo info;
  auto sp = m.splice(b, Q, Xh, &info);
  CHECK(g.value(sp).rows() == 10 + 1);  // l_q=3, l_x=5 -> 11 rows
  CHECK(info.enc_start_pos == 4);
  CHECK(info.enc_end_pos == 10);
  for (int j = 0; j < cfg.d2; ++j) {
    CHECK(g.value(sp).at(5, j) == 0.25);  // first aligned row
    CHECK(g.value(sp).at(9, j) == 0.25);  // last aligned row
  }

  // minimal case
  Tensor<double> one(1, cfg.d2);
  auto sp2 = m.splice(b, m.embed_instruction(b, {3}), g.input(one));
  CHECK(g.value(sp2).rows() == 5);
}

TEST_CASE("align is position-wise: row permutation equivariance") {
  auto cfg = tiny_config();
  for (auto variant : {AlignVariant::linear, AlignVariant::mlp2, AlignVariant::mlp3}) {
    cfg.align_variant = variant;
    LiftModel<double> m(cfg, 3);
    Rng rng(11);
    Tensor<double> x = lift::test::random_tensor(6, cfg.d1, rng);
    Tensor<double> perm(6, cfg.d1);
    std::vector<int> p = {3, 0, 5, 1, 4, 2};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < cfg.d1; ++j) perm.at(i, j) = x.at(p[i], j);

    Graph<double> g;
    Binder<double> b{&g, TrainMask{}, nullptr};
    auto y1 = m.align(b, g.input(x));
    auto y2 = m.align(b, g.input(perm));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < cfg.d2; ++j)
        CHECK(g.value(y2).at(i, j) == doctest::Approx(g.value(y1).at(p[i], j)).epsilon(1e-12));
  }
}

TEST_CASE("alignment parameter counts: linear < mlp2 < mlp3") {
  auto cfg = tiny_config();
  std::vector<int64_t> counts;
  for (auto variant : {AlignVariant::linear, AlignVariant::mlp2, AlignVariant::mlp3}) {
    cfg.align_variant = variant;
    LiftModel<double> m(cfg, 3);
    counts.push_back(m.store().count_in_group(Group::align));
  }
  CHECK(counts[0] < counts[1]);
  CHECK(counts[1] < counts[2]);
}

TEST_CASE("parameter groups partition the model") {
  LiftModel<double> m(tiny_config(), 7);
  int64_t total = m.store().count_total();
  int64_t sum = m.store().count_in_group(Group::align) + m.store().count_in_group(Group::encoder) +
                m.store().count_in_group(Group::decoder);
  CHECK(total == sum);

  // boundary embeddings live in the alignment group, token table in decoder
  CHECK(m.store().find("align.enc_start") != nullptr);
  CHECK(m.store().find("align.enc_end") != nullptr);
  CHECK(m.store().find("decoder.tok") != nullptr);
  CHECK(m.store().find("align.enc_start")->group == Group::align);
  CHECK(m.store().find("decoder.tok")->group == Group::decoder);
}

TEST_CASE("encode shapes and determinism") {
  LiftModel<double> m(tiny_config(), 9);
  Graph<double> g;
  Binder<double> b{&g, TrainMask{}, nullptr};
  std::vector<int> ids = {4, 9, 1, 7};
  auto h1 = m.encode(b, ids);
  auto h2 = m.encode(b, ids);
  CHECK(g.value(h1).rows() == 4);
  CHECK(g.value(h1).cols() == 16);
  for (int64_t i = 0; i < g.value(h1).size(); ++i)
    CHECK(g.value(h1).vec()[i] == g.value(h2).vec()[i]);

  auto h3 = m.encode(b, {4, 9, 1, 8});
  double dist = 0;
  for (int64_t i = 0; i < g.value(h1).size(); ++i)
    dist += std::abs(g.value(h1).vec()[i] - g.value(h3).vec()[i]);
  CHECK(dist > 0);

  CHECK_THROWS_AS(m.encode(b, {}), lift::ValueError);
  CHECK_THROWS_AS(m.encode(b, {999}), lift::IndexError);
}

TEST_CASE("lm_loss: masking, init magnitude, frozen groups get no grads") {
  auto cfg = tiny_config();
  LiftModel<double> m(cfg, 21);

  // loss near ln(V) at small init
  Graph<double> g;
  Binder<double> b{&g, TrainMask{}, nullptr};
  auto ctx = m.embed_instruction(b, {m.config().bos_id, 7, 8});
  auto loss = m.lm_loss(b, ctx, {9, 10, 11, m.config().eos_id});
  CHECK(g.value(loss).item() == doctest::Approx(std::log(cfg.dec_vocab)).epsilon(0.10));

  // changing a prompt token never changes which targets carry loss: replace
  // prompt token, loss stays finite and masked positions contribute nothing
  Graph<double> g2;
  Binder<double> b2{&g2, TrainMask{}, nullptr};
  auto ctx2 = m.embed_instruction(b2, {m.config().bos_id, 12, 8});
  auto loss2 = m.lm_loss(b2, ctx2, {9, 10, 11, m.config().eos_id});
  CHECK(std::isfinite(g2.value(loss2).item()));

  // gradient flows into theta (boundary embeddings) when trainable
  auto* bstart = m.store().find("align.enc_start");
  m.store().zero_grads();
  {
    Graph<double> g3;
    TrainMask mask;
    mask.align = true;
    std::vector<Tensor<double>> sinks(m.store().size());
    for (size_t i = 0; i < m.store().size(); ++i) {
      const auto& p = m.store().at(i);
      if (p.group == Group::align) sinks[i] = Tensor<double>(p.value.rows(), p.value.cols());
    }
    Binder<double> b3{&g3, mask, &sinks};
    auto X = m.encode(b3, {1, 2, 3});
    auto Xh = m.align(b3, X);
    auto Q = m.embed_instruction(b3, {7});
    auto sp = m.splice(b3, Q, Xh);
    auto l = m.lm_loss(b3, sp, {5, m.config().eos_id});
    g3.backward(l);
    double mag = 0;
    for (double v : sinks[bstart->index].vec()) mag += std::abs(v);
    CHECK(mag > 0);

    // encoder (frozen in this mask) must have no gradient anywhere
    for (size_t i = 0; i < m.store().size(); ++i) {
      const auto& p = m.store().at(i);
      if (p.group == Group::encoder) CHECK(sinks[i].size() == 0);
    }
  }

  // over-length responses are rejected
  Graph<double> g4;
  Binder<double> b4{&g4, TrainMask{}, nullptr};
  auto ctx4 = m.embed_instruction(b4, {m.config().bos_id});
  std::vector<int> too_long(cfg.max_seq + 1, 7);
  CHECK_THROWS_AS(m.lm_loss(b4, ctx4, too_long), lift::ValueError);
}

TEST_CASE("full forward+backward passes finite differences at d=16") {
  auto cfg = tiny_config();
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  LiftModel<double> m(cfg, 31);
  std::vector<int> enc_ids = {4, 9, 2};
  std::vector<int> q_ids = {7, 8};
  std::vector<int> resp = {9, 10, m.config().eos_id};

  TrainMask mask;
  mask.align = true;
  mask.encoder = true;
  mask.decoder = true;

  auto loss_value = [&]() {
    lift::num::Graph<double> g;
    Binder<double> b{&g, TrainMask{}, nullptr};
    auto X = m.encode(b, enc_ids);
    auto Xh = m.align(b, X);
    auto Q = m.embed_instruction(b, q_ids);
    auto sp = m.splice(b, Q, Xh);
    auto l = m.lm_loss(b, sp, resp);
    return g.value(l).item();
  };

  std::vector<Tensor<double>> sinks(m.store().size());
  for (size_t i = 0; i < m.store().size(); ++i) {
    const auto& p = m.store().at(i);
    sinks[i] = Tensor<double>(p.value.rows(), p.value.cols());
  }
  {
    lift::num::Graph<double> g;
    Binder<double> b{&g, mask, &sinks};
    auto X = m.encode(b, enc_ids);
    auto Xh = m.align(b, X);
    auto Q = m.embed_instruction(b, q_ids);
    auto sp = m.splice(b, Q, Xh);
    auto l = m.lm_loss(b, sp, resp);
    g.backward(l);
  }

  // spot-check a deterministic sample of parameters per group
  Rng rng(77);
  const double eps = 1e-4;
  double worst = 0;
  for (size_t pi = 0; pi < m.store().size(); ++pi) {
    auto& p = m.store().at(pi);
    int64_t n = p.value.size();
    for (int s = 0; s < 3; ++s) {
      int64_t e = static_cast<int64_t>(rng.next_below(n));
      double save = p.value.vec()[e];
      p.value.vec()[e] = save + eps;
      double up = loss_value();
      p.value.vec()[e] = save - eps;
      double dn = loss_value();
      p.value.vec()[e] = save;
      double fd = (up - dn) / (2 * eps);
      double an = sinks[pi].vec()[e];
      worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("overfit oracle: one sample memorized and reproduced greedily") {
  auto cfg = tiny_config(16, 23, 19);
  LiftModel<float> m(cfg, 13);
  lift::train::TrainItem item;
  item.encoder_path = true;
  item.enc_ids = {4, 9, 2, 11};
  item.prompt_ids = {7, 8};
  item.response_ids = {9, 10, 12, m.config().eos_id};

  lift::train::StageConfig sc;
  sc.trainable.align = true;
  sc.trainable.decoder = true;
  sc.base_lr = 1e-2;
  sc.epochs = 200;
  sc.batch_size = 1;
  sc.seed = 5;
  auto result = lift::train::train_lm(m, {item}, sc);
  CHECK(result.last_epoch_loss < 0.01);

  auto out = m.generate_greedy(
      [&](Binder<float>& b) {
        auto X = m.encode(b, item.enc_ids);
        auto Xh = m.align(b, X);
        auto Q = m.embed_instruction(b, item.prompt_ids);
        return m.splice(b, Q, Xh);
      },
      16);
  CHECK(out == item.response_ids);

  // budget of one emits exactly one token; generation is deterministic
  auto one = m.generate_greedy(
      [&](Binder<float>& b) { return m.embed_instruction(b, {m.config().bos_id, 7}); }, 1);
  CHECK(one.size() == 1);
  auto again = m.generate_greedy(
      [&](Binder<float>& b) {
        auto X = m.encode(b, item.enc_ids);
        auto Xh = m.align(b, X);
        auto Q = m.embed_instruction(b, item.prompt_ids);
        return m.splice(b, Q, Xh);
      },
      16);
  CHECK(again == out);
}

TEST_CASE("checkpoint round trip and digests") {
  namespace fs = std::filesystem;
  auto cfg = tiny_config();
  LiftModel<float> m(cfg, 99);
  auto ckpt = lift::train::to_checkpoint(m, "stage0", 10, 99);
  CHECK(ckpt.group_digests.size() == 3);

  std::string path = (fs::temp_directory_path() / "lift_test_ckpt.bin").string();
  lift::train::save_checkpoint(ckpt, path);
  auto loaded = lift::train::load_checkpoint(path);
  CHECK(loaded.group_digests == ckpt.group_digests);

  std::string path2 = path + ".2";
  lift::train::save_checkpoint(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(ba == bb);  // save -> load -> save is byte-identical

  // group digest equals the in-memory computation
  CHECK(ckpt.group_digests.at("align") == lift::train::group_digest(m, Group::align));

  // truncation is corruption
  std::ofstream trunc(path2, std::ios::binary | std::ios::trunc);
  trunc.write(ba.data(), static_cast<std::streamsize>(ba.size() / 2));
  trunc.close();
  CHECK_THROWS_AS(lift::train::load_checkpoint(path2), lift::CorruptionError);

  // wrong magic is a format error
  std::ofstream bad(path2, std::ios::binary | std::ios::trunc);
  bad << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxxxxxx";
  bad.close();
  CHECK_THROWS_AS(lift::train::load_checkpoint(path2), lift::FormatError);

  // loading parameters restores bit-identical values
  LiftModel<float> m2(cfg, 100);
  lift::train::load_parameters(m2, loaded);
  CHECK(lift::train::group_digest(m2, Group::decoder) == ckpt.group_digests.at("decoder"));
  fs::remove(path);
  fs::remove(path2);
}
