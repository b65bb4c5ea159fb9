#include <gtest/gtest.h>

#include <cmath>

#include "srres/optim.hpp"

using namespace srres;

namespace {

// One parameter buffer plus matching gradient set.
struct Scalars {
  std::vector<double> values;
  GradientSet<double> grads;

  explicit Scalars(std::vector<double> v) : values(std::move(v)) {
    grads.names = {"p"};
    grads.grads = {std::vector<double>(values.size(), 0.0)};
  }
  std::vector<ParamSlot<double>> slots() { return {{"p", {values.size()}, std::span(values)}}; }
};

ModelConfig tiny_config() {
  ModelConfig c;
  c.feat_channels = 4;
  c.mapping_layers = 1;
  return c;
}

}  // namespace

TEST(MseLoss, HandExample) {
  const Tensor pred({1, 1, 1, 2}, {1, 2});
  const Tensor target({1, 1, 1, 2}, {1, 4});
  const auto r = mse_loss(pred, target);
  EXPECT_DOUBLE_EQ(r.loss.value, 2.0);
  EXPECT_EQ(r.loss.n, 2u);
  EXPECT_EQ(r.d_pred.vec(), (std::vector<float>{0, -2}));
}

TEST(MseLoss, IdenticalInputs) {
  Rng rng(1);
  const Tensor a = random_normal<float>({2, 1, 3, 3}, rng, 0.0f, 1.0f);
  const auto r = mse_loss(a, a);
  EXPECT_EQ(r.loss.value, 0.0);
  for (float v : r.d_pred.data()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(mse_loss(a, Tensor({2, 1, 3, 4}, 0.0f)), ShapeMismatch);
}

TEST(MseLoss, SymmetricAndMatchesScalarLoop) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_normal<float>({1 + rng.below(3), 1, 4, 5}, rng, 0.0f, 2.0f);
    const Tensor b = random_normal<float>(a.shape(), rng, 0.0f, 2.0f);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
    const double expected = sum / double(a.size());
    EXPECT_NEAR(mse_loss(a, b).loss.value, expected, 1e-6 * expected);
    EXPECT_EQ(mse_loss(a, b).loss.value, mse_loss(b, a).loss.value);
  }
}

TEST(MseLoss, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    TensorD pred = random_normal<double>({1, 1, 3, 4}, rng, 0.0, 1.0);
    const TensorD target = random_normal<double>(pred.shape(), rng, 0.0, 1.0);
    const auto r = mse_loss(pred, target);
    auto loss = [&]() { return mse_loss(pred, target).loss.value; };
    EXPECT_TRUE(grad_check(pred.data(), r.d_pred.data(), loss, {}, rng).pass);
  }
}

TEST(Sgd, ScalarStep) {
  Scalars s({1.0});
  s.grads.grads[0] = {0.5};
  OptimState st;
  st.kind = OptimizerKind::kSgd;
  st.lr = 0.1;
  sgd_step<double>(s.slots(), s.grads, st);
  EXPECT_DOUBLE_EQ(s.values[0], 0.95);
}

TEST(Sgd, FixedPoints) {
  Scalars s({1.0, -2.0});
  OptimState st;
  st.kind = OptimizerKind::kSgd;
  st.lr = 0.1;
  sgd_step<double>(s.slots(), s.grads, st);
  EXPECT_EQ(s.values, (std::vector<double>{1.0, -2.0}));
  s.grads.grads[0] = {3.0, 4.0};
  st.lr = 0.0;
  sgd_step<double>(s.slots(), s.grads, st);
  EXPECT_EQ(s.values, (std::vector<double>{1.0, -2.0}));
  s.grads.grads[0] = {3.0};
  EXPECT_THROW(sgd_step<double>(s.slots(), s.grads, st), ShapeMismatch);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Scalars s({0.0});
  s.grads.grads[0] = {1.0};
  OptimState st;
  adam_step<double>(s.slots(), s.grads, st);
  EXPECT_EQ(st.t, 1u);
  EXPECT_NEAR(s.values[0], -1e-4 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientWithZeroMoments) {
  Scalars s({0.25, -3.0});
  OptimState st;
  adam_step<double>(s.slots(), s.grads, st);
  EXPECT_EQ(s.values, (std::vector<double>{0.25, -3.0}));
}

TEST(Adam, MatchesScalarRecurrence) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Scalars s({rng.normal(), rng.normal()});
    OptimState st;
    st.lr = rng.uniform(1e-4, 1e-2);
    std::vector<double> theta = s.values, m(2, 0.0), v(2, 0.0);
    for (int step = 1; step <= 2; ++step) {
      const std::vector<double> g = {rng.normal(), rng.normal()};
      s.grads.grads[0] = g;
      adam_step<double>(s.slots(), s.grads, st);
      for (int i = 0; i < 2; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        const double mh = m[i] / (1 - std::pow(0.9, step)), vh = v[i] / (1 - std::pow(0.999, step));
        theta[i] -= st.lr * mh / (std::sqrt(vh) + 1e-8);
      }
    }
    EXPECT_NEAR(s.values[0], theta[0], 1e-12);
    EXPECT_NEAR(s.values[1], theta[1], 1e-12);
  }
}

TEST(Optimizers, StayFiniteOverManyRandomSteps) {
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    Rng rng(5);
    std::vector<float> values(16, 0.0f);
    GradientSet<float> grads{{"p"}, {std::vector<float>(16)}};
    std::vector<ParamSlot<float>> slots = {{"p", {16}, std::span(values)}};
    OptimState st;
    st.kind = kind;
    for (int step = 0; step < 10000; ++step) {
      for (float& g : grads.grads[0]) {
        // Mix exact zeros with magnitudes spanning many decades.
        g = rng.below(4) == 0 ? 0.0f : float(rng.normal() * std::pow(10.0, rng.uniform(-20, 6)));
      }
      optimizer_step<float>(slots, grads, st);
    }
    for (float v : values) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Optimizers, OneStepDecreasesLossOnFixedBatch) {
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    Rng rng(6);
    auto m = model_init<double>(tiny_config(), rng);
    const TensorD lr = random_uniform<double>({2, 1, 6, 6}, rng, 0.0, 1.0);
    const TensorD hr = random_uniform<double>({2, 1, 12, 12}, rng, 0.0, 1.0);
    auto fwd = m.forward(lr, Mode::kTrain);
    const auto loss = mse_loss(fwd.sr, hr);
    const auto grads = m.backward(fwd.cache, loss.d_pred);
    OptimState st;
    st.kind = kind;
    st.lr = 1e-5;
    optimizer_step<double>(m.parameters(), grads, st);
    EXPECT_LT(mse_loss(m.forward(lr, Mode::kTrain).sr, hr).loss.value, loss.loss.value);
  }
}

TEST(ClipGradNorm, RescalesOnlyAboveLimit) {
  GradientSet<double> g{{"a", "b"}, {{3.0}, {4.0}}};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 10.0), 5.0);
  EXPECT_EQ(g.grads[1][0], 4.0);
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g.grads[0][0], 0.6, 1e-15);
  EXPECT_NEAR(g.grads[1][0], 0.8, 1e-15);
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-9), 0.1);
}

TEST(GradCheck, ConvLayerPasses) {
  Rng rng(7);
  auto p = conv_init<double>(2, 3, 3, rng);
  TensorD x = random_normal<double>({1, 2, 5, 5}, rng, 0.0, 1.0);
  const TensorD proj = random_normal<double>({1, 3, 5, 5}, rng, 0.0, 1.0);
  auto loss = [&]() {
    const auto y = conv2d_forward(x, p).y;
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * proj[i];
    return s;
  };
  const auto g = conv2d_backward(proj, conv2d_forward(x, p).cache);
  EXPECT_TRUE(grad_check(x.data(), g.d_input.data(), loss, {}, rng).pass);
  EXPECT_TRUE(grad_check(p.weight.data(), g.d_weight.data(), loss, {}, rng).pass);
}

TEST(GradCheck, SignFlippedBackwardFails) {
  Rng rng(8);
  auto p = conv_init<double>(2, 3, 3, rng);
  TensorD x = random_normal<double>({1, 2, 5, 5}, rng, 0.0, 1.0);
  const TensorD proj = random_normal<double>({1, 3, 5, 5}, rng, 0.0, 1.0);
  auto loss = [&]() {
    const auto y = conv2d_forward(x, p).y;
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * proj[i];
    return s;
  };
  auto g = conv2d_backward(proj, conv2d_forward(x, p).cache);
  for (double& v : g.d_input.data()) v = -v;
  const auto report = grad_check(x.data(), g.d_input.data(), loss, {}, rng);
  EXPECT_FALSE(report.pass);
  EXPECT_GT(report.max_rel_err, 1.0);
}

TEST(GradCheck, SamplesRequestedCount) {
  Rng rng(9);
  std::vector<double> coords(50, 1.0), analytic(50, 2.0);
  auto loss = [&]() {
    double s = 0;
    for (double c : coords) s += c * c;
    return s;
  };
  GradCheckOptions opts;
  opts.samples = 7;
  const auto r = grad_check(coords, analytic, loss, opts, rng);
  EXPECT_EQ(r.checked, 7u);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(coords, std::vector<double>(50, 1.0));
}

TEST(GradCheck, ZeroNetworkHasExactBiasGradients) {
  Rng rng(10);
  auto m = model_init<double>(tiny_config(), rng);
  for (auto& slot : m.parameters()) std::fill(slot.values.begin(), slot.values.end(), 0.0);
  ModelConfig c = m.config();
  c.residual = false;
  SrModel<double> bare(c, m.blocks(), m.reconstruction());
  const TensorD zeros({1, 1, 6, 6}, 0.0);
  const auto report = grad_check_model(bare, zeros, TensorD({1, 1, 12, 12}, 0.0), {}, rng);
  EXPECT_EQ(report.max_rel_err, 0.0);
  EXPECT_GT(report.checked, 0u);
}
