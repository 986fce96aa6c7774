#include <gtest/gtest.h>

#include <cmath>

#include "cmi/checks.hpp"
#include "cmi/ndmath/mlp.hpp"
#include "cmi/ndmath/optim.hpp"

using cmi::Graph;
using cmi::Mlp;
using cmi::Optimizer;
using cmi::OptimizerConfig;
using cmi::OptimizerKind;
using cmi::Parameter;
using cmi::Tensor;
using cmi::Var;

namespace {

Mlp single_layer(double w, double b) {
  cmi::Rng rng(0);
  Mlp m({1, 1}, false, rng);
  m.weight(0).value[0] = w;
  m.bias(0).value[0] = b;
  return m;
}

}  // namespace

TEST(Mlp, IdentityNetworkIsIdentity) {
  cmi::Rng rng(0);
  Mlp m({3, 3}, false, rng);
  m.weight(0).value = Tensor::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  m.bias(0).value.fill(0.0);
  const Tensor x = Tensor::from_rows({{0.5, -2.0, 3.0}});
  const Tensor y = m.apply(x);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(y[j], x[j]);
}

TEST(Mlp, SingleAffineLayer) {
  Mlp m = single_layer(2.0, 1.0);
  EXPECT_DOUBLE_EQ(m.apply(Tensor::scalar(3.0)).item(), 7.0);
  Graph g;
  EXPECT_DOUBLE_EQ(g.value(m.forward(g, g.constant(Tensor::scalar(3.0)))).item(), 7.0);
}

TEST(Mlp, TwoLayerReluByHand) {
  // h = relu([x, -x] + [0, 1]) at x = 2 -> [2, 0]; y = 3*h0 - 1*h1 + 0.5 = 6.5
  cmi::Rng rng(0);
  Mlp m({1, 2, 1}, false, rng);
  m.weight(0).value = Tensor::from_rows({{1.0, -1.0}});
  m.bias(0).value = Tensor::from_rows({{0.0, 1.0}});
  m.weight(1).value = Tensor::from_rows({{3.0}, {-1.0}});
  m.bias(1).value = Tensor::scalar(0.5);
  EXPECT_DOUBLE_EQ(m.apply(Tensor::scalar(2.0)).item(), 6.5);
  // At x = -2: h = relu([-2, 3]) = [0, 3]; y = -3 + 0.5 = -2.5
  EXPECT_DOUBLE_EQ(m.apply(Tensor::scalar(-2.0)).item(), -2.5);
}

TEST(Mlp, InputShapeMismatchThrows) {
  cmi::Rng rng(0);
  Mlp m = Mlp::make(2, 4, 3, 2, true, rng);
  EXPECT_THROW(m.apply(Tensor::zeros(1, 3)), std::domain_error);
  Graph g;
  EXPECT_THROW(m.forward(g, g.constant(Tensor::zeros(1, 3))), std::domain_error);
}

TEST(Mlp, InitializationWithinFanInBound) {
  cmi::Rng rng(5);
  Mlp m = Mlp::make(4, 16, 8, 3, false, rng);
  EXPECT_EQ(m.layer_count(), 3u);
  std::vector<std::size_t> fan_in{4, 16, 16};
  for (std::size_t l = 0; l < 3; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in[l]));
    for (double v : m.weight(l).value.storage()) EXPECT_LE(std::abs(v), bound);
    for (double v : m.bias(l).value.storage()) EXPECT_LE(std::abs(v), bound);
  }
}

TEST(Mlp, NormalizedOutputsAreUnitRows) {
  cmi::Rng rng(2);
  Mlp m = Mlp::make(2, 8, 3, 3, true, rng);
  const Tensor y = m.apply(cmi::checks::random_normal(10, 2, rng));
  for (std::size_t i = 0; i < y.rows(); ++i) EXPECT_NEAR(cmi::dot(y.row_span(i), y.row_span(i)), 1.0, 1e-12);
}

TEST(Mlp, ForwardAndApplyAgree) {
  cmi::Rng rng(3);
  Mlp m = Mlp::make(3, 7, 4, 4, true, rng);
  const Tensor x = cmi::checks::random_normal(6, 3, rng);
  Graph g;
  const Tensor a = g.value(m.forward(g, g.constant(x)));
  const Tensor b = m.apply(x);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Backward, SumGradientIsOnes) {
  Parameter x("x", Tensor::column({1.0, -2.0, 3.5}));
  Graph g;
  g.backward(g.sum(g.parameter(x)));
  for (double v : x.grad.storage()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, HalfSquaredNormGradientIsInput) {
  // 0.5 * ||x||^2 written as 0.5 * sum(x_i * x_i) via pair_dot of x with itself.
  Parameter x("x", Tensor::from_rows({{1.0, -2.0, 3.5}}));
  Graph g;
  Var xv = g.parameter(x);
  g.backward(g.scale(g.pair_dot(xv, xv, {0}, {0}), 0.5));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x.grad[i], x.value[i], 1e-15);
}

TEST(BackwardProperty, RandomNetworksMatchFiniteDifferences) {
  cmi::Rng rng(21);
  for (int it = 0; it < 20; ++it) {
    Mlp m = Mlp::make(3, 6, 4, 3, it % 2 == 0, rng);
    const Tensor x = cmi::checks::random_normal(5, 3, rng);
    const double err = cmi::checks::gradient_relative_error(m.parameters(), [&](Graph& g) {
      return g.sum(g.relu(g.add_scalar(m.forward(g, g.constant(x)), 0.2)));
    }, 1e-5);
    EXPECT_LE(err, 1e-4) << "instance " << it;
  }
}

TEST(Optimizer, PlainSgdStep) {
  Parameter p("p", Tensor::column({1.0, 2.0}));
  OptimizerConfig c;
  c.learning_rate = 1.0;
  c.momentum = 0.0;
  c.weight_decay = 0.0;
  Optimizer opt(c, {&p});
  p.grad = Tensor::column({0.25, -0.5});
  opt.step();
  EXPECT_DOUBLE_EQ(p.value[0], 0.75);
  EXPECT_DOUBLE_EQ(p.value[1], 2.5);
}

TEST(Optimizer, MomentumSecondStepIsOnePointNineLrG) {
  Parameter p("p", Tensor::scalar(0.0));
  OptimizerConfig c;
  c.learning_rate = 0.1;
  c.momentum = 0.9;
  Optimizer opt(c, {&p});
  const double g = 2.0;
  p.grad = Tensor::scalar(g);
  opt.step();
  const double after_first = p.value.item();
  EXPECT_NEAR(after_first, -0.1 * g, 1e-15);
  opt.step();
  EXPECT_NEAR(p.value.item() - after_first, -1.9 * 0.1 * g, 1e-15);
}

TEST(Optimizer, WeightDecayAddsL2Term) {
  Parameter p("p", Tensor::scalar(2.0));
  OptimizerConfig c;
  c.learning_rate = 0.5;
  c.momentum = 0.0;
  c.weight_decay = 0.1;
  Optimizer opt(c, {&p});
  p.grad = Tensor::scalar(1.0);
  opt.step();
  EXPECT_DOUBLE_EQ(p.value.item(), 2.0 - 0.5 * (1.0 + 0.1 * 2.0));
}

TEST(Optimizer, AdamFirstStepByHand) {
  // Step 1: m = 0.1 g, v = 0.001 g^2; bias-corrected mhat = g, vhat = g^2,
  // so the update is lr * g / (|g| + eps).
  Parameter p("p", Tensor::column({1.0, 1.0}));
  OptimizerConfig c;
  c.kind = OptimizerKind::Adam;
  c.learning_rate = 0.03;
  Optimizer opt(c, {&p});
  p.grad = Tensor::column({0.5, -4.0});
  opt.step();
  EXPECT_NEAR(p.value[0], 1.0 - 0.03 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p.value[1], 1.0 + 0.03 * 4.0 / (4.0 + 1e-8), 1e-15);
}

TEST(Optimizer, ShapeMismatchThrows) {
  Parameter p("p", Tensor::column({1.0, 2.0}));
  Optimizer opt(OptimizerConfig{}, {&p});
  p.grad = Tensor::scalar(1.0);
  EXPECT_THROW(opt.step(), std::domain_error);
}

TEST(Optimizer, ZeroGradClearsEveryParameter) {
  Parameter a("a", Tensor::scalar(1.0)), b("b", Tensor::column({1, 2}));
  a.grad = Tensor::scalar(3.0);
  b.grad = Tensor::column({4, 5});
  Optimizer opt(OptimizerConfig{}, {&a, &b});
  opt.zero_grad();
  EXPECT_EQ(a.grad.item(), 0.0);
  EXPECT_EQ(b.grad[1], 0.0);
}

TEST(Determinism, SameSeedGivesBitIdenticalTrajectories) {
  auto train = [](std::uint64_t seed) {
    cmi::Rng rng(seed);
    Mlp m = Mlp::make(2, 8, 3, 3, true, rng);
    const Tensor x = cmi::checks::random_normal(16, 2, rng);
    OptimizerConfig c;
    c.kind = OptimizerKind::Adam;
    Optimizer opt(c, m.parameters());
    for (int s = 0; s < 25; ++s) {
      opt.zero_grad();
      Graph g;
      Var y = m.forward(g, g.constant(x));
      g.backward(g.sum(g.pair_dot(y, y, {0, 1, 2}, {3, 4, 5})));
      opt.step();
    }
    std::vector<double> flat;
    for (Parameter* p : m.parameters())
      for (double v : p->value.storage()) flat.push_back(v);
    return flat;
  };
  EXPECT_EQ(train(9), train(9));
  EXPECT_NE(train(9), train(10));
}
