// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <quadmath.h>

#include <cmath>
#include <random>

#include "tsgan/error.hpp"
#include "tsgan/optim_loss.hpp"

using namespace tsgan;

namespace {

// The textbook -[y log s + (1 - y) log(1 - s)] evaluated in binary128. In
// double, log(1 - s) itself cancels catastrophically once s is near 1 (about
// 1e-10 absolute error at x = 14, 1e-3 at x = 30), so a double evaluation of
// the naive form is not a usable reference at this tolerance.
double naive_bce(double x, double y) {
  const __float128 s = 1 / (1 + expq(-static_cast<__float128>(x)));
  return static_cast<double>(-(y * logq(s) + (1 - static_cast<__float128>(y)) * logq(1 - s)));
}

// Adam on f(theta) = theta^2 written out as plain scalar recurrences.
std::vector<double> scalar_adam_trace(double theta, int steps) {
  const double lr = 2e-4, b1 = 0.5, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  std::vector<double> trace;
  for (int t = 1; t <= steps; ++t) {
    const double g = 2.0 * theta;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mh = m / (1.0 - std::pow(b1, t));
    const double vh = v / (1.0 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
    trace.push_back(theta);
  }
  return trace;
}

struct Scalar {
  Vector theta = Vector::Ones(1);
  Vector grad = Vector::Zero(1);
  std::vector<ParamBlock> params() { return {{"theta", 1, 1, {theta.data(), 1}}}; }
  std::vector<ConstParamBlock> grads() const { return {{"theta", 1, 1, {grad.data(), 1}}}; }
  std::vector<ConstParamBlock> cparams() const { return {{"theta", 1, 1, {theta.data(), 1}}}; }
};

}  // namespace

TEST(Sigmoid, KnownValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
  EXPECT_TRUE(std::isfinite(sigmoid(710.0)));
  EXPECT_LE(sigmoid(710.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-710.0)));
  EXPECT_GT(sigmoid(-710.0), 0.0);
  EXPECT_LT(sigmoid(30.0), 1.0);
}

TEST(Bce, KnownValues) {
  EXPECT_NEAR(bce_with_logits(0.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logits(-100.0, 1.0), 100.0, 1e-12);
  EXPECT_NEAR(bce_with_logits(100.0, 1.0), 3.720075976020836e-44, 1e-56);
  EXPECT_THROW(bce_with_logits(0.0, 0.5), UsageError);
}

TEST(Bce, FiniteAtExtremeLogits) {
  for (double x : {-500.0, 500.0, -1e300, 1e300}) {
    for (double y : {0.0, 1.0}) {
      const double l = bce_with_logits(x, y);
      EXPECT_TRUE(std::isfinite(l)) << x << ' ' << y;
      EXPECT_GE(l, 0.0);
    }
  }
}

TEST(Bce, MatchesNaiveFormInModerateRange) {
  for (double x = -30.0; x <= 30.0; x += 0.0625) {
    for (double y : {0.0, 1.0}) EXPECT_NEAR(bce_with_logits(x, y), naive_bce(x, y), 1e-10) << x;
  }
}

TEST(Bce, GradientClosedForm) {
  EXPECT_EQ(bce_with_logits_grad(0.0, 1.0), -0.5);
  EXPECT_EQ(bce_with_logits_grad(0.0, 0.0), 0.5);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    for (double y : {0.0, 1.0}) {
      const double h = 1e-5;
      const double fd = (bce_with_logits(x + h, y) - bce_with_logits(x - h, y)) / (2 * h);
      const double an = bce_with_logits_grad(x, y);
      // Gradients below ~1e-6 are dominated by FD cancellation, so use a floor.
      EXPECT_LE(std::abs(fd - an), 1e-6 * std::max({std::abs(an), std::abs(fd), 1e-3})) << x;
    }
  }
}

TEST(Bce, MeanOverBatch) {
  const std::vector<double> logits{0.0, 0.0, 0.0};
  EXPECT_NEAR(bce_with_logits_mean(logits, 0.0), std::log(2.0), 1e-15);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Scalar s;
  auto state = make_adam_state(s.cparams(), {});
  adam_step(s.params(), s.grads(), state);
  EXPECT_EQ(s.theta(0), 1.0);
  EXPECT_EQ(state.t, 1);
}

TEST(Adam, OneStepByHand) {
  Scalar s;
  s.grad(0) = 2.0;
  auto state = make_adam_state(s.cparams(), {});
  adam_step(s.params(), s.grads(), state);
  EXPECT_NEAR(s.theta(0), 1.0 - 2e-4 * (2.0 / (2.0 + 1e-8)), 1e-16);
}

TEST(Adam, TenStepTraceOnQuadratic) {
  const auto want = scalar_adam_trace(1.0, 10);
  Scalar s;
  auto state = make_adam_state(s.cparams(), {2e-4, 0.5, 0.999, 1e-8});
  for (int t = 0; t < 10; ++t) {
    s.grad(0) = 2.0 * s.theta(0);
    adam_step(s.params(), s.grads(), state);
    EXPECT_NEAR(s.theta(0), want[static_cast<std::size_t>(t)], 1e-12) << "step " << t + 1;
    if (t > 0) EXPECT_LT(s.theta(0), want[static_cast<std::size_t>(t - 1)]);
  }
}

TEST(Adam, MonotoneOnQuadraticFor100Steps) {
  Scalar s;
  auto state = make_adam_state(s.cparams(), {});
  double prev = std::abs(s.theta(0));
  for (int t = 0; t < 100; ++t) {
    s.grad(0) = 2.0 * s.theta(0);
    adam_step(s.params(), s.grads(), state);
    ASSERT_LT(std::abs(s.theta(0)), prev);
    prev = std::abs(s.theta(0));
  }
}

TEST(Adam, NonFiniteGradientNamesBlockAndLeavesState) {
  Scalar s;
  s.grad(0) = NAN;
  auto state = make_adam_state(s.cparams(), {});
  try {
    adam_step(s.params(), s.grads(), state);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
  }
  EXPECT_EQ(s.theta(0), 1.0);
  EXPECT_EQ(state.t, 0);
}

TEST(Adam, Deterministic) {
  Scalar a, b;
  a.grad(0) = b.grad(0) = 0.37;
  auto sa = make_adam_state(a.cparams(), {});
  auto sb = make_adam_state(b.cparams(), {});
  for (int i = 0; i < 5; ++i) {
    adam_step(a.params(), a.grads(), sa);
    adam_step(b.params(), b.grads(), sb);
  }
  EXPECT_EQ(a.theta(0), b.theta(0));
}

TEST(Clip, GlobalNormRescalesJointly) {
  Vector a{{3.0}}, b{{4.0}};
  std::vector<ParamBlock> g{{"a", 1, 1, {a.data(), 1}}, {"b", 1, 1, {b.data(), 1}}};
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(a(0), 0.6, 1e-15);
  EXPECT_NEAR(b(0), 0.8, 1e-15);
  EXPECT_NEAR(clip_global_norm(g, 0.0), 1.0, 1e-15);  // disabled
  EXPECT_NEAR(a(0), 0.6, 1e-15);
}
