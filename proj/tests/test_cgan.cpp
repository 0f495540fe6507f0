// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tsgan/cgan.hpp"
#include "tsgan/checkpoint.hpp"

using namespace tsgan;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.noise_dim = 3;
  c.condition_dim = 5;
  c.batch_size = 4;
  c.epochs = 2;
  c.hidden_size = 6;
  c.disc_layers = {8, 4};
  c.seed = 123;
  return c;
}

std::vector<double> sine(std::size_t n, double period) {
  std::vector<double> s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = 50.0 + 5.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / period);
  return s;
}

std::vector<ConditionedPair> pairs_for(const std::vector<double>& prices, const ScalerParams& sc, std::size_t d) {
  return make_pairs(transform(prices, sc), d);
}

double checksum(std::span<const ConstParamBlock> blocks) {
  double s = 0.0;
  double w = 1.0;
  for (const auto& b : blocks) {
    for (double v : b.values) {
      s += w * v;
      w += 1e-3;
    }
  }
  return s;
}

std::string serialize(const Checkpoint& c) {
  std::ostringstream out;
  save_checkpoint(out, c);
  return out.str();
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(Generator, ZeroNetworkEmitsZero) {
  auto cfg = small_config();
  cfg.init = InitScheme::zeros;
  Rng rng(1);
  const auto gen = make_generator(cfg, rng);
  const std::vector<double> cond{1.0, -2.0, 3.0, 0.5, 9.0};
  EXPECT_EQ(generate(gen, cond, rng), 0.0);
}

TEST(Generator, SameSeedSameDraw) {
  const auto cfg = small_config();
  Rng init(7);
  const auto gen = make_generator(cfg, init);
  const std::vector<double> cond{0.1, 0.2, 0.3, 0.4, 0.5};
  Rng a(99), b(99);
  EXPECT_EQ(generate(gen, cond, a), generate(gen, cond, b));
}

TEST(Generator, TwoStepHandTrace) {
  // hidden 1, noise 1, window 2: every weight scripted, noise fixed.
  Generator gen;
  auto gate = [](double wx0, double wx1, double wz) {
    return GateWeights{Matrix{{wx0, wx1}}, Matrix::Constant(1, 1, wz)};
  };
  gen.lstm.forget_gate = gate(0.2, -0.1, 0.3);
  gen.lstm.input_gate = gate(0.5, 0.4, -0.2);
  gen.lstm.output_gate = gate(-0.3, 0.2, 0.1);
  gen.lstm.candidate = gate(0.7, -0.6, 0.25);
  gen.head = {Matrix::Constant(1, 1, 1.5), Vector::Constant(1, -0.1), Activation::identity};
  const double y[2] = {0.4, -0.9}, z = 0.35;

  double c = 0.0, h = 0.0;
  for (double yt : y) {
    const double f = sig(0.2 * yt - 0.1 * z + 0.3 * h);
    const double i = sig(0.5 * yt + 0.4 * z - 0.2 * h);
    const double o = sig(-0.3 * yt + 0.2 * z + 0.1 * h);
    const double g = std::tanh(0.7 * yt - 0.6 * z + 0.25 * h);
    c = c * f + i * g;
    h = std::tanh(c) * o;
  }
  const double want = 1.5 * h - 0.1;
  const auto got = generator_forward(gen, Matrix{{y[0]}, {y[1]}}, Matrix::Constant(1, 1, z));
  EXPECT_NEAR(got.output(0, 0), want, 1e-15);
}

TEST(Discriminator, ZeroNetworkGivesLogitZero) {
  auto cfg = small_config();
  cfg.init = InitScheme::zeros;
  Rng rng(1);
  const auto disc = make_discriminator(cfg, rng);
  const std::vector<double> cond{1, 2, 3, 4, 5};
  EXPECT_EQ(discriminate(disc, cond, 7.0), 0.0);
  EXPECT_EQ(sigmoid(discriminate(disc, cond, 7.0)), 0.5);
}

TEST(Discriminator, TwoLayerHandComputation) {
  Discriminator d;
  d.layers.push_back({Matrix{{1.0, -1.0, 0.5}, {0.2, 0.3, -2.0}}, Vector{{0.1, 0.0}}, Activation::relu});
  d.layers.push_back({Matrix{{2.0, -3.0}}, Vector::Constant(1, 0.25), Activation::identity});
  const std::vector<double> cond{0.6, 0.1};
  const double x = 0.8;
  const double h0 = std::max(0.0, 1.0 * 0.6 - 1.0 * 0.1 + 0.5 * x + 0.1);
  const double h1 = std::max(0.0, 0.2 * 0.6 + 0.3 * 0.1 - 2.0 * x);
  EXPECT_NEAR(discriminate(d, cond, x), 2.0 * h0 - 3.0 * h1 + 0.25, 1e-15);
  EXPECT_EQ(discriminate(d, cond, x), discriminate(d, cond, x));
}

TEST(TrainSteps, ZeroNetworksAnchorAtLn2) {
  auto cfg = small_config();
  cfg.init = InitScheme::zeros;
  const auto prices = sine(40, 13.0);
  const auto sc = fit(prices);
  const auto pairs = pairs_for(prices, sc, cfg.condition_dim);
  auto ckpt = initial_checkpoint(cfg, sc);
  cfg.epochs = 1;
  ckpt.config.epochs = 1;
  continue_training(ckpt, pairs);
  ASSERT_FALSE(ckpt.history.batch_d.empty());
  EXPECT_NEAR(ckpt.history.batch_d.front(), std::log(2.0), 1e-9);
  EXPECT_NEAR(ckpt.history.batch_g.front(), std::log(2.0), 1e-9);
}

TEST(TrainSteps, SaturatedDiscriminatorLosses) {
  const auto cfg = small_config();
  Rng rng(3);
  auto gen = make_generator(cfg, rng);
  // Output layer that ignores its input and emits a fixed logit.
  auto fixed_disc = [&](double logit) {
    auto d = make_discriminator(cfg, rng);
    d.layers.back().weights.setZero();
    d.layers.back().bias.setConstant(logit);
    return d;
  };
  Batch batch{Matrix::Random(5, 4), Matrix::Random(1, 4)};

  // Real +50 / fake -50 cannot be produced by a D that ignores its input, so
  // check the two halves of L_D through the loss directly.
  const double near_zero = 0.5 * (bce_with_logits(50.0, 1.0) + bce_with_logits(-50.0, 0.0));
  EXPECT_LT(near_zero, 1e-21);

  auto d_pos = fixed_disc(50.0);
  auto adam_g = make_adam_state(param_blocks(std::as_const(gen)), cfg.adam());
  EXPECT_LT(train_generator_step(gen, d_pos, batch.conditions, adam_g, rng, cfg.clip_norm), 1e-21);

  auto d_neg = fixed_disc(-3.0);
  auto adam_d = make_adam_state(param_blocks(std::as_const(d_neg)), cfg.adam());
  const double l = train_discriminator_step(d_neg, gen, batch, adam_d, rng, cfg.clip_norm);
  EXPECT_NEAR(l, 0.5 * (bce_with_logits(-3.0, 1.0) + bce_with_logits(-3.0, 0.0)), 1e-12);
}

TEST(TrainSteps, EachStepTouchesOnlyItsNetwork) {
  const auto cfg = small_config();
  Rng rng(4);
  auto gen = make_generator(cfg, rng);
  auto disc = make_discriminator(cfg, rng);
  auto adam_g = make_adam_state(param_blocks(std::as_const(gen)), cfg.adam());
  auto adam_d = make_adam_state(param_blocks(std::as_const(disc)), cfg.adam());
  Batch batch{Matrix::Random(5, 4), Matrix::Random(1, 4)};

  const double g0 = checksum(param_blocks(std::as_const(gen)));
  const double d0 = checksum(param_blocks(std::as_const(disc)));
  const double ld = train_discriminator_step(disc, gen, batch, adam_d, rng, cfg.clip_norm);
  EXPECT_EQ(checksum(param_blocks(std::as_const(gen))), g0);
  const double d1 = checksum(param_blocks(std::as_const(disc)));
  EXPECT_NE(d1, d0);

  const double lg = train_generator_step(gen, disc, batch.conditions, adam_g, rng, cfg.clip_norm);
  EXPECT_EQ(checksum(param_blocks(std::as_const(disc))), d1);
  EXPECT_NE(checksum(param_blocks(std::as_const(gen))), g0);
  EXPECT_TRUE(std::isfinite(ld) && ld > 0.0);
  EXPECT_TRUE(std::isfinite(lg) && lg > 0.0);
}

TEST(TrainSteps, GeneratorGradientFlowsThroughDiscriminator) {
  const auto cfg = small_config();
  Rng rng(5);
  const auto gen = make_generator(cfg, rng);
  const auto disc = make_discriminator(cfg, rng);
  const Matrix cond = Matrix::Random(5, 3);
  const Matrix noise = sample_noise(cfg.noise_dim, 3, rng);

  auto loss = [&](const Generator& g) {
    const auto out = generator_forward(g, cond, noise).output;
    const auto logits = discriminator_forward(disc, cond, out).logits;
    return bce_with_logits_mean({logits.data(), 3}, 1.0);
  };
  const auto fwd = generator_forward(gen, cond, noise);
  const auto judged = discriminator_forward(disc, cond, fwd.output);
  Matrix lg(1, 3);
  for (int j = 0; j < 3; ++j) lg(0, j) = bce_with_logits_grad(judged.logits(0, j), 1.0) / 3.0;
  const Matrix value_grad = discriminator_backward(disc, judged, lg).input_grad.bottomRows(1);
  const auto grads = generator_backward(gen, fwd, value_grad);

  // Spot-check the head bias and one LSTM weight against central differences.
  const double h = 1e-6;
  auto g = gen;
  g.head.bias(0) += h;
  const double up = loss(g);
  g.head.bias(0) -= 2 * h;
  const double down = loss(g);
  const double fd = (up - down) / (2 * h);
  EXPECT_NE(grads.head.bias(0), 0.0);
  EXPECT_NEAR(grads.head.bias(0), fd, 1e-6 * std::max(1e-3, std::abs(fd)));

  g = gen;
  g.lstm.candidate.from_input(1, 0) += h;
  const double up2 = loss(g);
  g.lstm.candidate.from_input(1, 0) -= 2 * h;
  const double fd2 = (up2 - loss(g)) / (2 * h);
  EXPECT_NE(grads.lstm.candidate.from_input(1, 0), 0.0);
  EXPECT_NEAR(grads.lstm.candidate.from_input(1, 0), fd2, 1e-5 * std::max(1e-3, std::abs(fd2)));
}

TEST(Train, SingleEpochSmoke) {
  auto cfg = small_config();
  cfg.batch_size = 2;
  cfg.epochs = 1;
  const std::vector<double> prices{1, 2, 3, 4, 5, 6, 7};
  const auto sc = fit(prices);
  const auto pairs = pairs_for(prices, sc, cfg.condition_dim);
  ASSERT_EQ(pairs.size(), 2u);
  const auto start = initial_checkpoint(cfg, sc);
  const auto done = train(cfg, pairs, sc);
  EXPECT_EQ(done.epoch, 1u);
  EXPECT_EQ(done.history.epoch_d.size(), 1u);
  EXPECT_EQ(done.history.epoch_g.size(), 1u);
  EXPECT_EQ(done.history.batch_d.size(), 1u);
  EXPECT_NE(checksum(param_blocks(done.generator)), checksum(param_blocks(start.generator)));
  EXPECT_NE(checksum(param_blocks(done.discriminator)), checksum(param_blocks(start.discriminator)));
}

TEST(Train, RejectsTooFewPairsAndWrongWindow) {
  auto cfg = small_config();
  const std::vector<double> prices{1, 2, 3, 4, 5, 6, 7};
  const auto sc = fit(prices);
  EXPECT_THROW(train(cfg, pairs_for(prices, sc, 5), sc), DataError);  // 2 pairs < batch 4
  cfg.batch_size = 1;
  EXPECT_THROW(train(cfg, pairs_for(prices, sc, 3), sc), DataError);  // window 3 != 5
  cfg.noise_dim = 0;
  EXPECT_THROW(train(cfg, pairs_for(prices, sc, 5), sc), UsageError);
}

TEST(Train, DeterministicAndResumable) {
  auto cfg = small_config();
  cfg.epochs = 4;
  const auto prices = sine(60, 17.0);
  const auto sc = fit(prices);
  const auto pairs = pairs_for(prices, sc, cfg.condition_dim);

  const auto a = train(cfg, pairs, sc);
  const auto b = train(cfg, pairs, sc);
  EXPECT_EQ(a.history.batch_d, b.history.batch_d);
  EXPECT_EQ(a.history.epoch_g, b.history.epoch_g);
  EXPECT_EQ(serialize(a), serialize(b));
  for (double l : a.history.batch_d) EXPECT_TRUE(std::isfinite(l) && l >= 0.0);
  for (double l : a.history.batch_g) EXPECT_TRUE(std::isfinite(l) && l >= 0.0);

  // Stop after two epochs, round-trip through the container, then finish.
  auto half_cfg = cfg;
  half_cfg.epochs = 2;
  const auto half = train(half_cfg, pairs, sc);
  std::istringstream in(serialize(half));
  auto resumed = load_checkpoint(in);
  resumed.config.epochs = 4;
  continue_training(resumed, pairs);
  EXPECT_EQ(resumed.history.batch_d, a.history.batch_d);
  EXPECT_EQ(serialize(resumed), serialize(a));
}

TEST(Train, NonFiniteAbortCarriesLastGoodState) {
  auto cfg = small_config();
  cfg.epochs = 1;
  const auto prices = sine(30, 11.0);
  const auto sc = fit(prices);
  auto pairs = pairs_for(prices, sc, cfg.condition_dim);
  pairs[3].target = std::nan("");
  try {
    train(cfg, pairs, sc);
    FAIL() << "expected TrainAborted";
  } catch (const TrainAborted& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
    EXPECT_EQ(e.last_good().epoch, 0u);
  }
}

TEST(Synthesis, ConditionedLengthAndZeroGenerator) {
  auto cfg = small_config();
  cfg.init = InitScheme::zeros;
  const auto prices = sine(300, 40.0);
  const auto sc = fit(prices);
  const auto ckpt = initial_checkpoint(cfg, sc);
  for (auto mode : {SynthesisMode::conditioned, SynthesisMode::recursive}) {
    const auto out = synthesize_series(ckpt, prices, mode, 1);
    ASSERT_EQ(out.size(), prices.size() - cfg.condition_dim);
    for (double v : out) EXPECT_EQ(v, sc.mean);
  }
  EXPECT_THROW(synthesize_series(ckpt, std::span(prices).first(5), SynthesisMode::conditioned, 1), DataError);
}

TEST(Synthesis, ConditionedAlignsWithPairTargets) {
  const auto cfg = small_config();
  const auto prices = sine(120, 30.0);
  const auto sc = fit(prices);
  const auto ckpt = initial_checkpoint(cfg, sc);
  const auto pairs = pairs_for(prices, sc, cfg.condition_dim);
  const auto out = synthesize_series(ckpt, prices, SynthesisMode::conditioned, 5);
  ASSERT_EQ(out.size(), pairs.size());
  // Recompute each value from its own pair with the same noise stream.
  Rng rng(5);
  const Matrix noise = sample_noise(cfg.noise_dim, static_cast<Eigen::Index>(pairs.size()), rng);
  for (std::size_t i = 0; i < pairs.size(); i += 17) {
    const Matrix cond = Eigen::Map<const Vector>(pairs[i].condition.data(), 5);
    const double x = generator_forward(ckpt.generator, cond, noise.col(static_cast<Eigen::Index>(i))).output(0, 0);
    EXPECT_NEAR(out[i], inverse_transform(x, sc), 1e-12) << i;
  }
  EXPECT_EQ(out, synthesize_series(ckpt, prices, SynthesisMode::conditioned, 5));
}

TEST(Synthesis, RecursiveModeFollowsARamp) {
  // Adversarial training leaves seed-to-seed spread in the learned increment
  // (roughly 0.37-0.51 per step for this setup), so the contract is checked
  // on the median over several seeds rather than on one run.
  TrainConfig cfg;
  cfg.condition_dim = 10;
  cfg.noise_dim = 2;
  cfg.hidden_size = 16;
  cfg.disc_layers = {32, 16};
  cfg.batch_size = 16;
  cfg.epochs = 300;
  std::vector<double> prices(200);
  for (std::size_t t = 0; t < prices.size(); ++t) prices[t] = 100.0 + 0.5 * static_cast<double>(t);
  const auto sc = fit(prices);
  const auto pairs = pairs_for(prices, sc, cfg.condition_dim);

  std::vector<double> slopes;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    cfg.seed = seed;
    const auto ckpt = train(cfg, pairs, sc);
    const auto out = synthesize_series(ckpt, prices, SynthesisMode::recursive, 3);
    // Least-squares slope over the first 100 generated steps.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 100; ++i) {
      const double y = out[static_cast<std::size_t>(i)];
      sx += i;
      sy += y;
      sxx += i * i;
      sxy += i * y;
    }
    slopes.push_back((100 * sxy - sx * sy) / (100 * sxx - sx * sx));
  }
  std::sort(slopes.begin(), slopes.end());
  const double median = 0.5 * (slopes[3] + slopes[4]);
  EXPECT_NEAR(median, 0.5, 0.05) << "median recursive slope " << median;
}
