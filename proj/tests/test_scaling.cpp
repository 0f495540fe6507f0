// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsgan/error.hpp"
#include "tsgan/scaling.hpp"

using namespace tsgan;

TEST(Scaler, FitsPopulationMoments) {
  const std::vector<double> v{1, 2, 3};
  const auto p = fit(v);
  EXPECT_DOUBLE_EQ(p.mean, 2.0);
  EXPECT_NEAR(p.stddev, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_EQ(p.n_fitted, 3u);
  const auto t = transform(v, p);
  EXPECT_NEAR(t[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(t[1], 0.0, 1e-15);
  EXPECT_NEAR(t[2], 1.224744871391589, 1e-12);
}

TEST(Scaler, SymmetricPair) {
  const std::vector<double> v{-1, 1};
  const auto p = fit(v);
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(p.stddev, 1.0);
}

TEST(Scaler, RejectsDegenerateInput) {
  EXPECT_THROW(fit(std::vector<double>{5, 5, 5}), NumericError);
  EXPECT_THROW(fit(std::vector<double>{5}), DataError);
  EXPECT_THROW(fit(std::vector<double>{1, NAN}), DataError);
  const auto p = fit(std::vector<double>{1, 2});
  EXPECT_THROW(transform(std::vector<double>{INFINITY}, p), NumericError);
  EXPECT_THROW(inverse_transform(std::vector<double>{NAN}, p), NumericError);
}

TEST(Scaler, CentersAndInvertsScalars) {
  const ScalerParams p{2.0, 0.816497, 3};
  EXPECT_EQ(transform(2.0, p), 0.0);
  EXPECT_EQ(inverse_transform(0.0, p), 2.0);
  EXPECT_NEAR(inverse_transform(1.0, p), 2.816497, 1e-15);
}

TEST(Scaler, AffineInvariantUnderRefit) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(3.0, 2.0);
  std::vector<double> v(400);
  for (auto& x : v) x = n(rng);
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = 7.5 * v[i] - 120.0;
  const auto tv = transform(v, fit(v));
  const auto tw = transform(w, fit(w));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(tv[i], tw[i], 1e-12);
}

TEST(Scaler, RandomRoundTripAndMoments) {
  std::mt19937_64 rng(11);
  // Location is drawn relative to the spread: with |mean| / stddev = r, merely
  // rounding the fitted mean to double shifts every normalized value by about
  // r * 1.1e-16, so the 1e-12 centering bound is attainable for r up to ~1e3.
  std::uniform_real_distribution<double> ratio(-100, 100), logscale(-3, 4);
  std::uniform_int_distribution<int> len(2, 500);
  for (int trial = 0; trial < 1000; ++trial) {
    const double sd = std::pow(10.0, logscale(rng)), mu = ratio(rng) * sd;
    std::normal_distribution<double> n(mu, sd);
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = n(rng);
    const auto p = fit(v);
    const auto t = transform(v, p);
    const auto back = inverse_transform(t, p);
    long double s = 0, s2 = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_LE(std::abs(back[i] - v[i]), 1e-9 * std::abs(v[i]));
      s += t[i];
    }
    const long double m = s / v.size();
    for (double x : t) s2 += (x - m) * (x - m);
    EXPECT_LE(std::abs(static_cast<double>(m)), 1e-12);
    EXPECT_NEAR(static_cast<double>(s2 / v.size()), 1.0, 1e-9);
  }
}
