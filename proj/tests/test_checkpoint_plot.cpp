// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "tsgan/checkpoint.hpp"
#include "tsgan/error.hpp"
#include "tsgan/svg_plot.hpp"

using namespace tsgan;

namespace {

std::vector<std::size_t> polyline_point_counts(const std::string& svg) {
  std::vector<std::size_t> counts;
  const std::string key = "points=\"";
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) {
    const auto start = svg.find(key, pos) + key.size();
    std::istringstream pts(svg.substr(start, svg.find('"', start) - start));
    std::string p;
    std::size_t n = 0;
    while (pts >> p) ++n;
    counts.push_back(n);
  }
  return counts;
}

Checkpoint small_checkpoint() {
  TrainConfig c;
  c.noise_dim = 2;
  c.condition_dim = 4;
  c.hidden_size = 3;
  c.disc_layers = {5};
  c.seed = 17;
  auto ckpt = initial_checkpoint(c, {123.456789012345678, 7.25, 99});
  ckpt.history.epoch_d = {0.7, 0.69};
  ckpt.history.epoch_g = {0.71, 0.7};
  ckpt.epoch = 2;
  return ckpt;
}

}  // namespace

TEST(Checkpoint, RoundTripPreservesEverything) {
  const auto a = small_checkpoint();
  std::stringstream buf;
  save_checkpoint(buf, a);
  const auto bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 8), "TSGANCKP");
  const auto b = load_checkpoint(buf);
  EXPECT_EQ(b.scaler.mean, a.scaler.mean);
  EXPECT_EQ(b.scaler.stddev, a.scaler.stddev);
  EXPECT_EQ(b.epoch, 2u);
  EXPECT_EQ(b.history.epoch_g, a.history.epoch_g);
  EXPECT_EQ(b.rng_state, a.rng_state);
  EXPECT_EQ(b.config.disc_layers, a.config.disc_layers);
  EXPECT_EQ(b.generator.lstm.candidate.from_hidden, a.generator.lstm.candidate.from_hidden);
  std::ostringstream again;
  save_checkpoint(again, b);
  EXPECT_EQ(again.str(), bytes);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::stringstream buf;
  save_checkpoint(buf, small_checkpoint());
  auto bytes = buf.str();

  std::istringstream bad_magic("NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(load_checkpoint(bad_magic), DataError);

  auto wrong_version = bytes;
  wrong_version[8] = static_cast<char>(kCheckpointVersion + 1);
  std::istringstream v(wrong_version);
  EXPECT_THROW(load_checkpoint(v), DataError);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(truncated), DataError);
}

TEST(Checkpoint, ConfigJsonOverlay) {
  TrainConfig base;
  base.epochs = 7;
  const auto c = config_from_json(nlohmann::json{{"hidden_size", 12}, {"lr", 1e-3}}, base);
  EXPECT_EQ(c.hidden_size, 12u);
  EXPECT_EQ(c.lr, 1e-3);
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_EQ(config_from_json(config_to_json(c)).hidden_size, 12u);
  EXPECT_THROW(config_from_json(nlohmann::json{{"epochs", "many"}}), UsageError);
}

TEST(Svg, OnePointPerValue) {
  std::vector<double> g(50), d(50);
  for (int i = 0; i < 50; ++i) {
    g[static_cast<std::size_t>(i)] = 0.7 + 0.01 * i;
    d[static_cast<std::size_t>(i)] = 0.69 - 0.001 * i;
  }
  const std::vector<PlotPanel> panels{{"Losses", {{"G", "#d62728", g}, {"D", "#1f77b4", d}}}};
  const auto svg = render_svg(panels);
  EXPECT_EQ(polyline_point_counts(svg), (std::vector<std::size_t>{50, 50}));
  EXPECT_NE(svg.find(">G<"), std::string::npos);
  EXPECT_NE(svg.find(">D<"), std::string::npos);
}

TEST(Svg, FlatSeriesStillRenders) {
  const std::vector<PlotPanel> panels{{"Flat", {{"x", "#000", std::vector<double>(10, 3.0)}}}};
  const auto svg = render_svg(panels);
  EXPECT_EQ(polyline_point_counts(svg), (std::vector<std::size_t>{10}));
  EXPECT_NE(svg.find("<line"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Svg, EmptyOrNonFiniteIsAnError) {
  const std::vector<PlotPanel> empty{{"E", {{"x", "#000", {}}}}};
  EXPECT_THROW(render_svg(empty), DataError);
  const std::vector<PlotPanel> bad{{"B", {{"x", "#000", {1.0, NAN}}}}};
  EXPECT_THROW(render_svg(bad), DataError);
}
