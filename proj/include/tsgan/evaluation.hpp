// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsgan/data_ingest.hpp"

namespace tsgan {

enum class MetricScale { original, normalized };

std::string_view to_string(MetricScale s);

struct MetricsReport {
  double pearson = 0.0;
  double spearman = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
  MetricScale scale = MetricScale::original;
};

nlohmann::json to_json(const MetricsReport& r);

// Correlations throw NumericError when either side has zero variance and
// DataError on length mismatch or fewer than 2 samples.
double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of the rank vectors; ties share their average rank.
double spearman(std::span<const double> a, std::span<const double> b);
double mae(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> a, std::span<const double> b);

/// 1-based ranks with ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

MetricsReport evaluate(std::span<const double> real, std::span<const double> generated, MetricScale scale);

struct DailyChange {
  std::string date;  // YYYY-MM-DD (UTC)
  double close = 0.0;
  double pct_change = 0.0;
};

struct VolatilityProfile {
  std::string period_label;
  std::vector<DailyChange> changes;  // one row per day after the first
  double min_change = 0.0;
  double max_change = 0.0;
  double variance = 0.0;  // population variance of pct_change
};

/// Last close of each UTC day and the percent change between consecutive days.
/// Throws DataError when the series spans fewer than two days.
VolatilityProfile volatility_profile(const TimeSeries& series);
void write_volatility_csv(std::ostream& out, const VolatilityProfile& profile);

}  // namespace tsgan
