// SPDX-License-Identifier: Apache-2.0
#include "tsgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "tsgan/error.hpp"

namespace tsgan {
namespace {

void require_aligned(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) {
    throw DataError("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < min_len) throw DataError("need at least " + std::to_string(min_len) + " samples");
}

long double mean_of(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

std::string utc_date(Timestamp ts) {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(ts)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

std::string_view to_string(MetricScale s) { return s == MetricScale::original ? "original" : "normalized"; }

nlohmann::json to_json(const MetricsReport& r) {
  return {{"pearson", r.pearson}, {"spearman", r.spearman}, {"mae", r.mae},
          {"rmse", r.rmse},       {"n", r.n},               {"scale", std::string(to_string(r.scale))}};
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require_aligned(a, b, 2);
  const long double ma = mean_of(a);
  const long double mb = mean_of(b);
  long double sab = 0.0L, saa = 0.0L, sbb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double da = a[i] - ma;
    const long double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0L || sbb == 0.0L) throw NumericError("correlation undefined: zero variance");
  const long double r = sab / std::sqrt(saa * sbb);
  return static_cast<double>(std::clamp(r, -1.0L, 1.0L));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  require_aligned(a, b, 2);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double mae(std::span<const double> a, std::span<const double> b) {
  require_aligned(a, b, 1);
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<long double>(a[i]) - b[i]);
  return static_cast<double>(s / static_cast<long double>(a.size()));
}

double rmse(std::span<const double> a, std::span<const double> b) {
  require_aligned(a, b, 1);
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s / static_cast<long double>(a.size())));
}

MetricsReport evaluate(std::span<const double> real, std::span<const double> generated, MetricScale scale) {
  require_aligned(real, generated, 2);
  MetricsReport r;
  r.pearson = pearson(real, generated);
  r.spearman = spearman(real, generated);
  r.mae = mae(real, generated);
  r.rmse = rmse(real, generated);
  r.n = real.size();
  r.scale = scale;
  return r;
}

VolatilityProfile volatility_profile(const TimeSeries& series) {
  VolatilityProfile p;
  p.period_label = series.period_label;
  std::vector<std::pair<std::string, double>> daily;  // (date, last close)
  for (const auto& bar : series.bars) {
    if (!(bar.close > 0.0) || !std::isfinite(bar.close)) {
      throw DataError("volatility needs strictly positive prices");
    }
    auto date = utc_date(bar.timestamp);
    if (!daily.empty() && daily.back().first == date) {
      daily.back().second = bar.close;
    } else {
      daily.emplace_back(std::move(date), bar.close);
    }
  }
  if (daily.size() < 2) throw DataError("volatility profile needs at least two distinct days");

  for (std::size_t i = 1; i < daily.size(); ++i) {
    const double pct = (daily[i].second / daily[i - 1].second - 1.0) * 100.0;
    p.changes.push_back({daily[i].first, daily[i].second, pct});
  }
  long double sum = 0.0L;
  p.min_change = p.max_change = p.changes.front().pct_change;
  for (const auto& c : p.changes) {
    sum += c.pct_change;
    p.min_change = std::min(p.min_change, c.pct_change);
    p.max_change = std::max(p.max_change, c.pct_change);
  }
  const long double mean = sum / static_cast<long double>(p.changes.size());
  long double sq = 0.0L;
  for (const auto& c : p.changes) sq += (c.pct_change - mean) * (c.pct_change - mean);
  p.variance = static_cast<double>(sq / static_cast<long double>(p.changes.size()));
  return p;
}

void write_volatility_csv(std::ostream& out, const VolatilityProfile& profile) {
  out << "date,close,pct_change\n";
  char buf[64];
  for (const auto& c : profile.changes) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", c.close, c.pct_change);
    out << c.date << ',' << buf << '\n';
  }
}

}  // namespace tsgan
