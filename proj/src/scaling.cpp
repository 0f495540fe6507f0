// SPDX-License-Identifier: Apache-2.0
#include "tsgan/scaling.hpp"

#include <cmath>
#include <string>

#include "tsgan/error.hpp"

namespace tsgan {
namespace {

void require_params(const ScalerParams& p) {
  if (!std::isfinite(p.mean) || !std::isfinite(p.stddev) || p.stddev <= 0.0) {
    throw NumericError("invalid scaler parameters");
  }
}

void require_finite(double v, std::size_t i) {
  if (!std::isfinite(v)) throw NumericError("non-finite value at index " + std::to_string(i));
}

}  // namespace

ScalerParams fit(std::span<const double> values) {
  if (values.size() < 2) throw DataError("scaler needs at least 2 values");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw DataError("non-finite value at index " + std::to_string(i));
    sum += values[i];
  }
  const long double n = static_cast<long double>(values.size());
  const long double mean = sum / n;
  // Second pass on centred values, plus the usual correction term for the
  // rounding left in `mean`.
  long double sq = 0.0L, drift = 0.0L;
  for (double v : values) {
    const long double c = v - mean;
    sq += c * c;
    drift += c;
  }
  const long double var = (sq - drift * drift / n) / n;
  const double stddev = static_cast<double>(std::sqrt(var));
  if (!(stddev > 0.0)) throw NumericError("cannot fit scaler: zero variance");
  return {static_cast<double>(mean), stddev, values.size()};
}

double transform(double value, const ScalerParams& params) { return (value - params.mean) / params.stddev; }

double inverse_transform(double normalized, const ScalerParams& params) {
  return normalized * params.stddev + params.mean;
}

std::vector<double> transform(std::span<const double> values, const ScalerParams& params) {
  require_params(params);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_finite(values[i], i);
    out[i] = transform(values[i], params);
  }
  return out;
}

std::vector<double> inverse_transform(std::span<const double> normalized, const ScalerParams& params) {
  require_params(params);
  std::vector<double> out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    require_finite(normalized[i], i);
    out[i] = inverse_transform(normalized[i], params);
  }
  return out;
}

}  // namespace tsgan
