// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsgan {

/// Standardization parameters. `stddev` is the population standard deviation.
struct ScalerParams {
  double mean = 0.0;
  double stddev = 1.0;
  std::size_t n_fitted = 0;
};

// Throws DataError for fewer than 2 values or non-finite input, NumericError for
// a zero-variance series.
ScalerParams fit(std::span<const double> values);

std::vector<double> transform(std::span<const double> values, const ScalerParams& params);
std::vector<double> inverse_transform(std::span<const double> normalized, const ScalerParams& params);

double transform(double value, const ScalerParams& params);
double inverse_transform(double normalized, const ScalerParams& params);

}  // namespace tsgan
