// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsgan {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Negative control: perturb the analytic gradient of this block before
  // comparing. Empty = no corruption.
  std::string corrupt_block;
};

struct GradcheckBlock {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t trials = 0;
  std::size_t entries = 0;  // total scalar comparisons
  bool passed = true;
};

struct GradcheckReport {
  std::vector<GradcheckBlock> blocks;
  double tolerance = 0.0;

  bool passed() const;
};

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

// Compares analytic gradients to central differences for: a dense layer under
// every activation, the LSTM cell over 5-step sequences (all eight matrices and
// the inputs), the discriminator loss w.r.t. discriminator parameters, the
// generator loss through D(G(.)) w.r.t. generator parameters, and the BCE
// derivative.
GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

void print_report(std::ostream& out, const GradcheckReport& report);

}  // namespace tsgan
