// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsgan/nn_core.hpp"

namespace tsgan {

/// Logistic function, evaluated so that neither branch can overflow.
double sigmoid(double x);

/// -[y log sigmoid(x) + (1 - y) log(1 - sigmoid(x))] in the softplus form
/// max(x, 0) - x y + log(1 + exp(-|x|)). Throws UsageError unless y is 0 or 1.
double bce_with_logits(double logit, double label);
/// d/dx of bce_with_logits: sigmoid(x) - y.
double bce_with_logits_grad(double logit, double label);

/// Mean over a batch of logits sharing one label.
double bce_with_logits_mean(std::span<const double> logits, double label);

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-block first and second moments, aligned with the parameter block order.
struct AdamState {
  AdamConfig config;
  std::int64_t t = 0;
  std::vector<Vector> m;
  std::vector<Vector> v;
};

AdamState make_adam_state(std::span<const ConstParamBlock> params, const AdamConfig& config);

// One bias-corrected Adam update. Throws UsageError on shape mismatch and
// NumericError naming the block when a gradient is non-finite; parameters are
// untouched in either case.
void adam_step(std::span<const ParamBlock> params, std::span<const ConstParamBlock> grads, AdamState& state);

double global_norm(std::span<const ConstParamBlock> grads);
/// Rescales every block so the joint L2 norm is at most `max_norm`. Returns the
/// norm before clipping. `max_norm <= 0` disables clipping.
double clip_global_norm(std::span<const ParamBlock> grads, double max_norm);

}  // namespace tsgan
