// SPDX-License-Identifier: Apache-2.0
#include "tsgan/optim_loss.hpp"

#include <cmath>
#include <string>

#include "tsgan/error.hpp"

namespace tsgan {
namespace {

void require_label(double y) {
  if (y != 0.0 && y != 1.0) throw UsageError("BCE label must be 0 or 1, got " + std::to_string(y));
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_with_logits(double logit, double label) {
  require_label(label);
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

double bce_with_logits_grad(double logit, double label) {
  require_label(label);
  return sigmoid(logit) - label;
}

double bce_with_logits_mean(std::span<const double> logits, double label) {
  if (logits.empty()) throw UsageError("BCE over an empty batch");
  double sum = 0.0;
  for (double x : logits) sum += bce_with_logits(x, label);
  return sum / static_cast<double>(logits.size());
}

AdamState make_adam_state(std::span<const ConstParamBlock> params, const AdamConfig& config) {
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in [0, 1)");
  }
  if (!(config.lr > 0.0) || !(config.epsilon > 0.0)) throw UsageError("Adam lr and epsilon must be positive");
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.m.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
    s.v.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
  }
  return s;
}

void adam_step(std::span<const ParamBlock> params, std::span<const ConstParamBlock> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
    throw UsageError("adam_step: parameter, gradient and moment block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto n = static_cast<Eigen::Index>(params[b].values.size());
    if (grads[b].values.size() != params[b].values.size() || state.m[b].size() != n || state.v[b].size() != n) {
      throw UsageError("adam_step: shape mismatch in block '" + params[b].name + "'");
    }
    for (double g : grads[b].values) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in block '" + params[b].name + "'");
    }
  }

  const auto& c = state.config;
  ++state.t;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto theta = params[b].values;
    const auto g = grads[b].values;
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[i];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      theta[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

double global_norm(std::span<const ConstParamBlock> grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_global_norm(std::span<const ParamBlock> grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& g : grads) {
      for (double& x : g.values) x *= scale;
    }
  }
  return norm;
}

}  // namespace tsgan
