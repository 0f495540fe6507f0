// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsgan/data_ingest.hpp"
#include "tsgan/error.hpp"
#include "tsgan/nn_core.hpp"
#include "tsgan/optim_loss.hpp"
#include "tsgan/scaling.hpp"

namespace tsgan {

struct TrainConfig {
  std::size_t noise_dim = 8;
  std::size_t condition_dim = 60;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  std::size_t hidden_size = 64;
  std::vector<std::size_t> disc_layers{128, 64, 32};  // hidden widths; the 1-logit output is implicit
  double clip_norm = 5.0;                             // <= 0 disables clipping
  InitScheme init = InitScheme::uniform_xavier;
  double train_fraction = 1.0;  // chronological prefix used for fitting; 1.0 = whole series

  /// Throws UsageError naming the first offending field.
  void validate() const;
  AdamConfig adam() const { return {lr, beta1, beta2, epsilon}; }
};

/// LSTM over the condition window; every step sees [condition_t, noise].
/// The head reads the final hidden state and emits one normalized price.
struct Generator {
  LstmCell lstm;
  DenseLayer head;

  std::size_t noise_dim() const { return static_cast<std::size_t>(lstm.input_size()) - 1; }
};

/// MLP over [condition; value] ending in a single raw logit.
struct Discriminator {
  std::vector<DenseLayer> layers;
};

Generator make_generator(const TrainConfig& config, Rng& rng);
Discriminator make_discriminator(const TrainConfig& config, Rng& rng);
Generator zeros_like(const Generator& g);
Discriminator zeros_like(const Discriminator& d);

std::vector<ParamBlock> param_blocks(Generator& g);
std::vector<ConstParamBlock> param_blocks(const Generator& g);
std::vector<ParamBlock> param_blocks(Discriminator& d);
std::vector<ConstParamBlock> param_blocks(const Discriminator& d);

/// Standard normal draws, filled column by column.
Matrix sample_noise(std::size_t noise_dim, Eigen::Index batch, Rng& rng);

struct GeneratorForward {
  Matrix output;  // [1 x batch]
  LstmForward lstm;
  DenseCache head;
};

/// `conditions` is [window x batch], `noise` is [noise_dim x batch].
GeneratorForward generator_forward(const Generator& gen, const Matrix& conditions, const Matrix& noise);
/// Parameter gradients given dLoss/d(output) of shape [1 x batch].
Generator generator_backward(const Generator& gen, const GeneratorForward& fwd, const Matrix& output_grad);

/// One draw of the next normalized price; noise is sampled internally.
double generate(const Generator& gen, std::span<const double> condition, Rng& rng);

struct DiscriminatorForward {
  Matrix logits;  // [1 x batch]
  std::vector<DenseCache> caches;
};

struct DiscriminatorBackward {
  Discriminator grads;
  Matrix input_grad;  // [(window + 1) x batch]
};

DiscriminatorForward discriminator_forward(const Discriminator& disc, const Matrix& conditions, const Matrix& values);
DiscriminatorBackward discriminator_backward(const Discriminator& disc, const DiscriminatorForward& fwd,
                                             const Matrix& logit_grad);

double discriminate(const Discriminator& disc, std::span<const double> condition, double value);

struct Batch {
  Matrix conditions;  // [window x k]
  Matrix targets;     // [1 x k]
};

Batch make_batch(std::span<const ConditionedPair> pairs, std::span<const std::size_t> indices);

// Both steps throw NumericError on a non-finite loss. `clip_norm <= 0` disables clipping.
double train_discriminator_step(Discriminator& disc, const Generator& gen, const Batch& batch, AdamState& adam_d,
                                Rng& rng, double clip_norm);
double train_generator_step(Generator& gen, const Discriminator& disc, const Matrix& conditions, AdamState& adam_g,
                            Rng& rng, double clip_norm);

struct LossHistory {
  std::vector<double> epoch_d;
  std::vector<double> epoch_g;
  std::vector<double> batch_d;
  std::vector<double> batch_g;
};

struct Checkpoint {
  TrainConfig config;
  ScalerParams scaler;
  Generator generator;
  Discriminator discriminator;
  AdamState adam_g;
  AdamState adam_d;
  std::size_t epoch = 0;  // completed epochs
  LossHistory history;
  std::string rng_state;  // textual std::mt19937_64 state
};

/// Fresh networks and optimizers seeded from config.seed.
Checkpoint initial_checkpoint(const TrainConfig& config, const ScalerParams& scaler);

struct TrainCallbacks {
  std::function<void(const Checkpoint&)> on_epoch;
};

/// Raised when training hits a non-finite value. Carries the state as of the
/// last completed epoch so callers can persist it.
class TrainAborted : public NumericError {
 public:
  TrainAborted(const std::string& what, Checkpoint last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const Checkpoint& last_good() const { return last_good_; }

 private:
  Checkpoint last_good_;
};

/// Runs epochs ckpt.epoch+1 .. ckpt.config.epochs in place.
void continue_training(Checkpoint& ckpt, std::span<const ConditionedPair> pairs, const TrainCallbacks& callbacks = {});

Checkpoint train(const TrainConfig& config, std::span<const ConditionedPair> pairs, const ScalerParams& scaler,
                 const TrainCallbacks& callbacks = {});

enum class SynthesisMode { conditioned, recursive };

std::string_view to_string(SynthesisMode m);
SynthesisMode synthesis_mode_from_string(std::string_view name);

/// Price-scale series aligned with real_closes[window..N). Conditioned mode
/// feeds each real window; recursive mode starts from the first real window and
/// then conditions on its own output.
std::vector<double> synthesize_series(const Generator& gen, const ScalerParams& scaler,
                                      std::span<const double> real_closes, std::size_t window, SynthesisMode mode,
                                      Rng& rng);
std::vector<double> synthesize_series(const Checkpoint& ckpt, std::span<const double> real_closes,
                                      SynthesisMode mode, std::uint64_t seed);

}  // namespace tsgan
