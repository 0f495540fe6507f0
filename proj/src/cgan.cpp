// SPDX-License-Identifier: Apache-2.0
#include "tsgan/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tsgan {
namespace {

void add_into(Discriminator& acc, const Discriminator& g) {
  for (std::size_t i = 0; i < acc.layers.size(); ++i) {
    acc.layers[i].weights += g.layers[i].weights;
    acc.layers[i].bias += g.layers[i].bias;
  }
}

std::vector<ConstParamBlock> to_const_blocks(const std::vector<ParamBlock>& blocks) {
  std::vector<ConstParamBlock> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back({b.name, b.rows, b.cols, b.values});
  return out;
}

Rng restore_rng(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  if (!in) throw DataError("corrupt RNG state in checkpoint");
  return rng;
}

std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("invalid training config: ") + what);
  };
  require(noise_dim >= 1, "noise_dim must be positive");
  require(condition_dim >= 1, "condition_dim must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(epochs >= 1, "epochs must be positive");
  require(lr > 0.0 && std::isfinite(lr), "lr must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(hidden_size >= 1, "hidden_size must be positive");
  require(std::all_of(disc_layers.begin(), disc_layers.end(), [](std::size_t w) { return w >= 1; }),
          "disc_layers widths must be positive");
  require(std::isfinite(clip_norm), "clip_norm must be finite");
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train_fraction must lie in (0, 1]");
}

Generator make_generator(const TrainConfig& config, Rng& rng) {
  const auto hidden = static_cast<Eigen::Index>(config.hidden_size);
  Generator g;
  g.lstm = make_lstm(static_cast<Eigen::Index>(config.noise_dim) + 1, hidden, config.init, rng);
  g.head = make_dense(hidden, 1, Activation::identity, config.init, rng);
  return g;
}

Discriminator make_discriminator(const TrainConfig& config, Rng& rng) {
  Discriminator d;
  auto in = static_cast<Eigen::Index>(config.condition_dim) + 1;
  for (const std::size_t width : config.disc_layers) {
    d.layers.push_back(make_dense(in, static_cast<Eigen::Index>(width), Activation::relu, config.init, rng));
    in = static_cast<Eigen::Index>(width);
  }
  d.layers.push_back(make_dense(in, 1, Activation::identity, config.init, rng));
  return d;
}

Generator zeros_like(const Generator& g) { return {zeros_like(g.lstm), zeros_like(g.head)}; }

Discriminator zeros_like(const Discriminator& d) {
  Discriminator z;
  for (const auto& l : d.layers) z.layers.push_back(zeros_like(l));
  return z;
}

std::vector<ParamBlock> param_blocks(Generator& g) {
  std::vector<ParamBlock> out;
  append_blocks(out, g.lstm, "generator.lstm");
  append_blocks(out, g.head, "generator.head");
  return out;
}

std::vector<ConstParamBlock> param_blocks(const Generator& g) {
  std::vector<ConstParamBlock> out;
  append_blocks(out, g.lstm, "generator.lstm");
  append_blocks(out, g.head, "generator.head");
  return out;
}

std::vector<ParamBlock> param_blocks(Discriminator& d) {
  std::vector<ParamBlock> out;
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    append_blocks(out, d.layers[i], "discriminator.layer" + std::to_string(i));
  }
  return out;
}

std::vector<ConstParamBlock> param_blocks(const Discriminator& d) {
  std::vector<ConstParamBlock> out;
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    append_blocks(out, d.layers[i], "discriminator.layer" + std::to_string(i));
  }
  return out;
}

Matrix sample_noise(std::size_t noise_dim, Eigen::Index batch, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(static_cast<Eigen::Index>(noise_dim), batch);
  for (Eigen::Index c = 0; c < batch; ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = normal(rng);
  }
  return z;
}

GeneratorForward generator_forward(const Generator& gen, const Matrix& conditions, const Matrix& noise) {
  const auto batch = conditions.cols();
  const auto noise_dim = static_cast<Eigen::Index>(gen.noise_dim());
  if (noise.rows() != noise_dim || noise.cols() != batch) {
    throw UsageError("generator noise must be [" + std::to_string(noise_dim) + " x batch]");
  }
  if (conditions.rows() < 1) throw UsageError("generator needs a non-empty condition window");
  std::vector<Matrix> sequence(static_cast<std::size_t>(conditions.rows()));
  for (Eigen::Index t = 0; t < conditions.rows(); ++t) {
    auto& step = sequence[static_cast<std::size_t>(t)];
    step.resize(noise_dim + 1, batch);
    step.row(0) = conditions.row(t);
    step.bottomRows(noise_dim) = noise;
  }
  GeneratorForward f;
  f.lstm = lstm_forward(gen.lstm, sequence, LstmState::zeros(gen.lstm.hidden_size(), batch));
  auto head = dense_forward(gen.head, f.lstm.final_state.hidden);
  f.output = std::move(head.output);
  f.head = std::move(head.cache);
  if (!f.output.allFinite()) throw NumericError("generator produced a non-finite output");
  return f;
}

Generator generator_backward(const Generator& gen, const GeneratorForward& fwd, const Matrix& output_grad) {
  auto head = dense_backward(gen.head, fwd.head, output_grad);
  const auto& final_state = fwd.lstm.final_state;
  LstmStateGrad final_grad{Matrix::Zero(final_state.cell.rows(), final_state.cell.cols()),
                           std::move(head.input_grad)};
  auto lstm = lstm_backward(gen.lstm, fwd.lstm.caches, final_grad);
  return {std::move(lstm.grads), std::move(head.grads)};
}

double generate(const Generator& gen, std::span<const double> condition, Rng& rng) {
  const Matrix cond = Eigen::Map<const Vector>(condition.data(), static_cast<Eigen::Index>(condition.size()));
  const Matrix noise = sample_noise(gen.noise_dim(), 1, rng);
  return generator_forward(gen, cond, noise).output(0, 0);
}

DiscriminatorForward discriminator_forward(const Discriminator& disc, const Matrix& conditions, const Matrix& values) {
  if (values.rows() != 1 || values.cols() != conditions.cols()) {
    throw UsageError("discriminator values must be [1 x batch] matching the conditions");
  }
  Matrix x(conditions.rows() + 1, conditions.cols());
  x.topRows(conditions.rows()) = conditions;
  x.bottomRows(1) = values;
  DiscriminatorForward f;
  f.caches.reserve(disc.layers.size());
  for (const auto& layer : disc.layers) {
    auto out = dense_forward(layer, x);
    x = std::move(out.output);
    f.caches.push_back(std::move(out.cache));
  }
  f.logits = std::move(x);
  return f;
}

DiscriminatorBackward discriminator_backward(const Discriminator& disc, const DiscriminatorForward& fwd,
                                             const Matrix& logit_grad) {
  DiscriminatorBackward b;
  b.grads.layers.resize(disc.layers.size());
  Matrix upstream = logit_grad;
  for (std::size_t i = disc.layers.size(); i-- > 0;) {
    auto layer = dense_backward(disc.layers[i], fwd.caches[i], upstream);
    b.grads.layers[i] = std::move(layer.grads);
    upstream = std::move(layer.input_grad);
  }
  b.input_grad = std::move(upstream);
  return b;
}

double discriminate(const Discriminator& disc, std::span<const double> condition, double value) {
  const Matrix cond = Eigen::Map<const Vector>(condition.data(), static_cast<Eigen::Index>(condition.size()));
  return discriminator_forward(disc, cond, Matrix::Constant(1, 1, value)).logits(0, 0);
}

Batch make_batch(std::span<const ConditionedPair> pairs, std::span<const std::size_t> indices) {
  if (indices.empty()) throw UsageError("empty batch");
  const auto window = static_cast<Eigen::Index>(pairs[indices.front()].condition.size());
  Batch b{Matrix(window, static_cast<Eigen::Index>(indices.size())),
          Matrix(1, static_cast<Eigen::Index>(indices.size()))};
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto& p = pairs[indices[j]];
    if (static_cast<Eigen::Index>(p.condition.size()) != window) throw UsageError("ragged condition windows");
    const auto col = static_cast<Eigen::Index>(j);
    b.conditions.col(col) = Eigen::Map<const Vector>(p.condition.data(), window);
    b.targets(0, col) = p.target;
  }
  return b;
}

double train_discriminator_step(Discriminator& disc, const Generator& gen, const Batch& batch, AdamState& adam_d,
                                Rng& rng, double clip_norm) {
  const auto k = batch.conditions.cols();
  const auto real = discriminator_forward(disc, batch.conditions, batch.targets);
  // Generated values enter as constants; nothing flows back into the generator.
  const Matrix fake_values =
      generator_forward(gen, batch.conditions, sample_noise(gen.noise_dim(), k, rng)).output;
  const auto fake = discriminator_forward(disc, batch.conditions, fake_values);

  const std::span<const double> real_logits(real.logits.data(), static_cast<std::size_t>(k));
  const std::span<const double> fake_logits(fake.logits.data(), static_cast<std::size_t>(k));
  const double loss = 0.5 * (bce_with_logits_mean(real_logits, 1.0) + bce_with_logits_mean(fake_logits, 0.0));
  if (!std::isfinite(loss)) throw NumericError("non-finite discriminator loss");

  const double scale = 0.5 / static_cast<double>(k);
  Matrix real_grad(1, k), fake_grad(1, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    real_grad(0, j) = scale * bce_with_logits_grad(real.logits(0, j), 1.0);
    fake_grad(0, j) = scale * bce_with_logits_grad(fake.logits(0, j), 0.0);
  }
  auto grads = discriminator_backward(disc, real, real_grad).grads;
  add_into(grads, discriminator_backward(disc, fake, fake_grad).grads);

  auto grad_blocks = param_blocks(grads);
  clip_global_norm(grad_blocks, clip_norm);
  adam_step(param_blocks(disc), to_const_blocks(grad_blocks), adam_d);
  return loss;
}

double train_generator_step(Generator& gen, const Discriminator& disc, const Matrix& conditions, AdamState& adam_g,
                            Rng& rng, double clip_norm) {
  const auto k = conditions.cols();
  const auto fwd = generator_forward(gen, conditions, sample_noise(gen.noise_dim(), k, rng));
  const auto judged = discriminator_forward(disc, conditions, fwd.output);

  const std::span<const double> logits(judged.logits.data(), static_cast<std::size_t>(k));
  const double loss = bce_with_logits_mean(logits, 1.0);
  if (!std::isfinite(loss)) throw NumericError("non-finite generator loss");

  Matrix logit_grad(1, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    logit_grad(0, j) = bce_with_logits_grad(judged.logits(0, j), 1.0) / static_cast<double>(k);
  }
  const auto through_disc = discriminator_backward(disc, judged, logit_grad);
  const Matrix value_grad = through_disc.input_grad.bottomRows(1);
  auto grads = generator_backward(gen, fwd, value_grad);

  auto grad_blocks = param_blocks(grads);
  clip_global_norm(grad_blocks, clip_norm);
  adam_step(param_blocks(gen), to_const_blocks(grad_blocks), adam_g);
  return loss;
}

Checkpoint initial_checkpoint(const TrainConfig& config, const ScalerParams& scaler) {
  config.validate();
  Rng rng(config.seed);
  Checkpoint c;
  c.config = config;
  c.scaler = scaler;
  c.generator = make_generator(config, rng);
  c.discriminator = make_discriminator(config, rng);
  c.adam_g = make_adam_state(param_blocks(std::as_const(c.generator)), config.adam());
  c.adam_d = make_adam_state(param_blocks(std::as_const(c.discriminator)), config.adam());
  c.rng_state = save_rng(rng);
  return c;
}

void continue_training(Checkpoint& ckpt, std::span<const ConditionedPair> pairs, const TrainCallbacks& callbacks) {
  const auto& config = ckpt.config;
  config.validate();
  const std::size_t k = config.batch_size;
  if (pairs.size() < k) {
    throw DataError("only " + std::to_string(pairs.size()) + " training pairs for batch size " + std::to_string(k));
  }
  for (const auto& p : pairs) {
    if (p.condition.size() != config.condition_dim) {
      throw DataError("training pair window " + std::to_string(p.condition.size()) + " does not match condition_dim " +
                      std::to_string(config.condition_dim));
    }
  }
  const std::size_t batches = pairs.size() / k;  // trailing partial batch is dropped
  Rng rng = restore_rng(ckpt.rng_state);
  std::vector<std::size_t> order(pairs.size());

  while (ckpt.epoch < config.epochs) {
    const Checkpoint last_good = ckpt;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double sum_d = 0.0, sum_g = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::span<const std::size_t> idx(order.data() + b * k, k);
      const Batch batch = make_batch(pairs, idx);
      double loss_d = 0.0, loss_g = 0.0;
      try {
        loss_d = train_discriminator_step(ckpt.discriminator, ckpt.generator, batch, ckpt.adam_d, rng,
                                          config.clip_norm);
        loss_g = train_generator_step(ckpt.generator, ckpt.discriminator, batch.conditions, ckpt.adam_g, rng,
                                      config.clip_norm);
      } catch (const NumericError& e) {
        throw TrainAborted("epoch " + std::to_string(ckpt.epoch + 1) + ", batch " + std::to_string(b + 1) + ": " +
                               e.what(),
                           last_good);
      }
      ckpt.history.batch_d.push_back(loss_d);
      ckpt.history.batch_g.push_back(loss_g);
      sum_d += loss_d;
      sum_g += loss_g;
    }
    ckpt.history.epoch_d.push_back(sum_d / static_cast<double>(batches));
    ckpt.history.epoch_g.push_back(sum_g / static_cast<double>(batches));
    ++ckpt.epoch;
    ckpt.rng_state = save_rng(rng);
    if (callbacks.on_epoch) callbacks.on_epoch(ckpt);
  }
}

Checkpoint train(const TrainConfig& config, std::span<const ConditionedPair> pairs, const ScalerParams& scaler,
                 const TrainCallbacks& callbacks) {
  if (pairs.empty()) throw DataError("no training pairs");
  Checkpoint ckpt = initial_checkpoint(config, scaler);
  continue_training(ckpt, pairs, callbacks);
  return ckpt;
}

std::string_view to_string(SynthesisMode m) { return m == SynthesisMode::conditioned ? "conditioned" : "recursive"; }

SynthesisMode synthesis_mode_from_string(std::string_view name) {
  if (name == "conditioned") return SynthesisMode::conditioned;
  if (name == "recursive") return SynthesisMode::recursive;
  throw UsageError("unknown synthesis mode '" + std::string(name) + "'");
}

std::vector<double> synthesize_series(const Generator& gen, const ScalerParams& scaler,
                                      std::span<const double> real_closes, std::size_t window, SynthesisMode mode,
                                      Rng& rng) {
  if (window == 0 || real_closes.size() <= window) {
    throw DataError("series of length " + std::to_string(real_closes.size()) + " is too short for window " +
                    std::to_string(window));
  }
  const auto normalized = transform(real_closes, scaler);
  const std::size_t n_out = real_closes.size() - window;
  std::vector<double> out;
  out.reserve(n_out);
  const auto w = static_cast<Eigen::Index>(window);

  if (mode == SynthesisMode::conditioned) {
    constexpr std::size_t chunk = 256;
    for (std::size_t start = 0; start < n_out; start += chunk) {
      const auto cols = static_cast<Eigen::Index>(std::min(chunk, n_out - start));
      Matrix conditions(w, cols);
      for (Eigen::Index j = 0; j < cols; ++j) {
        conditions.col(j) = Eigen::Map<const Vector>(normalized.data() + start + static_cast<std::size_t>(j), w);
      }
      const Matrix values = generator_forward(gen, conditions, sample_noise(gen.noise_dim(), cols, rng)).output;
      for (Eigen::Index j = 0; j < cols; ++j) out.push_back(inverse_transform(values(0, j), scaler));
    }
    return out;
  }

  std::vector<double> history(normalized.begin(), normalized.begin() + static_cast<std::ptrdiff_t>(window));
  history.reserve(real_closes.size());
  for (std::size_t t = 0; t < n_out; ++t) {
    const double x = generate(gen, std::span<const double>(history).last(window), rng);
    history.push_back(x);
    out.push_back(inverse_transform(x, scaler));
  }
  return out;
}

std::vector<double> synthesize_series(const Checkpoint& ckpt, std::span<const double> real_closes,
                                      SynthesisMode mode, std::uint64_t seed) {
  Rng rng(seed);
  return synthesize_series(ckpt.generator, ckpt.scaler, real_closes, ckpt.config.condition_dim, mode, rng);
}

}  // namespace tsgan
