// SPDX-License-Identifier: Apache-2.0
#include "tsgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "tsgan/cgan.hpp"

namespace tsgan {
namespace {

// The numeric side of every comparison runs through the scalar long-double
// forward passes below, not through the Eigen code in nn_core/cgan. That keeps
// the oracle independent of the code under test and pushes central-difference
// rounding noise well below the tolerance, even for gradients near 1e-8.
using Real = long double;

struct RefMat {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Real> v;  // column-major

  Real operator()(Eigen::Index r, Eigen::Index c) const { return v[static_cast<std::size_t>(c * rows + r)]; }
  Real& operator()(Eigen::Index r, Eigen::Index c) { return v[static_cast<std::size_t>(c * rows + r)]; }
};

RefMat zeros(Eigen::Index rows, Eigen::Index cols) {
  return {rows, cols, std::vector<Real>(static_cast<std::size_t>(rows * cols), 0.0L)};
}

RefMat to_ref(std::span<const double> values, Eigen::Index rows, Eigen::Index cols) {
  return {rows, cols, std::vector<Real>(values.begin(), values.end())};
}

RefMat to_ref(const Matrix& m) {
  return to_ref({m.data(), static_cast<std::size_t>(m.size())}, m.rows(), m.cols());
}

Real ref_sigmoid(Real x) { return 1.0L / (1.0L + std::exp(-x)); }

Real ref_activate(Activation a, Real x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0L ? x : 0.0L;
    case Activation::sigmoid:
      return ref_sigmoid(x);
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      return x;
  }
  return x;
}

// W [out x in] times X [in x batch], optionally plus a bias column.
RefMat ref_affine(const RefMat& w, const RefMat& x, const RefMat* bias) {
  RefMat y = zeros(w.rows, x.cols);
  for (Eigen::Index b = 0; b < x.cols; ++b) {
    for (Eigen::Index r = 0; r < w.rows; ++r) {
      Real s = bias ? bias->v[static_cast<std::size_t>(r)] : 0.0L;
      for (Eigen::Index c = 0; c < w.cols; ++c) s += w(r, c) * x(c, b);
      y(r, b) = s;
    }
  }
  return y;
}

RefMat ref_dense(const RefMat& w, const RefMat& bias, Activation a, const RefMat& x) {
  RefMat y = ref_affine(w, x, &bias);
  for (auto& e : y.v) e = ref_activate(a, e);
  return y;
}

// Gate order matches append_blocks: forget, input, output, candidate; each
// as (from_input, from_hidden).
struct RefLstmState {
  RefMat cell;
  RefMat hidden;
};

RefLstmState ref_lstm(std::span<const RefMat> w, std::span<const RefMat> sequence, RefLstmState state) {
  for (const auto& x : sequence) {
    auto gate = [&](std::size_t g) {
      RefMat a = ref_affine(w[2 * g], x, nullptr);
      const RefMat h = ref_affine(w[2 * g + 1], state.hidden, nullptr);
      for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += h.v[i];
      return a;
    };
    const RefMat f = gate(0), i = gate(1), o = gate(2), g = gate(3);
    for (std::size_t k = 0; k < f.v.size(); ++k) {
      state.cell.v[k] = state.cell.v[k] * ref_sigmoid(f.v[k]) + ref_sigmoid(i.v[k]) * std::tanh(g.v[k]);
      state.hidden.v[k] = std::tanh(state.cell.v[k]) * ref_sigmoid(o.v[k]);
    }
  }
  return state;
}

// Naive -[y log s + (1 - y) log(1 - s)]; fine in long double for the logit
// ranges produced here.
Real ref_bce(Real x, Real y) {
  const Real s = ref_sigmoid(x);
  return -(y * std::log(s) + (1.0L - y) * std::log(1.0L - s));
}

Real ref_mean_bce(const RefMat& logits, Real label) {
  Real s = 0.0L;
  for (Real x : logits.v) s += ref_bce(x, label);
  return s / static_cast<Real>(logits.v.size());
}

Real ref_project(const RefMat& values, const RefMat& weights) {
  Real s = 0.0L;
  for (std::size_t i = 0; i < values.v.size(); ++i) s += values.v[i] * weights.v[i];
  return s;
}

struct RefDisc {
  std::vector<RefMat> weights;
  std::vector<RefMat> biases;
  std::vector<Activation> activations;
};

RefMat ref_discriminate(const RefDisc& d, const RefMat& conditions, const RefMat& values) {
  RefMat x = zeros(conditions.rows + 1, conditions.cols);
  for (Eigen::Index b = 0; b < conditions.cols; ++b) {
    for (Eigen::Index r = 0; r < conditions.rows; ++r) x(r, b) = conditions(r, b);
    x(conditions.rows, b) = values(0, b);
  }
  for (std::size_t l = 0; l < d.weights.size(); ++l) x = ref_dense(d.weights[l], d.biases[l], d.activations[l], x);
  return x;
}

// Step inputs [condition_t; noise] for t = 0..window-1.
std::vector<RefMat> ref_generator_sequence(const RefMat& conditions, const RefMat& noise) {
  std::vector<RefMat> seq;
  for (Eigen::Index t = 0; t < conditions.rows; ++t) {
    RefMat step = zeros(noise.rows + 1, conditions.cols);
    for (Eigen::Index b = 0; b < conditions.cols; ++b) {
      step(0, b) = conditions(t, b);
      for (Eigen::Index r = 0; r < noise.rows; ++r) step(r + 1, b) = noise(r, b);
    }
    seq.push_back(std::move(step));
  }
  return seq;
}

// One parameter array under test: its long-double copy (perturbed in place
// by the checker) and the analytic gradient to compare against.
struct TestBlock {
  std::string name;
  RefMat* value;
  std::span<const double> analytic;
};

class Checker {
 public:
  explicit Checker(const GradcheckOptions& options) : options_(options) {}

  template <typename LossFn>
  void check(std::span<const TestBlock> blocks, LossFn&& loss) {
    const Real h = options_.step;
    for (const auto& block : blocks) {
      auto& result = entry(block.name);
      ++result.trials;
      const bool corrupt = block.name == options_.corrupt_block;
      auto& values = block.value->v;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const Real saved = values[i];
        values[i] = saved + h;
        const Real up = loss();
        values[i] = saved - h;
        const Real down = loss();
        values[i] = saved;
        const double numeric = static_cast<double>((up - down) / (2.0L * h));
        const double analytic = corrupt ? block.analytic[i] * 1.01 + 1e-3 : block.analytic[i];
        result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic, numeric));
        ++result.entries;
      }
    }
  }

  // The implementation's forward value against the reference forward.
  void check_forward(const std::string& name, double implementation, Real reference) {
    auto& result = entry(name);
    ++result.trials;
    ++result.entries;
    result.max_rel_error = std::max(result.max_rel_error, relative_error(implementation, static_cast<double>(reference)));
  }

  GradcheckReport report() const {
    GradcheckReport r;
    r.tolerance = options_.tolerance;
    for (const auto& name : order_) {
      auto b = blocks_.at(name);
      b.passed = b.max_rel_error <= options_.tolerance;
      r.blocks.push_back(b);
    }
    return r;
  }

 private:
  GradcheckBlock& entry(const std::string& name) {
    auto [it, inserted] = blocks_.try_emplace(name);
    if (inserted) {
      it->second.name = name;
      order_.push_back(name);
    }
    return it->second;
  }

  const GradcheckOptions& options_;
  std::map<std::string, GradcheckBlock> blocks_;
  std::vector<std::string> order_;
};

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
  }
  return m;
}

std::span<const double> span_of(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<const double> span_of(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

RefDisc to_ref(const Discriminator& d) {
  RefDisc r;
  for (const auto& l : d.layers) {
    r.weights.push_back(to_ref(l.weights));
    r.biases.push_back(to_ref(span_of(l.bias), l.bias.size(), 1));
    r.activations.push_back(l.activation);
  }
  return r;
}

void check_dense(Checker& checker, Rng& rng, Activation activation) {
  const std::string prefix = "dense." + std::string(to_string(activation));
  DenseLayer layer = make_dense(3, 4, activation, InitScheme::uniform_xavier, rng);
  layer.bias = random_matrix(4, 1, 0.5, rng);
  const Matrix input = random_matrix(3, 2, 1.0, rng);
  const Matrix proj = random_matrix(4, 2, 1.0, rng);

  const auto fwd = dense_forward(layer, input);
  const auto back = dense_backward(layer, fwd.cache, proj);

  RefMat w = to_ref(layer.weights), b = to_ref(span_of(layer.bias), 4, 1), x = to_ref(input);
  const RefMat p = to_ref(proj);
  auto loss = [&] { return ref_project(ref_dense(w, b, activation, x), p); };
  checker.check_forward(prefix + ".forward", (fwd.output.array() * proj.array()).sum(), loss());
  const TestBlock blocks[] = {{prefix + ".weights", &w, span_of(back.grads.weights)},
                              {prefix + ".bias", &b, span_of(back.grads.bias)},
                              {prefix + ".input", &x, span_of(back.input_grad)}};
  checker.check(blocks, loss);
}

void check_lstm(Checker& checker, Rng& rng) {
  constexpr Eigen::Index hidden = 4, input = 3, batch = 2;
  constexpr std::size_t steps = 5;
  const LstmCell cell = make_lstm(input, hidden, InitScheme::uniform_xavier, rng);
  std::vector<Matrix> sequence;
  for (std::size_t t = 0; t < steps; ++t) sequence.push_back(random_matrix(input, batch, 1.0, rng));
  const LstmState init{random_matrix(hidden, batch, 0.5, rng), random_matrix(hidden, batch, 0.5, rng)};
  const Matrix proj_hidden = random_matrix(hidden, batch, 1.0, rng);
  const Matrix proj_cell = random_matrix(hidden, batch, 1.0, rng);

  const auto fwd = lstm_forward(cell, sequence, init);
  const auto back = lstm_backward(cell, fwd.caches, {proj_cell, proj_hidden});

  std::vector<ConstParamBlock> params, grads;
  append_blocks(params, cell, "lstm");
  append_blocks(grads, back.grads, "lstm");
  std::vector<RefMat> w;
  for (const auto& p : params) w.push_back(to_ref(p.values, p.rows, p.cols));
  std::vector<RefMat> seq;
  for (const auto& s : sequence) seq.push_back(to_ref(s));
  const RefLstmState ref_init{to_ref(init.cell), to_ref(init.hidden)};
  const RefMat ph = to_ref(proj_hidden), pc = to_ref(proj_cell);

  auto loss = [&] {
    const auto s = ref_lstm(w, seq, ref_init);
    return ref_project(s.hidden, ph) + ref_project(s.cell, pc);
  };
  checker.check_forward("lstm.forward",
                        (fwd.final_state.hidden.array() * proj_hidden.array()).sum() +
                            (fwd.final_state.cell.array() * proj_cell.array()).sum(),
                        loss());
  std::vector<TestBlock> blocks;
  for (std::size_t b = 0; b < params.size(); ++b) blocks.push_back({params[b].name, &w[b], grads[b].values});
  for (std::size_t t = 0; t < steps; ++t) {
    blocks.push_back({"lstm.sequence.step" + std::to_string(t), &seq[t], span_of(back.input_grads[t])});
  }
  checker.check(blocks, loss);
}

TrainConfig small_gan_config() {
  TrainConfig c;
  c.noise_dim = 3;
  c.condition_dim = 5;
  c.hidden_size = 4;
  c.disc_layers = {8, 4};
  return c;
}

void randomize_biases(Discriminator& disc, Rng& rng) {
  for (auto& layer : disc.layers) layer.bias = random_matrix(layer.bias.size(), 1, 0.3, rng);
}

// Discriminator loss 0.5 (BCE(D(y, x), 1) + BCE(D(y, x_fake), 0)) w.r.t. the
// discriminator's parameters, as in the D-step.
void check_discriminator_path(Checker& checker, Rng& rng) {
  const TrainConfig config = small_gan_config();
  Discriminator disc = make_discriminator(config, rng);
  randomize_biases(disc, rng);
  constexpr Eigen::Index batch = 3;
  const Matrix conditions = random_matrix(static_cast<Eigen::Index>(config.condition_dim), batch, 1.0, rng);
  const Matrix real = random_matrix(1, batch, 1.0, rng);
  const Matrix fake = random_matrix(1, batch, 1.0, rng);

  const auto r = discriminator_forward(disc, conditions, real);
  const auto f = discriminator_forward(disc, conditions, fake);
  Matrix real_grad(1, batch), fake_grad(1, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    real_grad(0, j) = 0.5 * bce_with_logits_grad(r.logits(0, j), 1.0) / batch;
    fake_grad(0, j) = 0.5 * bce_with_logits_grad(f.logits(0, j), 0.0) / batch;
  }
  Discriminator grads = discriminator_backward(disc, r, real_grad).grads;
  const auto fake_back = discriminator_backward(disc, f, fake_grad).grads;
  for (std::size_t i = 0; i < grads.layers.size(); ++i) {
    grads.layers[i].weights += fake_back.layers[i].weights;
    grads.layers[i].bias += fake_back.layers[i].bias;
  }
  const double implementation_loss =
      0.5 * (bce_with_logits_mean({r.logits.data(), batch}, 1.0) + bce_with_logits_mean({f.logits.data(), batch}, 0.0));

  RefDisc ref = to_ref(disc);
  const RefMat cond = to_ref(conditions), ref_real = to_ref(real), ref_fake = to_ref(fake);
  auto loss = [&] {
    return 0.5L * (ref_mean_bce(ref_discriminate(ref, cond, ref_real), 1.0L) +
                   ref_mean_bce(ref_discriminate(ref, cond, ref_fake), 0.0L));
  };
  checker.check_forward("d_loss.forward", implementation_loss, loss());

  const auto analytic = param_blocks(std::as_const(grads));
  std::vector<TestBlock> blocks;
  for (std::size_t l = 0; l < ref.weights.size(); ++l) {
    blocks.push_back({"d_loss." + analytic[2 * l].name, &ref.weights[l], analytic[2 * l].values});
    blocks.push_back({"d_loss." + analytic[2 * l + 1].name, &ref.biases[l], analytic[2 * l + 1].values});
  }
  checker.check(blocks, loss);
}

// Generator loss mean BCE(D(y, G(y, z)), 1), differentiated w.r.t. the
// generator's parameters through the discriminator, as in the G-step.
void check_generator_path(Checker& checker, Rng& rng) {
  const TrainConfig config = small_gan_config();
  const Generator gen = make_generator(config, rng);
  Discriminator disc = make_discriminator(config, rng);
  randomize_biases(disc, rng);
  constexpr Eigen::Index batch = 3;
  const Matrix conditions = random_matrix(static_cast<Eigen::Index>(config.condition_dim), batch, 1.0, rng);
  const Matrix noise = sample_noise(config.noise_dim, batch, rng);

  const auto g = generator_forward(gen, conditions, noise);
  const auto d = discriminator_forward(disc, conditions, g.output);
  Matrix logit_grad(1, batch);
  for (Eigen::Index j = 0; j < batch; ++j) logit_grad(0, j) = bce_with_logits_grad(d.logits(0, j), 1.0) / batch;
  const Matrix value_grad = discriminator_backward(disc, d, logit_grad).input_grad.bottomRows(1);
  const Generator grads = generator_backward(gen, g, value_grad);

  const auto params = param_blocks(gen);
  const auto analytic = param_blocks(grads);
  std::vector<RefMat> w;
  for (const auto& p : params) w.push_back(to_ref(p.values, p.rows, p.cols));
  const std::size_t lstm_blocks = 8;  // then head.weights, head.bias
  const RefDisc ref_disc = to_ref(disc);
  const RefMat cond = to_ref(conditions);
  const auto seq = ref_generator_sequence(cond, to_ref(noise));
  const Eigen::Index hidden = gen.lstm.hidden_size();

  auto loss = [&] {
    const auto state = ref_lstm(std::span<const RefMat>(w).first(lstm_blocks), seq,
                                {zeros(hidden, batch), zeros(hidden, batch)});
    const RefMat values = ref_dense(w[lstm_blocks], w[lstm_blocks + 1], Activation::identity, state.hidden);
    return ref_mean_bce(ref_discriminate(ref_disc, cond, values), 1.0L);
  };
  checker.check_forward("d_of_g.forward", bce_with_logits_mean({d.logits.data(), batch}, 1.0), loss());

  std::vector<TestBlock> blocks;
  for (std::size_t b = 0; b < params.size(); ++b) {
    blocks.push_back({"d_of_g." + params[b].name, &w[b], analytic[b].values});
  }
  checker.check(blocks, loss);
}

void check_bce(Checker& checker, Rng& rng) {
  std::uniform_real_distribution<double> logit_dist(-20.0, 20.0);
  for (const double label : {0.0, 1.0}) {
    const std::string name = label == 0.0 ? "bce.label0" : "bce.label1";
    const double x = logit_dist(rng);
    const double analytic = bce_with_logits_grad(x, label);
    RefMat ref_x{1, 1, {static_cast<Real>(x)}};
    auto loss = [&] { return ref_bce(ref_x.v[0], label); };
    checker.check_forward(name + ".forward", bce_with_logits(x, label), loss());
    const TestBlock blocks[] = {{name, &ref_x, {&analytic, 1}}};
    checker.check(blocks, loss);
  }
}

}  // namespace

bool GradcheckReport::passed() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const GradcheckBlock& b) { return b.passed; });
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  Checker checker(options);
  Rng rng(options.seed);
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    for (auto a : {Activation::identity, Activation::sigmoid, Activation::tanh, Activation::relu}) {
      check_dense(checker, rng, a);
    }
    check_lstm(checker, rng);
    check_discriminator_path(checker, rng);
    check_generator_path(checker, rng);
    check_bce(checker, rng);
  }
  return checker.report();
}

void print_report(std::ostream& out, const GradcheckReport& report) {
  char line[160];
  for (const auto& b : report.blocks) {
    std::snprintf(line, sizeof line, "%-48s max_rel_error=%.3e trials=%zu entries=%zu %s\n", b.name.c_str(),
                  b.max_rel_error, b.trials, b.entries, b.passed ? "PASS" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof line, "gradcheck %s (tolerance %.1e)\n", report.passed() ? "PASSED" : "FAILED",
                report.tolerance);
  out << line;
}

}  // namespace tsgan
