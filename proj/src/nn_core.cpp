// SPDX-License-Identifier: Apache-2.0
#include "tsgan/nn_core.hpp"

#include <cmath>
#include <string>

#include "tsgan/error.hpp"
#include "tsgan/optim_loss.hpp"

namespace tsgan {
namespace {

Matrix sigmoid_of(const Matrix& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

Matrix tanh_of(const Matrix& x) { return x.array().tanh().matrix(); }

Matrix apply(Activation a, const Matrix& pre) {
  switch (a) {
    case Activation::relu:
      return pre.cwiseMax(0.0);
    case Activation::sigmoid:
      return sigmoid_of(pre);
    case Activation::tanh:
      return tanh_of(pre);
    case Activation::identity:
      return pre;
  }
  return pre;
}

// d(activation)/d(pre), expressed through whichever of pre/output is cheaper.
Matrix derivative(Activation a, const Matrix& pre, const Matrix& out) {
  switch (a) {
    case Activation::relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
    case Activation::tanh:
      return (1.0 - out.array().square()).matrix();
    case Activation::identity:
      return Matrix::Ones(pre.rows(), pre.cols());
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw UsageError("shape mismatch: " + what);
}

GateWeights make_gate(Eigen::Index in, Eigen::Index hidden, InitScheme scheme, Rng& rng) {
  GateWeights g;
  g.from_input = init_params(hidden, in, scheme, rng);
  g.from_hidden = init_params(hidden, hidden, scheme, rng);
  return g;
}

GateWeights zero_gate(const GateWeights& g) {
  return {Matrix::Zero(g.from_input.rows(), g.from_input.cols()),
          Matrix::Zero(g.from_hidden.rows(), g.from_hidden.cols())};
}

template <typename Block, typename M>
Block block_of(const std::string& name, M& m) {
  return {name, m.rows(), m.cols(), {m.data(), static_cast<std::size_t>(m.size())}};
}

template <typename Block, typename Cell>
void append_lstm(std::vector<Block>& out, Cell& cell, const std::string& prefix) {
  auto gate = [&](auto& g, const char* name) {
    out.push_back(block_of<Block>(prefix + name + ".from_input", g.from_input));
    out.push_back(block_of<Block>(prefix + name + ".from_hidden", g.from_hidden));
  };
  gate(cell.forget_gate, "forget");
  gate(cell.input_gate, "input");
  gate(cell.output_gate, "output");
  gate(cell.candidate, "candidate");
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  for (auto a : {Activation::relu, Activation::sigmoid, Activation::tanh, Activation::identity}) {
    if (to_string(a) == name) return a;
  }
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(InitScheme s) { return s == InitScheme::zeros ? "zeros" : "uniform-xavier"; }

InitScheme init_scheme_from_string(std::string_view name) {
  if (name == "zeros") return InitScheme::zeros;
  if (name == "uniform-xavier") return InitScheme::uniform_xavier;
  throw UsageError("unknown init scheme '" + std::string(name) + "'");
}

Matrix init_params(Eigen::Index rows, Eigen::Index cols, InitScheme scheme, Rng& rng) {
  Matrix m = Matrix::Zero(rows, cols);
  if (scheme == InitScheme::uniform_xavier && rows + cols > 0) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major fill so the draw order does not depend on storage order.
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
    }
  }
  return m;
}

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation activation, InitScheme scheme, Rng& rng) {
  return {init_params(out, in, scheme, rng), Vector::Zero(out), activation};
}

DenseLayer zeros_like(const DenseLayer& layer) {
  return {Matrix::Zero(layer.weights.rows(), layer.weights.cols()), Vector::Zero(layer.bias.size()),
          layer.activation};
}

DenseForward dense_forward(const DenseLayer& layer, const Matrix& input) {
  require_shape(input.rows() == layer.in_size(), "dense input has " + std::to_string(input.rows()) +
                                                     " rows, layer expects " + std::to_string(layer.in_size()));
  DenseForward f;
  f.cache.input = input;
  f.cache.pre_activation.noalias() = layer.weights * input;
  f.cache.pre_activation.colwise() += layer.bias;
  f.cache.output = apply(layer.activation, f.cache.pre_activation);
  f.output = f.cache.output;
  return f;
}

DenseBackward dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream) {
  require_shape(upstream.rows() == layer.out_size() && upstream.cols() == cache.input.cols(),
                "dense upstream gradient");
  const Matrix delta =
      (upstream.array() * derivative(layer.activation, cache.pre_activation, cache.output).array()).matrix();
  DenseBackward b;
  b.grads.activation = layer.activation;
  b.grads.weights.noalias() = delta * cache.input.transpose();
  b.grads.bias = delta.rowwise().sum();
  b.input_grad.noalias() = layer.weights.transpose() * delta;
  return b;
}

LstmCell make_lstm(Eigen::Index input_size, Eigen::Index hidden_size, InitScheme scheme, Rng& rng) {
  LstmCell cell;
  cell.forget_gate = make_gate(input_size, hidden_size, scheme, rng);
  cell.input_gate = make_gate(input_size, hidden_size, scheme, rng);
  cell.output_gate = make_gate(input_size, hidden_size, scheme, rng);
  cell.candidate = make_gate(input_size, hidden_size, scheme, rng);
  return cell;
}

LstmCell zeros_like(const LstmCell& cell) {
  return {zero_gate(cell.forget_gate), zero_gate(cell.input_gate), zero_gate(cell.output_gate),
          zero_gate(cell.candidate)};
}

LstmState LstmState::zeros(Eigen::Index hidden_size, Eigen::Index batch) {
  return {Matrix::Zero(hidden_size, batch), Matrix::Zero(hidden_size, batch)};
}

LstmStep lstm_step(const LstmCell& cell, const Matrix& input, const LstmState& prev, std::size_t step_index) {
  const auto hidden = cell.hidden_size();
  require_shape(input.rows() == cell.input_size(), "lstm input has " + std::to_string(input.rows()) +
                                                       " rows, cell expects " + std::to_string(cell.input_size()));
  require_shape(prev.hidden.rows() == hidden && prev.cell.rows() == hidden && prev.hidden.cols() == input.cols() &&
                    prev.cell.cols() == input.cols(),
                "lstm state");

  auto pre = [&](const GateWeights& g) {
    Matrix m;
    m.noalias() = g.from_input * input;
    m.noalias() += g.from_hidden * prev.hidden;
    return m;
  };

  LstmStep s;
  auto& c = s.cache;
  c.input = input;
  c.prev_hidden = prev.hidden;
  c.prev_cell = prev.cell;
  c.forget = sigmoid_of(pre(cell.forget_gate));
  c.input_gate = sigmoid_of(pre(cell.input_gate));
  c.output = sigmoid_of(pre(cell.output_gate));
  c.candidate = tanh_of(pre(cell.candidate));
  s.next.cell = (prev.cell.array() * c.forget.array() + c.input_gate.array() * c.candidate.array()).matrix();
  c.tanh_cell = tanh_of(s.next.cell);
  s.next.hidden = (c.tanh_cell.array() * c.output.array()).matrix();
  if (!s.next.cell.allFinite() || !s.next.hidden.allFinite()) {
    throw NumericError("non-finite LSTM state at step " + std::to_string(step_index));
  }
  return s;
}

LstmForward lstm_forward(const LstmCell& cell, std::span<const Matrix> sequence, const LstmState& init) {
  if (sequence.empty()) throw UsageError("lstm_forward needs a non-empty sequence");
  LstmForward f;
  f.caches.reserve(sequence.size());
  LstmState state = init;
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    auto step = lstm_step(cell, sequence[t], state, t);
    state = std::move(step.next);
    f.caches.push_back(std::move(step.cache));
  }
  f.final_state = std::move(state);
  return f;
}

LstmBackward lstm_backward(const LstmCell& cell, std::span<const LstmStepCache> caches,
                           const LstmStateGrad& final_grad) {
  if (caches.empty()) throw UsageError("lstm_backward needs caches from a forward pass");
  const auto hidden = cell.hidden_size();
  const auto batch = caches.front().input.cols();
  require_shape(final_grad.hidden.rows() == hidden && final_grad.hidden.cols() == batch &&
                    final_grad.cell.rows() == hidden && final_grad.cell.cols() == batch,
                "lstm final state gradient");

  LstmBackward b;
  b.grads = zeros_like(cell);
  b.input_grads.resize(caches.size());

  Matrix d_hidden = final_grad.hidden;
  Matrix d_cell = final_grad.cell;
  Matrix d_forget, d_input, d_output, d_candidate;
  for (std::size_t step = caches.size(); step-- > 0;) {
    const auto& c = caches[step];
    const auto o = c.output.array();
    const auto f = c.forget.array();
    const auto i = c.input_gate.array();
    const auto g = c.candidate.array();
    const auto tc = c.tanh_cell.array();

    d_cell.array() += d_hidden.array() * o * (1.0 - tc.square());
    // Gradients w.r.t. gate pre-activations.
    d_output = (d_hidden.array() * tc * o * (1.0 - o)).matrix();
    d_forget = (d_cell.array() * c.prev_cell.array() * f * (1.0 - f)).matrix();
    d_input = (d_cell.array() * g * i * (1.0 - i)).matrix();
    d_candidate = (d_cell.array() * i * (1.0 - g.square())).matrix();

    auto accumulate = [&](GateWeights& grad, const GateWeights& w, const Matrix& delta, Matrix& dx, Matrix& dh) {
      grad.from_input.noalias() += delta * c.input.transpose();
      grad.from_hidden.noalias() += delta * c.prev_hidden.transpose();
      dx.noalias() += w.from_input.transpose() * delta;
      dh.noalias() += w.from_hidden.transpose() * delta;
    };
    Matrix dx = Matrix::Zero(c.input.rows(), batch);
    Matrix dh = Matrix::Zero(hidden, batch);
    accumulate(b.grads.forget_gate, cell.forget_gate, d_forget, dx, dh);
    accumulate(b.grads.input_gate, cell.input_gate, d_input, dx, dh);
    accumulate(b.grads.output_gate, cell.output_gate, d_output, dx, dh);
    accumulate(b.grads.candidate, cell.candidate, d_candidate, dx, dh);

    b.input_grads[step] = std::move(dx);
    d_hidden = std::move(dh);
    d_cell = (d_cell.array() * f).matrix();
  }
  b.initial_state_grad = {std::move(d_cell), std::move(d_hidden)};
  return b;
}

void append_blocks(std::vector<ParamBlock>& out, DenseLayer& layer, const std::string& prefix) {
  out.push_back(block_of<ParamBlock>(prefix + ".weights", layer.weights));
  out.push_back(block_of<ParamBlock>(prefix + ".bias", layer.bias));
}

void append_blocks(std::vector<ConstParamBlock>& out, const DenseLayer& layer, const std::string& prefix) {
  out.push_back(block_of<ConstParamBlock>(prefix + ".weights", layer.weights));
  out.push_back(block_of<ConstParamBlock>(prefix + ".bias", layer.bias));
}

void append_blocks(std::vector<ParamBlock>& out, LstmCell& cell, const std::string& prefix) {
  append_lstm(out, cell, prefix + ".");
}

void append_blocks(std::vector<ConstParamBlock>& out, const LstmCell& cell, const std::string& prefix) {
  append_lstm(out, cell, prefix + ".");
}

}  // namespace tsgan
