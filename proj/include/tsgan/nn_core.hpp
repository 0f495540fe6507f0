// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsgan {

// Activations and states are column-major batches: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class Activation { relu, sigmoid, tanh, identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

enum class InitScheme { zeros, uniform_xavier };

std::string_view to_string(InitScheme s);
InitScheme init_scheme_from_string(std::string_view name);

/// A named, shaped view over one parameter (or gradient) array.
struct ParamBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::span<double> values;
};

struct ConstParamBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::span<const double> values;
};

/// Uniform Xavier draws from +-sqrt(6 / (rows + cols)).
Matrix init_params(Eigen::Index rows, Eigen::Index cols, InitScheme scheme, Rng& rng);

// ---------------------------------------------------------------------------
// Dense layer: output = activation(weights * input + bias).

struct DenseLayer {
  Matrix weights;  // [out x in]
  Vector bias;     // [out]
  Activation activation = Activation::identity;

  Eigen::Index in_size() const { return weights.cols(); }
  Eigen::Index out_size() const { return weights.rows(); }
};

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, Activation activation, InitScheme scheme, Rng& rng);
/// Same shapes and activation, all parameters zero. Used as a gradient buffer.
DenseLayer zeros_like(const DenseLayer& layer);

struct DenseCache {
  Matrix input;
  Matrix pre_activation;
  Matrix output;
};

struct DenseForward {
  Matrix output;
  DenseCache cache;
};

struct DenseBackward {
  Matrix input_grad;
  DenseLayer grads;
};

DenseForward dense_forward(const DenseLayer& layer, const Matrix& input);
/// Gradients are summed over the batch columns of `upstream`.
DenseBackward dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream);

// ---------------------------------------------------------------------------
// Bias-free LSTM cell:
//   f = sigmoid(Wxf x + Wzf z_prev)    i = sigmoid(Wxi x + Wzi z_prev)
//   o = sigmoid(Wxo x + Wzo z_prev)
//   c = c_prev * f + i * tanh(Wxc x + Wzc z_prev)
//   z = tanh(c) * o

struct GateWeights {
  Matrix from_input;   // [hidden x input]
  Matrix from_hidden;  // [hidden x hidden]
};

struct LstmCell {
  GateWeights forget_gate;
  GateWeights input_gate;
  GateWeights output_gate;
  GateWeights candidate;

  Eigen::Index input_size() const { return forget_gate.from_input.cols(); }
  Eigen::Index hidden_size() const { return forget_gate.from_input.rows(); }
};

LstmCell make_lstm(Eigen::Index input_size, Eigen::Index hidden_size, InitScheme scheme, Rng& rng);
LstmCell zeros_like(const LstmCell& cell);

struct LstmState {
  Matrix cell;    // c
  Matrix hidden;  // z, the exposed short-term memory

  static LstmState zeros(Eigen::Index hidden_size, Eigen::Index batch);
};

struct LstmStepCache {
  Matrix input;
  Matrix prev_hidden;
  Matrix prev_cell;
  Matrix forget;
  Matrix input_gate;
  Matrix output;
  Matrix candidate;  // tanh of the candidate pre-activation
  Matrix tanh_cell;
};

struct LstmStep {
  LstmState next;
  LstmStepCache cache;
};

struct LstmForward {
  LstmState final_state;
  std::vector<LstmStepCache> caches;
};

struct LstmStateGrad {
  Matrix cell;
  Matrix hidden;
};

struct LstmBackward {
  LstmCell grads;
  std::vector<Matrix> input_grads;  // one per time step
  LstmStateGrad initial_state_grad;
};

// Throws NumericError naming `step_index` if the new state is not finite.
LstmStep lstm_step(const LstmCell& cell, const Matrix& input, const LstmState& prev, std::size_t step_index = 0);
LstmForward lstm_forward(const LstmCell& cell, std::span<const Matrix> sequence, const LstmState& init);
/// Backpropagation through time from a gradient on the final state.
LstmBackward lstm_backward(const LstmCell& cell, std::span<const LstmStepCache> caches,
                           const LstmStateGrad& final_grad);

// ---------------------------------------------------------------------------
// Parameter enumeration, in a fixed order shared by parameters and gradients.

void append_blocks(std::vector<ParamBlock>& out, DenseLayer& layer, const std::string& prefix);
void append_blocks(std::vector<ConstParamBlock>& out, const DenseLayer& layer, const std::string& prefix);
void append_blocks(std::vector<ParamBlock>& out, LstmCell& cell, const std::string& prefix);
void append_blocks(std::vector<ConstParamBlock>& out, const LstmCell& cell, const std::string& prefix);

}  // namespace tsgan
