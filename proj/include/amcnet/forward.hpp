#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "amcnet/network.hpp"

namespace amcnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sequence of one-hot vectors stored as the index of the hot component.
using OneHotSequence = std::vector<std::uint8_t>;

/// Post-activation outputs of every MLP layer for one batch; activations[0]
/// is the input and activations.back() the head output.
struct MlpCache {
  std::vector<Matrix> activations;
};

/// Hidden states of every RNN layer at every site; hidden[l][t] is the
/// state after t sites (hidden[l][0] is the zero initial state).
struct RnnCache {
  std::vector<std::vector<Matrix>> hidden;
};

/// Evaluate an MLP on a batch of inputs (one column per example).
///
/// With a softmax head every output column lies on the probability simplex.
/// When trace is given, the squared outputs of every neuron that feeds a
/// weight (input neurons included) are accumulated. Throws
/// NumericOverflowError naming the layer if a pre-activation is not finite.
Matrix mlp_forward_batch(const NetworkSpec& spec, std::span<const double> params,
                         const Matrix& inputs, ActivationTrace* trace = nullptr,
                         MlpCache* cache = nullptr);

std::vector<double> mlp_forward(const NetworkSpec& spec, std::span<const double> params,
                                std::span<const double> input, ActivationTrace* trace = nullptr);

/// Evaluate the stacked RNN on equal-length sequences; returns class logits
/// (one column per sequence). The hidden state starts at zero and each layer
/// consumes the state of the layer below at the same site.
Matrix rnn_forward_batch(const NetworkSpec& spec, std::span<const double> params,
                         std::span<const OneHotSequence> sequences,
                         ActivationTrace* trace = nullptr, RnnCache* cache = nullptr);

std::vector<double> rnn_forward(const NetworkSpec& spec, std::span<const double> params,
                                const OneHotSequence& sequence, ActivationTrace* trace = nullptr);

/// Stable column-wise softmax (max subtracted before exponentiation).
void softmax_columns(Matrix& logits);

}  // namespace amcnet
