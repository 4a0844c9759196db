#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amcnet/dataset.hpp"
#include "amcnet/forward.hpp"
#include "amcnet/network.hpp"

namespace amcnet {

enum class TargetFunction {
  /// sin(2 pi theta)
  sine,
  /// ln(1 + 5 theta) + sin(20 pi theta) / 10, with ln(1 + 5 theta) as the
  /// low-frequency component
  log_sine,
  /// 1/2 on (1/2, 3/4), zero elsewhere
  step,
};

double target_value(TargetFunction f, double theta);
double low_frequency_value(double theta);

/// Regression target sampled at K evenly spaced points theta_k = k / (K - 1).
struct GridTask {
  TargetFunction target = TargetFunction::sine;
  /// 1 x K row of grid points, ready to feed the network as a batch.
  Matrix grid;
  std::vector<double> targets;
  /// Low-frequency component at each grid point; empty when the task has none.
  std::vector<double> aux_targets;

  static GridTask make(TargetFunction f, std::size_t points = 1000);
  std::size_t size() const { return targets.size(); }
  bool has_aux() const { return !aux_targets.empty(); }
};

std::string to_string(TargetFunction f);

/// (1/K) sum_k (f_x(theta_k) - f_0(theta_k))^2.
double mse_grid_loss(const NetworkSpec& spec, std::span<const double> params, const GridTask& task,
                     ActivationTrace* trace = nullptr);

/// Mean-squared difference to the low-frequency component only. Diagnostic:
/// never a training signal.
double pseudo_loss(const NetworkSpec& spec, std::span<const double> params, const GridTask& task);

/// Mean over examples of the per-example sum over classes of
/// (p_c - onehot_c)^2. Needs a softmax head.
double mse_onehot_loss(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                       ActivationTrace* trace = nullptr);

/// Mean over examples of -ln p(label), p = softmax(logits), p clamped below
/// at 1e-300.
double cross_entropy_loss(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                          ActivationTrace* trace = nullptr);

/// Fraction of examples whose argmax output equals the label; ties go to
/// the lowest class index.
double classification_accuracy(const NetworkSpec& spec, std::span<const double> params,
                               const Dataset& data);

/// Network outputs for every example of a dataset (MLP or RNN).
Matrix dataset_outputs(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                       ActivationTrace* trace = nullptr);

struct Evaluation {
  double loss = 0.0;
  std::optional<double> accuracy;
};

/// Loss matched to the head (softmax: one-hot MSE; classifier: cross
/// entropy) together with the accuracy, from one forward pass.
Evaluation evaluate_dataset(const NetworkSpec& spec, std::span<const double> params,
                            const Dataset& data, ActivationTrace* trace = nullptr);

double mse_onehot_from_outputs(const Matrix& probs, std::span<const int> labels);
double cross_entropy_from_logits(const Matrix& logits, std::span<const int> labels);
double accuracy_from_outputs(const Matrix& outputs, std::span<const int> labels);

}  // namespace amcnet
