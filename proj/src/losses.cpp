#include "amcnet/losses.hpp"

#include <cmath>
#include <numbers>

namespace amcnet {

namespace {
// -ln(1e-300): the cross-entropy clamp expressed on the loss side.
const double kMaxCrossEntropy = -std::log(1e-300);

void require_head(const NetworkSpec& spec, OutputHead head, const char* what) {
  if (spec.head() != head) throw ShapeError(std::string(what) + ": network has the wrong output head");
}
}  // namespace

double low_frequency_value(double theta) { return std::log1p(5.0 * theta); }

double target_value(TargetFunction f, double theta) {
  switch (f) {
    case TargetFunction::sine: return std::sin(2.0 * std::numbers::pi * theta);
    case TargetFunction::log_sine:
      return low_frequency_value(theta) + 0.1 * std::sin(20.0 * std::numbers::pi * theta);
    case TargetFunction::step: return (theta > 0.5 && theta < 0.75) ? 0.5 : 0.0;
  }
  return 0.0;
}

std::string to_string(TargetFunction f) {
  switch (f) {
    case TargetFunction::sine: return "sine";
    case TargetFunction::log_sine: return "log-sine";
    case TargetFunction::step: return "step";
  }
  return "?";
}

GridTask GridTask::make(TargetFunction f, std::size_t points) {
  if (points < 2) throw ShapeError("a grid task needs at least two points");
  GridTask task;
  task.target = f;
  task.grid.resize(1, static_cast<Eigen::Index>(points));
  task.targets.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double theta = static_cast<double>(k) / static_cast<double>(points - 1);
    task.grid(0, static_cast<Eigen::Index>(k)) = theta;
    task.targets[k] = target_value(f, theta);
  }
  if (f == TargetFunction::log_sine) {
    task.aux_targets.resize(points);
    for (std::size_t k = 0; k < points; ++k) task.aux_targets[k] = low_frequency_value(task.grid(0, static_cast<Eigen::Index>(k)));
  }
  return task;
}

namespace {
double grid_mse(const Matrix& out, const std::vector<double>& targets) {
  double sum = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double d = out(0, static_cast<Eigen::Index>(k)) - targets[k];
    sum += d * d;
  }
  return sum / static_cast<double>(targets.size());
}

void require_grid_net(const NetworkSpec& spec) {
  if (spec.kind() != NetworkKind::mlp || spec.input_size() != 1 || spec.output_size() != 1) {
    throw ShapeError("grid losses need a 1-input, 1-output MLP");
  }
  require_head(spec, OutputHead::linear, "grid loss");
}
}  // namespace

double mse_grid_loss(const NetworkSpec& spec, std::span<const double> params, const GridTask& task,
                     ActivationTrace* trace) {
  require_grid_net(spec);
  return grid_mse(mlp_forward_batch(spec, params, task.grid, trace), task.targets);
}

double pseudo_loss(const NetworkSpec& spec, std::span<const double> params, const GridTask& task) {
  require_grid_net(spec);
  if (!task.has_aux()) throw ShapeError("pseudo_loss: task has no low-frequency component");
  return grid_mse(mlp_forward_batch(spec, params, task.grid), task.aux_targets);
}

double mse_onehot_from_outputs(const Matrix& probs, std::span<const int> labels) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < probs.cols(); ++n) {
    double err = 0.0;
    for (Eigen::Index c = 0; c < probs.rows(); ++c) {
      const double d = probs(c, n) - (c == labels[static_cast<std::size_t>(n)] ? 1.0 : 0.0);
      err += d * d;
    }
    total += err;
  }
  return total / static_cast<double>(probs.cols());
}

double cross_entropy_from_logits(const Matrix& logits, std::span<const int> labels) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const auto col = logits.col(n);
    const double m = col.maxCoeff();
    double s = 0.0;
    for (Eigen::Index c = 0; c < col.size(); ++c) s += std::exp(col(c) - m);
    const double nll = m + std::log(s) - col(labels[static_cast<std::size_t>(n)]);
    total += std::min(nll, kMaxCrossEntropy);
  }
  return total / static_cast<double>(logits.cols());
}

double accuracy_from_outputs(const Matrix& outputs, std::span<const int> labels) {
  std::size_t correct = 0;
  for (Eigen::Index n = 0; n < outputs.cols(); ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < outputs.rows(); ++c) {
      if (outputs(c, n) > outputs(best, n)) best = c;
    }
    if (best == labels[static_cast<std::size_t>(n)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(outputs.cols());
}

Matrix dataset_outputs(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                       ActivationTrace* trace) {
  if (data.size() == 0) throw ShapeError("empty dataset");
  if (spec.output_size() != data.one_hot_dim) throw ShapeError("network outputs do not match the class count");
  if (spec.kind() == NetworkKind::rnn) {
    if (!data.is_sequence()) throw ShapeError("RNN needs a sequence dataset");
    return rnn_forward_batch(spec, params, data.sequences, trace);
  }
  if (data.is_sequence()) throw ShapeError("MLP needs flat inputs");
  return mlp_forward_batch(spec, params, data.inputs, trace);
}

double mse_onehot_loss(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                       ActivationTrace* trace) {
  require_head(spec, OutputHead::softmax, "mse_onehot_loss");
  return mse_onehot_from_outputs(dataset_outputs(spec, params, data, trace), data.labels);
}

double cross_entropy_loss(const NetworkSpec& spec, std::span<const double> params, const Dataset& data,
                          ActivationTrace* trace) {
  require_head(spec, OutputHead::linear_classifier, "cross_entropy_loss");
  return cross_entropy_from_logits(dataset_outputs(spec, params, data, trace), data.labels);
}

double classification_accuracy(const NetworkSpec& spec, std::span<const double> params,
                               const Dataset& data) {
  return accuracy_from_outputs(dataset_outputs(spec, params, data), data.labels);
}

Evaluation evaluate_dataset(const NetworkSpec& spec, std::span<const double> params,
                            const Dataset& data, ActivationTrace* trace) {
  const Matrix out = dataset_outputs(spec, params, data, trace);
  Evaluation e;
  switch (spec.head()) {
    case OutputHead::softmax: e.loss = mse_onehot_from_outputs(out, data.labels); break;
    case OutputHead::linear_classifier: e.loss = cross_entropy_from_logits(out, data.labels); break;
    case OutputHead::linear: throw ShapeError("evaluate_dataset needs a classifier head");
  }
  e.accuracy = accuracy_from_outputs(out, data.labels);
  return e;
}

}  // namespace amcnet
