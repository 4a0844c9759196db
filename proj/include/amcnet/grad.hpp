#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amcnet/dataset.hpp"
#include "amcnet/losses.hpp"
#include "amcnet/network.hpp"

namespace amcnet {

enum class GradAlgorithm { gd, adam };

struct GradConfig {
  GradAlgorithm algorithm = GradAlgorithm::gd;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double delta = 1e-8;
  /// Global-norm clipping threshold; disabled when empty.
  std::optional<double> clip;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Exact gradient of mse_grid_loss by backpropagation; returns the loss.
double grid_loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                          const GridTask& task, std::span<double> grad);

/// Exact gradient of the head-matched dataset loss (one-hot MSE for softmax
/// heads, cross entropy for classifiers). RNNs are differentiated through
/// the full unrolled sequence. Returns the loss.
double dataset_loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                             const Dataset& data, std::span<double> grad);

std::vector<double> loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                                  const GridTask& task);
std::vector<double> loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                                  const Dataset& data);

double gradient_norm(std::span<const double> grad);
double gradient_norm(const NetworkSpec& spec, std::span<const double> params, const GridTask& task);
double gradient_norm(const NetworkSpec& spec, std::span<const double> params, const Dataset& data);

/// Rescale grad to norm threshold when its norm exceeds threshold. Returns
/// whether clipping happened.
bool clip_gradient(std::span<double> grad, double threshold);

/// params -= lr * grad, after optional clipping of grad in place.
void gd_step(std::span<double> params, std::span<double> grad, const GradConfig& config);

/// Adam with bias correction, after optional clipping of grad in place.
void adam_step(std::span<double> params, std::span<double> grad, AdamState& state,
               const GradConfig& config);

/// Central differences with h_i = 1e-6 * max(1, |x_i|).
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& loss, std::span<const double> x);

std::string to_string(GradAlgorithm a);

}  // namespace amcnet
