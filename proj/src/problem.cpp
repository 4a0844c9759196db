#include "amcnet/objective.hpp"

#include <numeric>

#include "amcnet/errors.hpp"
#include "amcnet/grad.hpp"
#include "amcnet/rosenbrock.hpp"

namespace amcnet {

double Objective::loss_and_gradient(std::span<const double>, std::span<double>) {
  throw Error("this objective does not provide gradients");
}

double rosenbrock_eval(double x, double y) {
  const double a = 1.0 - x;
  const double b = y - x * x;
  return a * a + 100.0 * b * b;
}

Evaluation RosenbrockObjective::evaluate(std::span<const double> x, ActivationTrace*) {
  if (x.size() != 2) throw ShapeError("rosenbrock takes two coordinates");
  return {rosenbrock_eval(x[0], x[1]), std::nullopt};
}

double RosenbrockObjective::loss_and_gradient(std::span<const double> x, std::span<double> grad) {
  if (x.size() != 2 || grad.size() != 2) throw ShapeError("rosenbrock takes two coordinates");
  const double b = x[1] - x[0] * x[0];
  grad[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * b;
  grad[1] = 200.0 * b;
  return rosenbrock_eval(x[0], x[1]);
}

GridObjective::GridObjective(NetworkSpec spec, GridTask task)
    : spec_(std::move(spec)), task_(std::move(task)) {}

Evaluation GridObjective::evaluate(std::span<const double> x, ActivationTrace* trace) {
  return {mse_grid_loss(spec_, x, task_, trace), std::nullopt};
}

double GridObjective::loss_and_gradient(std::span<const double> x, std::span<double> grad) {
  return grid_loss_gradient(spec_, x, task_, grad);
}

ClassificationObjective::ClassificationObjective(NetworkSpec spec, std::shared_ptr<const Dataset> train,
                                                 std::size_t batch_size)
    : spec_(std::move(spec)), train_(std::move(train)), batch_size_(batch_size) {
  if (!train_ || train_->size() == 0) throw ShapeError("classification objective needs training data");
  train_->validate();
}

bool ClassificationObjective::select_data(Rng& rng) {
  if (!is_minibatch()) return false;
  const std::size_t n = train_->size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size_; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order_[i], order_[j]);
  }
  batch_ = train_->subset(std::span<const std::size_t>(order_.data(), batch_size_));
  return true;
}

Evaluation ClassificationObjective::evaluate(std::span<const double> x, ActivationTrace* trace) {
  return evaluate_dataset(spec_, x, current(), trace);
}

double ClassificationObjective::loss_and_gradient(std::span<const double> x, std::span<double> grad) {
  return dataset_loss_gradient(spec_, x, current(), grad);
}

}  // namespace amcnet
