#pragma once

#include <memory>
#include <span>

#include "amcnet/dataset.hpp"
#include "amcnet/losses.hpp"
#include "amcnet/network.hpp"
#include "amcnet/rng.hpp"

namespace amcnet {

/// A loss to be minimized over a flat parameter vector, plus the data
/// selection policy that defines "the current data" for one step.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dimension() const = 0;

  /// Network behind the loss, or null for plain test functions.
  virtual const NetworkSpec* network() const { return nullptr; }

  /// Loss (and accuracy where meaningful) on the currently selected data.
  /// When trace is given it is filled from this pass.
  virtual Evaluation evaluate(std::span<const double> x, ActivationTrace* trace) = 0;

  /// Loss and gradient on the currently selected data.
  virtual double loss_and_gradient(std::span<const double> x, std::span<double> grad);

  /// Choose the data for the next step. Returns true when the selection
  /// changed, i.e. cached losses are stale.
  virtual bool select_data(Rng& /*rng*/) { return false; }
};

/// f(x, y) = (1 - x)^2 + 100 (y - x^2)^2.
class RosenbrockObjective final : public Objective {
 public:
  std::size_t dimension() const override { return 2; }
  Evaluation evaluate(std::span<const double> x, ActivationTrace* trace) override;
  double loss_and_gradient(std::span<const double> x, std::span<double> grad) override;
};

/// MLP regression on a grid task (batch learning over all grid points).
class GridObjective final : public Objective {
 public:
  GridObjective(NetworkSpec spec, GridTask task);

  std::size_t dimension() const override { return spec_.param_count(); }
  const NetworkSpec* network() const override { return &spec_; }
  Evaluation evaluate(std::span<const double> x, ActivationTrace* trace) override;
  double loss_and_gradient(std::span<const double> x, std::span<double> grad) override;

  const GridTask& task() const { return task_; }

 private:
  NetworkSpec spec_;
  GridTask task_;
};

/// Classification on a dataset, either batch (batch_size 0 or at least the
/// dataset size) or on minibatches drawn without replacement each step.
class ClassificationObjective final : public Objective {
 public:
  ClassificationObjective(NetworkSpec spec, std::shared_ptr<const Dataset> train,
                          std::size_t batch_size = 0);

  std::size_t dimension() const override { return spec_.param_count(); }
  const NetworkSpec* network() const override { return &spec_; }
  Evaluation evaluate(std::span<const double> x, ActivationTrace* trace) override;
  double loss_and_gradient(std::span<const double> x, std::span<double> grad) override;
  bool select_data(Rng& rng) override;

  void set_batch_size(std::size_t batch_size) { batch_size_ = batch_size; }
  std::size_t batch_size() const { return batch_size_; }
  bool is_minibatch() const { return batch_size_ != 0 && batch_size_ < train_->size(); }
  /// The full training set until the first minibatch has been drawn.
  const Dataset& current() const { return is_minibatch() && batch_.size() != 0 ? batch_ : *train_; }
  const Dataset& train() const { return *train_; }

 private:
  NetworkSpec spec_;
  std::shared_ptr<const Dataset> train_;
  std::size_t batch_size_;
  Dataset batch_;
  std::vector<std::size_t> order_;
};

}  // namespace amcnet
