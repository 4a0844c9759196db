#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "amcnet/checkpoint.hpp"
#include "amcnet/experiments.hpp"
#include "amcnet/record.hpp"

namespace amcnet {

/// One training trajectory of an ExperimentPlan, advanced step by step.
///
/// Rows are recorded at epoch 0, every record_every epochs, and at the last
/// epoch. The recorded loss is the loss on the full training data (the grid,
/// or the training set), the accuracy is measured on the test set, and
/// aux_loss is the pseudo-loss of tasks that define one.
class Run {
 public:
  /// Fresh run: parameters are initialized from the plan's seed.
  explicit Run(ExperimentPlan plan);
  /// Resume from a checkpoint written by a run of the same plan.
  Run(ExperimentPlan plan, const Checkpoint& checkpoint);
  ~Run();
  Run(Run&&) noexcept;
  Run& operator=(Run&&) noexcept;

  const ExperimentPlan& plan() const;
  std::uint64_t epoch() const;
  /// Epoch budget used up, diverged, or stopped below the target loss.
  bool finished() const;

  /// Take up to `steps` more steps (fewer if the run finishes first).
  void advance(std::uint64_t steps);
  void run_to_end();

  const RunRecord& record() const;
  const ParamVector& params() const;
  const AmcState& amc_state() const;
  /// Minibatch sizes in force over the run, starting with the initial one.
  const std::vector<std::size_t>& batch_sizes() const;

  Checkpoint checkpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Digest of everything in a plan that shapes the trajectory (all fields but
/// the epoch budget).
std::uint64_t plan_digest(const ExperimentPlan& plan);

/// Convenience: run a plan to the end and return its record.
RunRecord run_plan(const ExperimentPlan& plan);

}  // namespace amcnet
