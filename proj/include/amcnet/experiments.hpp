#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amcnet/dataset.hpp"
#include "amcnet/grad.hpp"
#include "amcnet/init.hpp"
#include "amcnet/losses.hpp"
#include "amcnet/mc.hpp"
#include "amcnet/network.hpp"
#include "amcnet/objective.hpp"
#include "amcnet/record.hpp"

namespace amcnet {

enum class ExperimentId { mnist, accept_scan, rosenbrock, frequency, rnn, deep_step, batching };
enum class OptimizerKind { metropolis, amc, gd, adam };
enum class BatchMode { batch, minibatch, progressive };
enum class Preset { desk, paper };

std::string to_string(ExperimentId id);
std::string to_string(OptimizerKind k);
std::string to_string(BatchMode m);
std::string to_string(Preset p);
ExperimentId experiment_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
BatchMode batch_mode_from_string(const std::string& s);
Preset preset_from_string(const std::string& s);
const std::vector<std::string>& experiment_names();

/// Everything needed to reproduce one training trajectory.
struct ExperimentPlan {
  ExperimentId experiment = ExperimentId::rosenbrock;
  Preset preset = Preset::desk;
  std::uint64_t seed = 0;
  std::uint64_t epochs = 10000;

  OptimizerKind optimizer = OptimizerKind::amc;
  AmcConfig amc;
  GradConfig grad;
  InitSpec init;

  /// Hidden width of grid-task MLPs.
  std::size_t width = 10;
  /// Hidden layers of grid-task MLPs.
  std::size_t depth = 2;
  std::size_t rnn_hidden = 64;
  std::size_t rnn_layers = 2;

  std::size_t grid_points = 1000;
  double x0 = -2.0;
  double y0 = 2.0;

  /// Directory holding the four standard MNIST IDX files.
  std::string mnist_dir;
  /// Examples kept after loading (and after class filtering); 0 keeps all.
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double threshold = 0.5;

  BatchMode batch_mode = BatchMode::batch;
  /// Minibatch size, or the starting size in progressive mode.
  std::size_t batch_size = 0;
  /// Progressive mode doubles the minibatch when its error rate falls below
  /// this value.
  double batch_trigger = 0.1;

  std::uint64_t record_every = 1;
  std::size_t record_window = 100;
  bool record_grad_norm = false;
  /// Stop early once the recorded loss falls to or below this value.
  std::optional<double> stop_below;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&);
};

/// Defaults for an experiment at the given preset.
ExperimentPlan default_plan(ExperimentId id, Preset preset = Preset::desk);

/// Network used by a plan; empty for Rosenbrock.
std::optional<NetworkSpec> plan_network(const ExperimentPlan& plan);

/// Hidden layer sizes of the deep step nets: 4 neurons in each of the first
/// d - 1 hidden layers and 10 in the last, i.e. 1 -> 4 x (d-1) -> 10 -> 1.
std::vector<std::size_t> deep_step_sizes(std::size_t depth);

/// Training and test data of a classification plan.
struct ClassificationData {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
};

/// Loads (and for the RNN binarizes) the MNIST files named by the plan.
/// Throws ConfigError when the directory is unset or missing.
ClassificationData load_plan_data(const ExperimentPlan& plan);

/// Environment variable consulted when a plan does not name a data directory.
inline constexpr const char* kMnistDirEnv = "AMCNET_MNIST_DIR";

/// The MNIST directory for a plan: its own setting, else $AMCNET_MNIST_DIR,
/// else empty.
std::string resolve_mnist_dir(const ExperimentPlan& plan);

// ---------------------------------------------------------------------------
// Multi-run studies. Each one runs single trajectories (see runner.hpp) and
// summarizes them.

/// Acceptance rate at loss U0, interpolated where a run first crosses U0.
struct AcceptanceEntry {
  std::size_t width = 0;
  std::size_t depth = 0;
  std::size_t params = 0;
  double u0 = 0.0;
  /// Seeds whose run crossed U0 within the budget.
  std::size_t reached = 0;
  std::size_t seeds = 0;
  /// Mean over the seeds that reached U0; empty when none did.
  std::optional<double> rate;
};

/// Crossing of `level` in the recorded loss, with the acceptance rate
/// interpolated linearly in log U between the bracketing rows.
std::optional<double> acceptance_at_loss(const RunRecord& record, double level);

double median(std::vector<double> values);

/// First recorded epoch whose loss is at or below level.
std::optional<std::uint64_t> epochs_to_loss(const RunRecord& record, double level);

std::vector<AcceptanceEntry> run_acceptance_scan(const ExperimentPlan& base,
                                                 const std::vector<std::size_t>& widths,
                                                 const std::vector<std::size_t>& depths,
                                                 const std::vector<double>& u0,
                                                 const std::vector<std::uint64_t>& seeds);

struct LabelledRecord {
  std::string label;
  std::uint64_t seed = 0;
  RunRecord record;
};

/// Rosenbrock from the plan's start point for each epsilon and seed.
std::vector<LabelledRecord> run_rosenbrock_experiment(const ExperimentPlan& base,
                                                      const std::vector<double>& epsilons,
                                                      const std::vector<std::uint64_t>& seeds);

/// Log-sine regression: aMC at each epsilon plus GD and Adam at grad_lr. Rows
/// carry U and the pseudo-loss U'.
std::vector<LabelledRecord> run_frequency_experiment(const ExperimentPlan& base,
                                                     const std::vector<double>& epsilons,
                                                     double grad_lr,
                                                     const std::vector<std::uint64_t>& seeds);

/// RNN on binarized 0/1 digits, one run per optimizer plan.
std::vector<LabelledRecord> run_rnn_experiment(const std::vector<ExperimentPlan>& plans);

/// Best (lowest final loss) run per labelled setting over several inits.
struct BestOfRuns {
  std::string label;
  std::size_t depth = 0;
  std::size_t runs = 0;
  double best_loss = 0.0;
  std::uint64_t best_seed = 0;
  InitScheme best_init = InitScheme::kaiming;
  RunRecord best;
};

/// Deep step nets: for every depth and optimizer plan, `kaiming_runs` Kaiming
/// and `gaussian_runs` Gaussian initializations; keeps the best run.
std::vector<BestOfRuns> run_deep_step_experiment(const std::vector<std::size_t>& depths,
                                                 const std::vector<std::pair<std::string, ExperimentPlan>>& settings,
                                                 std::size_t kaiming_runs, std::size_t gaussian_runs);

/// MNIST classification with any optimizer and batching mode. Also returns
/// the sequence of minibatch sizes used.
struct MnistResult {
  RunRecord record;
  std::vector<std::size_t> batch_sizes;
};
MnistResult run_mnist_experiment(const ExperimentPlan& plan);

}  // namespace amcnet
