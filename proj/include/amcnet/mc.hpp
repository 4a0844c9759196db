#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "amcnet/network.hpp"
#include "amcnet/objective.hpp"
#include "amcnet/record.hpp"
#include "amcnet/rng.hpp"

namespace amcnet {

/// Scheduler length meaning "never rescale".
inline constexpr std::uint64_t kNeverRescale = std::numeric_limits<std::uint64_t>::max();

/// Hyperparameters of adaptive Monte Carlo (aMC).
///
/// Plain zero-temperature Metropolis is epsilon = 0, ns = kNeverRescale and
/// signal_norm = false.
struct AmcConfig {
  /// Initial move scale.
  double sigma0 = 1e-3;
  /// Rate at which proposal means follow accepted moves; may be negative.
  double epsilon = 0.0;
  /// Consecutive rejections that trigger sigma <- decay * sigma and mu <- 0.
  std::uint64_t ns = kNeverRescale;
  /// Per-weight move scales from activation statistics.
  bool signal_norm = false;
  /// 0 accepts only non-increasing loss.
  double temperature = 0.0;
  double decay = 0.95;

  static AmcConfig metropolis(double sigma, double temperature = 0.0);
  void validate() const;
};

/// Mutable optimizer state.
struct AmcState {
  double sigma = 0.0;
  /// Per-parameter proposal means.
  std::vector<double> mu;
  /// Per-parameter move-scale multipliers (all 1 with signal norm off).
  std::vector<double> lambda;
  /// Consecutive rejections n_cr, always below ns.
  std::uint64_t consecutive_rejections = 0;
  /// U(x) on the current data; empty when it must be recomputed.
  std::optional<double> current_loss;
  /// Accuracy of the current parameters on the current data, when the
  /// objective reports one.
  std::optional<double> current_accuracy;

  static AmcState initial(const AmcConfig& config, std::size_t dimension);
  /// sigma <- sigma0, mu <- 0, n_cr <- 0. The cached loss is kept.
  void reset(const AmcConfig& config);

  friend bool operator==(const AmcState&, const AmcState&) = default;
};

struct StepReport {
  bool accepted = false;
  double loss_before = 0.0;
  double loss_after = 0.0;
  double sigma_after = 0.0;
  bool scheduler_fired = false;
  /// Accuracy of the retained parameters on this step's data, if reported.
  std::optional<double> accuracy_after;
};

/// Draw eps_i ~ N(mu_i, (lambda_i sigma)^2) and write params + eps into
/// proposal. Returns eps; params are not modified.
std::vector<double> propose(std::span<const double> params, const AmcState& state, Rng& rng,
                            std::span<double> proposal);

/// T = 0: accept iff delta_u <= 0 (no random number is consumed).
/// T > 0: accept iff xi < exp(-delta_u / T), xi uniform on (0, 1].
bool metropolis_accept(double delta_u, double temperature, Rng& rng);

/// Signal-norm multipliers. Every weight into neuron j gets
///   lambda = (N_data^-1 sum_alpha sum_{i' -> j} (S_i'^alpha)^2)^(-1/2),
/// or 0 when that mean vanishes; every bias gets 1.
std::vector<double> compute_lambdas(const NetworkSpec& spec, const ActivationTrace& trace);

/// Evaluate U(x) on the current data into state (and lambda when spec is
/// given).
void refresh_current(std::span<const double> params, AmcState& state, Objective& objective,
                     const NetworkSpec* spec);

/// One aMC move: select data, refresh U(x) and lambda if needed, propose,
/// accept or reject, adapt mu, run the sigma scheduler.
///
/// In batch mode U(x) is cached in state, so a step costs one loss
/// evaluation; with minibatches both U(x) and U(x') are computed on the same
/// freshly selected data. If the objective throws, params are unchanged.
StepReport amc_step(ParamVector& params, AmcState& state, const AmcConfig& config, Objective& objective,
                    Rng& rng);

struct McRecordOptions {
  /// Record a row every this many steps (and after the last step).
  std::uint64_t every = 1;
  /// Trailing window of the acceptance-rate estimate.
  std::size_t window = 100;
  /// Optional hook that fills extra quantities (or replaces the loss) for a
  /// recorded row.
  std::function<void(std::span<const double> params, RunRow& row)> metrics;
};

/// Run `epochs` aMC steps from params (updated in place). The first row is
/// the initial evaluation at epoch 0.
RunRecord run_mc(Objective& objective, ParamVector& params, const AmcConfig& config, std::uint64_t epochs,
                 Rng& rng, const McRecordOptions& options = {});

}  // namespace amcnet
