#include "amcnet/mc.hpp"

#include <algorithm>
#include <cmath>

#include "amcnet/errors.hpp"

namespace amcnet {

AmcConfig AmcConfig::metropolis(double sigma, double temperature) {
  AmcConfig c;
  c.sigma0 = sigma;
  c.temperature = temperature;
  return c;
}

void AmcConfig::validate() const {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ConfigError("sigma0 must be positive");
  if (!std::isfinite(epsilon)) throw ConfigError("epsilon must be finite");
  if (ns == 0) throw ConfigError("ns must be at least 1");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be >= 0");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must lie in (0, 1)");
}

AmcState AmcState::initial(const AmcConfig& config, std::size_t dimension) {
  AmcState s;
  s.sigma = config.sigma0;
  s.mu.assign(dimension, 0.0);
  s.lambda.assign(dimension, 1.0);
  return s;
}

void AmcState::reset(const AmcConfig& config) {
  sigma = config.sigma0;
  std::ranges::fill(mu, 0.0);
  consecutive_rejections = 0;
}

std::vector<double> propose(std::span<const double> params, const AmcState& state, Rng& rng,
                            std::span<double> proposal) {
  const std::size_t n = params.size();
  if (state.mu.size() != n || state.lambda.size() != n || proposal.size() != n) {
    throw ShapeError("proposal: optimizer state does not match the parameter count");
  }
  std::vector<double> eps(n);
  for (std::size_t i = 0; i < n; ++i) {
    eps[i] = state.mu[i] + state.lambda[i] * state.sigma * rng.normal();
    proposal[i] = params[i] + eps[i];
  }
  return eps;
}

bool metropolis_accept(double delta_u, double temperature, Rng& rng) {
  if (temperature == 0.0) return delta_u <= 0.0;
  const double xi = rng.uniform_open_closed();
  return xi < std::exp(-delta_u / temperature);
}

std::vector<double> compute_lambdas(const NetworkSpec& spec, const ActivationTrace& trace) {
  if (trace.sum_sq.size() != spec.trace_size() || trace.calls.size() != spec.blocks().size()) {
    throw ShapeError("activation trace does not match the network");
  }
  if (trace.n_data == 0) throw ShapeError("activation trace is empty");
  std::vector<double> lambda(spec.param_count(), 1.0);
  for (std::size_t k = 0; k < spec.blocks().size(); ++k) {
    const Block& b = spec.blocks()[k];
    if (trace.calls[k] == 0) throw ShapeError("activation trace has no calls for a block");
    double total = 0.0;
    for (std::size_t s = 0; s < b.fan_in; ++s) total += trace.sum_sq[b.trace_offset + s];
    const double mean = total / static_cast<double>(trace.calls[k]);
    const double value = mean > 0.0 ? 1.0 / std::sqrt(mean) : 0.0;
    std::fill_n(lambda.begin() + static_cast<std::ptrdiff_t>(b.weight_offset), b.fan_in * b.fan_out, value);
  }
  return lambda;
}

void refresh_current(std::span<const double> params, AmcState& state, Objective& objective,
                     const NetworkSpec* spec) {
  if (spec) {
    auto trace = ActivationTrace::for_network(*spec);
    const Evaluation e = objective.evaluate(params, &trace);
    state.lambda = compute_lambdas(*spec, trace);
    state.current_loss = e.loss;
    state.current_accuracy = e.accuracy;
  } else {
    const Evaluation e = objective.evaluate(params, nullptr);
    state.current_loss = e.loss;
    state.current_accuracy = e.accuracy;
  }
}

StepReport amc_step(ParamVector& params, AmcState& state, const AmcConfig& config, Objective& objective,
                    Rng& rng) {
  const NetworkSpec* spec = config.signal_norm ? objective.network() : nullptr;
  if (config.signal_norm && spec == nullptr) throw ConfigError("signal norm needs a network objective");

  // Current state on the selected data.
  const bool data_changed = objective.select_data(rng);
  if (data_changed || !state.current_loss) refresh_current(params, state, objective, spec);
  const double before = *state.current_loss;

  // Proposed move.
  std::vector<double> proposal(params.size());
  const std::vector<double> eps = propose(params, state, rng, proposal);
  std::optional<ActivationTrace> trace;
  if (spec) trace = ActivationTrace::for_network(*spec);
  const Evaluation proposed = objective.evaluate(proposal, trace ? &*trace : nullptr);
  const double after = proposed.loss;

  StepReport report;
  report.loss_before = before;
  report.accepted = metropolis_accept(after - before, config.temperature, rng);
  if (report.accepted) {
    params.swap(proposal);
    state.consecutive_rejections = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) state.mu[i] += config.epsilon * (eps[i] - state.mu[i]);
    state.current_loss = after;
    state.current_accuracy = proposed.accuracy;
    if (spec) state.lambda = compute_lambdas(*spec, *trace);
  } else {
    // Rejected: count towards the scheduler.
    ++state.consecutive_rejections;
    if (state.consecutive_rejections == config.ns) {
      state.consecutive_rejections = 0;
      state.sigma *= config.decay;
      std::ranges::fill(state.mu, 0.0);
      report.scheduler_fired = true;
    }
  }
  report.loss_after = *state.current_loss;
  report.sigma_after = state.sigma;
  report.accuracy_after = state.current_accuracy;
  return report;
}

RunRecord run_mc(Objective& objective, ParamVector& params, const AmcConfig& config, std::uint64_t epochs,
                 Rng& rng, const McRecordOptions& options) {
  config.validate();
  if (params.size() != objective.dimension()) throw ShapeError("parameter count does not match the objective");
  AmcState state = AmcState::initial(config, params.size());
  AcceptanceWindow window(options.window);
  RunRecord record;
  const std::uint64_t every = std::max<std::uint64_t>(options.every, 1);

  auto record_row = [&](std::uint64_t epoch, double loss) {
    RunRow row;
    row.epoch = epoch;
    row.loss = loss;
    row.acceptance_rate = window.rate();
    row.sigma = state.sigma;
    if (options.metrics) options.metrics(params, row);
    record.rows.push_back(row);
  };

  refresh_current(params, state, objective, config.signal_norm ? objective.network() : nullptr);
  record_row(0, *state.current_loss);

  for (std::uint64_t epoch = 1; epoch <= epochs; ++epoch) {
    const StepReport r = amc_step(params, state, config, objective, rng);
    window.push(r.accepted);
    if (epoch % every == 0 || epoch == epochs) record_row(epoch, r.loss_after);
  }
  return record;
}

}  // namespace amcnet
