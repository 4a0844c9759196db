#include "amcnet/runner.hpp"

#include <algorithm>
#include <cmath>

#include "amcnet/config.hpp"
#include "amcnet/errors.hpp"

namespace amcnet {

struct Run::Impl {
  ExperimentPlan plan;
  std::optional<NetworkSpec> spec;
  std::unique_ptr<Objective> objective;
  /// Non-owning views into objective, when it has these types.
  ClassificationObjective* classification = nullptr;
  GridObjective* grid = nullptr;
  std::shared_ptr<const Dataset> test;

  Rng rng;
  std::uint64_t epoch = 0;
  ParamVector params;
  AmcState amc;
  AdamState adam;
  AcceptanceWindow window;
  std::vector<std::size_t> batch_sizes;
  bool stopped = false;
  RunRecord record;
  std::vector<double> grad;

  explicit Impl(ExperimentPlan p) : plan(std::move(p)), rng(plan.seed), window(plan.record_window) {
    plan.amc.validate();
    plan.grad.validate();
    spec = plan_network(plan);
    switch (plan.experiment) {
      case ExperimentId::rosenbrock:
        objective = std::make_unique<RosenbrockObjective>();
        break;
      case ExperimentId::accept_scan:
      case ExperimentId::frequency:
      case ExperimentId::deep_step: {
        const TargetFunction f = plan.experiment == ExperimentId::accept_scan ? TargetFunction::sine
                                 : plan.experiment == ExperimentId::frequency ? TargetFunction::log_sine
                                                                              : TargetFunction::step;
        auto g = std::make_unique<GridObjective>(*spec, GridTask::make(f, plan.grid_points));
        grid = g.get();
        objective = std::move(g);
        break;
      }
      case ExperimentId::mnist:
      case ExperimentId::batching:
      case ExperimentId::rnn: {
        ClassificationData data = load_plan_data(plan);
        test = data.test;
        const std::size_t batch = plan.batch_mode == BatchMode::batch ? 0 : plan.batch_size;
        if (plan.batch_mode != BatchMode::batch && batch == 0) {
          throw ConfigError("batch.size must be positive in " + to_string(plan.batch_mode) + " mode");
        }
        auto c = std::make_unique<ClassificationObjective>(*spec, data.train, batch);
        classification = c.get();
        objective = std::move(c);
        break;
      }
    }
    if (is_mc() && plan.amc.signal_norm && !spec) throw ConfigError("signal norm needs a network");
  }

  bool is_mc() const {
    return plan.optimizer == OptimizerKind::metropolis || plan.optimizer == OptimizerKind::amc;
  }

  /// The Metropolis optimizer is aMC with the adaptive parts switched off.
  AmcConfig mc_config() const {
    if (plan.optimizer != OptimizerKind::metropolis) return plan.amc;
    AmcConfig c = AmcConfig::metropolis(plan.amc.sigma0, plan.amc.temperature);
    c.decay = plan.amc.decay;
    return c;
  }

  void start_fresh() {
    if (spec) {
      params = init_params(*spec, plan.init, rng);
    } else {
      params = {plan.x0, plan.y0};
    }
    amc = AmcState::initial(mc_config(), params.size());
    adam = AdamState(params.size());
    batch_sizes.push_back(classification ? classification->batch_size() : 0);
    if (is_mc() && !minibatch()) {
      refresh_current(params, amc, *objective, mc_config().signal_norm ? &*spec : nullptr);
    }
    record_row();
  }

  void restore(const Checkpoint& cp) {
    if (cp.params.size() != objective->dimension() || cp.amc.mu.size() != cp.params.size() ||
        cp.amc.lambda.size() != cp.params.size() || cp.adam.m.size() != cp.params.size() ||
        cp.adam.v.size() != cp.params.size()) {
      throw IoError("checkpoint does not match the plan's parameter count");
    }
    epoch = cp.epoch;
    params = cp.params;
    amc = cp.amc;
    adam = cp.adam;
    rng.deserialize(cp.rng_state);
    window.restore(cp.acceptance_history);
    if (classification) classification->set_batch_size(cp.batch_size);
    batch_sizes = cp.batch_sizes;
    stopped = cp.stopped;
    record = cp.record;
  }

  bool minibatch() const { return classification && classification->is_minibatch(); }

  /// Loss of the current parameters on the full training data.
  Evaluation full_evaluation() {
    if (is_mc() && !minibatch() && amc.current_loss) return {*amc.current_loss, amc.current_accuracy};
    if (classification) return evaluate_dataset(*spec, params, classification->train());
    if (grid) return {mse_grid_loss(*spec, params, grid->task()), std::nullopt};
    return objective->evaluate(params, nullptr);
  }

  void record_row() {
    RunRow row;
    row.epoch = epoch;
    row.loss = full_evaluation().loss;
    if (grid && grid->task().has_aux()) row.aux_loss = pseudo_loss(*spec, params, grid->task());
    if (test) row.accuracy = classification_accuracy(*spec, params, *test);
    if (is_mc()) {
      row.acceptance_rate = window.rate();
      row.sigma = amc.sigma;
    }
    if (plan.record_grad_norm) {
      std::vector<double> g(params.size());
      if (classification) {
        dataset_loss_gradient(*spec, params, classification->train(), g);
      } else if (grid) {
        grid_loss_gradient(*spec, params, grid->task(), g);
      } else {
        objective->loss_and_gradient(params, g);
      }
      row.grad_norm = gradient_norm(g);
    }
    record.rows.push_back(row);
    if (plan.stop_below && *row.loss <= *plan.stop_below) stopped = true;
  }

  /// Progressive batching: double the minibatch once its error rate is
  /// below the trigger, and restart the optimizer's adaptive state.
  void maybe_grow_batch(std::optional<double> batch_accuracy) {
    if (plan.batch_mode != BatchMode::progressive || !minibatch() || !batch_accuracy) return;
    if (1.0 - *batch_accuracy >= plan.batch_trigger) return;
    std::size_t next = classification->batch_size() * 2;
    if (next >= classification->train().size()) next = 0;
    classification->set_batch_size(next);
    batch_sizes.push_back(next);
    amc.reset(mc_config());
    amc.current_loss.reset();
    amc.current_accuracy.reset();
    adam = AdamState(params.size());
  }

  void mc_step() {
    const StepReport r = amc_step(params, amc, mc_config(), *objective, rng);
    window.push(r.accepted);
    maybe_grow_batch(r.accuracy_after);
  }

  void grad_step() {
    objective->select_data(rng);
    grad.assign(params.size(), 0.0);
    double loss = 0.0;
    try {
      loss = objective->loss_and_gradient(params, grad);
    } catch (const NumericOverflowError&) {
      record.diverged = true;
      return;
    }
    const bool finite = std::isfinite(loss) && std::ranges::all_of(grad, [](double g) { return std::isfinite(g); });
    if (!finite) {
      record.diverged = true;
      return;
    }
    if (plan.optimizer == OptimizerKind::gd) {
      gd_step(params, grad, plan.grad);
    } else {
      adam_step(params, grad, adam, plan.grad);
    }
    if (!std::ranges::all_of(params, [](double x) { return std::isfinite(x); })) {
      record.diverged = true;
      return;
    }
    if (plan.batch_mode == BatchMode::progressive && minibatch()) {
      maybe_grow_batch(evaluate_dataset(*spec, params, classification->current()).accuracy);
    }
  }

  bool finished() const { return stopped || record.diverged || epoch >= plan.epochs; }

  void advance(std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps && !finished(); ++s) {
      if (is_mc()) {
        mc_step();
      } else {
        grad_step();
        if (record.diverged) return;
      }
      ++epoch;
      if (epoch % std::max<std::uint64_t>(plan.record_every, 1) == 0 || epoch == plan.epochs) {
        try {
          record_row();
        } catch (const NumericOverflowError&) {
          if (is_mc()) throw;
          record.diverged = true;
        }
      }
    }
  }
};

Run::Run(ExperimentPlan plan) : impl_(std::make_unique<Impl>(std::move(plan))) { impl_->start_fresh(); }

Run::Run(ExperimentPlan plan, const Checkpoint& checkpoint) : impl_(std::make_unique<Impl>(std::move(plan))) {
  const std::uint64_t digest = plan_digest(impl_->plan);
  if (checkpoint.config_digest != digest) throw DigestMismatchError(digest, checkpoint.config_digest);
  impl_->restore(checkpoint);
}

Run::~Run() = default;
Run::Run(Run&&) noexcept = default;
Run& Run::operator=(Run&&) noexcept = default;

const ExperimentPlan& Run::plan() const { return impl_->plan; }
std::uint64_t Run::epoch() const { return impl_->epoch; }
bool Run::finished() const { return impl_->finished(); }
void Run::advance(std::uint64_t steps) { impl_->advance(steps); }
void Run::run_to_end() { impl_->advance(impl_->plan.epochs); }
const RunRecord& Run::record() const { return impl_->record; }
const ParamVector& Run::params() const { return impl_->params; }
const AmcState& Run::amc_state() const { return impl_->amc; }
const std::vector<std::size_t>& Run::batch_sizes() const { return impl_->batch_sizes; }

Checkpoint Run::checkpoint() const {
  Checkpoint cp;
  cp.config_digest = plan_digest(impl_->plan);
  cp.epoch = impl_->epoch;
  cp.params = impl_->params;
  cp.amc = impl_->amc;
  cp.adam = impl_->adam;
  cp.rng_state = impl_->rng.serialize();
  cp.acceptance_history = impl_->window.history();
  cp.batch_size = impl_->classification ? impl_->classification->batch_size() : 0;
  cp.batch_sizes = impl_->batch_sizes;
  cp.stopped = impl_->stopped;
  cp.record = impl_->record;
  return cp;
}

std::uint64_t plan_digest(const ExperimentPlan& plan) {
  auto j = plan_to_json(plan);
  j.erase("epochs");
  return fnv1a64(j.dump());
}

RunRecord run_plan(const ExperimentPlan& plan) {
  Run run(plan);
  run.run_to_end();
  return run.record();
}

}  // namespace amcnet
