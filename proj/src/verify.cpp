#include "amcnet/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>

#include "amcnet/checkpoint.hpp"
#include "amcnet/errors.hpp"
#include "amcnet/experiments.hpp"
#include "amcnet/runner.hpp"

namespace amcnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

void say(const VerifyOptions& o, const std::string& msg) {
  if (o.log) *o.log << "  " << msg << std::endl;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), first);
  return s;
}

std::string mnist_dir(const VerifyOptions& o) {
  if (!o.mnist_dir.empty()) return o.mnist_dir;
  ExperimentPlan p;
  return resolve_mnist_dir(p);
}

bool have_mnist(const std::string& dir) {
  if (dir.empty()) return false;
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                        "t10k-labels-idx1-ubyte"}) {
    if (!std::filesystem::exists(std::filesystem::path(dir) / f)) return false;
  }
  return true;
}

double final_loss(const RunRecord& r) { return r.rows.empty() || !r.last().loss ? kInf : *r.last().loss; }

// 1 -------------------------------------------------------------------------
CriterionResult monotone_loss(const VerifyOptions& o) {
  CriterionResult res;
  std::vector<std::pair<std::string, ExperimentPlan>> cases;
  {
    ExperimentPlan p = default_plan(ExperimentId::accept_scan);
    p.amc.sigma0 = 1e-2;
    p.seed = 11;
    cases.emplace_back("metropolis sine", p);
  }
  {
    ExperimentPlan p = default_plan(ExperimentId::deep_step);
    p.depth = 4;
    p.seed = 12;
    cases.emplace_back("amc signal-norm step", p);
  }
  {
    ExperimentPlan p = default_plan(ExperimentId::rosenbrock);
    p.seed = 13;
    cases.emplace_back("amc rosenbrock", p);
  }
  {
    ExperimentPlan p = default_plan(ExperimentId::frequency);
    p.seed = 14;
    cases.emplace_back("amc log-sine", p);
  }
  const std::string dir = mnist_dir(o);
  if (have_mnist(dir)) {
    ExperimentPlan p = default_plan(ExperimentId::mnist);
    p.mnist_dir = dir;
    p.train_size = 500;
    p.test_size = 100;
    p.seed = 15;
    cases.emplace_back("metropolis mnist", p);
  }
  std::size_t total_violations = 0;
  bool ok = true;
  for (auto& [label, plan] : cases) {
    plan.epochs = 10000;
    plan.record_every = 1;
    plan.stop_below.reset();
    const RunRecord r = run_plan(plan);
    std::size_t violations = 0;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      if (*r.rows[i].loss > *r.rows[i - 1].loss) ++violations;
    }
    const bool full = r.rows.size() == plan.epochs + 1;
    total_violations += violations;
    ok = ok && full && violations == 0;
    say(o, fmt("%-22s steps %zu  U %.4g -> %.4g  violations %zu", label.c_str(), r.rows.size() - 1,
               *r.rows.front().loss, *r.rows.back().loss, violations));
  }
  res.passed = ok;
  res.detail = fmt("%zu trajectories x 1e4 steps, %zu increases", cases.size(), total_violations);
  return res;
}

// 2 -------------------------------------------------------------------------
double max_relative_error(const std::vector<double>& g, const std::vector<double>& fd) {
  double scale = 0.0;
  for (double v : fd) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double denom = std::max(std::abs(fd[i]), 1e-3 * scale);
    worst = std::max(worst, denom > 0 ? std::abs(g[i] - fd[i]) / denom : std::abs(g[i]));
  }
  return worst;
}

CriterionResult gradient_oracle(const VerifyOptions& o) {
  CriterionResult res;
  Rng rng(2024);
  double worst = 0.0;
  auto check = [&](const std::string& label, const NetworkSpec& spec, auto&& loss_fn, auto&& grad_fn) {
    const ParamVector x = init_params(spec, {InitScheme::gaussian, 0.5}, rng);
    const std::vector<double> g = grad_fn(x);
    const std::vector<double> fd = finite_difference_gradient(loss_fn, x);
    const double err = max_relative_error(g, fd);
    worst = std::max(worst, err);
    say(o, fmt("%-28s N=%-4zu max relative error %.2e", label.c_str(), spec.param_count(), err));
  };

  {
    const NetworkSpec spec = NetworkSpec::mlp({1, 4, 4, 4, 4, 1}, OutputHead::linear);
    const GridTask task = GridTask::make(TargetFunction::sine, 100);
    check("mlp depth 4, grid mse", spec, [&](std::span<const double> x) { return mse_grid_loss(spec, x, task); },
          [&](const ParamVector& x) { return loss_gradient(spec, x, task); });
  }
  Dataset flat;
  flat.inputs = Matrix(6, 9);
  for (Eigen::Index i = 0; i < flat.inputs.size(); ++i) flat.inputs.data()[i] = rng.normal();
  for (int k = 0; k < 9; ++k) flat.labels.push_back(k % 3);
  flat.one_hot_dim = 3;
  for (OutputHead head : {OutputHead::softmax, OutputHead::linear_classifier}) {
    const NetworkSpec spec = NetworkSpec::mlp({6, 5, 4, 5, 4, 3}, head);
    check("mlp depth 4, " + to_string(head), spec,
          [&](std::span<const double> x) { return evaluate_dataset(spec, x, flat).loss; },
          [&](const ParamVector& x) { return loss_gradient(spec, x, flat); });
  }
  {
    Dataset seq;
    seq.symbol_dim = 2;
    seq.one_hot_dim = 3;
    for (int k = 0; k < 5; ++k) {
      OneHotSequence s(8);
      for (auto& v : s) v = static_cast<std::uint8_t>(rng.below(2));
      seq.sequences.push_back(s);
      seq.labels.push_back(k % 3);
    }
    const NetworkSpec spec = NetworkSpec::rnn(2, 5, 2, 3);
    check("rnn 2 layers, length 8", spec,
          [&](std::span<const double> x) { return evaluate_dataset(spec, x, seq).loss; },
          [&](const ParamVector& x) { return loss_gradient(spec, x, seq); });
  }
  res.passed = worst < 1e-5;
  res.detail = fmt("max relative error %.2e (limit 1e-5)", worst);
  return res;
}

// 3 -------------------------------------------------------------------------
CriterionResult small_sigma_acceptance(const VerifyOptions& o) {
  CriterionResult res;
  ExperimentPlan plan = default_plan(ExperimentId::accept_scan);
  plan.seed = 3;
  const NetworkSpec spec = *plan_network(plan);
  Rng rng(plan.seed);
  ParamVector x = init_params(spec, plan.init, rng);
  GridObjective objective(spec, GridTask::make(TargetFunction::sine, 1000));
  const AmcConfig config = AmcConfig::metropolis(1e-6);
  AmcState state = AmcState::initial(config, x.size());
  std::size_t accepted = 0;
  const std::size_t proposals = 10000;
  for (std::size_t n = 0; n < proposals; ++n) accepted += amc_step(x, state, config, objective, rng).accepted;
  const double rate = static_cast<double>(accepted) / proposals;
  say(o, fmt("U at init %.4f, accepted %zu of %zu", *state.current_loss, accepted, proposals));
  res.passed = std::abs(rate - 0.5) <= 0.05;
  res.detail = fmt("acceptance rate %.4f (target 0.50 +/- 0.05)", rate);
  return res;
}

// 4 -------------------------------------------------------------------------
CriterionResult signal_norm_identity(const VerifyOptions& o) {
  CriterionResult res;
  const NetworkSpec spec = NetworkSpec::mlp({4, 100, 3}, OutputHead::linear);
  Rng rng(4);
  const ParamVector x = init_params(spec, {InitScheme::kaiming, 0.0}, rng);
  const Eigen::Index data = 16;
  Matrix inputs(4, data);
  for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = (1.0 + i % 4) * rng.normal();

  ActivationTrace trace = ActivationTrace::for_network(spec);
  MlpCache cache;
  mlp_forward_batch(spec, x, inputs, &trace, &cache);
  const double sigma = 1e-2;
  AmcConfig config;
  config.sigma0 = sigma;
  config.signal_norm = true;
  AmcState state = AmcState::initial(config, x.size());
  state.lambda = compute_lambdas(spec, trace);

  const auto& blocks = spec.blocks();
  std::vector<Vector> sum_sq;
  for (const Block& b : blocks) sum_sq.push_back(Vector::Zero(static_cast<Eigen::Index>(b.fan_out)));
  std::vector<double> proposal(x.size());
  const std::size_t proposals = 100000;
  for (std::size_t p = 0; p < proposals; ++p) {
    const std::vector<double> eps = propose(x, state, rng, proposal);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Block& b = blocks[k];
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> e(
          eps.data() + b.weight_offset, static_cast<Eigen::Index>(b.fan_out), static_cast<Eigen::Index>(b.fan_in));
      const Matrix delta = e * cache.activations[k];
      sum_sq[k] += delta.rowwise().squaredNorm();
    }
  }
  double worst = 0.0;
  std::size_t neurons = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Vector var = sum_sq[k] / (static_cast<double>(proposals) * static_cast<double>(data));
    for (Eigen::Index j = 0; j < var.size(); ++j) {
      worst = std::max(worst, std::abs(var[j] / (sigma * sigma) - 1.0));
      ++neurons;
    }
    say(o, fmt("fan-in %3zu: variance / sigma^2 in [%.4f, %.4f]", blocks[k].fan_in, var.minCoeff() / (sigma * sigma),
               var.maxCoeff() / (sigma * sigma)));
  }
  res.passed = worst < 0.02;
  res.detail = fmt("%zu neurons, max |var/sigma^2 - 1| = %.4f (limit 0.02)", neurons, worst);
  return res;
}

// 5 -------------------------------------------------------------------------
CriterionResult scheduler_algebra(const VerifyOptions& o) {
  CriterionResult res;
  bool ok = true;
  std::string detail;

  // Scheduler: at the Rosenbrock minimum every non-zero move is rejected.
  {
    RosenbrockObjective objective;
    AmcConfig c;
    c.sigma0 = 1e-2;
    c.ns = 7;
    c.epsilon = 0.1;
    ParamVector x{1.0, 1.0};
    AmcState s = AmcState::initial(c, 2);
    Rng rng(5);
    const int firings = 40;
    double expected = c.sigma0;
    bool exact = true;
    int fired = 0;
    for (int n = 0; n < firings * 7; ++n) {
      const StepReport r = amc_step(x, s, c, objective, rng);
      if (r.accepted) exact = false;
      if (r.scheduler_fired) {
        ++fired;
        expected *= 0.95;
        if (s.sigma != expected || s.mu[0] != 0.0 || s.mu[1] != 0.0 || s.consecutive_rejections != 0) exact = false;
      }
    }
    const double closed = c.sigma0 * std::pow(0.95, firings);
    exact = exact && fired == firings && std::abs(s.sigma / closed - 1.0) < 1e-13;
    say(o, fmt("scheduler: %d firings, sigma %.17g vs sigma0*0.95^k %.17g", fired, s.sigma, closed));
    ok = ok && exact;
    detail += exact ? "scheduler exact" : "scheduler MISMATCH";
  }

  // mu update on acceptance, replayed from a copy of the random stream.
  {
    RosenbrockObjective objective;
    AmcConfig c;
    c.sigma0 = 1e-2;
    c.epsilon = 0.01;
    c.ns = 100;
    ParamVector x{-2.0, 2.0};
    AmcState s = AmcState::initial(c, 2);
    s.mu = {0.003, -0.002};
    Rng rng(6);
    std::size_t checked = 0;
    bool exact = true;
    for (int n = 0; n < 200; ++n) {
      const AmcState before = s;
      Rng replay = rng;
      const StepReport r = amc_step(x, s, c, objective, rng);
      if (!r.accepted) continue;
      for (std::size_t i = 0; i < 2; ++i) {
        const double e = before.mu[i] + before.lambda[i] * before.sigma * replay.normal();
        if (s.mu[i] != before.mu[i] + c.epsilon * (e - before.mu[i])) exact = false;
      }
      ++checked;
    }
    say(o, fmt("mu update: %zu accepted moves replayed", checked));
    ok = ok && exact && checked > 0;
    detail += exact && checked ? ", mu update exact" : ", mu update MISMATCH";
  }

  // Metropolis limit: aMC with eps = 0, ns = inf, lambda = 1 against a
  // plain Metropolis loop on the same random stream.
  {
    const NetworkSpec spec = NetworkSpec::mlp({1, 10, 10, 1}, OutputHead::linear);
    GridObjective objective(spec, GridTask::make(TargetFunction::sine, 1000));
    Rng init_rng(7);
    const ParamVector x0 = init_params(spec, {InitScheme::kaiming, 0.0}, init_rng);
    const double sigma = 1e-2;

    ParamVector a = x0;
    AmcConfig c = AmcConfig::metropolis(sigma);
    AmcState s = AmcState::initial(c, a.size());
    Rng rng_a(8);

    ParamVector b = x0;
    Rng rng_b(8);
    double u_b = mse_grid_loss(spec, b, objective.task());
    ParamVector trial(b.size());

    bool identical = true;
    std::size_t accepts = 0;
    for (int n = 0; n < 2000 && identical; ++n) {
      accepts += amc_step(a, s, c, objective, rng_a).accepted;
      for (std::size_t i = 0; i < b.size(); ++i) trial[i] = b[i] + sigma * rng_b.normal();
      const double u = mse_grid_loss(spec, trial, objective.task());
      if (u <= u_b) {
        b.swap(trial);
        u_b = u;
      }
      identical = a == b && rng_a == rng_b;
    }
    say(o, fmt("metropolis limit: 2000 steps, %zu accepted, trajectories %s", accepts,
               identical ? "bitwise identical" : "DIFFER"));
    ok = ok && identical;
    detail += identical ? ", Metropolis recovered bitwise" : ", Metropolis limit DIFFERS";
  }
  res.passed = ok;
  res.detail = detail;
  return res;
}

// 6 -------------------------------------------------------------------------
CriterionResult rosenbrock_ordering(const VerifyOptions& o) {
  CriterionResult res;
  ExperimentPlan base = default_plan(ExperimentId::rosenbrock);
  base.amc.sigma0 = 1e-3;
  base.amc.ns = 20;
  base.epochs = 10000;
  base.record_every = 100;
  const std::vector<double> eps = {0.0, 5e-3, 5e-2};
  const auto runs = run_rosenbrock_experiment(base, eps, seed_range(1, 5));
  std::vector<double> med;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::vector<double> finals;
    for (std::size_t s = 0; s < 5; ++s) finals.push_back(final_loss(runs[k * 5 + s].record));
    med.push_back(median(finals));
    say(o, fmt("eps %-6g median final f %.4e", eps[k], med.back()));
  }
  res.passed = med[2] <= med[1] && med[1] <= med[0] && med[2] < 1e-3;
  res.detail = fmt("median f: eps=0 %.3e, eps=5e-3 %.3e, eps=5e-2 %.3e", med[0], med[1], med[2]);
  return res;
}

// 7 -------------------------------------------------------------------------
CriterionResult acceptance_scaling(const VerifyOptions& o) {
  CriterionResult res;
  const std::vector<std::size_t> widths = {10, 50, 100};
  const double u0 = 0.05;
  const auto seeds = seed_range(1, 5);

  ExperimentPlan mc = default_plan(ExperimentId::accept_scan);
  mc.optimizer = OptimizerKind::metropolis;
  mc.amc.sigma0 = 1e-3;
  ExperimentPlan amc = mc;
  amc.optimizer = OptimizerKind::amc;
  amc.amc.sigma0 = 1e-2;
  amc.amc.epsilon = 1e-2;
  amc.amc.ns = 100;
  amc.amc.signal_norm = true;

  auto scan = [&](const ExperimentPlan& plan, const char* label) {
    const auto entries = run_acceptance_scan(plan, widths, {2}, {u0}, seeds);
    for (const auto& e : entries) {
      say(o, fmt("%-10s width %3zu N %5zu: A(U0) %s (%zu/%zu seeds reached)", label, e.width, e.params,
                 e.rate ? fmt("%.4f", *e.rate).c_str() : "unreached", e.reached, e.seeds));
    }
    return entries;
  };
  const auto m = scan(mc, "metropolis");
  const auto a = scan(amc, "amc");

  auto all_reached = [](const std::vector<AcceptanceEntry>& v) {
    for (const auto& e : v) {
      if (e.reached != e.seeds) return false;
    }
    return true;
  };
  if (!all_reached(m) || !all_reached(a)) {
    res.passed = false;
    res.detail = "some runs did not reach U0 within the budget";
    return res;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < m.size(); ++i) decreasing = decreasing && *m[i].rate < *m[i - 1].rate;
  const double n_ratio = static_cast<double>(m.back().params) / static_cast<double>(m.front().params);
  const double a_ratio = *m.front().rate / *m.back().rate;
  const double allowed = std::pow(10.0, std::log10(n_ratio) / 2.0);
  double amin = kInf, amax = 0.0;
  for (const auto& e : a) {
    amin = std::min(amin, *e.rate);
    amax = std::max(amax, *e.rate);
  }
  res.passed = decreasing && a_ratio < allowed && amax / amin < 2.0;
  res.detail = fmt("metropolis A %.4f -> %.4f (%s, drop x%.2f, allowed < x%.2f for N x%.0f); amc A in [%.4f, %.4f] "
                   "(spread x%.2f, limit x2)",
                   *m.front().rate, *m.back().rate, decreasing ? "decreasing" : "NOT decreasing", a_ratio, allowed,
                   n_ratio, amin, amax, amax / amin);
  return res;
}

// 8 -------------------------------------------------------------------------
// Just below the plateau U = 0.004995 left once the logarithm is learned.
constexpr double kFrequencyThreshold = 4.9e-3;

CriterionResult frequency_separation(const VerifyOptions& o) {
  CriterionResult res;
  ExperimentPlan base = default_plan(ExperimentId::frequency);
  base.epochs = 100000;
  base.record_every = 100;
  const std::vector<double> eps = {5e-3, 0.0, -5e-3};
  const std::size_t n_seeds = 5;
  const auto runs = run_frequency_experiment(base, eps, 5e-3, seed_range(1, n_seeds));

  bool dips = true;
  std::vector<double> med;
  for (std::size_t k = 0; k * n_seeds < runs.size(); ++k) {
    std::vector<double> hits;
    std::size_t with_dip = 0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const RunRecord& r = runs[k * n_seeds + s].record;
      double lo = kInf;
      for (const RunRow& row : r.rows) lo = std::min(lo, *row.aux_loss);
      if (lo < *r.rows.front().aux_loss && lo < *r.last().aux_loss) ++with_dip;
      const auto e = epochs_to_loss(r, kFrequencyThreshold);
      hits.push_back(e ? static_cast<double>(*e) : kInf);
    }
    dips = dips && with_dip == n_seeds;
    const std::string& label = runs[k * n_seeds].label;
    if (k < eps.size()) med.push_back(median(hits));
    say(o, fmt("%-14s U' dip in %zu/%zu runs, median epochs to U<=%g: %s", label.c_str(), with_dip, n_seeds,
               kFrequencyThreshold, std::isfinite(median(hits)) ? fmt("%.0f", median(hits)).c_str() : "unreached"));
  }
  const bool ordered = std::isfinite(med[0]) && med[0] <= med[1] && med[1] <= med[2];
  res.passed = dips && ordered;
  res.detail = fmt("U' dip in every run: %s; median epochs to U<=%g: eps>0 %.0f, eps=0 %.0f, eps<0 %.0f",
                   dips ? "yes" : "no", kFrequencyThreshold, med[0], med[1], med[2]);
  return res;
}

// 9 -------------------------------------------------------------------------
CriterionResult deep_step(const VerifyOptions& o) {
  CriterionResult res;
  ExperimentPlan amc = default_plan(ExperimentId::deep_step);
  amc.depth = 16;
  amc.epochs = 200000;
  amc.record_every = 1000;
  amc.stop_below = 1e-3;
  amc.seed = 1;
  ExperimentPlan gd = amc;
  gd.optimizer = OptimizerKind::gd;
  gd.grad.lr = 1e-3;
  gd.stop_below = 1e-2;
  const auto best = run_deep_step_experiment({16}, {{"amc signal norm", amc}, {"gd", gd}}, 5, 5);
  for (const auto& b : best) {
    say(o, fmt("%-16s depth %zu best of %zu: U %.3e (seed %llu, %s init)", b.label.c_str(), b.depth, b.runs,
               b.best_loss, static_cast<unsigned long long>(b.best_seed), to_string(b.best_init).c_str()));
  }
  res.passed = best[0].best_loss < 1e-3 && best[1].best_loss > 1e-2;
  res.detail = fmt("depth 16: aMC best U %.3e (need < 1e-3), GD best U %.3e (need > 1e-2)", best[0].best_loss,
                   best[1].best_loss);
  return res;
}

// 10 ------------------------------------------------------------------------
CriterionResult rnn_training(const VerifyOptions& o) {
  CriterionResult res;
  const std::string dir = mnist_dir(o);
  if (!have_mnist(dir)) {
    res.skipped = true;
    res.detail = "MNIST data not found (set AMCNET_MNIST_DIR)";
    return res;
  }
  ExperimentPlan amc = default_plan(ExperimentId::rnn);
  amc.mnist_dir = dir;
  amc.seed = 1;
  amc.record_grad_norm = true;
  ExperimentPlan gd = amc;
  gd.optimizer = OptimizerKind::gd;
  gd.record_grad_norm = false;
  gd.epochs = 2000;
  ExperimentPlan adam = gd;
  adam.optimizer = OptimizerKind::adam;
  const auto runs = run_rnn_experiment({amc, gd, adam});

  const RunRecord& a = runs[0].record;
  double best_acc = 0.0;
  bool small = false, large = false;
  for (const RunRow& r : a.rows) {
    best_acc = std::max(best_acc, *r.accuracy);
    if (*r.grad_norm < 0.1 * *r.loss) small = true;
    if (*r.grad_norm > 10.0 * *r.loss) large = true;
    say(o, fmt("amc epoch %6llu U %.4f C %.4f |grad| %.3e", static_cast<unsigned long long>(r.epoch), *r.loss,
               *r.accuracy, *r.grad_norm));
  }
  const double final_acc = *a.last().accuracy;
  bool flat = true;
  double worst_dev = 0.0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    for (const RunRow& r : runs[k].record.rows) {
      const double dev = std::abs(*r.loss - std::log(2.0)) / std::log(2.0);
      worst_dev = std::max(worst_dev, dev);
      if (dev > 0.05) flat = false;
    }
    say(o, fmt("%-5s final U %.4f C %.4f%s", runs[k].label.c_str(), *runs[k].record.last().loss,
               *runs[k].record.last().accuracy, runs[k].record.diverged ? " (diverged)" : ""));
  }
  res.passed = final_acc >= 0.95 && flat && small && large;
  res.detail = fmt("amc final test accuracy %.4f (best %.4f, need >= 0.95); gd/adam max |U-ln2|/ln2 %.4f (limit "
                   "0.05); regimes |grad|<0.1U %s, |grad|>10U %s",
                   final_acc, best_acc, worst_dev, small ? "seen" : "not seen", large ? "seen" : "not seen");
  return res;
}

// 11 ------------------------------------------------------------------------
CriterionResult full_mnist(const VerifyOptions& o) {
  CriterionResult res;
  const std::string dir = mnist_dir(o);
  if (!have_mnist(dir)) {
    res.skipped = true;
    res.detail = "MNIST data not found";
    return res;
  }
  ExperimentPlan mc = default_plan(ExperimentId::mnist, Preset::paper);
  mc.mnist_dir = dir;
  const ClassificationData data = load_plan_data(mc);
  if (data.train->size() != 60000 || data.test->size() != 10000) {
    res.skipped = true;
    res.detail = fmt("needs the full 60000/10000 MNIST files, found %zu/%zu", data.train->size(), data.test->size());
    return res;
  }
  mc.record_every = 1000;
  ExperimentPlan gd = mc;
  gd.optimizer = OptimizerKind::gd;
  const double c_mc = *run_plan(mc).last().accuracy;
  say(o, fmt("metropolis test accuracy %.4f", c_mc));
  const double c_gd = *run_plan(gd).last().accuracy;
  say(o, fmt("gd test accuracy %.4f", c_gd));
  res.passed = std::abs(c_mc - 0.95) <= 0.01 && std::abs(c_gd - 0.96) <= 0.01;
  res.detail = fmt("test accuracy: metropolis %.4f (0.95 +/- 0.01), gd %.4f (0.96 +/- 0.01)", c_mc, c_gd);
  return res;
}

// 12 ------------------------------------------------------------------------
CriterionResult determinism(const VerifyOptions& o) {
  CriterionResult res;
  std::vector<std::pair<std::string, ExperimentPlan>> cases;
  {
    ExperimentPlan p = default_plan(ExperimentId::rosenbrock);
    p.epochs = 2000;
    cases.emplace_back("amc rosenbrock", p);
  }
  {
    ExperimentPlan p = default_plan(ExperimentId::deep_step);
    p.depth = 4;
    p.epochs = 1000;
    p.record_every = 10;
    cases.emplace_back("amc signal-norm step", p);
  }
  {
    ExperimentPlan p = default_plan(ExperimentId::frequency);
    p.optimizer = OptimizerKind::adam;
    p.epochs = 600;
    p.record_window = 100;
    cases.emplace_back("adam log-sine", p);
  }
  const std::string dir = mnist_dir(o);
  if (have_mnist(dir)) {
    ExperimentPlan p = default_plan(ExperimentId::batching);
    p.mnist_dir = dir;
    p.train_size = 600;
    p.test_size = 100;
    p.batch_size = 50;
    p.epochs = 400;
    p.record_every = 20;
    cases.emplace_back("amc progressive mnist", p);
  }
  bool ok = true;
  for (auto& [label, plan] : cases) {
    plan.seed = 12;
    const std::string first = metrics_csv(run_plan(plan));
    const std::string again = metrics_csv(run_plan(plan));

    Run whole(plan);
    whole.run_to_end();

    const std::uint64_t half = plan.epochs / 2;
    Run part(plan);
    part.advance(half);
    const Checkpoint cp = decode_checkpoint(encode_checkpoint(part.checkpoint()));
    Run resumed(plan, cp);
    resumed.run_to_end();

    Run from_zero(plan, decode_checkpoint(encode_checkpoint(Run(plan).checkpoint())));
    from_zero.run_to_end();

    ExperimentPlan other = plan;
    other.seed += 1;
    bool refused = false;
    try {
      Run bad(other, cp);
    } catch (const DigestMismatchError&) {
      refused = true;
    }

    const bool repeat = first == again;
    const bool resume = metrics_csv(resumed.record()) == first && resumed.params() == whole.params() &&
                        metrics_csv(whole.record()) == first;
    const bool zero = metrics_csv(from_zero.record()) == first;
    ok = ok && repeat && resume && zero && refused;
    say(o, fmt("%-22s rerun %s, resume at %llu %s, resume at 0 %s, foreign checkpoint %s", label.c_str(),
               repeat ? "identical" : "DIFFERS", static_cast<unsigned long long>(half),
               resume ? "identical" : "DIFFERS", zero ? "identical" : "DIFFERS", refused ? "refused" : "ACCEPTED"));
  }
  res.passed = ok;
  res.detail = fmt("%zu configurations: reruns byte-identical and resumes bitwise equal: %s", cases.size(),
                   ok ? "yes" : "no");
  return res;
}

}  // namespace

std::vector<int> default_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12}; }
std::vector<int> quick_criteria() { return {1, 2, 3, 4, 5, 6, 12}; }

std::string criterion_name(int id) {
  switch (id) {
    case 1: return "monotone zero-temperature loss";
    case 2: return "gradient oracle";
    case 3: return "small-sigma acceptance limit";
    case 4: return "signal-norm variance identity";
    case 5: return "scheduler and adaptation algebra";
    case 6: return "rosenbrock epsilon ordering";
    case 7: return "acceptance-rate scaling with width";
    case 8: return "frequency separation";
    case 9: return "deep step nets at depth 16";
    case 10: return "rnn on unrolled 0/1 digits";
    case 11: return "full-scale mnist (optional)";
    case 12: return "determinism and resume";
    default: return "unknown";
  }
}

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  using Fn = CriterionResult (*)(const VerifyOptions&);
  Fn fn = nullptr;
  switch (id) {
    case 1: fn = monotone_loss; break;
    case 2: fn = gradient_oracle; break;
    case 3: fn = small_sigma_acceptance; break;
    case 4: fn = signal_norm_identity; break;
    case 5: fn = scheduler_algebra; break;
    case 6: fn = rosenbrock_ordering; break;
    case 7: fn = acceptance_scaling; break;
    case 8: fn = frequency_separation; break;
    case 9: fn = deep_step; break;
    case 10: fn = rnn_training; break;
    case 11: fn = full_mnist; break;
    case 12: fn = determinism; break;
    default: throw ConfigError("no criterion " + std::to_string(id));
  }
  if (options.log) *options.log << "criterion " << id << ": " << criterion_name(id) << std::endl;
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn(options);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.id = id;
  r.name = criterion_name(id);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_result(const CriterionResult& r) {
  const char* tag = r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL";
  return fmt("[%s] criterion %d %s: %s (%.1f s)", tag, r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

}  // namespace amcnet
