#include "amcnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "amcnet/errors.hpp"
#include "amcnet/runner.hpp"

namespace amcnet {

namespace {

template <typename E>
struct Names {
  E value;
  const char* name;
};

constexpr Names<ExperimentId> kExperiments[] = {
    {ExperimentId::mnist, "mnist"},         {ExperimentId::accept_scan, "accept-scan"},
    {ExperimentId::rosenbrock, "rosenbrock"}, {ExperimentId::frequency, "frequency"},
    {ExperimentId::rnn, "rnn"},             {ExperimentId::deep_step, "deep-step"},
    {ExperimentId::batching, "batching"},
};
constexpr Names<OptimizerKind> kOptimizers[] = {
    {OptimizerKind::metropolis, "metropolis"},
    {OptimizerKind::amc, "amc"},
    {OptimizerKind::gd, "gd"},
    {OptimizerKind::adam, "adam"},
};
constexpr Names<BatchMode> kBatchModes[] = {
    {BatchMode::batch, "batch"},
    {BatchMode::minibatch, "minibatch"},
    {BatchMode::progressive, "progressive"},
};
constexpr Names<Preset> kPresets[] = {{Preset::desk, "desk"}, {Preset::paper, "paper"}};

template <typename E, std::size_t N>
std::string name_of(const Names<E> (&table)[N], E v) {
  for (const auto& n : table) {
    if (n.value == v) return n.name;
  }
  return "?";
}

template <typename E, std::size_t N>
E value_of(const Names<E> (&table)[N], const std::string& s, const char* what) {
  std::string options;
  for (const auto& n : table) {
    if (s == n.name) return n.value;
    options += options.empty() ? "" : ", ";
    options += n.name;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + s + "' (expected one of: " + options + ")");
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) throw ShapeError("median of an empty list");
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string to_string(ExperimentId id) { return name_of(kExperiments, id); }
std::string to_string(OptimizerKind k) { return name_of(kOptimizers, k); }
std::string to_string(BatchMode m) { return name_of(kBatchModes, m); }
std::string to_string(Preset p) { return name_of(kPresets, p); }
ExperimentId experiment_from_string(const std::string& s) { return value_of(kExperiments, s, "experiment"); }
OptimizerKind optimizer_from_string(const std::string& s) { return value_of(kOptimizers, s, "optimizer"); }
BatchMode batch_mode_from_string(const std::string& s) { return value_of(kBatchModes, s, "batch mode"); }
Preset preset_from_string(const std::string& s) { return value_of(kPresets, s, "preset"); }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& n : kExperiments) v.emplace_back(n.name);
    return v;
  }();
  return names;
}

bool operator==(const ExperimentPlan& a, const ExperimentPlan& b) {
  auto amc = [](const AmcConfig& c) {
    return std::tie(c.sigma0, c.epsilon, c.ns, c.signal_norm, c.temperature, c.decay);
  };
  auto grad = [](const GradConfig& c) { return std::tie(c.algorithm, c.lr, c.beta1, c.beta2, c.delta, c.clip); };
  auto rest = [](const ExperimentPlan& p) {
    return std::tie(p.experiment, p.preset, p.seed, p.epochs, p.optimizer, p.init.scheme, p.init.sigma, p.width,
                    p.depth, p.rnn_hidden, p.rnn_layers, p.grid_points, p.x0, p.y0, p.mnist_dir, p.train_size,
                    p.test_size, p.threshold, p.batch_mode, p.batch_size, p.batch_trigger, p.record_every,
                    p.record_window, p.record_grad_norm, p.stop_below);
  };
  return amc(a.amc) == amc(b.amc) && grad(a.grad) == grad(b.grad) && rest(a) == rest(b);
}

ExperimentPlan default_plan(ExperimentId id, Preset preset) {
  const bool paper = preset == Preset::paper;
  ExperimentPlan p;
  p.experiment = id;
  p.preset = preset;
  p.init = {InitScheme::kaiming, 1e-2};
  switch (id) {
    case ExperimentId::rosenbrock:
      p.optimizer = OptimizerKind::amc;
      p.amc.sigma0 = 1e-3;
      p.amc.ns = 20;
      p.amc.epsilon = 5e-2;
      p.epochs = 10000;
      break;
    case ExperimentId::accept_scan:
      p.optimizer = OptimizerKind::metropolis;
      p.amc.sigma0 = 1e-3;
      p.width = 10;
      p.depth = 2;
      p.epochs = paper ? 1000000 : 200000;
      p.record_every = 10;
      break;
    case ExperimentId::frequency:
      p.optimizer = OptimizerKind::amc;
      p.amc.sigma0 = 0.1;
      p.amc.ns = 50;
      p.amc.epsilon = 5e-3;
      p.grad.lr = 5e-3;
      p.init = {InitScheme::gaussian, 0.1};
      p.width = 100;
      p.depth = 1;
      p.epochs = paper ? 1000000 : 20000;
      p.record_every = 10;
      break;
    case ExperimentId::rnn:
      p.optimizer = OptimizerKind::amc;
      p.amc.sigma0 = 1e-3;
      p.amc.ns = 100;
      p.amc.epsilon = 0.0;
      p.grad.lr = 1e-3;
      p.grad.clip = 1.0;
      p.batch_mode = BatchMode::minibatch;
      p.batch_size = paper ? 1500 : 128;
      p.train_size = paper ? 0 : 1000;
      p.test_size = paper ? 0 : 400;
      p.epochs = paper ? 100000 : 40000;
      p.record_every = paper ? 1000 : 250;
      break;
    case ExperimentId::deep_step:
      p.optimizer = OptimizerKind::amc;
      p.amc.sigma0 = 1e-2;
      p.amc.epsilon = 1e-2;
      p.amc.ns = 100;
      p.amc.signal_norm = true;
      p.grad.lr = 1e-3;
      p.depth = paper ? 128 : 16;
      p.epochs = paper ? 1000000 : 200000;
      p.record_every = 100;
      break;
    case ExperimentId::mnist:
      p.optimizer = OptimizerKind::metropolis;
      p.amc.sigma0 = 2e-3;
      p.grad.lr = 4.5e-2;
      p.init = {InitScheme::gaussian, 1e-2};
      p.train_size = paper ? 0 : 6000;
      p.test_size = 0;
      p.epochs = paper ? 100000 : 3000;
      p.record_every = paper ? 100 : 50;
      break;
    case ExperimentId::batching:
      p.optimizer = OptimizerKind::amc;
      p.amc.sigma0 = 1e-2;
      p.amc.epsilon = 0.0;
      p.amc.ns = 20;
      p.amc.signal_norm = true;
      p.init = {InitScheme::gaussian, 1e-2};
      p.batch_mode = BatchMode::progressive;
      p.batch_size = 500;
      p.batch_trigger = 0.1;
      p.train_size = paper ? 0 : 6000;
      p.test_size = 0;
      p.epochs = paper ? 100000 : 3000;
      p.record_every = paper ? 100 : 50;
      break;
  }
  return p;
}

std::vector<std::size_t> deep_step_sizes(std::size_t depth) {
  if (depth < 1) throw ConfigError("deep step nets need at least one hidden layer");
  std::vector<std::size_t> sizes{1};
  for (std::size_t i = 0; i + 1 < depth; ++i) sizes.push_back(4);
  sizes.push_back(10);
  sizes.push_back(1);
  return sizes;
}

std::optional<NetworkSpec> plan_network(const ExperimentPlan& plan) {
  switch (plan.experiment) {
    case ExperimentId::rosenbrock:
      return std::nullopt;
    case ExperimentId::accept_scan:
    case ExperimentId::frequency: {
      if (plan.depth < 1 || plan.width < 1) throw ConfigError("net.width and net.depth must be positive");
      std::vector<std::size_t> sizes{1};
      for (std::size_t i = 0; i < plan.depth; ++i) sizes.push_back(plan.width);
      sizes.push_back(1);
      return NetworkSpec::mlp(sizes, OutputHead::linear);
    }
    case ExperimentId::deep_step:
      return NetworkSpec::mlp(deep_step_sizes(plan.depth), OutputHead::linear);
    case ExperimentId::rnn:
      return NetworkSpec::rnn(2, plan.rnn_hidden, plan.rnn_layers, 2);
    case ExperimentId::mnist:
    case ExperimentId::batching:
      return NetworkSpec::mlp({784, 16, 16, 10}, OutputHead::softmax);
  }
  return std::nullopt;
}

std::string resolve_mnist_dir(const ExperimentPlan& plan) {
  if (!plan.mnist_dir.empty()) return plan.mnist_dir;
  if (const char* env = std::getenv(kMnistDirEnv)) return env;
  return {};
}

ClassificationData load_plan_data(const ExperimentPlan& plan) {
  const std::string dir = resolve_mnist_dir(plan);
  if (dir.empty()) {
    throw ConfigError("no MNIST directory: set data.mnist_dir or $" + std::string(kMnistDirEnv));
  }
  const std::filesystem::path d(dir);
  Dataset train = load_mnist_idx(d / "train-images-idx3-ubyte", d / "train-labels-idx1-ubyte");
  Dataset test = load_mnist_idx(d / "t10k-images-idx3-ubyte", d / "t10k-labels-idx1-ubyte");
  if (plan.experiment == ExperimentId::rnn) {
    const int classes[] = {0, 1};
    train = binarize_unroll(train, classes, plan.threshold);
    test = binarize_unroll(test, classes, plan.threshold);
  }
  if (plan.train_size) train = train.head(plan.train_size);
  if (plan.test_size) test = test.head(plan.test_size);
  return {std::make_shared<const Dataset>(std::move(train)), std::make_shared<const Dataset>(std::move(test))};
}

std::optional<double> acceptance_at_loss(const RunRecord& record, double level) {
  const auto& rows = record.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].loss || *rows[i].loss > level) continue;
    if (!rows[i].acceptance_rate) return std::nullopt;
    if (i == 0 || !rows[i - 1].acceptance_rate || !rows[i - 1].loss) return rows[i].acceptance_rate;
    const double u_hi = *rows[i - 1].loss;
    const double u_lo = *rows[i].loss;
    const double a_hi = *rows[i - 1].acceptance_rate;
    const double a_lo = *rows[i].acceptance_rate;
    if (u_lo <= 0.0 || u_hi <= u_lo) return a_lo;
    const double t = (std::log(u_hi) - std::log(level)) / (std::log(u_hi) - std::log(u_lo));
    return a_hi + t * (a_lo - a_hi);
  }
  return std::nullopt;
}

std::optional<std::uint64_t> epochs_to_loss(const RunRecord& record, double level) {
  for (const RunRow& r : record.rows) {
    if (r.loss && *r.loss <= level) return r.epoch;
  }
  return std::nullopt;
}

std::vector<AcceptanceEntry> run_acceptance_scan(const ExperimentPlan& base, const std::vector<std::size_t>& widths,
                                                 const std::vector<std::size_t>& depths,
                                                 const std::vector<double>& u0,
                                                 const std::vector<std::uint64_t>& seeds) {
  if (u0.empty()) throw ConfigError("acceptance scan needs at least one U0");
  std::vector<AcceptanceEntry> out;
  const double lowest = *std::ranges::min_element(u0);
  for (std::size_t depth : depths) {
    for (std::size_t width : widths) {
      ExperimentPlan plan = base;
      plan.experiment = ExperimentId::accept_scan;
      plan.width = width;
      plan.depth = depth;
      plan.stop_below = lowest;
      std::vector<AcceptanceEntry> entries;
      const std::size_t params = plan_network(plan)->param_count();
      for (double level : u0) entries.push_back({width, depth, params, level, 0, seeds.size(), std::nullopt});
      std::vector<double> sums(u0.size(), 0.0);
      for (std::uint64_t seed : seeds) {
        plan.seed = seed;
        const RunRecord record = run_plan(plan);
        for (std::size_t k = 0; k < u0.size(); ++k) {
          if (auto a = acceptance_at_loss(record, u0[k])) {
            sums[k] += *a;
            ++entries[k].reached;
          }
        }
      }
      for (std::size_t k = 0; k < u0.size(); ++k) {
        if (entries[k].reached) entries[k].rate = sums[k] / static_cast<double>(entries[k].reached);
        out.push_back(entries[k]);
      }
    }
  }
  return out;
}

std::vector<LabelledRecord> run_rosenbrock_experiment(const ExperimentPlan& base,
                                                      const std::vector<double>& epsilons,
                                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<LabelledRecord> out;
  for (double eps : epsilons) {
    for (std::uint64_t seed : seeds) {
      ExperimentPlan plan = base;
      plan.experiment = ExperimentId::rosenbrock;
      plan.optimizer = OptimizerKind::amc;
      plan.amc.epsilon = eps;
      plan.seed = seed;
      out.push_back({"amc eps=" + std::to_string(eps), seed, run_plan(plan)});
    }
  }
  return out;
}

std::vector<LabelledRecord> run_frequency_experiment(const ExperimentPlan& base, const std::vector<double>& epsilons,
                                                     double grad_lr, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::pair<std::string, ExperimentPlan>> settings;
  for (double eps : epsilons) {
    ExperimentPlan p = base;
    p.optimizer = OptimizerKind::amc;
    p.amc.epsilon = eps;
    settings.emplace_back("amc eps=" + std::to_string(eps), p);
  }
  for (OptimizerKind k : {OptimizerKind::gd, OptimizerKind::adam}) {
    ExperimentPlan p = base;
    p.optimizer = k;
    p.grad.lr = grad_lr;
    settings.emplace_back(to_string(k), p);
  }
  std::vector<LabelledRecord> out;
  for (auto& [label, plan] : settings) {
    plan.experiment = ExperimentId::frequency;
    for (std::uint64_t seed : seeds) {
      plan.seed = seed;
      out.push_back({label, seed, run_plan(plan)});
    }
  }
  return out;
}

std::vector<LabelledRecord> run_rnn_experiment(const std::vector<ExperimentPlan>& plans) {
  std::vector<LabelledRecord> out;
  for (ExperimentPlan plan : plans) {
    plan.experiment = ExperimentId::rnn;
    out.push_back({to_string(plan.optimizer), plan.seed, run_plan(plan)});
  }
  return out;
}

std::vector<BestOfRuns> run_deep_step_experiment(const std::vector<std::size_t>& depths,
                                                 const std::vector<std::pair<std::string, ExperimentPlan>>& settings,
                                                 std::size_t kaiming_runs, std::size_t gaussian_runs) {
  std::vector<BestOfRuns> out;
  for (std::size_t depth : depths) {
    for (const auto& [label, base] : settings) {
      BestOfRuns best;
      best.label = label;
      best.depth = depth;
      best.best_loss = std::numeric_limits<double>::infinity();
      std::uint64_t seed = base.seed;
      for (std::size_t r = 0; r < kaiming_runs + gaussian_runs; ++r, ++seed) {
        ExperimentPlan plan = base;
        plan.experiment = ExperimentId::deep_step;
        plan.depth = depth;
        plan.seed = seed;
        plan.init.scheme = r < kaiming_runs ? InitScheme::kaiming : InitScheme::gaussian;
        RunRecord record = run_plan(plan);
        ++best.runs;
        const double final_loss = record.rows.empty() || !record.last().loss
                                      ? std::numeric_limits<double>::infinity()
                                      : *record.last().loss;
        if (final_loss < best.best_loss || best.best.rows.empty()) {
          best.best_loss = final_loss;
          best.best_seed = seed;
          best.best_init = plan.init.scheme;
          best.best = std::move(record);
        }
      }
      out.push_back(std::move(best));
    }
  }
  return out;
}

MnistResult run_mnist_experiment(const ExperimentPlan& plan) {
  Run run(plan);
  run.run_to_end();
  return {run.record(), run.batch_sizes()};
}

}  // namespace amcnet
