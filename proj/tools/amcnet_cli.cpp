// amcnet: run, sweep and verify training experiments.

#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "amcnet/config.hpp"
#include "amcnet/runner.hpp"
#include "amcnet/verify.hpp"

namespace fs = std::filesystem;
using namespace amcnet;

namespace {

struct RunOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  bool resume = false;
};

/// One --<key> option per config key, plus short aliases for the optimizer
/// and network keys (--sigma0, --lr, --width, ...).
void add_key_options(CLI::App& app, RunOptions& opts) {
  for (const std::string& key : config_keys()) {
    std::string names = "--" + key;
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
      const std::string group = key.substr(0, dot);
      if (group == "amc" || group == "grad" || group == "net") names += ",--" + key.substr(dot + 1);
    }
    app.add_option_function<std::string>(
           names, [&opts, key](const std::string& v) { opts.flags[key] = v; }, "config key " + key)
        ->group("Config keys");
  }
  app.add_option("--config", opts.config_file, "JSON config file (flags override it)");
  app.add_option("--set", opts.sets, "generic override key=value (repeatable)");
}

std::vector<std::pair<std::string, std::string>> collect_overrides(const RunOptions& opts) {
  std::vector<std::pair<std::string, std::string>> out(opts.flags.begin(), opts.flags.end());
  for (const std::string& s : opts.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

RunConfig resolve(const RunOptions& opts, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto overrides = collect_overrides(opts);
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (opts.config_file.empty()) return parse_config(nlohmann::json::object(), overrides);
  return load_config_file(opts.config_file, overrides);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

/// Run one resolved config into its output directory.
RunRecord execute(const RunConfig& config, bool resume) {
  fs::create_directories(config.out);
  write_text(config.out / "config.json", config_to_json(config).dump(2) + "\n");
  const fs::path cp_path = config.out / "checkpoint.bin";

  std::optional<Run> run;
  if (resume && fs::exists(cp_path)) {
    run.emplace(config.plan, load_checkpoint(cp_path, plan_digest(config.plan)));
  } else {
    run.emplace(config.plan);
  }
  const std::uint64_t chunk = config.checkpoint_every ? config.checkpoint_every : config.plan.epochs;
  while (!run->finished()) {
    run->advance(std::max<std::uint64_t>(chunk, 1));
    if (config.checkpoint_every) save_checkpoint(run->checkpoint(), cp_path);
  }
  save_checkpoint(run->checkpoint(), cp_path);
  emit_metrics(run->record(), config.out / "metrics.csv");
  return run->record();
}

std::string summary(const RunRecord& r) {
  std::string s = "epochs " + std::to_string(r.last().epoch);
  char buf[64];
  if (r.last().loss) {
    std::snprintf(buf, sizeof buf, ", loss %.6g", *r.last().loss);
    s += buf;
  }
  if (r.last().accuracy) {
    std::snprintf(buf, sizeof buf, ", test accuracy %.4f", *r.last().accuracy);
    s += buf;
  }
  if (r.diverged) s += ", diverged";
  return s;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  auto num = [&](std::string_view v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
      throw ConfigError("--seeds expects a..b, got '" + s + "'");
    }
    return x;
  };
  if (dots == std::string::npos) {
    const std::uint64_t a = num(s);
    return {a, a};
  }
  const std::uint64_t a = num(std::string_view(s).substr(0, dots));
  const std::uint64_t b = num(std::string_view(s).substr(dots + 2));
  if (b < a) throw ConfigError("--seeds range is empty: '" + s + "'");
  return {a, b};
}

int cmd_sweep(const RunOptions& opts, const std::string& seeds, unsigned jobs) {
  const auto [first, last] = parse_seed_range(seeds);
  const RunConfig base = resolve(opts);
  const std::size_t count = static_cast<std::size_t>(last - first + 1);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      RunConfig config = base;
      config.plan.seed = first + i;
      config.out = base.out / ("seed-" + std::to_string(config.plan.seed));
      try {
        const RunRecord r = execute(config, opts.resume);
        std::lock_guard lock(io);
        std::cout << "seed " << config.plan.seed << ": " << summary(r) << "\n";
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(io);
        std::cerr << "seed " << config.plan.seed << " failed: " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-free (Monte Carlo) and gradient-based neural-network training experiments"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run one experiment trajectory");
  add_key_options(*run, run_opts);
  run->add_flag("--resume", run_opts.resume, "continue from <out>/checkpoint.bin if present");

  RunOptions sweep_opts;
  std::string seeds;
  unsigned jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run a range of seeds, one directory each");
  add_key_options(*sweep, sweep_opts);
  sweep->add_option("--seeds", seeds, "seed range a..b (inclusive)")->required();
  sweep->add_option("--jobs", jobs, "worker threads (default: all cores)");
  sweep->add_flag("--resume", sweep_opts.resume, "continue runs that have a checkpoint");

  std::vector<int> criteria;
  bool all = false;
  std::string mnist_dir;
  auto* verify = app.add_subcommand("verify", "run the oracle and invariant checks");
  verify->add_option("--criterion", criteria, "criterion numbers to run (default: the quick ones)");
  verify->add_flag("--all", all, "run every default criterion, including long-running ones");
  verify->add_option("--mnist-dir", mnist_dir, "MNIST directory (default: $AMCNET_MNIST_DIR)");

  auto* keys = app.add_subcommand("keys", "list config keys with their desk defaults");
  std::string keys_experiment = "rosenbrock";
  keys->add_option("--experiment", keys_experiment, "experiment whose defaults to show");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const RunConfig config = resolve(run_opts);
      const RunRecord r = execute(config, run_opts.resume);
      std::cout << to_string(config.plan.experiment) << " seed " << config.plan.seed << ": " << summary(r)
                << "\nwrote " << config.out.string() << "\n";
      return 0;
    }
    if (*sweep) return cmd_sweep(sweep_opts, seeds, jobs);
    if (*verify) {
      VerifyOptions vo;
      vo.mnist_dir = mnist_dir;
      vo.log = &std::cout;
      if (criteria.empty()) criteria = all ? default_criteria() : quick_criteria();
      bool ok = true;
      for (int id : criteria) {
        const CriterionResult r = run_criterion(id, vo);
        std::cout << format_result(r) << std::endl;
        ok = ok && (r.passed || r.skipped);
      }
      return ok ? 0 : 1;
    }
    if (*keys) {
      RunConfig c;
      c.plan = default_plan(experiment_from_string(keys_experiment));
      const auto flat = flatten_json(config_to_json(c));
      for (const auto& [k, v] : flat.items()) std::cout << k << " = " << v.dump() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
