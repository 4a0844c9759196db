#include "amcnet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace amcnet {

namespace {

using nlohmann::json;

enum class Kind { real, opt_real, count, ns, flag, text, choice };

struct KeyDef {
  std::string name;
  Kind kind;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::real: return "a number";
    case Kind::opt_real: return "a number or null";
    case Kind::count: return "a non-negative integer";
    case Kind::ns: return "a positive integer or \"inf\"";
    case Kind::flag: return "true or false";
    case Kind::text:
    case Kind::choice: return "a string";
  }
  return "?";
}

std::string json_type(const json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean " + v.dump();
  if (v.is_number()) return "number " + v.dump();
  if (v.is_string()) return "string " + v.dump();
  return std::string(v.type_name());
}

#define REAL(key, field) \
  KeyDef{key, Kind::real, [](const RunConfig& c) { return json(c.field); }, \
         [](RunConfig& c, const json& v) { c.field = v.get<double>(); }}
#define COUNT(key, field) \
  KeyDef{key, Kind::count, [](const RunConfig& c) { return json(c.field); }, \
         [](RunConfig& c, const json& v) { c.field = v.get<std::uint64_t>(); }}
#define FLAG(key, field) \
  KeyDef{key, Kind::flag, [](const RunConfig& c) { return json(c.field); }, \
         [](RunConfig& c, const json& v) { c.field = v.get<bool>(); }}
#define OPT_REAL(key, field)                                                                 \
  KeyDef{key, Kind::opt_real,                                                                \
         [](const RunConfig& c) { return c.field ? json(*c.field) : json(nullptr); },       \
         [](RunConfig& c, const json& v) {                                                   \
           if (v.is_null()) c.field.reset(); else c.field = v.get<double>();                 \
         }}
#define CHOICE(key, field, to_str, from_str) \
  KeyDef{key, Kind::choice, [](const RunConfig& c) { return json(to_str(c.field)); }, \
         [](RunConfig& c, const json& v) { c.field = from_str(v.get<std::string>()); }}

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      CHOICE("experiment", plan.experiment, to_string, experiment_from_string),
      CHOICE("preset", plan.preset, to_string, preset_from_string),
      COUNT("seed", plan.seed),
      COUNT("epochs", plan.epochs),
      CHOICE("optimizer", plan.optimizer, to_string, optimizer_from_string),
      REAL("amc.sigma0", plan.amc.sigma0),
      REAL("amc.epsilon", plan.amc.epsilon),
      KeyDef{"amc.ns", Kind::ns,
             [](const RunConfig& c) {
               return c.plan.amc.ns == kNeverRescale ? json("inf") : json(c.plan.amc.ns);
             },
             [](RunConfig& c, const json& v) {
               c.plan.amc.ns = v.is_string() ? kNeverRescale : v.get<std::uint64_t>();
             }},
      FLAG("amc.signal_norm", plan.amc.signal_norm),
      REAL("amc.temperature", plan.amc.temperature),
      REAL("amc.decay", plan.amc.decay),
      KeyDef{"grad.algorithm", Kind::choice, [](const RunConfig& c) { return json(to_string(c.plan.grad.algorithm)); },
             [](RunConfig& c, const json& v) {
               const std::string s = v.get<std::string>();
               if (s == "gd") c.plan.grad.algorithm = GradAlgorithm::gd;
               else if (s == "adam") c.plan.grad.algorithm = GradAlgorithm::adam;
               else throw ConfigError("grad.algorithm must be gd or adam, not '" + s + "'");
             }},
      REAL("grad.lr", plan.grad.lr),
      REAL("grad.beta1", plan.grad.beta1),
      REAL("grad.beta2", plan.grad.beta2),
      REAL("grad.delta", plan.grad.delta),
      OPT_REAL("grad.clip", plan.grad.clip),
      CHOICE("init.scheme", plan.init.scheme, to_string, init_scheme_from_string),
      REAL("init.sigma", plan.init.sigma),
      COUNT("net.width", plan.width),
      COUNT("net.depth", plan.depth),
      COUNT("net.rnn_hidden", plan.rnn_hidden),
      COUNT("net.rnn_layers", plan.rnn_layers),
      COUNT("task.grid_points", plan.grid_points),
      REAL("task.x0", plan.x0),
      REAL("task.y0", plan.y0),
      KeyDef{"data.mnist_dir", Kind::text, [](const RunConfig& c) { return json(c.plan.mnist_dir); },
             [](RunConfig& c, const json& v) { c.plan.mnist_dir = v.get<std::string>(); }},
      COUNT("data.train_size", plan.train_size),
      COUNT("data.test_size", plan.test_size),
      REAL("data.threshold", plan.threshold),
      CHOICE("batch.mode", plan.batch_mode, to_string, batch_mode_from_string),
      COUNT("batch.size", plan.batch_size),
      REAL("batch.trigger", plan.batch_trigger),
      COUNT("record.every", plan.record_every),
      COUNT("record.window", plan.record_window),
      FLAG("record.grad_norm", plan.record_grad_norm),
      OPT_REAL("record.stop_below", plan.stop_below),
      KeyDef{"out", Kind::text, [](const RunConfig& c) { return json(c.out.string()); },
             [](RunConfig& c, const json& v) { c.out = v.get<std::string>(); }},
      COUNT("checkpoint.every", checkpoint_every),
  };
  return table;
}

#undef REAL
#undef COUNT
#undef FLAG
#undef OPT_REAL
#undef CHOICE

bool is_run_key(const std::string& name) { return name == "out" || name == "checkpoint.every"; }

std::string leaf(const std::string& key) {
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

std::string normalize(std::string s) {
  std::ranges::replace(s, '-', '_');
  return s;
}

/// Exact key, or a leaf name that identifies exactly one key.
const KeyDef* find_key(const std::string& raw) {
  const std::string key = normalize(raw);
  const KeyDef* by_leaf = nullptr;
  int leaf_hits = 0;
  for (const KeyDef& d : key_table()) {
    if (d.name == key) return &d;
    if (leaf(d.name) == key) {
      by_leaf = &d;
      ++leaf_hits;
    }
  }
  return leaf_hits == 1 ? by_leaf : nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool type_ok(Kind kind, const json& v) {
  switch (kind) {
    case Kind::real: return v.is_number() && std::isfinite(v.get<double>());
    case Kind::opt_real: return v.is_null() || (v.is_number() && std::isfinite(v.get<double>()));
    case Kind::count: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case Kind::ns:
      if (v.is_string()) return v.get<std::string>() == "inf";
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 1);
    case Kind::flag: return v.is_boolean();
    case Kind::text:
    case Kind::choice: return v.is_string();
  }
  return false;
}

json parse_string(const KeyDef& d, const std::string& s) {
  auto mismatch = [&] { return TypeMismatchError(d.name, kind_name(d.kind), "\"" + s + "\""); };
  auto as_real = [&]() -> json {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) throw mismatch();
    return v;
  };
  auto as_count = [&]() -> json {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw mismatch();
    return v;
  };
  switch (d.kind) {
    case Kind::real: return as_real();
    case Kind::opt_real: return (s == "none" || s == "null") ? json(nullptr) : as_real();
    case Kind::count: return as_count();
    case Kind::ns: return (s == "inf" || s == "infinity") ? json("inf") : as_count();
    case Kind::flag:
      if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "off" || s == "no") return false;
      throw mismatch();
    case Kind::text:
    case Kind::choice: return s;
  }
  throw mismatch();
}

const KeyDef& require_key(const std::string& key) {
  const KeyDef* d = find_key(key);
  if (!d) throw UnknownKeyError(key, nearest_key(key));
  return *d;
}

}  // namespace

UnknownKeyError::UnknownKeyError(const std::string& key, const std::string& suggestion)
    : ConfigError("unknown config key '" + key + "'" +
                  (suggestion.empty() ? std::string() : "; did you mean '" + suggestion + "'?")),
      key_(key),
      suggestion_(suggestion) {}

TypeMismatchError::TypeMismatchError(const std::string& key, const std::string& expected, const std::string& got)
    : ConfigError("config key '" + key + "' expects " + expected + ", got " + got) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const KeyDef& d : key_table()) k.push_back(d.name);
    return k;
  }();
  return keys;
}

std::string nearest_key(const std::string& key) {
  const std::string k = normalize(key);
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const KeyDef& d : key_table()) {
    const std::size_t dist = std::min(edit_distance(k, d.name), edit_distance(k, leaf(d.name)));
    if (dist < best_d) {
      best_d = dist;
      best = d.name;
    }
  }
  return best_d <= std::max<std::size_t>(2, k.size() / 3) ? best : std::string();
}

nlohmann::ordered_json plan_to_json(const ExperimentPlan& plan) {
  RunConfig c;
  c.plan = plan;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const KeyDef& d : key_table()) {
    if (!is_run_key(d.name)) j[d.name] = d.get(c);
  }
  return j;
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const KeyDef& d : key_table()) j[d.name] = d.get(config);
  return j;
}

json flatten_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json flat = json::object();
  std::function<void(const std::string&, const json&)> walk = [&](const std::string& prefix, const json& v) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_object()) {
        walk(key, *it);
      } else {
        if (flat.contains(key)) throw ConfigError("config key '" + key + "' given twice");
        flat[key] = *it;
      }
    }
  };
  walk("", j);
  return flat;
}

void set_config_value(RunConfig& config, const std::string& key, const json& value) {
  const KeyDef& d = require_key(key);
  if (!type_ok(d.kind, value)) throw TypeMismatchError(d.name, kind_name(d.kind), json_type(value));
  d.set(config, value);
}

void set_config_string(RunConfig& config, const std::string& key, const std::string& value) {
  const KeyDef& d = require_key(key);
  d.set(config, parse_string(d, value));
}

void validate_dataset(const RunConfig& config) {
  const ExperimentId id = config.plan.experiment;
  if (id != ExperimentId::mnist && id != ExperimentId::batching && id != ExperimentId::rnn) return;
  const std::string dir = resolve_mnist_dir(config.plan);
  if (dir.empty()) {
    throw MissingDatasetError("experiment '" + to_string(id) + "' needs MNIST data: set data.mnist_dir or $" +
                              kMnistDirEnv);
  }
  for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                           "t10k-labels-idx1-ubyte"}) {
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    if (!std::filesystem::exists(p)) throw MissingDatasetError("MNIST file not found: " + p.string());
  }
}

RunConfig parse_config(const json& file, const std::vector<std::pair<std::string, std::string>>& overrides) {
  const json flat = flatten_json(file.is_null() ? json::object() : file);

  // Unknown keys are reported before anything else.
  for (auto it = flat.begin(); it != flat.end(); ++it) require_key(it.key());
  for (const auto& [k, v] : overrides) require_key(k);

  auto pick = [&](const std::string& key, const std::string& fallback) {
    std::optional<std::string> value;
    for (const auto& [k, v] : overrides) {
      if (find_key(k)->name == key) value = v;
    }
    if (value) return *value;
    for (auto it = flat.begin(); it != flat.end(); ++it) {
      if (find_key(it.key())->name != key) continue;
      if (!it->is_string()) throw TypeMismatchError(key, "a string", json_type(*it));
      return it->get<std::string>();
    }
    return fallback;
  };
  const ExperimentId id = experiment_from_string(pick("experiment", "rosenbrock"));
  const Preset preset = preset_from_string(pick("preset", "desk"));

  RunConfig config;
  config.plan = default_plan(id, preset);
  for (auto it = flat.begin(); it != flat.end(); ++it) set_config_value(config, it.key(), *it);
  for (const auto& [k, v] : overrides) set_config_string(config, k, v);

  config.plan.amc.validate();
  config.plan.grad.validate();
  validate_dataset(config);
  config.plan.mnist_dir = resolve_mnist_dir(config.plan);
  return config;
}

RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, overrides);
}

}  // namespace amcnet
