#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "amcnet/errors.hpp"
#include "amcnet/experiments.hpp"

namespace amcnet {

/// A fully resolved run: the plan plus where and how often to write.
struct RunConfig {
  ExperimentPlan plan;
  std::filesystem::path out = "out";
  /// Write checkpoint.bin every this many epochs (0: only at the end).
  std::uint64_t checkpoint_every = 0;
};

class UnknownKeyError : public ConfigError {
 public:
  UnknownKeyError(const std::string& key, const std::string& suggestion);
  const std::string& key() const { return key_; }
  const std::string& suggestion() const { return suggestion_; }

 private:
  std::string key_;
  std::string suggestion_;
};

class TypeMismatchError : public ConfigError {
 public:
  TypeMismatchError(const std::string& key, const std::string& expected, const std::string& got);
};

class MissingDatasetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Every accepted key, in canonical order (dotted paths).
const std::vector<std::string>& config_keys();

/// Closest known key by edit distance.
std::string nearest_key(const std::string& key);

/// Flat, ordered JSON of a plan (one entry per plan key).
nlohmann::ordered_json plan_to_json(const ExperimentPlan& plan);
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Nested objects become dotted keys: {"amc": {"sigma0": 1}} -> {"amc.sigma0": 1}.
nlohmann::json flatten_json(const nlohmann::json& j);

/// Resolve a run config. The experiment and preset are taken from the
/// overrides, else the file, else rosenbrock/desk; the preset's defaults are
/// then overwritten by the file and finally by the overrides (raw strings).
/// Classification experiments must have a data directory that exists.
RunConfig parse_config(const nlohmann::json& file,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides);

/// Set one key from a JSON value or from a command-line string.
void set_config_value(RunConfig& config, const std::string& key, const nlohmann::json& value);
void set_config_string(RunConfig& config, const std::string& key, const std::string& value);

/// Check that classification plans can find their data.
void validate_dataset(const RunConfig& config);

}  // namespace amcnet
