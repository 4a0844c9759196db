#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "amcnet/grad.hpp"
#include "amcnet/mc.hpp"
#include "amcnet/record.hpp"

namespace amcnet {

/// Complete state of a run between two steps.
struct Checkpoint {
  std::uint64_t config_digest = 0;
  std::uint64_t epoch = 0;
  ParamVector params;
  AmcState amc;
  AdamState adam;
  std::string rng_state;
  std::deque<bool> acceptance_history;
  /// Minibatch size in force (0 = full batch).
  std::size_t batch_size = 0;
  std::vector<std::size_t> batch_sizes;
  bool stopped = false;
  RunRecord record;
};

/// Raised when a checkpoint was written for a different configuration.
class DigestMismatchError : public Error {
 public:
  DigestMismatchError(std::uint64_t expected, std::uint64_t found);
};

inline constexpr std::uint8_t kCheckpointVersion = 1;

/// Binary layout: magic "AMCK", version byte, then length-prefixed fields in
/// little-endian order; reals are stored as their IEEE-754 bit patterns.
std::string encode_checkpoint(const Checkpoint& cp);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Load and insist that the checkpoint belongs to a config with this digest.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_digest);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace amcnet
