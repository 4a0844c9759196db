#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace amcnet {

/// Seedable random stream shared by everything inside one run.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform and Gaussian variates are derived here rather than via
/// <random> distributions (whose algorithms are implementation-defined), so a
/// trajectory is reproducible bit-for-bit at a fixed seed on a given libm.
///
/// Gaussians use the Box-Muller transform and both outputs of each pair are
/// consumed; the cached second output is part of the serialized state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed();

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double normal();
  void fill_normal(std::span<double> out);

  /// Text form of the full state (engine words plus cached normal).
  std::string serialize() const;
  void deserialize(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.has_spare_ == b.has_spare_ &&
           (!a.has_spare_ || a.spare_ == b.spare_);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace amcnet
