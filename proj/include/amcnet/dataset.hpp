#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "amcnet/errors.hpp"
#include "amcnet/forward.hpp"

namespace amcnet {

/// Labelled examples: either flat real inputs (one column per example) or
/// one-hot sequences.
struct Dataset {
  Matrix inputs;
  std::vector<OneHotSequence> sequences;
  std::vector<int> labels;
  /// Number of classes (width of the one-hot target).
  std::size_t one_hot_dim = 0;
  /// Width of each one-hot sequence element.
  std::size_t symbol_dim = 0;

  std::size_t size() const { return labels.size(); }
  bool is_sequence() const { return !sequences.empty(); }

  /// Copy of the examples at the given indices, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// First n examples (all when n exceeds the size).
  Dataset head(std::size_t n) const;

  /// Throws ShapeError unless inputs and labels agree and labels are in range.
  void validate() const;
};

/// IDX header or payload errors; each failure mode has its own type.
class IdxError : public IoError {
 public:
  using IoError::IoError;
};
class IdxBadMagicError : public IdxError {
 public:
  using IdxError::IdxError;
};
class IdxTruncatedError : public IdxError {
 public:
  IdxTruncatedError(const std::string& path, std::uintmax_t expected, std::uintmax_t actual);
  std::uintmax_t expected_bytes() const { return expected_; }
  std::uintmax_t actual_bytes() const { return actual_; }

 private:
  std::uintmax_t expected_;
  std::uintmax_t actual_;
};
class IdxCountMismatchError : public IdxError {
 public:
  using IdxError::IdxError;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Load an IDX image/label pair. Pixels are scaled by 1/255 into [0, 1] and
/// flattened row-major.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

/// Write an IDX image/label pair (used by the data tool and by tests).
void write_mnist_idx(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path,
                     std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
                     std::uint32_t rows, std::uint32_t cols);

/// Keep the examples whose label is in classes, relabel them by their
/// position in classes, and turn each image into a sequence of pixels coded
/// as 2-wide one-hot vectors: index 1 ("white") when pixel >= threshold,
/// index 0 ("black") otherwise. Throws ShapeError when nothing is kept.
Dataset binarize_unroll(const Dataset& data, std::span<const int> classes, double threshold = 0.5);

}  // namespace amcnet
