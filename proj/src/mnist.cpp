#include "amcnet/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace amcnet {

IdxTruncatedError::IdxTruncatedError(const std::string& path, std::uintmax_t expected,
                                     std::uintmax_t actual)
    : IdxError("truncated IDX file " + path + ": expected " + std::to_string(expected) +
               " bytes, found " + std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.one_hot_dim = one_hot_dim;
  out.symbol_dim = symbol_dim;
  out.labels.reserve(indices.size());
  if (is_sequence()) {
    out.sequences.reserve(indices.size());
    for (std::size_t i : indices) out.sequences.push_back(sequences.at(i));
  } else {
    out.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
      out.inputs.col(static_cast<Eigen::Index>(k)) = inputs.col(static_cast<Eigen::Index>(indices[k]));
    }
  }
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  return out;
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, size());
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return subset(idx);
}

void Dataset::validate() const {
  const std::size_t n = is_sequence() ? sequences.size() : static_cast<std::size_t>(inputs.cols());
  if (n != labels.size()) throw ShapeError("dataset inputs and labels differ in length");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= one_hot_dim) throw ShapeError("label out of range");
  }
}

namespace {

std::uint32_t read_be32(const std::vector<char>& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + k]);
  }
  return v;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                  static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  const auto images = slurp(images_path);
  const auto labels = slurp(labels_path);
  if (images.size() < 16) throw IdxTruncatedError(images_path.string(), 16, images.size());
  if (labels.size() < 8) throw IdxTruncatedError(labels_path.string(), 8, labels.size());
  if (read_be32(images, 0) != kIdxImagesMagic) {
    throw IdxBadMagicError("bad magic number in image file " + images_path.string());
  }
  if (read_be32(labels, 0) != kIdxLabelsMagic) {
    throw IdxBadMagicError("bad magic number in label file " + labels_path.string());
  }
  const std::uintmax_t count = read_be32(images, 4);
  const std::uintmax_t rows = read_be32(images, 8);
  const std::uintmax_t cols = read_be32(images, 12);
  const std::uintmax_t label_count = read_be32(labels, 4);
  const std::uintmax_t image_bytes = 16 + count * rows * cols;
  if (images.size() < image_bytes) throw IdxTruncatedError(images_path.string(), image_bytes, images.size());
  if (labels.size() < 8 + label_count) throw IdxTruncatedError(labels_path.string(), 8 + label_count, labels.size());
  if (count != label_count) {
    throw IdxCountMismatchError("image count " + std::to_string(count) + " does not match label count " +
                                std::to_string(label_count));
  }

  Dataset data;
  data.one_hot_dim = 10;
  const auto pixels = static_cast<Eigen::Index>(rows * cols);
  data.inputs.resize(pixels, static_cast<Eigen::Index>(count));
  for (std::uintmax_t n = 0; n < count; ++n) {
    const std::size_t base = 16 + n * rows * cols;
    for (Eigen::Index p = 0; p < pixels; ++p) {
      data.inputs(p, static_cast<Eigen::Index>(n)) =
          static_cast<std::uint8_t>(images[base + static_cast<std::size_t>(p)]) / 255.0;
    }
  }
  data.labels.resize(count);
  for (std::uintmax_t n = 0; n < count; ++n) {
    const int y = static_cast<std::uint8_t>(labels[8 + n]);
    if (y > 9) throw IdxError("label " + std::to_string(y) + " out of range in " + labels_path.string());
    data.labels[n] = y;
  }
  return data;
}

void write_mnist_idx(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path,
                     std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
                     std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != labels.size() * rows * cols) throw ShapeError("pixel count does not match labels");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img) throw IoError("cannot write " + images_path.string());
  if (!lab) throw IoError("cannot write " + labels_path.string());
  put_be32(img, kIdxImagesMagic);
  put_be32(img, static_cast<std::uint32_t>(labels.size()));
  put_be32(img, rows);
  put_be32(img, cols);
  img.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  put_be32(lab, kIdxLabelsMagic);
  put_be32(lab, static_cast<std::uint32_t>(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!img || !lab) throw IoError("write failed for " + images_path.string());
}

Dataset binarize_unroll(const Dataset& data, std::span<const int> classes, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ShapeError("binarization threshold must lie in (0, 1)");
  if (data.is_sequence()) throw ShapeError("binarize_unroll expects flat image inputs");
  Dataset out;
  out.one_hot_dim = classes.size();
  out.symbol_dim = 2;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto it = std::ranges::find(classes, data.labels[n]);
    if (it == classes.end()) continue;
    OneHotSequence seq(static_cast<std::size_t>(data.inputs.rows()));
    const auto col = data.inputs.col(static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < seq.size(); ++p) {
      seq[p] = col(static_cast<Eigen::Index>(p)) >= threshold ? 1 : 0;
    }
    out.sequences.push_back(std::move(seq));
    out.labels.push_back(static_cast<int>(it - classes.begin()));
  }
  if (out.sequences.empty()) throw ShapeError("binarize_unroll: none of the requested classes are present");
  return out;
}

}  // namespace amcnet
