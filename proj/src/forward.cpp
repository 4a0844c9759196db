#include "amcnet/forward.hpp"

#include <cmath>

#include "amcnet/errors.hpp"
#include "amcnet/kernels.hpp"
#include "internal.hpp"

namespace amcnet {

namespace detail {

Matrix block_weights(const Block& b, std::span<const double> params, std::size_t first_source,
                     std::size_t sources) {
  using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>,
                            0, Eigen::OuterStride<>>;
  RowMap map(params.data() + b.weight_offset + first_source, static_cast<Eigen::Index>(b.fan_out),
             static_cast<Eigen::Index>(sources), Eigen::OuterStride<>(static_cast<Eigen::Index>(b.fan_in)));
  return Matrix(map);
}

Vector block_bias(const Block& b, std::span<const double> params) {
  return Eigen::Map<const Vector>(params.data() + b.bias_offset, static_cast<Eigen::Index>(b.fan_out));
}

void accumulate_rows(const Matrix& a, std::span<double> sum_sq) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) s += a(i, c) * a(i, c);
    sum_sq[static_cast<std::size_t>(i)] += s;
  }
}

void check_finite(const Matrix& z, const char* where, std::size_t layer) {
  if (!z.allFinite()) throw NumericOverflowError(where, layer);
}

void tanh_matrix(Matrix& z) { tanh_inplace(std::span<double>(z.data(), static_cast<std::size_t>(z.size()))); }

}  // namespace detail

using namespace detail;

void softmax_columns(Matrix& logits) {
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    auto col = logits.col(c);
    const double m = col.maxCoeff();
    double total = 0.0;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      col(r) = std::exp(col(r) - m);
      total += col(r);
    }
    col /= total;
  }
}

Matrix mlp_forward_batch(const NetworkSpec& spec, std::span<const double> params,
                         const Matrix& inputs, ActivationTrace* trace, MlpCache* cache) {
  if (spec.kind() != NetworkKind::mlp) throw ShapeError("mlp_forward on a non-MLP network");
  if (params.size() != spec.param_count()) throw ShapeError("parameter vector length mismatch");
  if (static_cast<std::size_t>(inputs.rows()) != spec.input_size()) {
    throw ShapeError("input length does not match the network input size");
  }
  if (trace && trace->sum_sq.size() != spec.trace_size()) throw ShapeError("trace/network mismatch");

  const auto& blocks = spec.blocks();
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(blocks.size() + 1);
    cache->activations.push_back(inputs);
  }
  const auto batch = static_cast<std::uint64_t>(inputs.cols());
  Matrix a = inputs;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Block& b = blocks[k];
    if (trace) {
      accumulate_rows(a, std::span<double>(trace->sum_sq).subspan(b.trace_offset, b.fan_in));
      trace->calls[k] += batch;
    }
    Matrix z = block_weights(b, params, 0, b.fan_in) * a;
    z.colwise() += block_bias(b, params);
    check_finite(z, "mlp_forward", k + 1);
    if (k + 1 < blocks.size()) {
      tanh_matrix(z);
    } else if (spec.head() == OutputHead::softmax) {
      softmax_columns(z);
    }
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  if (trace) trace->n_data += batch;
  return a;
}

std::vector<double> mlp_forward(const NetworkSpec& spec, std::span<const double> params,
                                std::span<const double> input, ActivationTrace* trace) {
  const Matrix in = Eigen::Map<const Matrix>(input.data(), static_cast<Eigen::Index>(input.size()), 1);
  const Matrix out = mlp_forward_batch(spec, params, in, trace);
  return {out.data(), out.data() + out.size()};
}

Matrix rnn_forward_batch(const NetworkSpec& spec, std::span<const double> params,
                         std::span<const OneHotSequence> sequences, ActivationTrace* trace,
                         RnnCache* cache) {
  if (spec.kind() != NetworkKind::rnn) throw ShapeError("rnn_forward on a non-RNN network");
  if (params.size() != spec.param_count()) throw ShapeError("parameter vector length mismatch");
  if (sequences.empty()) throw ShapeError("rnn_forward needs at least one sequence");
  if (trace && trace->sum_sq.size() != spec.trace_size()) throw ShapeError("trace/network mismatch");

  const std::size_t length = sequences.front().size();
  const std::size_t input_dim = spec.input_size();
  for (const auto& s : sequences) {
    if (s.size() != length) throw ShapeError("sequences in one batch must have equal length");
    for (auto sym : s) {
      if (sym >= input_dim) throw ShapeError("one-hot index exceeds the input dimension");
    }
  }

  const std::size_t hidden = spec.rnn_hidden();
  const std::size_t layers = spec.rnn_layers();
  const auto batch = static_cast<Eigen::Index>(sequences.size());
  const auto& blocks = spec.blocks();

  std::vector<Matrix> w_in(layers), w_rec(layers);
  std::vector<Vector> bias(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const Block& b = blocks[l];
    w_in[l] = block_weights(b, params, 0, b.cell_input);
    w_rec[l] = block_weights(b, params, b.cell_input, hidden);
    bias[l] = block_bias(b, params);
  }
  // Input weights plus bias per one-hot symbol, so the first layer's input
  // term is a column lookup.
  const Matrix symbol_drive = w_in[0].colwise() + bias[0];

  std::vector<Matrix> h(layers, Matrix::Zero(static_cast<Eigen::Index>(hidden), batch));
  if (cache) {
    cache->hidden.assign(layers, {});
    for (auto& per_layer : cache->hidden) {
      per_layer.reserve(length + 1);
      per_layer.push_back(Matrix::Zero(static_cast<Eigen::Index>(hidden), batch));
    }
  }

  Matrix z(static_cast<Eigen::Index>(hidden), batch);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t l = 0; l < layers; ++l) {
      const Block& b = blocks[l];
      if (trace) {
        auto sums = std::span<double>(trace->sum_sq).subspan(b.trace_offset, b.fan_in);
        if (l == 0) {
          for (const auto& s : sequences) sums[s[t]] += 1.0;
        } else {
          accumulate_rows(h[l - 1], sums.subspan(0, b.cell_input));
        }
        accumulate_rows(h[l], sums.subspan(b.cell_input, hidden));
        trace->calls[l] += static_cast<std::uint64_t>(batch);
      }
      z.noalias() = w_rec[l] * h[l];
      if (l == 0) {
        for (Eigen::Index c = 0; c < batch; ++c) {
          z.col(c) += symbol_drive.col(sequences[static_cast<std::size_t>(c)][t]);
        }
      } else {
        z.noalias() += w_in[l] * h[l - 1];
        z.colwise() += bias[l];
      }
      check_finite(z, "rnn_forward", l + 1);
      tanh_matrix(z);
      h[l].swap(z);
      if (cache) cache->hidden[l].push_back(h[l]);
    }
  }

  const Block& readout = blocks.back();
  if (trace) {
    accumulate_rows(h.back(), std::span<double>(trace->sum_sq).subspan(readout.trace_offset, hidden));
    trace->calls.back() += static_cast<std::uint64_t>(batch);
    trace->n_data += static_cast<std::uint64_t>(batch);
  }
  Matrix logits = block_weights(readout, params, 0, hidden) * h.back();
  logits.colwise() += block_bias(readout, params);
  check_finite(logits, "rnn_forward", layers + 1);
  return logits;
}

std::vector<double> rnn_forward(const NetworkSpec& spec, std::span<const double> params,
                                const OneHotSequence& sequence, ActivationTrace* trace) {
  const Matrix out = rnn_forward_batch(spec, params, std::span<const OneHotSequence>(&sequence, 1), trace);
  return {out.data(), out.data() + out.size()};
}

}  // namespace amcnet
