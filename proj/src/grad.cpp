#include "amcnet/grad.hpp"

#include <algorithm>
#include <cmath>

#include "amcnet/errors.hpp"
#include "internal.hpp"

namespace amcnet {

using namespace detail;

void GradConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  if (!(delta > 0.0)) throw ConfigError("adam delta must be positive");
  if (clip && !(*clip > 0.0)) throw ConfigError("clip threshold must be positive");
}

std::string to_string(GradAlgorithm a) { return a == GradAlgorithm::gd ? "gd" : "adam"; }

namespace {

constexpr std::size_t kRnnGradientChunk = 128;

void require_size(std::span<const double> params, std::span<double> grad, const NetworkSpec& spec) {
  if (params.size() != spec.param_count() || grad.size() != spec.param_count()) {
    throw ShapeError("gradient/parameter length mismatch");
  }
}

/// grad[W(:, first_source .. first_source + cols)] += dw.
void scatter_weights(const Block& b, const Matrix& dw, std::size_t first_source, std::span<double> grad) {
  for (Eigen::Index j = 0; j < dw.rows(); ++j) {
    double* row = grad.data() + b.weight_offset + static_cast<std::size_t>(j) * b.fan_in + first_source;
    for (Eigen::Index s = 0; s < dw.cols(); ++s) row[s] += dw(j, s);
  }
}

void scatter_bias(const Block& b, const Matrix& dz, std::span<double> grad) {
  for (Eigen::Index j = 0; j < dz.rows(); ++j) grad[b.bias_offset + static_cast<std::size_t>(j)] += dz.row(j).sum();
}

/// Backpropagate dz (gradient w.r.t. the last block's pre-activation)
/// through a cached MLP forward pass, accumulating into grad.
void mlp_backprop(const NetworkSpec& spec, std::span<const double> params, const MlpCache& cache,
                  Matrix dz, std::span<double> grad) {
  const auto& blocks = spec.blocks();
  for (std::size_t k = blocks.size(); k-- > 0;) {
    const Block& b = blocks[k];
    const Matrix& a_prev = cache.activations[k];
    scatter_weights(b, dz * a_prev.transpose(), 0, grad);
    scatter_bias(b, dz, grad);
    if (k > 0) {
      Matrix da = block_weights(b, params, 0, b.fan_in).transpose() * dz;
      dz = da.array() * (1.0 - a_prev.array().square());
    }
  }
}

/// Gradient of the classifier losses w.r.t. the output pre-activations,
/// scaled by 1/total so chunked evaluations add up.
Matrix classifier_delta(OutputHead head, const Matrix& out, std::span<const int> labels, double total) {
  Matrix dz(out.rows(), out.cols());
  if (head == OutputHead::softmax) {
    // out holds probabilities; loss is the per-example sum of squared errors.
    for (Eigen::Index n = 0; n < out.cols(); ++n) {
      Vector dp = 2.0 * out.col(n);
      dp(labels[static_cast<std::size_t>(n)]) -= 2.0;
      const double s = out.col(n).dot(dp);
      dz.col(n) = out.col(n).array() * (dp.array() - s);
    }
  } else {
    dz = out;
    softmax_columns(dz);
    for (Eigen::Index n = 0; n < out.cols(); ++n) dz(labels[static_cast<std::size_t>(n)], n) -= 1.0;
  }
  return dz / total;
}

void rnn_backprop(const NetworkSpec& spec, std::span<const double> params,
                  std::span<const OneHotSequence> sequences, const RnnCache& cache, const Matrix& dlogits,
                  std::span<double> grad) {
  const auto& blocks = spec.blocks();
  const std::size_t layers = spec.rnn_layers();
  const std::size_t hidden = spec.rnn_hidden();
  const std::size_t length = sequences.front().size();
  const auto batch = dlogits.cols();
  const auto h_rows = static_cast<Eigen::Index>(hidden);

  const Block& readout = blocks.back();
  const Matrix& top_final = cache.hidden[layers - 1][length];
  scatter_weights(readout, dlogits * top_final.transpose(), 0, grad);
  scatter_bias(readout, dlogits, grad);

  std::vector<Matrix> w_in(layers), w_rec(layers), dw_in(layers), dw_rec(layers);
  std::vector<Vector> db(layers);
  std::vector<Matrix> dh(layers, Matrix::Zero(h_rows, batch));
  for (std::size_t l = 0; l < layers; ++l) {
    const Block& b = blocks[l];
    w_in[l] = block_weights(b, params, 0, b.cell_input);
    w_rec[l] = block_weights(b, params, b.cell_input, hidden);
    dw_in[l] = Matrix::Zero(h_rows, static_cast<Eigen::Index>(b.cell_input));
    dw_rec[l] = Matrix::Zero(h_rows, h_rows);
    db[l] = Vector::Zero(h_rows);
  }
  dh[layers - 1] = block_weights(readout, params, 0, hidden).transpose() * dlogits;

  Matrix dz(h_rows, batch);
  for (std::size_t t = length; t >= 1; --t) {
    for (std::size_t l = layers; l-- > 0;) {
      const Matrix& h = cache.hidden[l][t];
      dz = dh[l].array() * (1.0 - h.array().square());
      dw_rec[l].noalias() += dz * cache.hidden[l][t - 1].transpose();
      db[l] += dz.rowwise().sum();
      if (l == 0) {
        for (Eigen::Index c = 0; c < batch; ++c) {
          dw_in[0].col(sequences[static_cast<std::size_t>(c)][t - 1]) += dz.col(c);
        }
      } else {
        dw_in[l].noalias() += dz * cache.hidden[l - 1][t].transpose();
        dh[l - 1].noalias() += w_in[l].transpose() * dz;
      }
      dh[l].noalias() = w_rec[l].transpose() * dz;
    }
  }

  for (std::size_t l = 0; l < layers; ++l) {
    const Block& b = blocks[l];
    scatter_weights(b, dw_in[l], 0, grad);
    scatter_weights(b, dw_rec[l], b.cell_input, grad);
    for (std::size_t j = 0; j < hidden; ++j) grad[b.bias_offset + j] += db[l](static_cast<Eigen::Index>(j));
  }
}

}  // namespace

double grid_loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                          const GridTask& task, std::span<double> grad) {
  require_size(params, grad, spec);
  if (spec.kind() != NetworkKind::mlp || spec.head() != OutputHead::linear || spec.output_size() != 1) {
    throw ShapeError("grid_loss_gradient needs a 1-output MLP with a linear head");
  }
  std::ranges::fill(grad, 0.0);
  MlpCache cache;
  const Matrix out = mlp_forward_batch(spec, params, task.grid, nullptr, &cache);
  const double k = static_cast<double>(task.size());
  Matrix dz(1, out.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double d = out(0, c) - task.targets[static_cast<std::size_t>(c)];
    loss += d * d;
    dz(0, c) = 2.0 * d / k;
  }
  mlp_backprop(spec, params, cache, std::move(dz), grad);
  return loss / k;
}

double dataset_loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                             const Dataset& data, std::span<double> grad) {
  require_size(params, grad, spec);
  if (data.size() == 0) throw ShapeError("empty dataset");
  if (spec.output_size() != data.one_hot_dim) throw ShapeError("network outputs do not match the class count");
  if (spec.head() == OutputHead::linear) throw ShapeError("dataset_loss_gradient needs a classifier head");
  std::ranges::fill(grad, 0.0);
  const double total = static_cast<double>(data.size());

  if (spec.kind() == NetworkKind::mlp) {
    MlpCache cache;
    const Matrix out = mlp_forward_batch(spec, params, data.inputs, nullptr, &cache);
    const double loss = spec.head() == OutputHead::softmax ? mse_onehot_from_outputs(out, data.labels)
                                                           : cross_entropy_from_logits(out, data.labels);
    mlp_backprop(spec, params, cache, classifier_delta(spec.head(), out, data.labels, total), grad);
    return loss;
  }

  // Chunked to bound the memory of the unrolled hidden states.
  double loss = 0.0;
  RnnCache cache;
  for (std::size_t begin = 0; begin < data.size(); begin += kRnnGradientChunk) {
    const std::size_t end = std::min(data.size(), begin + kRnnGradientChunk);
    const std::span<const OneHotSequence> seqs(data.sequences.data() + begin, end - begin);
    const std::span<const int> labels(data.labels.data() + begin, end - begin);
    const Matrix logits = rnn_forward_batch(spec, params, seqs, nullptr, &cache);
    loss += cross_entropy_from_logits(logits, labels) * static_cast<double>(end - begin);
    rnn_backprop(spec, params, seqs, cache, classifier_delta(spec.head(), logits, labels, total), grad);
  }
  return loss / total;
}

std::vector<double> loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                                  const GridTask& task) {
  std::vector<double> g(spec.param_count());
  grid_loss_gradient(spec, params, task, g);
  return g;
}

std::vector<double> loss_gradient(const NetworkSpec& spec, std::span<const double> params,
                                  const Dataset& data) {
  std::vector<double> g(spec.param_count());
  dataset_loss_gradient(spec, params, data, g);
  return g;
}

double gradient_norm(std::span<const double> grad) {
  double s = 0.0;
  for (double g : grad) s += g * g;
  return std::sqrt(s);
}

double gradient_norm(const NetworkSpec& spec, std::span<const double> params, const GridTask& task) {
  return gradient_norm(loss_gradient(spec, params, task));
}

double gradient_norm(const NetworkSpec& spec, std::span<const double> params, const Dataset& data) {
  return gradient_norm(loss_gradient(spec, params, data));
}

bool clip_gradient(std::span<double> grad, double threshold) {
  const double norm = gradient_norm(grad);
  if (!(norm > threshold)) return false;
  const double scale = threshold / norm;
  for (double& g : grad) g *= scale;
  return true;
}

void gd_step(std::span<double> params, std::span<double> grad, const GradConfig& config) {
  if (params.size() != grad.size()) throw ShapeError("gradient/parameter length mismatch");
  if (config.clip) clip_gradient(grad, *config.clip);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.lr * grad[i];
}

void adam_step(std::span<double> params, std::span<double> grad, AdamState& state,
               const GradConfig& config) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam state/parameter length mismatch");
  }
  if (config.clip) clip_gradient(grad, *config.clip);
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.delta);
  }
}

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& loss, std::span<const double> x) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    const double up = x[i] + h;
    const double down = x[i] - h;
    probe[i] = up;
    const double f_up = loss(probe);
    probe[i] = down;
    const double f_down = loss(probe);
    probe[i] = x[i];
    g[i] = (f_up - f_down) / (up - down);
  }
  return g;
}

}  // namespace amcnet
