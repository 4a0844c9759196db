#include "amcnet/network.hpp"

#include <algorithm>

#include "amcnet/errors.hpp"

namespace amcnet {

NetworkSpec NetworkSpec::mlp(std::vector<std::size_t> layer_sizes, OutputHead head) {
  if (layer_sizes.size() < 2) throw ShapeError("mlp needs at least input and output layers");
  if (std::ranges::any_of(layer_sizes, [](std::size_t s) { return s == 0; })) {
    throw ShapeError("mlp layer sizes must be positive");
  }
  NetworkSpec spec;
  spec.kind_ = NetworkKind::mlp;
  spec.head_ = head;
  spec.layer_sizes_ = std::move(layer_sizes);
  for (std::size_t l = 1; l < spec.layer_sizes_.size(); ++l) {
    spec.add_block(spec.layer_sizes_[l - 1], spec.layer_sizes_[l], 0, false);
  }
  return spec;
}

NetworkSpec NetworkSpec::rnn(std::size_t input_dim, std::size_t hidden, std::size_t layers,
                             std::size_t classes) {
  if (input_dim == 0 || hidden == 0 || layers == 0 || classes == 0) {
    throw ShapeError("rnn dimensions must be positive");
  }
  NetworkSpec spec;
  spec.kind_ = NetworkKind::rnn;
  spec.head_ = OutputHead::linear_classifier;
  spec.layer_sizes_ = {input_dim, hidden, layers, classes};
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t cell_input = l == 0 ? input_dim : hidden;
    spec.add_block(cell_input + hidden, hidden, cell_input, true);
  }
  spec.add_block(hidden, classes, 0, false);
  return spec;
}

void NetworkSpec::add_block(std::size_t fan_in, std::size_t fan_out, std::size_t cell_input,
                            bool recurrent) {
  Block b;
  b.fan_in = fan_in;
  b.fan_out = fan_out;
  b.weight_offset = param_count_;
  b.bias_offset = param_count_ + fan_in * fan_out;
  b.trace_offset = trace_size_;
  b.cell_input = cell_input;
  b.recurrent = recurrent;
  param_count_ += (fan_in + 1) * fan_out;
  trace_size_ += fan_in;
  blocks_.push_back(b);
}

std::size_t NetworkSpec::output_size() const {
  return kind_ == NetworkKind::mlp ? layer_sizes_.back() : layer_sizes_.at(3);
}

ParamSlot NetworkSpec::slot(std::size_t index) const {
  if (index >= param_count_) throw ShapeError("parameter index out of range");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    if (index >= b.bias_offset + b.fan_out) continue;
    if (index >= b.bias_offset) return {ParamRole::bias, k, index - b.bias_offset, std::nullopt};
    const std::size_t local = index - b.weight_offset;
    return {ParamRole::weight, k, local / b.fan_in, local % b.fan_in};
  }
  throw ShapeError("parameter index not covered by layout");
}

std::size_t NetworkSpec::index_of(const ParamSlot& s) const {
  if (s.block >= blocks_.size()) throw ShapeError("block out of range");
  const Block& b = blocks_[s.block];
  if (s.dest >= b.fan_out) throw ShapeError("destination neuron out of range");
  if (s.role == ParamRole::bias) {
    if (s.source) throw ShapeError("bias slot must not name a source");
    return b.bias_offset + s.dest;
  }
  if (!s.source || *s.source >= b.fan_in) throw ShapeError("weight slot source out of range");
  return b.weight_offset + s.dest * b.fan_in + *s.source;
}

std::string to_string(OutputHead head) {
  switch (head) {
    case OutputHead::linear: return "linear";
    case OutputHead::softmax: return "softmax";
    case OutputHead::linear_classifier: return "linear-classifier";
  }
  return "?";
}

OutputHead output_head_from_string(const std::string& s) {
  if (s == "linear") return OutputHead::linear;
  if (s == "softmax") return OutputHead::softmax;
  if (s == "linear-classifier") return OutputHead::linear_classifier;
  throw ConfigError("unknown output head '" + s + "'");
}

nlohmann::json NetworkSpec::to_json() const {
  return {{"kind", kind_ == NetworkKind::mlp ? "mlp" : "rnn"},
          {"layer_sizes", layer_sizes_},
          {"hidden_activation", "tanh"},
          {"output_head", to_string(head_)},
          {"param_count", param_count_}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  if (j.contains("hidden_activation") && j.at("hidden_activation") != "tanh") {
    throw ConfigError("only tanh hidden activations are supported");
  }
  if (kind == "mlp") return mlp(sizes, output_head_from_string(j.at("output_head")));
  if (kind == "rnn") {
    if (sizes.size() != 4) throw ConfigError("rnn layer_sizes must be {input, hidden, layers, classes}");
    return rnn(sizes[0], sizes[1], sizes[2], sizes[3]);
  }
  throw ConfigError("unknown network kind '" + kind + "'");
}

ActivationTrace ActivationTrace::for_network(const NetworkSpec& spec) {
  ActivationTrace t;
  t.sum_sq.assign(spec.trace_size(), 0.0);
  t.calls.assign(spec.blocks().size(), 0);
  return t;
}

void ActivationTrace::reset() {
  std::ranges::fill(sum_sq, 0.0);
  std::ranges::fill(calls, 0);
  n_data = 0;
}

}  // namespace amcnet
