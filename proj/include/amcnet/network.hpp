#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace amcnet {

/// Flat, ordered array of every weight and bias of a network.
using ParamVector = std::vector<double>;

enum class NetworkKind { mlp, rnn };
enum class OutputHead { linear, softmax, linear_classifier };
enum class ParamRole { weight, bias };

/// A group of neurons that share one set of source neurons.
///
/// For an MLP this is a dense layer. For the RNN it is one recurrent cell,
/// whose sources are the cell input followed by its own previous hidden
/// state, or the readout. Weights are stored row-major (one row per
/// destination neuron), followed by the biases.
struct Block {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  /// Offset of this block's sources in ActivationTrace::sum_sq.
  std::size_t trace_offset = 0;
  /// Width of the external input to a recurrent cell; 0 for dense blocks.
  std::size_t cell_input = 0;
  bool recurrent = false;
};

/// Location of one parameter in the network.
struct ParamSlot {
  ParamRole role = ParamRole::weight;
  std::size_t block = 0;
  std::size_t dest = 0;
  /// Source neuron within the block's source list; empty for biases.
  std::optional<std::size_t> source;

  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

/// Architecture description plus its parameter layout.
class NetworkSpec {
 public:
  /// Fully connected net: layer_sizes = {input, hidden..., output}; every
  /// hidden neuron uses tanh.
  static NetworkSpec mlp(std::vector<std::size_t> layer_sizes, OutputHead head);

  /// Stacked simple tanh RNN over one-hot sequences, final hidden state of
  /// the top layer fed to a linear classifier.
  static NetworkSpec rnn(std::size_t input_dim, std::size_t hidden, std::size_t layers,
                         std::size_t classes);

  NetworkKind kind() const { return kind_; }
  OutputHead head() const { return head_; }
  /// MLP: {input, hidden..., output}; RNN: {input dim, hidden, layers, classes}.
  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::size_t param_count() const { return param_count_; }
  std::size_t input_size() const { return layer_sizes_.front(); }
  std::size_t output_size() const;
  std::size_t trace_size() const { return trace_size_; }

  std::size_t rnn_hidden() const { return layer_sizes_.at(1); }
  std::size_t rnn_layers() const { return layer_sizes_.at(2); }

  ParamSlot slot(std::size_t index) const;
  std::size_t index_of(const ParamSlot& slot) const;

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
    return a.kind_ == b.kind_ && a.head_ == b.head_ && a.layer_sizes_ == b.layer_sizes_;
  }

 private:
  NetworkSpec() = default;
  void add_block(std::size_t fan_in, std::size_t fan_out, std::size_t cell_input,
                 bool recurrent);

  NetworkKind kind_ = NetworkKind::mlp;
  OutputHead head_ = OutputHead::linear;
  std::vector<std::size_t> layer_sizes_;
  std::vector<Block> blocks_;
  std::size_t param_count_ = 0;
  std::size_t trace_size_ = 0;
};

/// Per-source accumulator of sum over evaluations of squared neuron outputs.
///
/// sum_sq holds one entry per (block, source) pair, so a neuron that feeds
/// two blocks (e.g. an RNN hidden unit feeding its own cell and the cell
/// above) is tracked separately for each. calls counts, per block, how many
/// times the block's pre-activations were computed; n_data counts network
/// evaluations.
struct ActivationTrace {
  std::vector<double> sum_sq;
  std::vector<std::uint64_t> calls;
  std::uint64_t n_data = 0;

  static ActivationTrace for_network(const NetworkSpec& spec);
  void reset();
};

std::string to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& s);

}  // namespace amcnet
