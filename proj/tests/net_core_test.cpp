#include <doctest.h>

#include <cmath>

#include "amcnet/errors.hpp"
#include "amcnet/forward.hpp"
#include "amcnet/init.hpp"
#include "amcnet/network.hpp"
#include "amcnet/rng.hpp"

using namespace amcnet;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Straight per-sample recurrence read through the public layout.
std::vector<double> reference_rnn(const NetworkSpec& spec, const ParamVector& p, const OneHotSequence& seq) {
  const std::size_t h = spec.rnn_hidden(), layers = spec.rnn_layers(), in = spec.input_size();
  std::vector<std::vector<double>> state(layers, std::vector<double>(h, 0.0));
  auto w = [&](std::size_t block, std::size_t dest, std::size_t src) {
    return p[spec.index_of({ParamRole::weight, block, dest, src})];
  };
  auto b = [&](std::size_t block, std::size_t dest) { return p[spec.index_of({ParamRole::bias, block, dest, {}})]; };
  for (auto sym : seq) {
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t cell_in = l == 0 ? in : h;
      std::vector<double> next(h);
      for (std::size_t j = 0; j < h; ++j) {
        double z = b(l, j);
        if (l == 0) {
          z += w(l, j, sym);
        } else {
          for (std::size_t k = 0; k < h; ++k) z += w(l, j, k) * state[l - 1][k];
        }
        for (std::size_t k = 0; k < h; ++k) z += w(l, j, cell_in + k) * state[l][k];
        next[j] = std::tanh(z);
      }
      state[l] = next;
    }
  }
  std::vector<double> out(spec.output_size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = b(layers, c);
    for (std::size_t k = 0; k < h; ++k) out[c] += w(layers, c, k) * state.back()[k];
  }
  return out;
}

}  // namespace

TEST_CASE("layout of the grid-task mlp") {
  const auto spec = NetworkSpec::mlp({1, 10, 10, 1}, OutputHead::linear);
  CHECK(spec.param_count() == 141);
  CHECK(NetworkSpec::mlp({784, 16, 16, 10}, OutputHead::softmax).param_count() == 13002);
  for (std::size_t i = 0; i < spec.param_count(); ++i) CHECK(spec.index_of(spec.slot(i)) == i);
  CHECK(spec.slot(spec.blocks()[1].bias_offset).role == ParamRole::bias);
}

TEST_CASE("rnn layout counts input, recurrent and readout weights") {
  const auto spec = NetworkSpec::rnn(2, 64, 2, 2);
  const std::size_t expected = (2 + 64 + 1) * 64 + (64 + 64 + 1) * 64 + (64 + 1) * 2;
  CHECK(spec.param_count() == expected);
  CHECK(spec.blocks().size() == 3);
  CHECK(spec.blocks()[0].recurrent);
  CHECK_FALSE(spec.blocks()[2].recurrent);
}

TEST_CASE("spec json round trip") {
  const auto spec = NetworkSpec::rnn(2, 5, 2, 3);
  CHECK(NetworkSpec::from_json(spec.to_json()) == spec);
  const auto mlp = NetworkSpec::mlp({3, 4, 2}, OutputHead::softmax);
  CHECK(NetworkSpec::from_json(mlp.to_json()) == mlp);
}

TEST_CASE("gaussian init") {
  const auto spec = NetworkSpec::mlp({784, 16, 16, 10}, OutputHead::softmax);
  Rng rng(1);
  SUBCASE("zero width gives zeros") {
    for (double x : init_params(spec, {InitScheme::gaussian, 0.0}, rng)) CHECK(x == 0.0);
  }
  SUBCASE("moments") {
    const auto x = init_params(spec, {InitScheme::gaussian, 0.01}, rng);
    REQUIRE(x.size() == 13002);
    CHECK(std::abs(mean_of(x)) < 4 * 0.01 / std::sqrt(13002.0));
    CHECK(variance_of(x) == doctest::Approx(1e-4).epsilon(0.1));
  }
}

TEST_CASE("kaiming init scales with fan-in") {
  const auto spec = NetworkSpec::mlp({1, 4, 1}, OutputHead::linear);
  Rng rng(2);
  std::vector<double> first, second;
  for (int r = 0; r < 10000; ++r) {
    const auto x = init_params(spec, {InitScheme::kaiming, 0.0}, rng);
    for (std::size_t i = 0; i < 4; ++i) first.push_back(x[spec.blocks()[0].weight_offset + i]);
    for (std::size_t i = 0; i < 4; ++i) second.push_back(x[spec.blocks()[1].weight_offset + i]);
  }
  // U(-a, a) with a = fan_in^-1/2 has variance 1 / (3 fan_in).
  CHECK(variance_of(first) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
  CHECK(variance_of(second) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("mlp forward on degenerate parameters") {
  SUBCASE("softmax of zero logits is uniform") {
    const auto spec = NetworkSpec::mlp({5, 7, 10}, OutputHead::softmax);
    const ParamVector zero(spec.param_count(), 0.0);
    const std::vector<double> in{0.3, -1, 2, 0, 5};
    for (double p : mlp_forward(spec, zero, in)) CHECK(p == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("linear head with zero params outputs 0") {
    const auto spec = NetworkSpec::mlp({1, 10, 10, 1}, OutputHead::linear);
    const ParamVector zero(spec.param_count(), 0.0);
    const std::vector<double> in{0.7};
    CHECK(mlp_forward(spec, zero, in)[0] == 0.0);
  }
  SUBCASE("single tanh neuron") {
    const auto spec = NetworkSpec::mlp({1, 1, 1}, OutputHead::linear);
    const ParamVector p{1.0, 0.0, 1.0, 0.0};
    const std::vector<double> in{0.5};
    CHECK(mlp_forward(spec, p, in)[0] == doctest::Approx(0.46211715726000974).epsilon(1e-14));
  }
}

TEST_CASE("batched and single-example forward agree") {
  const auto spec = NetworkSpec::mlp({3, 9, 9, 4}, OutputHead::softmax);
  Rng rng(3);
  const auto p = init_params(spec, {InitScheme::kaiming, 0.0}, rng);
  Matrix in(3, 17);
  for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = rng.normal();
  const Matrix out = mlp_forward_batch(spec, p, in);
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    const Vector col = in.col(c);
    const auto single = mlp_forward(spec, p, std::span<const double>(col.data(), 3));
    for (std::size_t k = 0; k < 4; ++k) CHECK(single[k] == doctest::Approx(out(k, c)).epsilon(1e-14));
    CHECK(out.col(c).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("activation trace holds squared source outputs") {
  const auto spec = NetworkSpec::mlp({2, 3, 1}, OutputHead::linear);
  const ParamVector zero(spec.param_count(), 0.0);
  Matrix in(2, 2);
  in << 1, 3, -2, 0.5;
  auto trace = ActivationTrace::for_network(spec);
  mlp_forward_batch(spec, zero, in, &trace);
  CHECK(trace.n_data == 2);
  CHECK(trace.calls[0] == 2);
  CHECK(trace.sum_sq[0] == doctest::Approx(10.0));
  CHECK(trace.sum_sq[1] == doctest::Approx(4.25));
  // Hidden outputs are tanh(0) = 0.
  for (std::size_t k = 0; k < 3; ++k) CHECK(trace.sum_sq[spec.blocks()[1].trace_offset + k] == 0.0);
}

TEST_CASE("non-finite pre-activation names the layer") {
  const auto spec = NetworkSpec::mlp({1, 2, 1}, OutputHead::linear);
  ParamVector p(spec.param_count(), 1.0);
  p[0] = std::numeric_limits<double>::infinity();
  const std::vector<double> in{1.0};
  CHECK_THROWS_AS(mlp_forward(spec, p, in), NumericOverflowError);
}

TEST_CASE("rnn forward") {
  SUBCASE("zero params give zero logits") {
    const auto spec = NetworkSpec::rnn(2, 6, 2, 2);
    const ParamVector zero(spec.param_count(), 0.0);
    const OneHotSequence seq{0, 1, 1, 0, 1};
    for (double v : rnn_forward(spec, zero, seq)) CHECK(v == 0.0);
  }
  SUBCASE("length one matches a one-hidden-layer mlp") {
    const auto rnn = NetworkSpec::rnn(2, 5, 1, 3);
    const auto mlp = NetworkSpec::mlp({2, 5, 3}, OutputHead::linear);
    Rng rng(4);
    const auto pr = init_params(rnn, {InitScheme::gaussian, 0.7}, rng);
    ParamVector pm(mlp.param_count());
    for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = pr[rnn.index_of(mlp.slot(i))];
    for (std::uint8_t sym : {0, 1}) {
      const std::vector<double> onehot{sym == 0 ? 1.0 : 0.0, sym == 1 ? 1.0 : 0.0};
      const auto a = rnn_forward(rnn, pr, OneHotSequence{sym});
      const auto b = mlp_forward(mlp, pm, onehot);
      for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-14));
    }
  }
  SUBCASE("784 sites against the plain recurrence") {
    const auto spec = NetworkSpec::rnn(2, 16, 2, 2);
    Rng rng(5);
    const auto p = init_params(spec, {InitScheme::kaiming, 0.0}, rng);
    std::vector<OneHotSequence> seqs(3, OneHotSequence(784));
    for (auto& s : seqs) {
      for (auto& v : s) v = static_cast<std::uint8_t>(rng.below(4) == 0);
    }
    const Matrix out = rnn_forward_batch(spec, p, seqs);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const auto ref = reference_rnn(spec, p, seqs[i]);
      for (std::size_t c = 0; c < 2; ++c) {
        CHECK(std::abs(out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) - ref[c]) <=
              1e-12 * std::max(1.0, std::abs(ref[c])));
      }
    }
  }
}

TEST_CASE("rnn trace counts every site") {
  const auto spec = NetworkSpec::rnn(2, 3, 2, 2);
  const ParamVector zero(spec.param_count(), 0.0);
  std::vector<OneHotSequence> seqs{{1, 1, 0, 1}, {0, 0, 0, 1}};
  auto trace = ActivationTrace::for_network(spec);
  rnn_forward_batch(spec, zero, seqs, &trace);
  CHECK(trace.calls[0] == 8);
  CHECK(trace.calls[1] == 8);
  CHECK(trace.calls[2] == 2);
  // Symbol 1 occurs four times over both sequences.
  CHECK(trace.sum_sq[spec.blocks()[0].trace_offset + 1] == 4.0);
}
