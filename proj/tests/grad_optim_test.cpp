#include <doctest.h>

#include <cmath>

#include "amcnet/errors.hpp"
#include "amcnet/grad.hpp"
#include "amcnet/init.hpp"

using namespace amcnet;

namespace {

double max_rel_error(const std::vector<double>& g, const std::vector<double>& fd) {
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max(std::abs(fd[i]), 1e-8));
  }
  return worst;
}

}  // namespace

TEST_CASE("backprop on a small mlp matches finite differences") {
  const auto spec = NetworkSpec::mlp({1, 4, 4, 1}, OutputHead::linear);
  const auto task = GridTask::make(TargetFunction::sine, 64);
  Rng rng(1);
  const auto x = init_params(spec, {InitScheme::gaussian, 0.8}, rng);
  const auto g = loss_gradient(spec, x, task);
  const auto fd = finite_difference_gradient([&](std::span<const double> p) { return mse_grid_loss(spec, p, task); }, x);
  CHECK(max_rel_error(g, fd) < 1e-5);

  std::vector<double> g2(x.size());
  CHECK(grid_loss_gradient(spec, x, task, g2) == doctest::Approx(mse_grid_loss(spec, x, task)).epsilon(1e-14));
  CHECK(g2 == g);
}

TEST_CASE("bptt on a length-8 sequence matches finite differences") {
  const auto spec = NetworkSpec::rnn(2, 4, 2, 2);
  Rng rng(2);
  Dataset d;
  d.symbol_dim = 2;
  d.one_hot_dim = 2;
  for (int k = 0; k < 4; ++k) {
    OneHotSequence s(8);
    for (auto& v : s) v = static_cast<std::uint8_t>(rng.below(2));
    d.sequences.push_back(s);
    d.labels.push_back(k % 2);
  }
  const auto x = init_params(spec, {InitScheme::gaussian, 0.6}, rng);
  const auto g = loss_gradient(spec, x, d);
  const auto fd =
      finite_difference_gradient([&](std::span<const double> p) { return evaluate_dataset(spec, p, d).loss; }, x);
  CHECK(max_rel_error(g, fd) < 1e-5);
}

TEST_CASE("gradient descent step") {
  GradConfig c;
  c.lr = 4.5e-2;
  SUBCASE("zero gradient") {
    std::vector<double> x{1, 2}, g{0, 0};
    gd_step(x, g, c);
    CHECK(x == std::vector<double>{1, 2});
  }
  SUBCASE("one dimension") {
    std::vector<double> x{1}, g{2};
    gd_step(x, g, c);
    CHECK(x[0] == doctest::Approx(0.91).epsilon(1e-15));
  }
  SUBCASE("clipping rescales to the threshold") {
    c.lr = 1.0;
    c.clip = 1.0;
    std::vector<double> x{0, 0}, g{6, 8};
    gd_step(x, g, c);
    CHECK(x[0] == doctest::Approx(-0.6));
    CHECK(x[1] == doctest::Approx(-0.8));
  }
}

TEST_CASE("clipping") {
  std::vector<double> g{6, 8};
  CHECK_FALSE(clip_gradient(g, 20.0));
  CHECK(g == std::vector<double>{6, 8});
  CHECK(clip_gradient(g, 1.0));
  CHECK(gradient_norm(g) == doctest::Approx(1.0));
  CHECK(g[0] / g[1] == doctest::Approx(0.75));
}

TEST_CASE("gradient norm") {
  CHECK(gradient_norm(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(gradient_norm(std::vector<double>{3, 4}) == 5.0);
}

TEST_CASE("adam") {
  GradConfig c;
  c.algorithm = GradAlgorithm::adam;
  c.lr = 1e-3;
  SUBCASE("zero gradient at step one") {
    std::vector<double> x{1, -1}, g{0, 0};
    AdamState s(2);
    adam_step(x, g, s, c);
    CHECK(x == std::vector<double>{1, -1});
  }
  SUBCASE("first step has size lr whatever the gradient scale") {
    for (double scale : {1e-6, 1.0, 1e6}) {
      std::vector<double> x{0}, g{scale};
      AdamState s(1);
      adam_step(x, g, s, c);
      CHECK(-x[0] == doctest::Approx(1e-3).epsilon(1e-5));
    }
  }
  SUBCASE("against a direct transcription on a quadratic") {
    // U = sum a_i x_i^2 / 2.
    const std::vector<double> a{1.0, 10.0, 0.1};
    std::vector<double> x{1, -2, 3}, xr = x, m(3, 0.0), v(3, 0.0);
    AdamState s(3);
    for (int t = 1; t <= 100; ++t) {
      std::vector<double> g(3);
      for (int i = 0; i < 3; ++i) g[i] = a[i] * x[i];
      adam_step(x, g, s, c);
      for (int i = 0; i < 3; ++i) {
        const double gi = a[i] * xr[i];
        m[i] = 0.9 * m[i] + 0.1 * gi;
        v[i] = 0.999 * v[i] + 0.001 * gi * gi;
        const double mh = m[i] / (1 - std::pow(0.9, t));
        const double vh = v[i] / (1 - std::pow(0.999, t));
        xr[i] -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
      }
    }
    for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - xr[i]) < 1e-10);
    CHECK(s.t == 100);
  }
}

TEST_CASE("grad config validation") {
  GradConfig c;
  CHECK_NOTHROW(c.validate());
  c.lr = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GradConfig{};
  c.clip = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
