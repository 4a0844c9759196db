#include <doctest.h>

#include <cmath>

#include "amcnet/errors.hpp"
#include "amcnet/init.hpp"
#include "amcnet/mc.hpp"

using namespace amcnet;

namespace {

// Every proposal scores worse than the one before.
class Uphill final : public Objective {
 public:
  std::size_t dimension() const override { return 3; }
  Evaluation evaluate(std::span<const double>, ActivationTrace*) override { return {calls_++ * 1.0, {}}; }
  int calls() const { return calls_; }

 private:
  int calls_ = 0;
};

// Every proposal scores better; optionally re-selects data each step.
class Downhill final : public Objective {
 public:
  explicit Downhill(bool minibatch) : minibatch_(minibatch) {}
  std::size_t dimension() const override { return 3; }
  Evaluation evaluate(std::span<const double>, ActivationTrace*) override { return {-1.0 * calls_++, {}}; }
  bool select_data(Rng&) override { return minibatch_; }
  int calls() const { return calls_; }

 private:
  bool minibatch_;
  int calls_ = 0;
};

double variance_of(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("proposal") {
  Rng rng(1);
  AmcConfig c;
  SUBCASE("zero sigma leaves params unchanged") {
    c.sigma0 = 1.0;
    AmcState s = AmcState::initial(c, 4);
    s.sigma = 0.0;
    const std::vector<double> x{1, -2, 3, 0.5};
    std::vector<double> out(4);
    propose(x, s, rng, out);
    CHECK(out == x);
  }
  SUBCASE("zero lambda freezes a parameter") {
    AmcState s = AmcState::initial(c, 3);
    s.sigma = 0.5;
    s.lambda[1] = 0.0;
    const std::vector<double> x{0, 7, 0};
    std::vector<double> out(3);
    const auto eps = propose(x, s, rng, out);
    CHECK(eps[1] == 0.0);
    CHECK(out[1] == 7.0);
    CHECK(eps[0] != 0.0);
  }
  SUBCASE("variance is sigma^2") {
    c.sigma0 = 1e-3;
    AmcState s = AmcState::initial(c, 10000);
    const std::vector<double> x(10000, 0.0);
    std::vector<double> out(10000);
    const auto eps = propose(x, s, rng, out);
    CHECK(variance_of(eps) == doctest::Approx(1e-6).epsilon(0.05));
  }
  SUBCASE("shape mismatch") {
    AmcState s = AmcState::initial(c, 2);
    const std::vector<double> x(3, 0.0);
    std::vector<double> out(3);
    CHECK_THROWS_AS(propose(x, s, rng, out), ShapeError);
  }
}

TEST_CASE("acceptance rule") {
  Rng rng(2);
  const Rng before = rng;
  CHECK(metropolis_accept(-0.1, 0.0, rng));
  CHECK(metropolis_accept(0.0, 0.0, rng));
  CHECK_FALSE(metropolis_accept(0.1, 0.0, rng));
  CHECK(rng == before);

  int accepted = 0;
  for (int i = 0; i < 100000; ++i) accepted += metropolis_accept(0.1, 0.1, rng);
  CHECK(accepted / 1e5 == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("mu follows accepted moves") {
  Downhill obj(false);
  Rng rng(3);
  SUBCASE("epsilon = 0 keeps mu at zero") {
    const AmcConfig c = AmcConfig::metropolis(0.1);
    std::vector<double> x(3, 0.0);
    AmcState s = AmcState::initial(c, 3);
    for (int i = 0; i < 5; ++i) REQUIRE(amc_step(x, s, c, obj, rng).accepted);
    for (double m : s.mu) CHECK(m == 0.0);
  }
  SUBCASE("one accepted move sets mu = epsilon * move") {
    AmcConfig c;
    c.sigma0 = 0.1;
    c.epsilon = 0.01;
    std::vector<double> x(3, 0.0);
    AmcState s = AmcState::initial(c, 3);
    REQUIRE(amc_step(x, s, c, obj, rng).accepted);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.mu[i] == doctest::Approx(0.01 * x[i]).epsilon(1e-15));
  }
}

TEST_CASE("scheduler fires after ns rejections") {
  Uphill obj;
  Rng rng(4);
  AmcConfig c;
  c.sigma0 = 0.01;
  c.ns = 5;
  c.epsilon = 0.3;
  std::vector<double> x(3, 0.0);
  AmcState s = AmcState::initial(c, 3);
  s.mu = {0.1, 0.2, 0.3};
  s.consecutive_rejections = 4;
  const StepReport r = amc_step(x, s, c, obj, rng);
  CHECK_FALSE(r.accepted);
  CHECK(r.scheduler_fired);
  CHECK(s.sigma == doctest::Approx(0.0095).epsilon(1e-15));
  CHECK(r.sigma_after == s.sigma);
  for (double m : s.mu) CHECK(m == 0.0);
  CHECK(s.consecutive_rejections == 0);
  CHECK(x == std::vector<double>(3, 0.0));

  const StepReport again = amc_step(x, s, c, obj, rng);
  CHECK_FALSE(again.scheduler_fired);
  CHECK(s.consecutive_rejections == 1);
}

TEST_CASE("never-rescale scheduler") {
  Uphill obj;
  Rng rng(5);
  const AmcConfig c = AmcConfig::metropolis(0.01);
  std::vector<double> x(3, 0.0);
  AmcState s = AmcState::initial(c, 3);
  for (int i = 0; i < 200; ++i) amc_step(x, s, c, obj, rng);
  CHECK(s.sigma == 0.01);
  CHECK(s.consecutive_rejections == 200);
}

TEST_CASE("loss evaluations per step") {
  Rng rng(6);
  const AmcConfig c = AmcConfig::metropolis(0.1);
  SUBCASE("batch: the current loss is reused") {
    Downhill obj(false);
    std::vector<double> x(3, 0.0);
    AmcState s = AmcState::initial(c, 3);
    for (int i = 0; i < 10; ++i) amc_step(x, s, c, obj, rng);
    CHECK(obj.calls() == 11);
  }
  SUBCASE("minibatch: both losses on the new data") {
    Downhill obj(true);
    std::vector<double> x(3, 0.0);
    AmcState s = AmcState::initial(c, 3);
    for (int i = 0; i < 10; ++i) amc_step(x, s, c, obj, rng);
    CHECK(obj.calls() == 20);
  }
}

TEST_CASE("finite temperature accepts uphill moves") {
  Uphill obj;
  Rng rng(7);
  const AmcConfig c = AmcConfig::metropolis(0.1, 100.0);
  std::vector<double> x(3, 0.0);
  AmcState s = AmcState::initial(c, 3);
  int accepted = 0;
  for (int i = 0; i < 50; ++i) accepted += amc_step(x, s, c, obj, rng).accepted;
  CHECK(accepted > 40);
}

TEST_CASE("signal-norm multipliers") {
  const auto spec = NetworkSpec::mlp({4, 1}, OutputHead::linear);
  auto trace = ActivationTrace::for_network(spec);
  SUBCASE("unit activations over fan-in 4") {
    for (std::size_t k = 0; k < 4; ++k) trace.sum_sq[k] = 25.0;
    trace.calls[0] = 25;
    trace.n_data = 25;
    const auto lambda = compute_lambdas(spec, trace);
    for (std::size_t i = 0; i < 4; ++i) CHECK(lambda[i] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lambda[spec.blocks()[0].bias_offset] == 1.0);
  }
  SUBCASE("silent inputs freeze the weights") {
    trace.calls[0] = 10;
    trace.n_data = 10;
    const auto lambda = compute_lambdas(spec, trace);
    for (std::size_t i = 0; i < 4; ++i) CHECK(lambda[i] == 0.0);
    CHECK(lambda[4] == 1.0);
  }
  SUBCASE("empty trace is an error") { CHECK_THROWS_AS(compute_lambdas(spec, trace), ShapeError); }
}

TEST_CASE("signal norm applied through a grid objective") {
  const auto spec = NetworkSpec::mlp({1, 6, 1}, OutputHead::linear);
  GridObjective obj(spec, GridTask::make(TargetFunction::sine, 50));
  Rng rng(8);
  std::vector<double> x = init_params(spec, {InitScheme::kaiming, 0.0}, rng);
  AmcConfig c;
  c.sigma0 = 1e-2;
  c.signal_norm = true;
  AmcState s = AmcState::initial(c, x.size());
  amc_step(x, s, c, obj, rng);
  // The input layer sees theta only: lambda = (mean theta^2)^-1/2.
  double mean_sq = 0;
  for (int k = 0; k < 50; ++k) mean_sq += std::pow(k / 49.0, 2) / 50.0;
  CHECK(s.lambda[0] == doctest::Approx(1.0 / std::sqrt(mean_sq)).epsilon(1e-12));

  RosenbrockObjective plain;
  std::vector<double> p{0, 0};
  AmcState ps = AmcState::initial(c, 2);
  CHECK_THROWS_AS(amc_step(p, ps, c, plain, rng), ConfigError);
}

TEST_CASE("run_mc records") {
  RosenbrockObjective f;
  Rng rng(9);
  AmcConfig c;
  c.sigma0 = 1e-3;
  c.ns = 20;
  SUBCASE("zero epochs") {
    std::vector<double> x{-2, 2};
    const RunRecord r = run_mc(f, x, c, 0, rng);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].epoch == 0);
    CHECK(*r.rows[0].loss == 409.0);
  }
  SUBCASE("cadence and monotone loss") {
    std::vector<double> x{-2, 2};
    McRecordOptions options;
    options.every = 100;
    const RunRecord r = run_mc(f, x, c, 1005, rng, options);
    REQUIRE(r.rows.size() == 12);
    CHECK(r.rows[1].epoch == 100);
    CHECK(r.last().epoch == 1005);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(*r.rows[i].loss <= *r.rows[i - 1].loss);
    CHECK(*r.last().loss == f.evaluate(x, nullptr).loss);
  }
}

TEST_CASE("config validation") {
  AmcConfig c;
  CHECK_NOTHROW(c.validate());
  c.sigma0 = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcConfig{};
  c.ns = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcConfig{};
  c.temperature = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcConfig{};
  c.epsilon = -5e-3;
  CHECK_NOTHROW(c.validate());
}
