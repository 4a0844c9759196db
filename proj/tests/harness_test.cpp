#include <doctest.h>

#include <fstream>

#include "amcnet/checkpoint.hpp"
#include "amcnet/config.hpp"
#include "amcnet/errors.hpp"
#include "amcnet/runner.hpp"
#include "support.hpp"

using namespace amcnet;
using nlohmann::json;

TEST_CASE("config defaults and precedence") {
  SUBCASE("empty config") {
    const RunConfig c = parse_config(json::object(), {{"experiment", "rosenbrock"}, {"preset", "desk"}});
    CHECK(c.plan.amc.sigma0 == 1e-3);
    CHECK(c.plan.amc.ns == 20);
    CHECK(c.plan == default_plan(ExperimentId::rosenbrock));
  }
  SUBCASE("flag beats file") {
    const json file = {{"experiment", "rosenbrock"}, {"amc", {{"sigma0", 0.5}}}};
    CHECK(parse_config(file, {}).plan.amc.sigma0 == 0.5);
    CHECK(parse_config(file, {{"sigma0", "0.1"}}).plan.amc.sigma0 == 0.1);
    CHECK(parse_config(file, {{"amc.sigma0", "0.2"}}).plan.amc.sigma0 == 0.2);
  }
  SUBCASE("experiment from the file picks its preset defaults") {
    const RunConfig c = parse_config({{"experiment", "frequency"}}, {});
    CHECK(c.plan.amc.ns == 50);
    CHECK(parse_config({{"experiment", "frequency"}}, {{"experiment", "rosenbrock"}}).plan.amc.ns == 20);
  }
  SUBCASE("flat dotted keys and infinite ns") {
    const RunConfig c = parse_config({{"amc.ns", "inf"}, {"amc.epsilon", -5e-3}}, {{"seed", "17"}});
    CHECK(c.plan.amc.ns == kNeverRescale);
    CHECK(c.plan.amc.epsilon == -5e-3);
    CHECK(c.plan.seed == 17);
  }
}

TEST_CASE("config errors") {
  SUBCASE("misspelled key") {
    try {
      parse_config({{"sigm0", 0.1}}, {});
      FAIL("accepted");
    } catch (const UnknownKeyError& e) {
      CHECK(e.key() == "sigm0");
      CHECK(e.suggestion() == "amc.sigma0");
      CHECK(std::string(e.what()).find("amc.sigma0") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(json::object(), {{"amc.sigm0", "1"}}), UnknownKeyError);
  }
  SUBCASE("wrong types") {
    CHECK_THROWS_AS(parse_config({{"amc", {{"sigma0", "big"}}}}, {}), TypeMismatchError);
    CHECK_THROWS_AS(parse_config(json::object(), {{"epochs", "-3"}}), TypeMismatchError);
    CHECK_THROWS_AS(parse_config(json::object(), {{"record.grad_norm", "maybe"}}), TypeMismatchError);
  }
  SUBCASE("invalid values") {
    CHECK_THROWS_AS(parse_config(json::object(), {{"optimizer", "sgd"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json::object(), {{"amc.sigma0", "0"}}), ConfigError);
  }
  SUBCASE("classification needs its data") {
    CHECK_THROWS_AS(parse_config(json::object(), {{"experiment", "mnist"}, {"data.mnist_dir", "/no/such/dir"}}),
                    MissingDatasetError);
  }
}

TEST_CASE("config json round trip") {
  RunConfig c = parse_config({{"experiment", "deep-step"}}, {{"net.depth", "5"}, {"out", "somewhere"}});
  const json j = config_to_json(c);
  const RunConfig back = parse_config(json::parse(j.dump()), {});
  CHECK(back.plan == c.plan);
  CHECK(back.out == c.out);
  for (const auto& key : config_keys()) CHECK(flatten_json(json::parse(j.dump())).contains(key));
}

TEST_CASE("metrics csv") {
  RunRecord empty;
  CHECK(metrics_csv(empty) == std::string(kMetricsHeader) + "\n");

  RunRecord r;
  for (std::uint64_t e = 0; e < 3; ++e) {
    RunRow row;
    row.epoch = e;
    row.loss = 1.0 / 3.0 + static_cast<double>(e);
    r.rows.push_back(row);
  }
  const std::string text = metrics_csv(r);
  CHECK(text.find("\n0,0.33333333333333331,,,,,\n") != std::string::npos);
  CHECK(parse_metrics_csv(text) == r);

  r.rows[1].aux_loss = 1e-300;
  r.rows[1].accuracy = 0.1;
  r.rows[1].acceptance_rate = 0.0;
  r.rows[1].sigma = 0.95 * 0.95 * 1e-3;
  r.rows[2].grad_norm = 123456789.123456789;
  CHECK(parse_metrics_csv(metrics_csv(r)) == r);

  const auto dir = test::scratch_dir("csv");
  emit_metrics(r, dir / "m.csv");
  CHECK(load_metrics(dir / "m.csv") == r);
  CHECK_THROWS(parse_metrics_csv("epoch,loss\n1,2\n"));
}

TEST_CASE("acceptance window") {
  AcceptanceWindow w(4);
  CHECK_FALSE(w.rate());
  for (bool b : {true, true, false, false, false, true}) w.push(b);
  CHECK(*w.rate() == 0.25);
  AcceptanceWindow copy(4);
  copy.restore(w.history());
  CHECK(*copy.rate() == 0.25);
}

TEST_CASE("checkpoint resume") {
  auto plan = default_plan(ExperimentId::deep_step);
  plan.depth = 3;
  plan.epochs = 400;
  plan.record_every = 25;
  plan.seed = 5;
  Run whole(plan);
  whole.run_to_end();

  SUBCASE("from epoch 0") {
    Run resumed(plan, decode_checkpoint(encode_checkpoint(Run(plan).checkpoint())));
    resumed.run_to_end();
    CHECK(metrics_csv(resumed.record()) == metrics_csv(whole.record()));
    CHECK(resumed.params() == whole.params());
  }
  SUBCASE("from epoch k to 2k") {
    auto half = plan;
    half.epochs = 200;
    Run first(half);
    first.run_to_end();
    const auto dir = test::scratch_dir("checkpoint");
    save_checkpoint(first.checkpoint(), dir / "cp.bin");
    Run second(plan, load_checkpoint(dir / "cp.bin", plan_digest(plan)));
    CHECK(second.epoch() == 200);
    second.run_to_end();
    CHECK(metrics_csv(second.record()) == metrics_csv(whole.record()));
    CHECK(second.params() == whole.params());
    CHECK(second.amc_state() == whole.amc_state());
  }
  SUBCASE("tampered digest") {
    Checkpoint cp = whole.checkpoint();
    cp.config_digest ^= 1;
    CHECK_THROWS_AS(Run(plan, cp), DigestMismatchError);
    const auto dir = test::scratch_dir("checkpoint-digest");
    save_checkpoint(whole.checkpoint(), dir / "cp.bin");
    auto other = plan;
    other.amc.epsilon = 0.02;
    CHECK_THROWS_AS(load_checkpoint(dir / "cp.bin", plan_digest(other)), DigestMismatchError);
  }
  SUBCASE("corrupt bytes") {
    const std::string bytes = encode_checkpoint(whole.checkpoint());
    CHECK_THROWS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)));
    CHECK_THROWS(decode_checkpoint(bytes + "x"));
    CHECK_THROWS(decode_checkpoint("JUNK" + bytes.substr(4)));
  }
}

TEST_CASE("digest ignores the budget only") {
  auto a = default_plan(ExperimentId::rosenbrock);
  auto b = a;
  b.epochs = 5;
  CHECK(plan_digest(a) == plan_digest(b));
  b.seed = 1;
  CHECK(plan_digest(a) != plan_digest(b));
}

TEST_CASE("same seed, same bytes") {
  auto plan = default_plan(ExperimentId::frequency);
  plan.epochs = 300;
  plan.seed = 9;
  CHECK(metrics_csv(run_plan(plan)) == metrics_csv(run_plan(plan)));
  auto other = plan;
  other.seed = 10;
  CHECK(metrics_csv(run_plan(plan)) != metrics_csv(run_plan(other)));
}
