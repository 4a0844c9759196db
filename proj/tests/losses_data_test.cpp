#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "amcnet/dataset.hpp"
#include "amcnet/losses.hpp"
#include "amcnet/objective.hpp"
#include "support.hpp"

using namespace amcnet;

// Grid sums below were evaluated independently in double precision with
// theta_k = k / 999.
TEST_CASE("grid losses of the all-zero net") {
  const auto spec = NetworkSpec::mlp({1, 10, 10, 1}, OutputHead::linear);
  const ParamVector zero(spec.param_count(), 0.0);
  CHECK(mse_grid_loss(spec, zero, GridTask::make(TargetFunction::sine)) ==
        doctest::Approx(0.49950000000000017).epsilon(1e-12));
  // 250 grid points lie strictly inside (1/2, 3/4).
  CHECK(mse_grid_loss(spec, zero, GridTask::make(TargetFunction::step)) == doctest::Approx(0.0625).epsilon(1e-14));
  const auto log_sine = GridTask::make(TargetFunction::log_sine);
  CHECK(mse_grid_loss(spec, zero, log_sine) == doctest::Approx(1.5516309847377221).epsilon(1e-12));
  CHECK(pseudo_loss(spec, zero, log_sine) == doctest::Approx(1.5523128589675388).epsilon(1e-12));
}

TEST_CASE("grid convention and targets") {
  const auto task = GridTask::make(TargetFunction::log_sine, 1000);
  REQUIRE(task.size() == 1000);
  CHECK(task.grid(0, 0) == 0.0);
  CHECK(task.grid(0, 999) == 1.0);
  CHECK(task.grid(0, 1) == doctest::Approx(1.0 / 999.0));
  double sine_part = 0;
  for (std::size_t k = 0; k < task.size(); ++k) {
    const double d = task.targets[k] - task.aux_targets[k];
    sine_part += d * d;
  }
  // U' of a net equal to the full target.
  CHECK(sine_part / 1000.0 == doctest::Approx(0.0049950000000000038).epsilon(1e-10));
  CHECK(target_value(TargetFunction::step, 0.5) == 0.0);
  CHECK(target_value(TargetFunction::step, 0.6) == 0.5);
  CHECK(target_value(TargetFunction::step, 0.75) == 0.0);
  CHECK_FALSE(GridTask::make(TargetFunction::sine).has_aux());
}

TEST_CASE("one-hot mse") {
  Matrix perfect = Matrix::Zero(10, 1);
  perfect(3, 0) = 1.0;
  const std::vector<int> three{3};
  CHECK(mse_onehot_from_outputs(perfect, three) == 0.0);
  const Matrix uniform = Matrix::Constant(10, 2, 0.1);
  CHECK(mse_onehot_from_outputs(uniform.leftCols(1), three) == doctest::Approx(0.90));
  const std::vector<int> two{3, 7};
  CHECK(mse_onehot_from_outputs(uniform, two) == doctest::Approx(0.90));
}

TEST_CASE("cross entropy") {
  const std::vector<int> labels{0, 1, 1};
  CHECK(cross_entropy_from_logits(Matrix::Zero(2, 3), labels) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(cross_entropy_from_logits(Matrix::Zero(10, 3), labels) == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  Matrix sure = Matrix::Zero(2, 3);
  sure(0, 0) = 60;
  sure(1, 1) = 60;
  sure(1, 2) = 60;
  CHECK(cross_entropy_from_logits(sure, labels) < 1e-20);
  Matrix wrong = Matrix::Zero(2, 1);
  wrong(1, 0) = 1e4;
  const std::vector<int> zero{0};
  CHECK(std::isfinite(cross_entropy_from_logits(wrong, zero)));
}

TEST_CASE("accuracy") {
  Matrix out(2, 4);
  out << 1, 0, 2, -1,
         0, 1, 3, 5;
  const std::vector<int> labels{0, 1, 1, 1};
  CHECK(accuracy_from_outputs(out, labels) == 1.0);
  const Matrix constant = Matrix::Zero(2, 4);
  const std::vector<int> balanced{0, 1, 0, 1};
  CHECK(accuracy_from_outputs(constant, balanced) == 0.5);
  const Matrix shifted = out.array() + 17.5;
  CHECK(accuracy_from_outputs(shifted, labels) == accuracy_from_outputs(out, labels));
}

TEST_CASE("evaluate_dataset matches the head") {
  Dataset d;
  d.inputs = Matrix::Ones(3, 4);
  d.labels = {0, 1, 0, 1};
  d.one_hot_dim = 2;
  const auto soft = NetworkSpec::mlp({3, 4, 2}, OutputHead::softmax);
  const auto lin = NetworkSpec::mlp({3, 4, 2}, OutputHead::linear_classifier);
  const ParamVector zs(soft.param_count(), 0.0);
  // Uniform prediction over 2 classes: (0.5)^2 + (0.5)^2.
  CHECK(evaluate_dataset(soft, zs, d).loss == doctest::Approx(0.5));
  CHECK(evaluate_dataset(lin, zs, d).loss == doctest::Approx(std::numbers::ln2));
  CHECK(*evaluate_dataset(lin, zs, d).accuracy == 0.5);
}

TEST_CASE("idx round trip and errors") {
  const auto dir = test::scratch_dir("idx");
  const std::vector<std::uint8_t> px{0, 255, 51, 102, 0, 0, 255, 255};
  const std::vector<std::uint8_t> lb{4, 9};
  write_mnist_idx(dir / "img", dir / "lab", px, lb, 2, 2);
  const Dataset d = load_mnist_idx(dir / "img", dir / "lab");
  REQUIRE(d.size() == 2);
  CHECK(d.inputs.rows() == 4);
  CHECK(d.inputs(1, 0) == 1.0);
  CHECK(d.inputs(2, 0) == doctest::Approx(0.2));
  CHECK(d.labels == std::vector<int>{4, 9});
  CHECK(d.one_hot_dim == 10);

  SUBCASE("truncated images") {
    std::filesystem::resize_file(dir / "img", 16 + 6);
    try {
      load_mnist_idx(dir / "img", dir / "lab");
      FAIL("no error");
    } catch (const IdxTruncatedError& e) {
      CHECK(e.expected_bytes() == 24);
      CHECK(e.actual_bytes() == 22);
      CHECK(std::string(e.what()).find("24") != std::string::npos);
      CHECK(std::string(e.what()).find("22") != std::string::npos);
    }
  }
  SUBCASE("image file given as labels") {
    CHECK_THROWS_AS(load_mnist_idx(dir / "img", dir / "img"), IdxBadMagicError);
  }
  SUBCASE("count mismatch") {
    const std::vector<std::uint8_t> one{1};
    write_mnist_idx(dir / "img2", dir / "lab2", px, lb, 2, 2);
    write_mnist_idx(dir / "img3", dir / "lab3", std::span(px).first(4), one, 2, 2);
    CHECK_THROWS_AS(load_mnist_idx(dir / "img2", dir / "lab3"), IdxCountMismatchError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_mnist_idx(dir / "nope", dir / "lab"), IoError); }
}

TEST_CASE("binarize and unroll") {
  Dataset d;
  d.inputs = Matrix::Zero(784, 4);
  d.inputs(10, 1) = 0.5;
  d.inputs(11, 1) = 0.4999;
  d.inputs(12, 3) = 1.0;
  d.labels = {0, 1, 7, 0};
  d.one_hot_dim = 10;
  const std::vector<int> classes{0, 1};
  const Dataset s = binarize_unroll(d, classes);
  REQUIRE(s.size() == 3);
  CHECK(s.labels == std::vector<int>{0, 1, 0});
  CHECK(s.one_hot_dim == 2);
  CHECK(s.symbol_dim == 2);
  REQUIRE(s.sequences[0].size() == 784);
  for (auto v : s.sequences[0]) CHECK(v == 0);
  CHECK(s.sequences[1][10] == 1);
  CHECK(s.sequences[1][11] == 0);
  CHECK(s.sequences[2][12] == 1);
  const std::vector<int> none{5};
  CHECK_THROWS_AS(binarize_unroll(d, none), ShapeError);
}

TEST_CASE("dataset subset, head and validation") {
  Dataset d;
  d.inputs = Matrix(2, 3);
  d.inputs << 1, 2, 3, 4, 5, 6;
  d.labels = {0, 1, 2};
  d.one_hot_dim = 3;
  const std::vector<std::size_t> idx{2, 0};
  const Dataset s = d.subset(idx);
  CHECK(s.labels == std::vector<int>{2, 0});
  CHECK(s.inputs(1, 0) == 6);
  CHECK(d.head(10).size() == 3);
  CHECK(d.head(1).size() == 1);
  d.labels[1] = 3;
  CHECK_THROWS_AS(d.validate(), ShapeError);
}

TEST_CASE("minibatches are drawn without replacement") {
  auto data = std::make_shared<Dataset>();
  data->inputs = Matrix(1, 12);
  for (int i = 0; i < 12; ++i) {
    data->inputs(0, i) = i;
    data->labels.push_back(i % 2);
  }
  data->one_hot_dim = 2;
  ClassificationObjective obj(NetworkSpec::mlp({1, 2, 2}, OutputHead::softmax), data, 8);
  Rng rng(1);
  std::set<double> ever;
  for (int k = 0; k < 20; ++k) {
    CHECK(obj.select_data(rng));
    REQUIRE(obj.current().size() == 8);
    std::set<double> batch;
    for (Eigen::Index c = 0; c < 8; ++c) batch.insert(obj.current().inputs(0, c));
    CHECK(batch.size() == 8);
    ever.insert(batch.begin(), batch.end());
  }
  CHECK(ever.size() == 12);

  ClassificationObjective full(NetworkSpec::mlp({1, 2, 2}, OutputHead::softmax), data, 0);
  CHECK_FALSE(full.select_data(rng));
  CHECK(full.current().size() == 12);
}

TEST_CASE("rosenbrock objective") {
  RosenbrockObjective f;
  const std::vector<double> start{-2, 2}, min{1, 1}, origin{0, 0};
  CHECK(f.evaluate(start, nullptr).loss == 409.0);
  CHECK(f.evaluate(min, nullptr).loss == 0.0);
  CHECK(f.evaluate(origin, nullptr).loss == 1.0);
  std::vector<double> g(2);
  f.loss_and_gradient(min, g);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}
