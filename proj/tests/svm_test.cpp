#include <cmath>
#include <vector>

#include "doctest.h"

#include "deepfeat/dataset.hpp"
#include "deepfeat/rng.hpp"
#include "deepfeat/selfcheck.hpp"
#include "deepfeat/svm.hpp"
#include "test_support.hpp"

using namespace deepfeat;
using testsupport::contains;
using testsupport::tmp_path;

namespace {

// Dot-product gram of random points: positive semidefinite by construction.
GramMatrix random_points_gram(std::uint64_t seed, std::size_t n,
                              std::size_t dim) {
  Rng rng(seed);
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (auto& p : points) {
    for (double& v : p) {
      v = rng.symmetric(1.0);
    }
  }
  GramMatrix g(n, KernelKind::Dot);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g.at(i, j) = dot(points[i], points[j]);
    }
  }
  return g;
}

std::vector<int> balanced_labels(std::uint64_t seed, std::size_t n) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = (i < n / 2) ? 1 : -1;
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(labels[i], labels[pick]);
  }
  return labels;
}

}  // namespace

TEST_CASE("two mirrored points solve in closed form") {
  GramMatrix g(2, KernelKind::Trace);
  g.at(0, 0) = 1.0;
  g.at(0, 1) = -1.0;
  g.at(1, 0) = -1.0;
  g.at(1, 1) = 1.0;
  const SvmBinaryModel m = train_binary(g, {1, -1});
  CHECK(std::abs(m.alpha[0] - 0.5) <= 1e-9);
  CHECK(std::abs(m.alpha[1] - 0.5) <= 1e-9);
  CHECK(std::abs(m.bias) <= 1e-9);
  CHECK(m.support_count() == 2);

  // Decision values on the training points are the hand-computed margins.
  OvrSvmModel ovr;
  ovr.kernel = KernelKind::Trace;
  ovr.classes = {m};
  MatrixD cross(2, 2);
  cross.data = g.entries;
  const MatrixD scores = decision_scores(ovr, cross);
  CHECK(scores.at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(scores.at(1, 0) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("training rejects degenerate label sets") {
  GramMatrix g(2, KernelKind::Dot);
  g.at(0, 0) = 1.0;
  g.at(1, 1) = 1.0;
  const std::string msg = testsupport::message_of<ValueError>(
      [&] { train_binary(g, {1, 1}); });
  CHECK(contains(msg, "sign"));
  CHECK_THROWS_AS(train_binary(g, {1, 0}), ValueError);
  CHECK_THROWS_AS(train_binary(g, std::vector<int>{}), DimensionError);
  GramMatrix empty(0, KernelKind::Dot);
  CHECK_THROWS_AS(train_binary(empty, std::vector<int>{}), ValueError);
  SvmTrainOptions bad;
  bad.C = 0.0;
  CHECK_THROWS_AS(train_binary(g, {1, -1}, bad), ValueError);
  GramMatrix wrong(3, KernelKind::Dot);
  CHECK_THROWS_AS(train_binary(wrong, {1, -1}), DimensionError);
}

TEST_CASE("solutions satisfy the KKT and feasibility conditions") {
  const std::size_t n = 24;
  const GramMatrix g = random_points_gram(501, n, 3);
  const std::vector<int> y = balanced_labels(502, n);
  SvmTrainOptions options;
  const SvmBinaryModel m = train_binary(g, y, options);

  double balance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(m.alpha[i] >= 0.0);
    CHECK(m.alpha[i] <= options.C);
    balance += m.alpha[i] * y[i];
  }
  CHECK(std::abs(balance) <= 1e-9);

  // Recompute the KKT violation from scratch: optimal means m - M small.
  std::vector<double> grad(n, -1.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      grad[t] += y[t] * y[s] * g.at(t, s) * m.alpha[s];
    }
  }
  double up = -1e300;
  double low = 1e300;
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y[t] * grad[t];
    const bool in_up = (y[t] > 0) ? (m.alpha[t] < options.C)
                                  : (m.alpha[t] > 0.0);
    const bool in_low = (y[t] > 0) ? (m.alpha[t] > 0.0)
                                   : (m.alpha[t] < options.C);
    if (in_up) {
      up = std::max(up, v);
    }
    if (in_low) {
      low = std::min(low, v);
    }
  }
  CHECK(up - low <= options.tol + 1e-12);

  // The duality gap certificate the solver promises at convergence.
  const double objective = dual_objective(g, y, m.alpha);
  double gap = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    gap += m.alpha[t] * grad[t];
    gap += options.C * std::max(0.0, -grad[t] - y[t] * m.bias);
  }
  CHECK(gap <= 1e-3 * (1.0 + std::abs(objective)));
}

TEST_CASE("smo agrees with the projected-gradient oracle") {
  const std::size_t n = 10;
  const GramMatrix g = random_points_gram(511, n, 4);
  const std::vector<int> y = balanced_labels(512, n);
  const SvmBinaryModel m = train_binary(g, y);
  const std::vector<double> oracle = projected_gradient_dual(g, y, 1.0);
  const double a = dual_objective(g, y, m.alpha);
  const double b = dual_objective(g, y, oracle);
  CHECK(std::abs(a - b) / std::max(1e-12, std::abs(b)) < 1e-4);
}

TEST_CASE("training is deterministic across repeats and threads") {
  const GramMatrix g = random_points_gram(521, 18, 4);
  MultiLabelSet labels(18, 3);
  for (std::size_t i = 0; i < 18; ++i) {
    labels.set(i, i % 3, true);
    if (i % 4 == 0) {
      labels.set(i, (i + 1) % 3, true);
    }
  }
  const OvrSvmModel once = train_ovr(g, labels, {}, 1);
  const OvrSvmModel twice = train_ovr(g, labels, {}, 1);
  const OvrSvmModel threaded = train_ovr(g, labels, {}, 3);
  REQUIRE(once.class_count() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(once.classes[j].alpha == twice.classes[j].alpha);
    CHECK(once.classes[j].alpha == threaded.classes[j].alpha);
    CHECK(once.classes[j].bias == threaded.classes[j].bias);
  }
}

TEST_CASE("one-vs-rest failures name the class") {
  const GramMatrix g = random_points_gram(531, 6, 3);
  MultiLabelSet labels(6, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    labels.set(i, 0, true);  // class 0 has no negatives
    labels.set(i, 1, i % 2 == 0);
  }
  const std::string msg = testsupport::message_of<ValueError>(
      [&] { train_ovr(g, labels); });
  CHECK(contains(msg, "class 0"));
}

TEST_CASE("an exhausted update budget raises a convergence error") {
  const GramMatrix g = random_points_gram(541, 16, 4);
  const std::vector<int> y = balanced_labels(542, 16);
  SvmTrainOptions options;
  options.max_passes = 1;
  try {
    train_binary(g, y, options);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.final_gap >= 0.0);
    CHECK(contains(e.what(), "1"));
  }
}

TEST_CASE("decision scores validate the cross gram shape") {
  GramMatrix g(2, KernelKind::Dot);
  g.at(0, 0) = 1.0;
  g.at(0, 1) = -1.0;
  g.at(1, 0) = -1.0;
  g.at(1, 1) = 1.0;
  OvrSvmModel ovr;
  ovr.classes = {train_binary(g, {1, -1})};
  MatrixD wrong(2, 3);
  CHECK_THROWS_AS(decision_scores(ovr, wrong), DimensionError);
  CHECK_THROWS_AS(decision_scores(OvrSvmModel{}, wrong), ValueError);
}

TEST_CASE("models survive the json round trip bit for bit") {
  const GramMatrix g = random_points_gram(551, 12, 4);
  MultiLabelSet labels(12, 2);
  for (std::size_t i = 0; i < 12; ++i) {
    labels.set(i, i % 2, true);
  }
  OvrSvmModel model = train_ovr(g, labels);
  model.train_fingerprint = "00d1d2d3d4d5d6d7";

  const std::string path = tmp_path("model.json");
  save_model(model, path);
  const OvrSvmModel loaded = load_model(path);
  CHECK(loaded.kernel == model.kernel);
  CHECK(loaded.train_fingerprint == model.train_fingerprint);
  REQUIRE(loaded.class_count() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(loaded.classes[j].alpha == model.classes[j].alpha);
    CHECK(loaded.classes[j].signed_labels == model.classes[j].signed_labels);
    CHECK(loaded.classes[j].bias == model.classes[j].bias);
    CHECK(loaded.classes[j].C == model.classes[j].C);
  }
}

TEST_CASE("model loader rejects structural corruption") {
  const std::string path = tmp_path("model_bad.json");
  atomic_write_text(path, "{ not json");
  CHECK_THROWS_AS(load_model(path), FormatError);

  atomic_write_text(path, R"({"format":"something-else","version":1})");
  const std::string msg =
      testsupport::message_of<FormatError>([&] { load_model(path); });
  CHECK(contains(msg, "model"));

  atomic_write_text(
      path,
      R"({"format":"deepfeat-svm-model","version":2,"kernel":"trace",)"
      R"("n_train":1,"train_fingerprint":"","classes":[]})");
  CHECK_THROWS_AS(load_model(path), FormatError);

  // Alpha outside [0, C].
  atomic_write_text(
      path,
      R"({"format":"deepfeat-svm-model","version":1,"kernel":"trace",)"
      R"("n_train":2,"train_fingerprint":"",)"
      R"("classes":[{"alpha":[0.5,9.0],"signed_labels":[1,-1],)"
      R"("bias":0.0,"C":1.0}]})");
  CHECK_THROWS_AS(load_model(path), FormatError);

  // Class arrays shorter than n_train.
  atomic_write_text(
      path,
      R"({"format":"deepfeat-svm-model","version":1,"kernel":"trace",)"
      R"("n_train":3,"train_fingerprint":"",)"
      R"("classes":[{"alpha":[0.5,0.5],"signed_labels":[1,-1],)"
      R"("bias":0.0,"C":1.0}]})");
  CHECK_THROWS_AS(load_model(path), FormatError);

  // A signed label of 0 is not a label.
  atomic_write_text(
      path,
      R"({"format":"deepfeat-svm-model","version":1,"kernel":"trace",)"
      R"("n_train":2,"train_fingerprint":"",)"
      R"("classes":[{"alpha":[0.5,0.5],"signed_labels":[1,0],)"
      R"("bias":0.0,"C":1.0}]})");
  CHECK_THROWS_AS(load_model(path), FormatError);
}
