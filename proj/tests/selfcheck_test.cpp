#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "deepfeat/selfcheck.hpp"

using namespace deepfeat;

TEST_CASE("every oracle suite passes on an honest build") {
  const std::vector<CheckResult> results = run_all_checks(42);
  REQUIRE(results.size() == 5);

  const std::vector<std::string> expected = {
      "trace-factorization", "gradient-fd", "gram-psd",
      "smo-vs-qp",           "ap-hand-cases",
  };
  for (std::size_t i = 0; i < results.size(); ++i) {
    INFO("suite ", results[i].name, ": ", results[i].detail);
    CHECK(results[i].name == expected[i]);
    CHECK(results[i].passed);
    CHECK(results[i].max_error <= results[i].tolerance);
    CHECK(results[i].tolerance > 0.0);
    CHECK(!results[i].detail.empty());
  }
}

TEST_CASE("projected gradient recovers the closed-form two-point dual") {
  GramMatrix gram(2, KernelKind::Trace);
  gram.at(0, 0) = 1.0;
  gram.at(0, 1) = -1.0;
  gram.at(1, 0) = -1.0;
  gram.at(1, 1) = 1.0;

  const std::vector<double> alpha =
      projected_gradient_dual(gram, {+1, -1}, 1.0);
  REQUIRE(alpha.size() == 2);
  CHECK(std::abs(alpha[0] - 0.5) <= 1e-6);
  CHECK(std::abs(alpha[1] - 0.5) <= 1e-6);
}

TEST_CASE("the finite-difference suite rejects corrupted factors") {
  // Feed the oracle a sign-flipped backward factor; it must fail loudly.
  const Network net = make_synthetic_network(751, {8, 6, 5});
  const Vector input = draw_kink_free_input(net, 752);
  const ForwardTrace trace = forward(net, input, 1.0);
  const BackwardTrace back = backprop_to(trace, net, 1);

  const std::vector<double> x_raw = widen(trace.x(0));
  std::vector<double> d_raw = back.d(1);
  for (double& v : d_raw) {
    v = -v;
  }
  const CheckResult honest = check_factor_pair_against_fd(
      net, input, 1, x_raw, back.d(1), 753, 5, 1e-5);
  CHECK(honest.passed);

  const CheckResult corrupted = check_factor_pair_against_fd(
      net, input, 1, x_raw, d_raw, 753, 5, 1e-5);
  CHECK(!corrupted.passed);
  CHECK(corrupted.max_error > corrupted.tolerance);
}
