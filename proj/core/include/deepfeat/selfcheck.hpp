#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/gradient.hpp"
#include "deepfeat/kernel.hpp"
#include "deepfeat/network.hpp"
#include "deepfeat/svm.hpp"

namespace deepfeat {

// Outcome of one oracle suite. Suites compare the library against
// independently coded straight-line references, so a bug in the main
// path cannot hide inside its own verification.
struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

// Reference implementations. These deliberately share no code with the
// main path: plain double loops, naive softmax, no shared helpers.
std::vector<double> reference_forward_probabilities(const Network& net,
                                                    const Vector& input,
                                                    double tau);
double reference_cross_entropy(const Network& net, const Vector& input,
                               const std::vector<double>& g, double tau);

// Same loss with layer k's pre-activation entry j shifted by
// delta·x_{k-1}[i], which is exactly the effect of adding delta to
// weight W_k[i][j].
double reference_cross_entropy_weight_shift(const Network& net,
                                            const Vector& input,
                                            const std::vector<double>& g,
                                            double tau, std::size_t k,
                                            std::size_t i, std::size_t j,
                                            double delta);

// Loss evaluated from layer k onward, starting at the given
// pre-activation vector y_k. Lets finite differences probe dE/dy_k.
double reference_cross_entropy_from_layer(const Network& net,
                                          std::vector<double> y_k,
                                          std::size_t k,
                                          const std::vector<double>& g,
                                          double tau);

// Tr(AᵀB) by direct summation over all entries.
double dense_trace(const MatrixD& a, const MatrixD& b);

// Independent QP solver for the SVM dual: accelerated projected gradient
// with an exact bisection projection onto the box-plus-hyperplane set.
// Slow and simple on purpose; returns the best feasible point seen.
std::vector<double> projected_gradient_dual(const GramMatrix& gram,
                                            const std::vector<int>& y,
                                            double C,
                                            std::size_t iterations = 50'000);

// Compares candidate raw gradient factors (x_{k-1}, d_k) against central
// finite differences of the reference loss, entry by entry. The factors
// are parameters rather than recomputed internally so tests can feed
// corrupted values and watch the suite fail.
CheckResult check_factor_pair_against_fd(const Network& net,
                                         const Vector& input, std::size_t k,
                                         const std::vector<double>& x_raw,
                                         const std::vector<double>& d_raw,
                                         std::uint64_t sample_seed,
                                         std::size_t min_entries,
                                         double tolerance);

// Draws a random input whose pre-activations all sit clear of the ReLU
// kink (|y| > margin), so finite-difference steps cannot cross it.
Vector draw_kink_free_input(const Network& net, std::uint64_t seed,
                            double margin = 1e-3, double tau = 1.0);

// The five oracle suites behind the `check` command.
CheckResult check_finite_difference(std::uint64_t seed);
CheckResult check_trace_factorization(std::uint64_t seed);
CheckResult check_gram_psd(std::uint64_t seed);
CheckResult check_smo_against_qp(std::uint64_t seed);
CheckResult check_ap_hand_cases();

std::vector<CheckResult> run_all_checks(std::uint64_t seed);

}  // namespace deepfeat
