#include "deepfeat/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "deepfeat/metrics.hpp"
#include "deepfeat/rng.hpp"

namespace deepfeat {

namespace {

// Shared layer walk for the reference loss evaluations. The weight shift
// is applied as y_k[j] += delta·x_{k-1}[i]; pass shift_layer = 0 for the
// unperturbed loss. Softmax is the textbook formula without
// max-subtraction; test logits are small enough that overflow safety is
// not needed, and diverging from the main path is the point.
double ref_loss_walk(const Network& net, const Vector& input,
                     const std::vector<double>& g, double tau,
                     std::size_t shift_layer, std::size_t shift_i,
                     std::size_t shift_j, double delta) {
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> probabilities;
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const LayerSpec& layer = net.layer(l);
    std::vector<double> y(layer.out_dim(), 0.0);
    for (std::size_t j = 0; j < layer.out_dim(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in_dim(); ++i) {
        acc += static_cast<double>(layer.weights.at(i, j)) * x[i];
      }
      if (layer.bias) {
        acc += static_cast<double>((*layer.bias)[j]);
      }
      y[j] = acc;
    }
    if (l == shift_layer) {
      y[shift_j] += delta * x[shift_i];
    }
    if (layer.activation == Activation::SoftMax) {
      double denom = 0.0;
      probabilities.resize(y.size());
      for (std::size_t j = 0; j < y.size(); ++j) {
        probabilities[j] = std::exp(y[j] / tau);
        denom += probabilities[j];
      }
      for (double& p : probabilities) {
        p /= denom;
      }
    } else if (layer.activation == Activation::ReLU) {
      x.assign(y.size(), 0.0);
      for (std::size_t j = 0; j < y.size(); ++j) {
        x[j] = y[j] > 0.0 ? y[j] : 0.0;
      }
    } else {
      x = y;
    }
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    loss -= g[j] * std::log(probabilities[j]);
  }
  return loss;
}

std::string format_error(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  return buf;
}

}  // namespace

std::vector<double> reference_forward_probabilities(const Network& net,
                                                    const Vector& input,
                                                    double tau) {
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    const LayerSpec& layer = net.layer(l);
    std::vector<double> y(layer.out_dim(), 0.0);
    for (std::size_t j = 0; j < layer.out_dim(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in_dim(); ++i) {
        acc += static_cast<double>(layer.weights.at(i, j)) * x[i];
      }
      if (layer.bias) {
        acc += static_cast<double>((*layer.bias)[j]);
      }
      y[j] = acc;
    }
    if (layer.activation == Activation::SoftMax) {
      double denom = 0.0;
      for (double v : y) {
        denom += std::exp(v / tau);
      }
      for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] = std::exp(y[j] / tau) / denom;
      }
      return y;
    }
    if (layer.activation == Activation::ReLU) {
      for (double& v : y) {
        v = v > 0.0 ? v : 0.0;
      }
    }
    x = std::move(y);
  }
  throw ValueError("network has no softmax layer");
}

double reference_cross_entropy(const Network& net, const Vector& input,
                               const std::vector<double>& g, double tau) {
  return ref_loss_walk(net, input, g, tau, 0, 0, 0, 0.0);
}

double reference_cross_entropy_weight_shift(const Network& net,
                                            const Vector& input,
                                            const std::vector<double>& g,
                                            double tau, std::size_t k,
                                            std::size_t i, std::size_t j,
                                            double delta) {
  return ref_loss_walk(net, input, g, tau, k, i, j, delta);
}

double reference_cross_entropy_from_layer(const Network& net,
                                          std::vector<double> y_k,
                                          std::size_t k,
                                          const std::vector<double>& g,
                                          double tau) {
  std::vector<double> x;
  std::vector<double> probabilities;
  for (std::size_t l = k; l <= net.layer_count(); ++l) {
    const LayerSpec& layer = net.layer(l);
    std::vector<double> y;
    if (l == k) {
      y = std::move(y_k);
    } else {
      y.assign(layer.out_dim(), 0.0);
      for (std::size_t j = 0; j < layer.out_dim(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < layer.in_dim(); ++i) {
          acc += static_cast<double>(layer.weights.at(i, j)) * x[i];
        }
        if (layer.bias) {
          acc += static_cast<double>((*layer.bias)[j]);
        }
        y[j] = acc;
      }
    }
    if (layer.activation == Activation::SoftMax) {
      double denom = 0.0;
      probabilities.resize(y.size());
      for (std::size_t j = 0; j < y.size(); ++j) {
        probabilities[j] = std::exp(y[j] / tau);
        denom += probabilities[j];
      }
      for (double& p : probabilities) {
        p /= denom;
      }
    } else if (layer.activation == Activation::ReLU) {
      x.assign(y.size(), 0.0);
      for (std::size_t j = 0; j < y.size(); ++j) {
        x[j] = y[j] > 0.0 ? y[j] : 0.0;
      }
    } else {
      x = std::move(y);
    }
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    loss -= g[j] * std::log(probabilities[j]);
  }
  return loss;
}

double dense_trace(const MatrixD& a, const MatrixD& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DimensionError("dense_trace: shapes " + std::to_string(a.rows) +
                         "x" + std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
  }
  // Tr(AᵀB) = Σ_ij A_ij·B_ij.
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += a.data[i] * b.data[i];
  }
  return sum;
}

namespace {

// Euclidean projection onto {0 <= α <= C, yᵀα = 0}: α_i = clip(v_i - λy_i)
// where λ solves yᵀα(λ) = 0. The constraint value is monotone in λ, so
// bisection pins it down.
std::vector<double> project_feasible(const std::vector<double>& v,
                                     const std::vector<int>& y, double C) {
  double hi = C + 1.0;
  for (double value : v) {
    hi = std::max(hi, std::abs(value) + C + 1.0);
  }
  double lo = -hi;
  std::vector<double> alpha(v.size());
  const auto eval = [&](double lambda) {
    double balance = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      alpha[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
      balance += y[i] * alpha[i];
    }
    return balance;
  };
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  eval(0.5 * (lo + hi));
  return alpha;
}

double pg_objective(const std::vector<std::vector<double>>& q,
                    const std::vector<double>& alpha) {
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      quadratic += alpha[i] * q[i][j] * alpha[j];
    }
  }
  return linear - 0.5 * quadratic;
}

}  // namespace

std::vector<double> projected_gradient_dual(const GramMatrix& gram,
                                            const std::vector<int>& y,
                                            double C,
                                            std::size_t iterations) {
  const std::size_t n = y.size();
  if (gram.n != n) {
    throw DimensionError("projected gradient: gram size " +
                         std::to_string(gram.n) + " vs " + std::to_string(n) +
                         " labels");
  }
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  double lipschitz = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      q[i][j] = y[i] * y[j] * gram.at(i, j);
      row += std::abs(q[i][j]);
    }
    lipschitz = std::max(lipschitz, row);
  }
  const double step = 1.0 / lipschitz;

  // FISTA over the negated dual, with the best feasible iterate kept so
  // the acceleration's non-monotonicity cannot hurt the answer.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> momentum = alpha;
  std::vector<double> best = alpha;
  double best_value = pg_objective(q, best);
  double theta = 1.0;
  std::vector<double> v(n);
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double grad = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        grad += q[i][j] * momentum[j];
      }
      v[i] = momentum[i] - step * grad;
    }
    const std::vector<double> next = project_feasible(v, y, C);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double mix = (theta - 1.0) / theta_next;
    for (std::size_t i = 0; i < n; ++i) {
      momentum[i] = next[i] + mix * (next[i] - alpha[i]);
    }
    alpha = next;
    theta = theta_next;
    const double value = pg_objective(q, alpha);
    if (value > best_value) {
      best_value = value;
      best = alpha;
    }
  }
  return best;
}

Vector draw_kink_free_input(const Network& net, std::uint64_t seed,
                            double margin, double tau) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Vector input(net.input_dim());
    for (float& v : input) {
      v = static_cast<float>(rng.symmetric(1.0));
    }
    const ForwardTrace trace = forward(net, input, tau);
    bool clear = true;
    for (std::size_t k = 1; k <= net.layer_count() && clear; ++k) {
      for (float y : trace.y(k)) {
        if (std::abs(y) <= margin) {
          clear = false;
          break;
        }
      }
    }
    if (clear) {
      return input;
    }
  }
  throw ValueError("no kink-free input found in 200 attempts");
}

CheckResult check_factor_pair_against_fd(const Network& net,
                                         const Vector& input, std::size_t k,
                                         const std::vector<double>& x_raw,
                                         const std::vector<double>& d_raw,
                                         std::uint64_t sample_seed,
                                         std::size_t min_entries,
                                         double tolerance) {
  CheckResult result;
  result.name = "gradient-fd(layer " + std::to_string(k) + ")";
  result.tolerance = tolerance;

  const std::vector<double> g(net.class_count(),
                              1.0 / static_cast<double>(net.class_count()));
  const double tau = 1.0;

  // Candidate entries with both factors alive; dead-ReLU rows and columns
  // are exact zeros on both sides and carry no signal.
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t i = 0; i < x_raw.size(); ++i) {
    for (std::size_t j = 0; j < d_raw.size(); ++j) {
      if (std::abs(x_raw[i] * d_raw[j]) > 1e-8) {
        pool.emplace_back(i, j);
      }
    }
  }
  if (pool.size() < min_entries) {
    result.passed = false;
    result.detail = "only " + std::to_string(pool.size()) +
                    " usable entries, needed " + std::to_string(min_entries);
    result.max_error = std::numeric_limits<double>::infinity();
    return result;
  }

  // Partial Fisher-Yates: the first `count` slots become a uniform sample
  // without replacement.
  Rng rng(sample_seed);
  const std::size_t count = std::min<std::size_t>(pool.size(), 64);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pick =
        i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[pick]);
  }

  std::size_t evaluated = 0;
  double max_rel = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const auto [i, j] = pool[s];
    const double w = net.layer(k).weights.at(i, j);
    const double h = 1e-4 * (1.0 + std::abs(w));
    const double up =
        reference_cross_entropy_weight_shift(net, input, g, tau, k, i, j, h);
    const double down =
        reference_cross_entropy_weight_shift(net, input, g, tau, k, i, j, -h);
    const double fd = (up - down) / (2.0 * h);
    if (std::abs(fd) <= 1e-8) {
      continue;
    }
    // The backward convention makes the candidate the negative of the
    // calculus gradient, so candidate + fd should vanish.
    const double candidate = x_raw[i] * d_raw[j];
    const double rel = std::abs(candidate + fd) / std::abs(fd);
    max_rel = std::max(max_rel, rel);
    ++evaluated;
  }

  result.max_error = max_rel;
  result.passed = (max_rel < tolerance) && (evaluated >= min_entries);
  result.detail = std::to_string(evaluated) + " entries vs central differences";
  if (evaluated < min_entries) {
    result.detail += " (needed " + std::to_string(min_entries) + ")";
  }
  return result;
}

CheckResult check_finite_difference(std::uint64_t seed) {
  CheckResult result;
  result.name = "gradient-fd";
  result.tolerance = 1e-5;
  result.passed = true;

  const std::vector<std::size_t> dims = {32, 24, 20, 12};
  const Network net = make_synthetic_network(derive_seed(seed, 1), dims);
  const Vector input = draw_kink_free_input(net, derive_seed(seed, 2));
  const ForwardTrace trace = forward(net, input, 1.0);

  std::size_t total_entries = 0;
  for (std::size_t k = 1; k <= net.layer_count(); ++k) {
    const BackwardTrace back = backprop_to(trace, net, k);
    const CheckResult layer = check_factor_pair_against_fd(
        net, input, k, widen(trace.x(k - 1)), back.d(k),
        derive_seed(seed, 10 + k), 50, result.tolerance);
    result.max_error = std::max(result.max_error, layer.max_error);
    result.passed = result.passed && layer.passed;
    total_entries += 64;
  }
  result.detail = std::to_string(total_entries) + " weight entries over " +
                  std::to_string(net.layer_count()) + " layers, max rel err " +
                  format_error(result.max_error);
  return result;
}

CheckResult check_trace_factorization(std::uint64_t seed) {
  CheckResult result;
  result.name = "trace-factorization";
  result.tolerance = 1e-10;
  result.passed = true;

  const std::vector<std::vector<std::size_t>> configs = {
      {8, 6, 5, 4}, {16, 12, 10, 8}, {32, 24, 16, 8}, {64, 48, 32, 16}};
  std::size_t pairs = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const Network net =
        make_synthetic_network(derive_seed(seed, 20 + c), configs[c]);
    Rng rng(derive_seed(seed, 40 + c));
    std::vector<Vector> inputs(6, Vector(net.input_dim()));
    for (auto& input : inputs) {
      for (float& v : input) {
        v = static_cast<float>(rng.symmetric(1.0));
      }
    }
    for (std::size_t k = 1; k <= net.layer_count(); ++k) {
      std::vector<GradientFeature> features;
      for (const Vector& input : inputs) {
        features.push_back(
            gradient_feature(forward(net, input, 2.0), net, k));
      }
      for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i; j < features.size(); ++j) {
          const double fast = trace_kernel(features[i], features[j]);
          const double slow = dense_trace(explicit_gradient(features[i]),
                                          explicit_gradient(features[j]));
          const double scale = std::max({std::abs(fast), std::abs(slow), 1e-30});
          const double rel = std::abs(fast - slow) / scale;
          result.max_error = std::max(result.max_error, rel);
          ++pairs;
        }
      }
    }
  }
  result.passed = result.max_error < result.tolerance && pairs >= 50;
  result.detail = std::to_string(pairs) + " feature pairs, max rel err " +
                  format_error(result.max_error);
  return result;
}

CheckResult check_gram_psd(std::uint64_t seed) {
  CheckResult result;
  result.name = "gram-psd";
  result.tolerance = 1e-8;
  result.passed = true;

  const Network net =
      make_synthetic_network(derive_seed(seed, 60), {16, 12, 10, 8});
  Rng rng(derive_seed(seed, 61));
  std::vector<GradientFeature> features;
  for (int s = 0; s < 32; ++s) {
    Vector input(net.input_dim());
    for (float& v : input) {
      v = static_cast<float>(rng.symmetric(1.0));
    }
    features.push_back(gradient_feature(forward(net, input, 2.0), net, 2));
  }
  const GramMatrix g = gram(features);

  double worst_asymmetry = 0.0;
  double worst_self = 0.0;
  double worst_cs = 0.0;  // positive means Cauchy-Schwarz was violated
  for (std::size_t i = 0; i < g.n; ++i) {
    const double kii = g.at(i, i);
    const bool nonzero = l2_norm(features[i].a) > 0.5;
    if (nonzero) {
      worst_self = std::max(worst_self, std::abs(kii - 1.0));
    }
    for (std::size_t j = 0; j < g.n; ++j) {
      worst_asymmetry =
          std::max(worst_asymmetry, std::abs(g.at(i, j) - g.at(j, i)));
      const double excess =
          std::abs(g.at(i, j)) - std::sqrt(kii * g.at(j, j)) - 1e-12;
      worst_cs = std::max(worst_cs, excess);
    }
  }
  const double min_eig = min_eigenvalue(g);
  const double eig_floor = -1e-8 * std::max(1.0, g.trace());

  result.passed = worst_asymmetry == 0.0 && worst_self <= 1e-9 &&
                  worst_cs <= 0.0 && min_eig >= eig_floor;
  result.max_error = std::max({worst_asymmetry, worst_self, worst_cs,
                               min_eig < eig_floor ? eig_floor - min_eig : 0.0});
  result.detail = std::to_string(g.n) + " features, min eigenvalue " +
                  format_error(min_eig) + ", self-similarity off by " +
                  format_error(worst_self);
  return result;
}

CheckResult check_smo_against_qp(std::uint64_t seed) {
  CheckResult result;
  result.name = "smo-vs-qp";
  result.tolerance = 1e-4;
  result.passed = true;

  // Closed-form warm-up: two mirrored points force α = (1/2, 1/2), b = 0.
  {
    GramMatrix g(2, KernelKind::Dot);
    g.at(0, 0) = 1.0;
    g.at(0, 1) = -1.0;
    g.at(1, 0) = -1.0;
    g.at(1, 1) = 1.0;
    const SvmBinaryModel m = train_binary(g, {1, -1});
    const double err =
        std::max({std::abs(m.alpha[0] - 0.5), std::abs(m.alpha[1] - 0.5),
                  std::abs(m.bias)});
    if (err > 1e-9) {
      result.passed = false;
      result.detail = "closed-form case off by " + format_error(err);
      result.max_error = err;
      return result;
    }
  }

  const std::size_t n = 12;
  for (int problem = 0; problem < 20; ++problem) {
    Rng rng(derive_seed(seed, 80 + problem));
    // Dot-product gram of random points: PSD by construction.
    std::vector<std::vector<double>> points(n, std::vector<double>(6));
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
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = (i < n / 2) ? 1 : -1;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick =
          i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(labels[i], labels[pick]);
    }

    const SvmBinaryModel model = train_binary(g, labels);
    const std::vector<double> oracle_alpha =
        projected_gradient_dual(g, labels, 1.0);

    // Straight-line objective, shared by neither solver.
    const auto objective = [&](const std::vector<double>& alpha) {
      double linear = 0.0;
      double quadratic = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        linear += alpha[i];
        for (std::size_t j = 0; j < n; ++j) {
          quadratic +=
              alpha[i] * alpha[j] * labels[i] * labels[j] * g.at(i, j);
        }
      }
      return linear - 0.5 * quadratic;
    };
    const double smo_value = objective(model.alpha);
    const double qp_value = objective(oracle_alpha);
    const double rel = std::abs(smo_value - qp_value) /
                       std::max(1e-12, std::abs(qp_value));
    result.max_error = std::max(result.max_error, rel);
  }
  result.passed = result.max_error < result.tolerance;
  result.detail = "20 random 12-point problems, max objective gap " +
                  format_error(result.max_error);
  return result;
}

CheckResult check_ap_hand_cases() {
  CheckResult result;
  result.name = "ap-hand-cases";
  result.tolerance = 1e-12;

  double max_err = 0.0;
  {
    const double ap = average_precision({0.9, 0.8, 0.7}, {1, 0, 1});
    max_err = std::max(max_err, std::abs(ap - 5.0 / 6.0));
  }
  {
    const double ap = average_precision({0.3, 0.2, 0.9, 0.5}, {1, 1, 1, 1});
    max_err = std::max(max_err, std::abs(ap - 1.0));
  }
  {
    // Single relevant item ranked last of 8.
    std::vector<double> scores;
    std::vector<std::uint8_t> relevance;
    for (int i = 0; i < 8; ++i) {
      scores.push_back(1.0 - 0.1 * i);
      relevance.push_back(i == 7 ? 1 : 0);
    }
    const double ap = average_precision(scores, relevance);
    max_err = std::max(max_err, std::abs(ap - 1.0 / 8.0));
  }
  {
    const double ap = average_precision({0.9, 0.8, 0.7}, {1, 0, 1},
                                        ApVariant::ElevenPoint);
    max_err = std::max(max_err, std::abs(ap - 28.0 / 33.0));
  }

  result.max_error = max_err;
  result.passed = max_err <= result.tolerance;
  result.detail = "4 hand-computed rankings";
  return result;
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  return {
      check_trace_factorization(seed),
      check_finite_difference(seed),
      check_gram_psd(seed),
      check_smo_against_qp(seed),
      check_ap_hand_cases(),
  };
}

}  // namespace deepfeat
