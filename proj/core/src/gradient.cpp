#include "deepfeat/gradient.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace deepfeat {

LabelVector::LabelVector(std::vector<double> values) : g(std::move(values)) {
  if (g.empty()) {
    throw ValueError("label vector must not be empty");
  }
  double sum = 0.0;
  for (double v : g) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValueError("label entries must lie in [0,1], got " +
                       std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValueError("label vector must sum to 1, got " + std::to_string(sum));
  }
}

LabelVector LabelVector::uniform(std::size_t class_count) {
  if (class_count == 0) {
    throw ValueError("uniform label vector needs at least one class");
  }
  return LabelVector(std::vector<double>(
      class_count, 1.0 / static_cast<double>(class_count)));
}

const std::vector<double>& BackwardTrace::d(std::size_t k) const {
  if (k < target_layer || k > top_layer()) {
    throw ValueError("backward signal index " + std::to_string(k) +
                     " out of range " + std::to_string(target_layer) + ".." +
                     std::to_string(top_layer()));
  }
  return deltas[k - target_layer];
}

std::size_t ForwardFeature::concat_length() const {
  std::size_t total = 0;
  for (const auto& b : blocks) {
    total += b.size();
  }
  return total;
}

std::vector<double> ForwardFeature::concat() const {
  std::vector<double> out;
  out.reserve(concat_length());
  for (const auto& b : blocks) {
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<double> backward_seed(const std::vector<double>& probabilities,
                                  const LabelVector& g) {
  if (probabilities.size() != g.size()) {
    throw DimensionError("backward_seed: probability length " +
                         std::to_string(probabilities.size()) +
                         " vs label length " + std::to_string(g.size()));
  }
  std::vector<double> seed(g.size());
  for (std::size_t i = 0; i < seed.size(); ++i) {
    seed[i] = g.g[i] - probabilities[i];
  }
  return seed;
}

namespace {

void check_trace_matches(const ForwardTrace& trace, const Network& net) {
  if (trace.layer_count() != net.layer_count()) {
    throw DimensionError("trace has " + std::to_string(trace.layer_count()) +
                         " layers, network has " +
                         std::to_string(net.layer_count()));
  }
  for (std::size_t k = 1; k <= net.layer_count(); ++k) {
    if (trace.y(k).size() != net.layer(k).out_dim()) {
      throw DimensionError("trace/network mismatch at layer " +
                           std::to_string(k) + ": pre-activation length " +
                           std::to_string(trace.y(k).size()) + " vs out_dim " +
                           std::to_string(net.layer(k).out_dim()));
    }
    if (trace.x(k - 1).size() != net.layer(k).in_dim()) {
      throw DimensionError("trace/network mismatch at layer " +
                           std::to_string(k) + ": activation length " +
                           std::to_string(trace.x(k - 1).size()) +
                           " vs in_dim " +
                           std::to_string(net.layer(k).in_dim()));
    }
  }
  if (trace.probabilities.size() != net.class_count()) {
    throw DimensionError("trace probabilities length " +
                         std::to_string(trace.probabilities.size()) +
                         " vs class count " +
                         std::to_string(net.class_count()));
  }
}

}  // namespace

BackwardTrace backprop_to(const ForwardTrace& trace, const Network& net,
                          std::size_t k) {
  return backprop_to(trace, net, k, LabelVector::uniform(net.class_count()));
}

BackwardTrace backprop_to(const ForwardTrace& trace, const Network& net,
                          std::size_t k, const LabelVector& g) {
  const std::size_t L = net.layer_count();
  if (k < 1 || k > L) {
    throw ValueError("target layer " + std::to_string(k) +
                     " out of range 1.." + std::to_string(L));
  }
  check_trace_matches(trace, net);

  BackwardTrace back;
  back.target_layer = k;
  back.deltas.resize(L - k + 1);
  back.deltas[L - k] = backward_seed(trace.probabilities, g);

  for (std::size_t j = L - 1; j >= k; --j) {
    std::vector<double> d = matvec(net.layer(j + 1).weights,
                                   back.deltas[j + 1 - k]);
    if (net.layer(j).activation == Activation::ReLU) {
      const Vector& y = trace.y(j);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(y[i] > 0.0f)) {
          d[i] = 0.0;
        }
      }
    }
    back.deltas[j - k] = std::move(d);
    if (j == k) {
      break;  // j is unsigned, guard before decrementing past the target
    }
  }
  return back;
}

GradientFeature gradient_feature(const ForwardTrace& trace, const Network& net,
                                 std::size_t k) {
  return gradient_feature(trace, net, k,
                          LabelVector::uniform(net.class_count()));
}

GradientFeature gradient_feature(const ForwardTrace& trace, const Network& net,
                                 std::size_t k, const LabelVector& g) {
  const BackwardTrace back = backprop_to(trace, net, k, g);
  GradientFeature f;
  f.layer_index = k;
  f.a = normalize(widen(trace.x(k - 1)));
  f.u = normalize(back.d(k));
  return f;
}

MatrixD outer_product(const std::vector<double>& a,
                      const std::vector<double>& u) {
  MatrixD out(a.size(), u.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      out.at(i, j) = a[i] * u[j];
    }
  }
  return out;
}

MatrixD explicit_gradient(const GradientFeature& f, std::size_t max_entries) {
  const std::size_t entries = f.implied_rows() * f.implied_cols();
  if (entries > max_entries) {
    throw ValueError("explicit gradient needs " + std::to_string(entries) +
                     " entries, guard allows " + std::to_string(max_entries));
  }
  return outer_product(f.a, f.u);
}

ForwardFeature forward_feature(const ForwardTrace& trace,
                               const std::vector<FeatureSelector>& selectors) {
  if (selectors.empty()) {
    throw ValueError("forward feature needs at least one selector");
  }
  const std::size_t L = trace.layer_count();
  ForwardFeature feature;
  feature.blocks.reserve(selectors.size());
  for (const FeatureSelector& sel : selectors) {
    if (sel.logits) {
      feature.blocks.push_back(normalize(widen(trace.y(L))));
    } else if (sel.index == L) {
      feature.blocks.push_back(normalize(trace.probabilities));
    } else if (sel.index < L) {
      feature.blocks.push_back(normalize(widen(trace.x(sel.index))));
    } else {
      throw ValueError("forward selector index " + std::to_string(sel.index) +
                       " out of range 0.." + std::to_string(L));
    }
  }
  return feature;
}

GradientShape gradient_shape(const std::vector<std::size_t>& dims,
                             std::size_t k) {
  if (dims.size() < 2) {
    throw ValueError("dim chain needs at least 2 entries");
  }
  if (k < 1 || k >= dims.size()) {
    throw ValueError("layer index " + std::to_string(k) +
                     " out of range 1.." + std::to_string(dims.size() - 1));
  }
  return GradientShape{dims[k - 1], dims[k]};
}

}  // namespace deepfeat
