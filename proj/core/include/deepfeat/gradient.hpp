#pragma once

#include <cstddef>
#include <vector>

#include "deepfeat/linalg.hpp"
#include "deepfeat/network.hpp"

namespace deepfeat {

// Target distribution for the backward pass. The canonical instance is the
// uniform vector [1/P, ..., 1/P], used when no label is known.
struct LabelVector {
  std::vector<double> g;

  explicit LabelVector(std::vector<double> values);
  static LabelVector uniform(std::size_t class_count);

  std::size_t size() const { return g.size(); }
};

// Backward signals d_k = dE/dy_k for k from target_layer up to L, in the
// convention where the top-layer signal is g - x_L (its sign cancels in
// every kernel product, so similarities are unaffected).
struct BackwardTrace {
  std::size_t target_layer = 0;
  std::vector<std::vector<double>> deltas;

  // d_k with target_layer <= k <= L.
  const std::vector<double>& d(std::size_t k) const;
  std::size_t top_layer() const { return target_layer + deltas.size() - 1; }
};

// Rank-1 weight gradient for layer k, stored as its two factors:
// a = normalized x_{k-1} and u = normalized d_k. The represented matrix is
// a·uᵀ with implied size a.len × u.len, never materialized outside oracles.
struct GradientFeature {
  std::size_t layer_index = 0;
  std::vector<double> a;
  std::vector<double> u;

  std::size_t implied_rows() const { return a.size(); }
  std::size_t implied_cols() const { return u.size(); }
};

// Concatenation of independently normalized activation blocks, compared by
// plain dot product.
struct ForwardFeature {
  std::vector<std::vector<double>> blocks;

  std::size_t concat_length() const;
  std::vector<double> concat() const;
};

// Picks one block for a forward feature: either an activation x_k
// (k = 0 is the input, k = L the final probabilities) or the top-layer
// logits y_L.
struct FeatureSelector {
  std::size_t index = 0;
  bool logits = false;

  static FeatureSelector x(std::size_t k) { return {k, false}; }
  static FeatureSelector top_logits() { return {0, true}; }
};

// g - x_L, the top-layer backward signal.
std::vector<double> backward_seed(const std::vector<double>& probabilities,
                                  const LabelVector& g);

// Runs the backward recursion d_j = (W_{j+1}·d_{j+1}) ∘ 1[y_j > 0] from the
// top down to layer k (strict inequality at zero; identity layers pass the
// signal through unmasked). The default seed is the uniform label vector.
BackwardTrace backprop_to(const ForwardTrace& trace, const Network& net,
                          std::size_t k);
BackwardTrace backprop_to(const ForwardTrace& trace, const Network& net,
                          std::size_t k, const LabelVector& g);

GradientFeature gradient_feature(const ForwardTrace& trace, const Network& net,
                                 std::size_t k);
GradientFeature gradient_feature(const ForwardTrace& trace, const Network& net,
                                 std::size_t k, const LabelVector& g);

// Dense a·uᵀ. Oracle-only; refuses implied sizes above the guard.
MatrixD explicit_gradient(const GradientFeature& f,
                          std::size_t max_entries = 10'000'000);
MatrixD outer_product(const std::vector<double>& a,
                      const std::vector<double>& u);

ForwardFeature forward_feature(const ForwardTrace& trace,
                               const std::vector<FeatureSelector>& selectors);

// Size bookkeeping for a gradient feature at layer k of a dim chain,
// without touching any weights.
struct GradientShape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t entry_count() const { return rows * cols; }
  std::size_t factor_count() const { return rows + cols; }
};

GradientShape gradient_shape(const std::vector<std::size_t>& dims,
                             std::size_t k);

}  // namespace deepfeat
