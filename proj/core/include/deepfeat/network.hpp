#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deepfeat/linalg.hpp"

namespace deepfeat {

enum class Activation : std::uint8_t {
  ReLU = 0,
  Identity = 1,
  SoftMax = 2,
};

const char* activation_name(Activation a);

// One fully connected layer computing y = Wᵀx (+ bias), then the
// activation. Weights are stored with shape [in_dim][out_dim].
struct LayerSpec {
  Matrix weights;
  std::optional<Vector> bias;
  Activation activation = Activation::ReLU;

  std::size_t in_dim() const { return weights.rows; }
  std::size_t out_dim() const { return weights.cols; }
};

// An immutable fully connected stack. Layers are indexed 1-based
// (k = 1..L) throughout the library; index 0 refers to the input.
// The final layer must be SoftMax and there must be at least two
// layers so that a non-terminal gradient feature exists.
class Network {
 public:
  explicit Network(std::vector<LayerSpec> layers);

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t class_count() const { return layers_.back().out_dim(); }

  // k is 1-based.
  const LayerSpec& layer(std::size_t k) const;
  const std::vector<LayerSpec>& layers() const { return layers_; }

 private:
  std::vector<LayerSpec> layers_;
};

// Everything the forward pass touched, kept for later backprop.
// activations[k] holds x_k for k = 0..L-1 (so activations[0] is the
// input) and pre_activations[k-1] holds y_k for k = 1..L. The final
// SoftMax output lives in `probabilities`, in double precision since
// downstream seeds and kernels depend on its exactness.
struct ForwardTrace {
  std::vector<Vector> activations;
  std::vector<Vector> pre_activations;
  std::vector<double> probabilities;
  double tau = 1.0;

  std::size_t layer_count() const { return pre_activations.size(); }

  // x_k with k = 0..L-1.
  const Vector& x(std::size_t k) const;
  // y_k with k = 1..L.
  const Vector& y(std::size_t k) const;
};

// SoftMax with temperature: out_j = exp(y_j/tau) / Σ_i exp(y_i/tau),
// evaluated with max-subtraction so large logits cannot overflow.
std::vector<double> tempered_softmax(const std::vector<double>& y, double tau);
std::vector<double> tempered_softmax(const Vector& y, double tau);

ForwardTrace forward(const Network& net, const Vector& input, double tau);

Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

// Deterministic fixture generator: weights uniform in
// [-1/sqrt(in_dim), +1/sqrt(in_dim)], ReLU hidden layers, SoftMax top.
// Identical seeds produce bit-identical networks on every platform.
Network make_synthetic_network(std::uint64_t seed,
                               const std::vector<std::size_t>& dims,
                               bool with_bias = false);

}  // namespace deepfeat
