#include "deepfeat/network.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "deepfeat/io.hpp"
#include "deepfeat/rng.hpp"

namespace deepfeat {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU:
      return "relu";
    case Activation::Identity:
      return "identity";
    case Activation::SoftMax:
      return "softmax";
  }
  return "unknown";
}

namespace {

void validate(const std::vector<LayerSpec>& layers) {
  if (layers.size() < 2) {
    throw ValueError("network needs at least 2 layers, got " +
                     std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (l.in_dim() == 0 || l.out_dim() == 0) {
      throw ValueError(where + ": dimensions must be at least 1");
    }
    if (l.weights.data.size() != l.in_dim() * l.out_dim()) {
      throw ValueError(where + ": weight buffer size mismatch");
    }
    if (!all_finite(l.weights)) {
      throw ValueError(where + ": non-finite weights");
    }
    if (l.bias) {
      if (l.bias->size() != l.out_dim()) {
        throw DimensionError(where + ": bias length " +
                             std::to_string(l.bias->size()) + " vs out_dim " +
                             std::to_string(l.out_dim()));
      }
      if (!all_finite(*l.bias)) {
        throw ValueError(where + ": non-finite bias");
      }
    }
    const bool last = (i + 1 == layers.size());
    if (last && l.activation != Activation::SoftMax) {
      throw ValueError("last layer must use softmax, got " +
                       std::string(activation_name(l.activation)));
    }
    if (!last && l.activation == Activation::SoftMax) {
      throw ValueError(where + ": softmax is only valid on the last layer");
    }
    if (!last && layers[i + 1].in_dim() != l.out_dim()) {
      throw DimensionError(
          "dimension chain broken between layers " + std::to_string(i + 1) +
          " and " + std::to_string(i + 2) + ": out_dim " +
          std::to_string(l.out_dim()) + " vs in_dim " +
          std::to_string(layers[i + 1].in_dim()));
    }
  }
}

}  // namespace

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  validate(layers_);
}

const LayerSpec& Network::layer(std::size_t k) const {
  if (k < 1 || k > layers_.size()) {
    throw ValueError("layer index " + std::to_string(k) +
                     " out of range 1.." + std::to_string(layers_.size()));
  }
  return layers_[k - 1];
}

const Vector& ForwardTrace::x(std::size_t k) const {
  if (k >= activations.size()) {
    throw ValueError("activation index " + std::to_string(k) +
                     " out of range 0.." +
                     std::to_string(activations.size() - 1));
  }
  return activations[k];
}

const Vector& ForwardTrace::y(std::size_t k) const {
  if (k < 1 || k > pre_activations.size()) {
    throw ValueError("pre-activation index " + std::to_string(k) +
                     " out of range 1.." +
                     std::to_string(pre_activations.size()));
  }
  return pre_activations[k - 1];
}

std::vector<double> tempered_softmax(const std::vector<double>& y,
                                     double tau) {
  if (!(tau > 0.0)) {
    throw ValueError("softmax temperature must be positive, got " +
                     std::to_string(tau));
  }
  if (y.empty()) {
    throw ValueError("softmax of an empty vector");
  }
  double top = y[0];
  for (double v : y) {
    top = std::max(top, v);
  }
  std::vector<double> out(y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp((y[i] - top) / tau);
    sum += out[i];
  }
  for (double& v : out) {
    v /= sum;
  }
  return out;
}

std::vector<double> tempered_softmax(const Vector& y, double tau) {
  return tempered_softmax(widen(y), tau);
}

ForwardTrace forward(const Network& net, const Vector& input, double tau) {
  if (input.size() != net.input_dim()) {
    throw DimensionError("forward: input length " +
                         std::to_string(input.size()) + " vs network input " +
                         std::to_string(net.input_dim()));
  }
  if (!all_finite(input)) {
    throw ValueError("forward: non-finite input");
  }
  if (!(tau > 0.0)) {
    throw ValueError("forward: temperature must be positive, got " +
                     std::to_string(tau));
  }

  const std::size_t L = net.layer_count();
  ForwardTrace trace;
  trace.tau = tau;
  trace.activations.reserve(L);
  trace.pre_activations.reserve(L);
  trace.activations.push_back(input);

  for (std::size_t k = 1; k <= L; ++k) {
    const LayerSpec& layer = net.layer(k);
    Vector y = matvec_transposed(layer.weights, trace.activations.back());
    if (layer.bias) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] += (*layer.bias)[j];
      }
    }
    trace.pre_activations.push_back(y);
    switch (layer.activation) {
      case Activation::ReLU:
        for (float& v : y) {
          v = std::max(v, 0.0f);
        }
        trace.activations.push_back(std::move(y));
        break;
      case Activation::Identity:
        trace.activations.push_back(std::move(y));
        break;
      case Activation::SoftMax:
        // Last layer; x_L is kept as probabilities, not as a float
        // activation, so activations ends at x_{L-1}.
        trace.probabilities = tempered_softmax(y, tau);
        break;
    }
  }
  return trace;
}

namespace {

constexpr char kNetMagic[4] = {'D', 'F', 'N', '1'};

}  // namespace

Network load_network(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic(kNetMagic, "network");
  const std::uint32_t layer_count = in.u32();
  std::vector<LayerSpec> layers;
  layers.reserve(layer_count);
  for (std::uint32_t k = 0; k < layer_count; ++k) {
    const std::uint32_t in_dim = in.u32();
    const std::uint32_t out_dim = in.u32();
    const std::uint8_t has_bias = in.u8();
    const std::uint64_t act_offset = in.offset();
    const std::uint8_t act_code = in.u8();
    if (has_bias > 1) {
      throw FormatError(path + ": layer " + std::to_string(k + 1) +
                            " has_bias flag must be 0 or 1, got " +
                            std::to_string(has_bias),
                        act_offset - 1);
    }
    if (act_code > 2) {
      throw FormatError(path + ": layer " + std::to_string(k + 1) +
                            " unknown activation code " +
                            std::to_string(act_code),
                        act_offset);
    }
    LayerSpec layer;
    layer.weights = Matrix(in_dim, out_dim);
    in.f32_array(layer.weights.data.data(), layer.weights.data.size());
    if (has_bias) {
      Vector bias(out_dim);
      in.f32_array(bias.data(), bias.size());
      layer.bias = std::move(bias);
    }
    layer.activation = static_cast<Activation>(act_code);
    layers.push_back(std::move(layer));
  }
  in.expect_end("network");
  return Network(std::move(layers));
}

void save_network(const Network& net, const std::string& path) {
  BinaryWriter out;
  out.magic(kNetMagic);
  out.u32(static_cast<std::uint32_t>(net.layer_count()));
  for (const LayerSpec& layer : net.layers()) {
    out.u32(static_cast<std::uint32_t>(layer.in_dim()));
    out.u32(static_cast<std::uint32_t>(layer.out_dim()));
    out.u8(layer.bias ? 1 : 0);
    out.u8(static_cast<std::uint8_t>(layer.activation));
    out.f32_array(layer.weights.data.data(), layer.weights.data.size());
    if (layer.bias) {
      out.f32_array(layer.bias->data(), layer.bias->size());
    }
  }
  out.commit(path);
}

Network make_synthetic_network(std::uint64_t seed,
                               const std::vector<std::size_t>& dims,
                               bool with_bias) {
  if (dims.size() < 3) {
    throw ValueError("need at least 3 dims (input plus 2 layers), got " +
                     std::to_string(dims.size()));
  }
  Rng rng(seed);
  std::vector<LayerSpec> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    LayerSpec layer;
    layer.weights = Matrix(dims[k], dims[k + 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    for (float& w : layer.weights.data) {
      w = static_cast<float>(rng.symmetric(scale));
    }
    if (with_bias) {
      Vector bias(dims[k + 1]);
      for (float& b : bias) {
        b = static_cast<float>(rng.symmetric(scale));
      }
      layer.bias = std::move(bias);
    }
    layer.activation = (k + 2 == dims.size()) ? Activation::SoftMax
                                              : Activation::ReLU;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

}  // namespace deepfeat
