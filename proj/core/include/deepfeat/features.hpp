#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/gradient.hpp"

namespace deepfeat {

enum class FeatureKind : std::uint8_t {
  GradientPair = 0,
  SingleVector = 1,
};

const char* feature_kind_name(FeatureKind k);

// A homogeneous batch of extracted features, the unit that feature files
// store. Gradient features keep their two factors; forward features are
// flattened to one concatenated vector (per-block dot products sum to the
// dot of the concatenation, so no information the kernel needs is lost).
// Values are held in double for kernel math and narrowed to f32 on disk.
struct FeatureSet {
  FeatureKind kind = FeatureKind::GradientPair;
  std::size_t dim_a = 0;
  std::size_t dim_u = 0;        // 0 for single vectors
  std::size_t layer_index = 0;  // 0 when unknown, e.g. after loading
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> u;

  std::size_t sample_count() const { return a.size(); }

  std::vector<GradientFeature> to_gradient_features() const;
  std::vector<ForwardFeature> to_forward_features() const;

  static FeatureSet from_gradient(const std::vector<GradientFeature>& fs);
  static FeatureSet from_forward(const std::vector<ForwardFeature>& fs);
};

void save_features(const FeatureSet& set, const std::string& path);
FeatureSet load_features(const std::string& path);

}  // namespace deepfeat
