#include "deepfeat/features.hpp"

#include <utility>

#include "deepfeat/io.hpp"

namespace deepfeat {

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::GradientPair:
      return "gradient-pair";
    case FeatureKind::SingleVector:
      return "single-vector";
  }
  return "unknown";
}

std::vector<GradientFeature> FeatureSet::to_gradient_features() const {
  if (kind != FeatureKind::GradientPair) {
    throw ValueError(
        "feature set holds single vectors, not gradient factor pairs");
  }
  std::vector<GradientFeature> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(GradientFeature{layer_index, a[i], u[i]});
  }
  return out;
}

std::vector<ForwardFeature> FeatureSet::to_forward_features() const {
  if (kind != FeatureKind::SingleVector) {
    throw ValueError(
        "feature set holds gradient factor pairs, not single vectors");
  }
  std::vector<ForwardFeature> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    out.push_back(ForwardFeature{{v}});
  }
  return out;
}

FeatureSet FeatureSet::from_gradient(const std::vector<GradientFeature>& fs) {
  if (fs.empty()) {
    throw ValueError("cannot build a feature set from zero features");
  }
  FeatureSet set;
  set.kind = FeatureKind::GradientPair;
  set.dim_a = fs[0].a.size();
  set.dim_u = fs[0].u.size();
  set.layer_index = fs[0].layer_index;
  set.a.reserve(fs.size());
  set.u.reserve(fs.size());
  for (const GradientFeature& f : fs) {
    if (f.a.size() != set.dim_a || f.u.size() != set.dim_u ||
        f.layer_index != set.layer_index) {
      throw ValueError("feature set requires homogeneous dims and layer");
    }
    set.a.push_back(f.a);
    set.u.push_back(f.u);
  }
  return set;
}

FeatureSet FeatureSet::from_forward(const std::vector<ForwardFeature>& fs) {
  if (fs.empty()) {
    throw ValueError("cannot build a feature set from zero features");
  }
  FeatureSet set;
  set.kind = FeatureKind::SingleVector;
  set.dim_a = fs[0].concat_length();
  set.dim_u = 0;
  set.a.reserve(fs.size());
  for (const ForwardFeature& f : fs) {
    if (f.concat_length() != set.dim_a) {
      throw ValueError("feature set requires homogeneous dims");
    }
    set.a.push_back(f.concat());
  }
  return set;
}

namespace {

constexpr char kFeatureMagic[4] = {'D', 'F', 'F', '1'};

std::vector<double> read_f32_vector(BinaryReader& in, std::size_t dim) {
  std::vector<float> buf(dim);
  in.f32_array(buf.data(), buf.size());
  return widen(buf);
}

void write_f32_vector(BinaryWriter& out, const std::vector<double>& v) {
  const Vector buf = narrow(v);
  out.f32_array(buf.data(), buf.size());
}

}  // namespace

void save_features(const FeatureSet& set, const std::string& path) {
  if (set.sample_count() == 0) {
    throw ValueError("refusing to write a feature file with zero samples");
  }
  BinaryWriter out;
  out.magic(kFeatureMagic);
  out.u32(static_cast<std::uint32_t>(set.sample_count()));
  out.u8(static_cast<std::uint8_t>(set.kind));
  out.u32(static_cast<std::uint32_t>(set.dim_a));
  out.u32(static_cast<std::uint32_t>(
      set.kind == FeatureKind::GradientPair ? set.dim_u : 0));
  for (std::size_t i = 0; i < set.sample_count(); ++i) {
    write_f32_vector(out, set.a[i]);
    if (set.kind == FeatureKind::GradientPair) {
      write_f32_vector(out, set.u[i]);
    }
  }
  out.commit(path);
}

FeatureSet load_features(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic(kFeatureMagic, "feature");
  const std::uint32_t count = in.u32();
  const std::uint64_t kind_offset = in.offset();
  const std::uint8_t kind_code = in.u8();
  if (kind_code > 1) {
    throw FormatError(path + ": unknown feature kind " +
                          std::to_string(kind_code),
                      kind_offset);
  }
  FeatureSet set;
  set.kind = static_cast<FeatureKind>(kind_code);
  set.dim_a = in.u32();
  const std::uint64_t dim_u_offset = in.offset();
  set.dim_u = in.u32();
  if (set.dim_a == 0) {
    throw FormatError(path + ": feature dimension must be at least 1",
                      dim_u_offset - 4);
  }
  if (set.kind == FeatureKind::SingleVector && set.dim_u != 0) {
    throw FormatError(path + ": single-vector features must carry dim_u = 0",
                      dim_u_offset);
  }
  if (set.kind == FeatureKind::GradientPair && set.dim_u == 0) {
    throw FormatError(path + ": gradient pairs need dim_u >= 1",
                      dim_u_offset);
  }
  set.a.reserve(count);
  set.u.reserve(set.kind == FeatureKind::GradientPair ? count : 0);
  for (std::uint32_t i = 0; i < count; ++i) {
    set.a.push_back(read_f32_vector(in, set.dim_a));
    if (set.kind == FeatureKind::GradientPair) {
      set.u.push_back(read_f32_vector(in, set.dim_u));
    }
  }
  in.expect_end("feature");
  return set;
}

}  // namespace deepfeat
