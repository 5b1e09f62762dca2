#include "deepfeat/dataset.hpp"

#include <string>

#include "deepfeat/io.hpp"
#include "deepfeat/rng.hpp"

namespace deepfeat {

std::size_t MultiLabelSet::positives(std::size_t j) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    count += relevant(i, j) ? 1 : 0;
  }
  return count;
}

Vector Dataset::sample(std::size_t i) const {
  if (i >= n) {
    throw ValueError("sample index " + std::to_string(i) +
                     " out of range for " + std::to_string(n) + " samples");
  }
  return Vector(samples.begin() + static_cast<std::ptrdiff_t>(i * dim),
                samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
}

namespace {

constexpr char kDatasetMagic[4] = {'D', 'F', 'S', '1'};

}  // namespace

void save_dataset(const Dataset& data, const std::string& path) {
  BinaryWriter out;
  out.magic(kDatasetMagic);
  out.u32(static_cast<std::uint32_t>(data.n));
  out.u32(static_cast<std::uint32_t>(data.dim));
  out.u32(static_cast<std::uint32_t>(data.labels.class_count));
  out.f32_array(data.samples.data(), data.samples.size());
  for (std::uint8_t l : data.labels.labels) {
    out.u8(l);
  }
  out.commit(path);
}

Dataset load_dataset(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic(kDatasetMagic, "dataset");
  Dataset data;
  data.n = in.u32();
  data.dim = in.u32();
  const std::uint32_t classes = in.u32();
  if (data.n == 0 || data.dim == 0 || classes == 0) {
    throw FormatError(path + ": sample count, dimension and class count " +
                          "must all be at least 1",
                      in.offset());
  }
  data.samples.resize(data.n * data.dim);
  in.f32_array(data.samples.data(), data.samples.size());
  data.labels = MultiLabelSet(data.n, classes);
  for (std::size_t i = 0; i < data.labels.labels.size(); ++i) {
    const std::uint64_t offset = in.offset();
    const std::uint8_t l = in.u8();
    if (l > 1) {
      throw FormatError(path + ": label byte must be 0 or 1, got " +
                            std::to_string(l),
                        offset);
    }
    data.labels.labels[i] = l;
  }
  in.expect_end("dataset");
  if (!all_finite(data.samples)) {
    throw FormatError(path + ": non-finite sample values");
  }
  return data;
}

Dataset make_planted_dataset(std::uint64_t seed,
                             const PlantedTaskOptions& options) {
  if (options.n == 0 || options.class_count == 0) {
    throw ValueError("planted task needs at least one sample and one class");
  }
  if (options.dim < options.class_count) {
    throw ValueError("planted task needs dim >= class count, got dim " +
                     std::to_string(options.dim) + " for " +
                     std::to_string(options.class_count) + " classes");
  }
  if (options.noise < 0.0) {
    throw ValueError("noise must be non-negative");
  }

  const std::size_t block = options.dim / options.class_count;
  Dataset data;
  data.n = options.n;
  data.dim = options.dim;
  data.samples.assign(options.n * options.dim, 0.0f);
  data.labels = MultiLabelSet(options.n, options.class_count);

  Rng membership_rng(derive_seed(seed, 0));
  Rng weight_rng(derive_seed(seed, 1));
  Rng noise_rng(derive_seed(seed, 2));

  for (std::size_t i = 0; i < options.n; ++i) {
    data.labels.set(i, i % options.class_count, true);
    for (std::size_t j = 0; j < options.class_count; ++j) {
      if (j != i % options.class_count &&
          membership_rng.unit() < options.extra_rate) {
        data.labels.set(i, j, true);
      }
    }
    float* row = data.samples.data() + i * options.dim;
    for (std::size_t j = 0; j < options.class_count; ++j) {
      if (!data.labels.relevant(i, j)) {
        continue;
      }
      const double w =
          weight_rng.range(0.5, 1.0) * options.prototype_scale;
      for (std::size_t c = j * block; c < (j + 1) * block; ++c) {
        row[c] = static_cast<float>(w);
      }
    }
    if (options.noise > 0.0) {
      for (std::size_t c = 0; c < options.dim; ++c) {
        row[c] += static_cast<float>(options.noise * noise_rng.gaussian());
      }
    }
  }
  return data;
}

}  // namespace deepfeat
