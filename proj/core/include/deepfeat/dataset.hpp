#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/linalg.hpp"

namespace deepfeat {

// Binary relevance labels for n samples over class_count classes.
struct MultiLabelSet {
  std::size_t n = 0;
  std::size_t class_count = 0;
  std::vector<std::uint8_t> labels;  // n×class_count row-major, 0 or 1

  MultiLabelSet() = default;
  MultiLabelSet(std::size_t n_, std::size_t classes)
      : n(n_), class_count(classes), labels(n_ * classes, 0) {}

  bool relevant(std::size_t i, std::size_t j) const {
    return labels[i * class_count + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool value) {
    labels[i * class_count + j] = value ? 1 : 0;
  }
  std::size_t positives(std::size_t j) const;
};

// Flattened activation vectors plus their labels. Samples stand in for
// the output of a convolutional front end, which this library does not
// model; synthetic generation fills the same role for experiments.
struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<float> samples;  // n×dim row-major
  MultiLabelSet labels;

  Vector sample(std::size_t i) const;
};

void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// Planted multi-label task. Class j owns one block of coordinates; each
// sample mixes its member prototypes with weights in [0.5, 1), so at
// noise 0 a block is either identically 0 or at least 0.5 everywhere.
// Sample i always contains class i mod class_count; further memberships
// are added independently with probability extra_rate.
struct PlantedTaskOptions {
  std::size_t n = 200;
  std::size_t dim = 40;
  std::size_t class_count = 5;
  double noise = 0.0;
  double extra_rate = 0.25;
  double prototype_scale = 1.0;
};

Dataset make_planted_dataset(std::uint64_t seed,
                             const PlantedTaskOptions& options);

}  // namespace deepfeat
