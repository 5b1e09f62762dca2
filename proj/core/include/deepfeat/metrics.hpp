#pragma once

#include <cstdint>
#include <vector>

#include "deepfeat/dataset.hpp"
#include "deepfeat/linalg.hpp"

namespace deepfeat {

// Non-interpolated AP averages the precision at each relevant item's rank.
// The eleven-point variant averages the interpolated precision at recall
// levels 0.0, 0.1, ..., 1.0 (the older protocol some benchmarks used);
// reports always say which variant produced a number.
enum class ApVariant {
  NonInterpolated,
  ElevenPoint,
};

const char* ap_variant_name(ApVariant v);

// Ranks items by descending score (ties keep ascending input order, so
// results never depend on the sort implementation) and scores the ranking
// against the binary relevance vector.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& relevance,
                         ApVariant variant = ApVariant::NonInterpolated);

struct MeanApResult {
  double map = 0.0;
  std::vector<double> per_class;          // NaN for skipped classes
  std::vector<std::size_t> skipped;       // classes with no positives
  ApVariant variant = ApVariant::NonInterpolated;
};

// Unweighted mean of per-class APs over the score matrix (rows = samples,
// columns = classes). Classes without positives are skipped and reported;
// having none left is an error.
MeanApResult mean_ap(const MatrixD& scores, const MultiLabelSet& labels,
                     ApVariant variant = ApVariant::NonInterpolated);

}  // namespace deepfeat
