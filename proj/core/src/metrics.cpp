#include "deepfeat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace deepfeat {

const char* ap_variant_name(ApVariant v) {
  switch (v) {
    case ApVariant::NonInterpolated:
      return "non-interpolated";
    case ApVariant::ElevenPoint:
      return "11-point";
  }
  return "unknown";
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& relevance,
                         ApVariant variant) {
  if (scores.size() != relevance.size()) {
    throw DimensionError("average_precision: " + std::to_string(scores.size()) +
                         " scores vs " + std::to_string(relevance.size()) +
                         " relevance flags");
  }
  std::size_t total_relevant = 0;
  for (std::uint8_t r : relevance) {
    total_relevant += r ? 1 : 0;
  }
  if (total_relevant == 0) {
    throw ValueError("average precision needs at least one relevant item");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  std::vector<double> precision(order.size());
  std::vector<double> recall(order.size());
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    hits += relevance[order[rank]] ? 1 : 0;
    precision[rank] =
        static_cast<double>(hits) / static_cast<double>(rank + 1);
    recall[rank] =
        static_cast<double>(hits) / static_cast<double>(total_relevant);
  }

  if (variant == ApVariant::NonInterpolated) {
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (relevance[order[rank]]) {
        sum += precision[rank];
      }
    }
    return sum / static_cast<double>(total_relevant);
  }

  // Eleven-point: interpolated precision at a recall level is the best
  // precision achieved at that recall or beyond.
  double sum = 0.0;
  for (int level = 0; level <= 10; ++level) {
    const double r = static_cast<double>(level) / 10.0;
    double best = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (recall[rank] + 1e-12 >= r) {
        best = std::max(best, precision[rank]);
      }
    }
    sum += best;
  }
  return sum / 11.0;
}

MeanApResult mean_ap(const MatrixD& scores, const MultiLabelSet& labels,
                     ApVariant variant) {
  if (scores.rows != labels.n) {
    throw DimensionError("mean_ap: " + std::to_string(scores.rows) +
                         " score rows vs " + std::to_string(labels.n) +
                         " labeled samples");
  }
  if (scores.cols != labels.class_count) {
    throw DimensionError("mean_ap: " + std::to_string(scores.cols) +
                         " score columns vs " +
                         std::to_string(labels.class_count) + " classes");
  }
  MeanApResult result;
  result.variant = variant;
  result.per_class.assign(labels.class_count,
                          std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t j = 0; j < labels.class_count; ++j) {
    if (labels.positives(j) == 0) {
      result.skipped.push_back(j);
      continue;
    }
    std::vector<double> class_scores(labels.n);
    std::vector<std::uint8_t> relevance(labels.n);
    for (std::size_t i = 0; i < labels.n; ++i) {
      class_scores[i] = scores.at(i, j);
      relevance[i] = labels.relevant(i, j) ? 1 : 0;
    }
    const double ap = average_precision(class_scores, relevance, variant);
    result.per_class[j] = ap;
    sum += ap;
    ++evaluated;
  }
  if (evaluated == 0) {
    throw ValueError("no class has a positive example; nothing to evaluate");
  }
  result.map = sum / static_cast<double>(evaluated);
  return result;
}

}  // namespace deepfeat
