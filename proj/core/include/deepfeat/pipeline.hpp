#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/dataset.hpp"
#include "deepfeat/features.hpp"
#include "deepfeat/metrics.hpp"
#include "deepfeat/network.hpp"
#include "deepfeat/svm.hpp"

namespace deepfeat {

enum class FeatureMode {
  Gradient,  // rank-1 factor pair (a, u) at layer k
  Forward,   // one activation vector x_k, normalized
  Concat,    // x_{k-1} and x_k normalized independently, concatenated
};

const char* feature_mode_name(FeatureMode m);

struct ExtractOptions {
  FeatureMode mode = FeatureMode::Gradient;
  // Gradient/concat: 1..L. Forward: 0..L, where 0 is the input and L the
  // softmax output; concat at L pairs x_{L-1} with the logits y_L.
  std::size_t layer = 1;
  double tau = 2.0;
  unsigned threads = 1;
};

FeatureSet extract_features(const Network& net, const Dataset& data,
                            const ExtractOptions& options);

// Everything the eval report prints.
struct EvalSummary {
  MeanApResult result;
  KernelKind kernel = KernelKind::Trace;
  std::string mode = "unknown";
  std::string layer = "unspecified";
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

std::string format_eval_report(const EvalSummary& summary);

struct CompareOptions {
  double tau = 2.0;
  double C = 1.0;
  double train_fraction = 0.5;  // leading fraction of samples trains
  unsigned threads = 1;
  ApVariant ap_variant = ApVariant::NonInterpolated;
};

struct CompareRow {
  std::string name;
  std::string mode;      // forward | concat | gradient
  std::size_t dim = 0;   // numbers stored per sample
  double map = 0.0;
  std::vector<double> per_class;
};

// Runs every feature choice the library supports through the same
// train/eval split: each activation x_0..x_L and the logits y_L, adjacent
// concatenations, and the gradient features of every layer. One row per
// representation, so the relative merits are visible side by side.
std::vector<CompareRow> run_comparison(const Network& net, const Dataset& data,
                                       const CompareOptions& options);

std::string format_compare_report(const Network& net, const Dataset& data,
                                  const CompareOptions& options,
                                  const std::vector<CompareRow>& rows);

// Round-trip decimal form ("%.17g") so reports are byte-stable.
std::string format_double(double value);

}  // namespace deepfeat
