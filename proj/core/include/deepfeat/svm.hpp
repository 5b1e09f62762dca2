#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/dataset.hpp"
#include "deepfeat/kernel.hpp"

namespace deepfeat {

struct SvmTrainOptions {
  double C = 1.0;
  double tol = 1e-3;           // KKT violation threshold m(α) - M(α)
  std::size_t max_passes = 1'000'000;  // pair updates before giving up
};

// Dual solution of one binary problem over a precomputed kernel.
struct SvmBinaryModel {
  std::vector<double> alpha;      // 0 <= alpha_i <= C
  std::vector<int> signed_labels;  // +1 / -1
  double bias = 0.0;
  double C = 1.0;

  std::size_t support_count() const;
};

// One binary model per class, trained one-vs-rest over a shared gram.
// The kernel tag and the fingerprint of the training feature file travel
// with the model so evaluation can refuse mismatched inputs.
struct OvrSvmModel {
  std::vector<SvmBinaryModel> classes;
  KernelKind kernel = KernelKind::Trace;
  std::string train_fingerprint;  // empty when unknown

  std::size_t class_count() const { return classes.size(); }
  std::size_t train_count() const;
};

// Sequential minimal optimization on the dual
//   max Σα_i - ½ ΣΣ α_iα_j y_iy_j K_ij,  0 <= α <= C,  Σ α_iy_i = 0,
// selecting the maximal violating pair each step (ties broken by lowest
// index, so training is bit-reproducible). Converged means the KKT
// violation is below tol and the duality gap below 1e-3·(1+|objective|).
SvmBinaryModel train_binary(const GramMatrix& gram,
                            const std::vector<int>& signed_labels,
                            const SvmTrainOptions& options = {});

OvrSvmModel train_ovr(const GramMatrix& gram, const MultiLabelSet& labels,
                      const SvmTrainOptions& options = {},
                      unsigned threads = 1);

// score(t, j) = Σ_i α_ij·y_ij·cross[t,i] + b_j for every test row t and
// class j. Columns of `cross` must align with the training samples.
MatrixD decision_scores(const OvrSvmModel& model, const MatrixD& cross);

// Dual objective Σα - ½αᵀQα of a feasible point, used by diagnostics.
double dual_objective(const GramMatrix& gram,
                      const std::vector<int>& signed_labels,
                      const std::vector<double>& alpha);

void save_model(const OvrSvmModel& model, const std::string& path);
OvrSvmModel load_model(const std::string& path);

}  // namespace deepfeat
