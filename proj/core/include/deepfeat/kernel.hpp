#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/gradient.hpp"
#include "deepfeat/linalg.hpp"

namespace deepfeat {

enum class KernelKind : std::uint8_t {
  Trace = 0,
  Dot = 1,
};

const char* kernel_name(KernelKind k);

// Symmetric n×n kernel matrix, double precision. Each entry is computed
// once for i <= j and mirrored, so symmetry is exact by construction.
struct GramMatrix {
  std::size_t n = 0;
  std::vector<double> entries;  // row-major
  KernelKind kind = KernelKind::Trace;

  GramMatrix() = default;
  GramMatrix(std::size_t n_, KernelKind kind_)
      : n(n_), entries(n_ * n_, 0.0), kind(kind_) {}

  double& at(std::size_t i, std::size_t j) { return entries[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  double trace() const;
};

// Tr(AᵀB) for the rank-1 matrices A = a₁u₁ᵀ, B = a₂u₂ᵀ, computed from the
// factors alone: dot(a₁,a₂)·dot(u₁,u₂). O(d+D) instead of O(d·D).
double trace_kernel(const GradientFeature& f1, const GradientFeature& f2);

// Dot product of concatenated forward features, block structure checked.
double dot_kernel(const ForwardFeature& f1, const ForwardFeature& f2);

GramMatrix gram(const std::vector<GradientFeature>& features,
                unsigned threads = 1);
GramMatrix gram(const std::vector<ForwardFeature>& features,
                unsigned threads = 1);

// Kernel values between two feature lists; rows index the first list.
// cross_gram(A, B) equals cross_gram(B, A) transposed, bit for bit.
MatrixD cross_gram(const std::vector<GradientFeature>& rows,
                   const std::vector<GradientFeature>& cols,
                   unsigned threads = 1);
MatrixD cross_gram(const std::vector<ForwardFeature>& rows,
                   const std::vector<ForwardFeature>& cols,
                   unsigned threads = 1);

// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
// Diagnostic-grade: O(n³) per sweep, intended for the `check` path.
std::vector<double> symmetric_eigenvalues(const MatrixD& m);
std::vector<double> symmetric_eigenvalues(const GramMatrix& g);
double min_eigenvalue(const GramMatrix& g);

// Gram files hold either a square n×n kernel matrix or a rectangular
// test×train block. The two header layouts differ by one u32; the file
// length tells them apart unambiguously (8n² never equals 4 + 8nm).
struct LoadedGram {
  KernelKind kind = KernelKind::Trace;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool square = false;
  std::vector<double> entries;

  double at(std::size_t i, std::size_t j) const {
    return entries[i * cols + j];
  }
  GramMatrix as_square() const;
};

void save_gram(const GramMatrix& g, const std::string& path);
void save_cross_gram(const MatrixD& cross, KernelKind kind,
                     const std::string& path);
LoadedGram load_gram(const std::string& path);

}  // namespace deepfeat
