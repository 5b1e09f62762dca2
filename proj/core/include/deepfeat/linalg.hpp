#pragma once

#include <cstddef>
#include <vector>

#include "deepfeat/errors.hpp"

namespace deepfeat {

// Feature-domain storage is single precision; every reduction accumulates in
// double with ascending index order, so results never depend on threading.
// Probability-domain quantities (softmax outputs, label vectors, backward
// signals, normalized kernel factors) live in std::vector<double> instead:
// their stated tolerances are tighter than float resolution.
using Vector = std::vector<float>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, float fill = 0.0f)
      : rows(r), cols(c), data(r * c, fill) {}

  float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t size() const { return data.size(); }
};

// Double-precision dense matrix. Only oracle paths materialize these.
struct MatrixD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  MatrixD() = default;
  MatrixD(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t size() const { return data.size(); }
};

double dot(const Vector& x, const Vector& y);
double dot(const std::vector<double>& x, const std::vector<double>& y);

double l2_norm(const Vector& x);
double l2_norm(const std::vector<double>& x);

// x / ||x||; the zero vector maps to the zero vector (a dead-ReLU layer can
// legitimately produce one, and a zero factor contributes kernel value 0).
Vector normalize(const Vector& x);
std::vector<double> normalize(const std::vector<double>& x);

std::vector<double> widen(const Vector& x);
Vector narrow(const std::vector<double>& x);

// out[j] = sum_i W[i,j] * x[i], W is [in x out], sum over ascending i.
Vector matvec_transposed(const Matrix& w, const Vector& x);

// out[i] = sum_j W[i,j] * d[j], ascending j. Backward-propagation direction.
std::vector<double> matvec(const Matrix& w, const std::vector<double>& d);

bool all_finite(const Vector& x);
bool all_finite(const std::vector<double>& x);
bool all_finite(const Matrix& m);

}  // namespace deepfeat
