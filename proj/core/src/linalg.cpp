#include "deepfeat/linalg.hpp"

#include <cmath>
#include <string>

namespace deepfeat {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch, " +
                         std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double dot(const Vector& x, const Vector& y) {
  require_same_length(x.size(), y.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // float*float promoted to double is exact, so dot(x,y) == dot(y,x) bitwise
    acc += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  }
  return acc;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  require_same_length(x.size(), y.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double l2_norm(const Vector& x) { return std::sqrt(dot(x, x)); }

double l2_norm(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

Vector normalize(const Vector& x) {
  const double norm = l2_norm(x);
  if (norm == 0.0) return x;
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(x[i]) / norm);
  }
  return out;
}

std::vector<double> normalize(const std::vector<double>& x) {
  const double norm = l2_norm(x);
  if (norm == 0.0) return x;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / norm;
  return out;
}

std::vector<double> widen(const Vector& x) {
  return std::vector<double>(x.begin(), x.end());
}

Vector narrow(const std::vector<double>& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(x[i]);
  }
  return out;
}

Vector matvec_transposed(const Matrix& w, const Vector& x) {
  if (w.rows != x.size()) {
    throw DimensionError("matvec_transposed: matrix rows " +
                         std::to_string(w.rows) + " vs vector length " +
                         std::to_string(x.size()));
  }
  std::vector<double> acc(w.cols, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const float* row = w.data.data() + i * w.cols;
    const double xi = static_cast<double>(x[i]);
    for (std::size_t j = 0; j < w.cols; ++j) {
      acc[j] += static_cast<double>(row[j]) * xi;
    }
  }
  Vector out(w.cols);
  for (std::size_t j = 0; j < w.cols; ++j) {
    out[j] = static_cast<float>(acc[j]);
  }
  return out;
}

std::vector<double> matvec(const Matrix& w, const std::vector<double>& d) {
  if (w.cols != d.size()) {
    throw DimensionError("matvec: matrix cols " + std::to_string(w.cols) +
                         " vs vector length " + std::to_string(d.size()));
  }
  std::vector<double> out(w.rows, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const float* row = w.data.data() + i * w.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) {
      acc += static_cast<double>(row[j]) * d[j];
    }
    out[i] = acc;
  }
  return out;
}

bool all_finite(const Vector& x) {
  for (float v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const std::vector<double>& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const Matrix& m) {
  for (float v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace deepfeat
