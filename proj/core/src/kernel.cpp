#include "deepfeat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepfeat/concurrency.hpp"
#include "deepfeat/io.hpp"

namespace deepfeat {

const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Trace:
      return "trace";
    case KernelKind::Dot:
      return "dot";
  }
  return "unknown";
}

double GramMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += at(i, i);
  }
  return t;
}

namespace {

void check_pair(const GradientFeature& f1, const GradientFeature& f2) {
  if (f1.a.size() != f2.a.size() || f1.u.size() != f2.u.size()) {
    throw DimensionError(
        "gradient feature dims differ: (" + std::to_string(f1.a.size()) +
        "," + std::to_string(f1.u.size()) + ") vs (" +
        std::to_string(f2.a.size()) + "," + std::to_string(f2.u.size()) + ")");
  }
  // Layer index 0 marks a feature whose provenance was not recorded
  // (typically one loaded from disk); those compare with anything.
  if (f1.layer_index != 0 && f2.layer_index != 0 &&
      f1.layer_index != f2.layer_index) {
    throw ValueError("cannot compare features from layers " +
                     std::to_string(f1.layer_index) + " and " +
                     std::to_string(f2.layer_index));
  }
}

void check_pair(const ForwardFeature& f1, const ForwardFeature& f2) {
  if (f1.blocks.size() != f2.blocks.size()) {
    throw DimensionError("forward feature block counts differ: " +
                         std::to_string(f1.blocks.size()) + " vs " +
                         std::to_string(f2.blocks.size()));
  }
  for (std::size_t b = 0; b < f1.blocks.size(); ++b) {
    if (f1.blocks[b].size() != f2.blocks[b].size()) {
      throw DimensionError("forward feature block " + std::to_string(b) +
                           " lengths differ: " +
                           std::to_string(f1.blocks[b].size()) + " vs " +
                           std::to_string(f2.blocks[b].size()));
    }
  }
}

double kernel_value(const GradientFeature& f1, const GradientFeature& f2) {
  return trace_kernel(f1, f2);
}

double kernel_value(const ForwardFeature& f1, const ForwardFeature& f2) {
  return dot_kernel(f1, f2);
}

template <typename Feature>
void check_homogeneous(const std::vector<Feature>& features) {
  if (features.empty()) {
    throw ValueError("cannot build a gram matrix from zero features");
  }
  for (std::size_t i = 1; i < features.size(); ++i) {
    check_pair(features[0], features[i]);
  }
}

template <typename Feature>
KernelKind kind_of();

template <>
KernelKind kind_of<GradientFeature>() {
  return KernelKind::Trace;
}
template <>
KernelKind kind_of<ForwardFeature>() {
  return KernelKind::Dot;
}

// Row i owns cells (i, j >= i) plus their mirrors (j, i); every cell is
// written by exactly one row, so parallel row blocks cannot race and the
// result is identical for any thread count.
template <typename Feature>
GramMatrix gram_impl(const std::vector<Feature>& features, unsigned threads) {
  check_homogeneous(features);
  const std::size_t n = features.size();
  GramMatrix g(n, kind_of<Feature>());
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = kernel_value(features[i], features[j]);
        g.at(i, j) = v;
        g.at(j, i) = v;
      }
    }
  });
  return g;
}

template <typename Feature>
MatrixD cross_gram_impl(const std::vector<Feature>& rows,
                        const std::vector<Feature>& cols, unsigned threads) {
  check_homogeneous(rows);
  check_homogeneous(cols);
  check_pair(rows[0], cols[0]);
  MatrixD out(rows.size(), cols.size());
  parallel_for(rows.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        out.at(i, j) = kernel_value(rows[i], cols[j]);
      }
    }
  });
  return out;
}

}  // namespace

double trace_kernel(const GradientFeature& f1, const GradientFeature& f2) {
  check_pair(f1, f2);
  return dot(f1.a, f2.a) * dot(f1.u, f2.u);
}

double dot_kernel(const ForwardFeature& f1, const ForwardFeature& f2) {
  check_pair(f1, f2);
  double sum = 0.0;
  for (std::size_t b = 0; b < f1.blocks.size(); ++b) {
    sum += dot(f1.blocks[b], f2.blocks[b]);
  }
  return sum;
}

GramMatrix gram(const std::vector<GradientFeature>& features,
                unsigned threads) {
  return gram_impl(features, threads);
}

GramMatrix gram(const std::vector<ForwardFeature>& features,
                unsigned threads) {
  return gram_impl(features, threads);
}

MatrixD cross_gram(const std::vector<GradientFeature>& rows,
                   const std::vector<GradientFeature>& cols,
                   unsigned threads) {
  return cross_gram_impl(rows, cols, threads);
}

MatrixD cross_gram(const std::vector<ForwardFeature>& rows,
                   const std::vector<ForwardFeature>& cols, unsigned threads) {
  return cross_gram_impl(rows, cols, threads);
}

std::vector<double> symmetric_eigenvalues(const MatrixD& m) {
  if (m.rows != m.cols) {
    throw DimensionError("eigensolver needs a square matrix, got " +
                         std::to_string(m.rows) + "x" +
                         std::to_string(m.cols));
  }
  const std::size_t n = m.rows;
  MatrixD a = m;
  // Cyclic Jacobi: sweep all upper off-diagonal pairs, rotating each to
  // zero. Quadratic convergence once the matrix is near diagonal.
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += a.at(p, p) * a.at(p, p);
      for (std::size_t q = p + 1; q < n; ++q) {
        off += a.at(p, q) * a.at(p, q);
      }
    }
    // Eigenvalue error is bounded by the off-diagonal Frobenius norm, so
    // this leaves comfortable margin under the 1e-8-scale PSD tolerance.
    if (off <= 1e-26 * std::max(1.0, diag)) {
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) {
          continue;
        }
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        // Stable tangent of the rotation angle, smaller root.
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a.at(r, p);
          const double arq = a.at(r, q);
          a.at(r, p) = c * arp - s * arq;
          a.at(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a.at(p, r);
          const double aqr = a.at(q, r);
          a.at(p, r) = c * apr - s * aqr;
          a.at(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    eig[i] = a.at(i, i);
  }
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<double> symmetric_eigenvalues(const GramMatrix& g) {
  MatrixD m(g.n, g.n);
  m.data = g.entries;
  return symmetric_eigenvalues(m);
}

double min_eigenvalue(const GramMatrix& g) {
  return symmetric_eigenvalues(g).front();
}

namespace {

constexpr char kGramMagic[4] = {'D', 'F', 'G', '1'};

}  // namespace

void save_gram(const GramMatrix& g, const std::string& path) {
  BinaryWriter out;
  out.magic(kGramMagic);
  out.u32(static_cast<std::uint32_t>(g.n));
  out.u8(static_cast<std::uint8_t>(g.kind));
  out.f64_array(g.entries.data(), g.entries.size());
  out.commit(path);
}

void save_cross_gram(const MatrixD& cross, KernelKind kind,
                     const std::string& path) {
  BinaryWriter out;
  out.magic(kGramMagic);
  out.u32(static_cast<std::uint32_t>(cross.rows));
  out.u32(static_cast<std::uint32_t>(cross.cols));
  out.u8(static_cast<std::uint8_t>(kind));
  out.f64_array(cross.data.data(), cross.data.size());
  out.commit(path);
}

LoadedGram load_gram(const std::string& path) {
  BinaryReader in(path);
  in.expect_magic(kGramMagic, "gram");
  const std::uint64_t n = in.u32();
  LoadedGram g;
  // Square layout: u8 kind + 8n² bytes remain. Rectangular: u32 m + u8
  // kind + 8nm bytes. They cannot coincide: subtracting the two lengths
  // would need 8·n·(n−m) = 4, impossible for integers.
  if (in.remaining() == 1 + 8 * n * n) {
    g.square = true;
    g.rows = n;
    g.cols = n;
  } else {
    const std::uint64_t m = in.u32();
    if (in.remaining() != 1 + 8 * n * m) {
      throw FormatError(path + ": gram payload size " +
                            std::to_string(in.remaining()) +
                            " matches neither a " + std::to_string(n) + "x" +
                            std::to_string(n) + " square nor a " +
                            std::to_string(n) + "x" + std::to_string(m) +
                            " rectangle",
                        in.offset());
    }
    g.square = false;
    g.rows = n;
    g.cols = m;
  }
  const std::uint64_t kind_offset = in.offset();
  const std::uint8_t kind_code = in.u8();
  if (kind_code > 1) {
    throw FormatError(path + ": unknown kernel code " +
                          std::to_string(kind_code),
                      kind_offset);
  }
  g.kind = static_cast<KernelKind>(kind_code);
  g.entries.resize(g.rows * g.cols);
  in.f64_array(g.entries.data(), g.entries.size());
  in.expect_end("gram");
  return g;
}

GramMatrix LoadedGram::as_square() const {
  if (!square) {
    throw ValueError("gram file holds a rectangular " + std::to_string(rows) +
                     "x" + std::to_string(cols) + " block, expected square");
  }
  GramMatrix g(rows, kind);
  g.entries = entries;
  return g;
}

}  // namespace deepfeat
