#include "deepfeat/svm.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <json.hpp>

#include "deepfeat/concurrency.hpp"
#include "deepfeat/io.hpp"

namespace deepfeat {

std::size_t SvmBinaryModel::support_count() const {
  std::size_t count = 0;
  for (double a : alpha) {
    count += (a > 0.0) ? 1 : 0;
  }
  return count;
}

std::size_t OvrSvmModel::train_count() const {
  return classes.empty() ? 0 : classes.front().alpha.size();
}

namespace {

// State shared by the SMO helpers. G caches the gradient of
// ½αᵀQα - Σα, so G_t = Σ_s Q_ts α_s - 1 with Q_ts = y_t y_s K_ts.
struct SmoState {
  const GramMatrix& gram;
  const std::vector<int>& y;
  double C;
  std::vector<double> alpha;
  std::vector<double> G;
};

// Maximal violating pair: i maximizes -y_t·G_t over the set still able to
// move up, j minimizes it over the set able to move down. Optimality is
// m <= M; the gap m - M measures the worst KKT violation.
struct ViolatingPair {
  std::ptrdiff_t i = -1;
  std::ptrdiff_t j = -1;
  double m = -std::numeric_limits<double>::infinity();
  double M = std::numeric_limits<double>::infinity();
};

ViolatingPair select_pair(const SmoState& s) {
  ViolatingPair p;
  const std::size_t n = s.y.size();
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -s.y[t] * s.G[t];
    const bool in_up = (s.y[t] > 0) ? (s.alpha[t] < s.C) : (s.alpha[t] > 0.0);
    const bool in_low = (s.y[t] > 0) ? (s.alpha[t] > 0.0) : (s.alpha[t] < s.C);
    if (in_up && v > p.m) {
      p.m = v;
      p.i = static_cast<std::ptrdiff_t>(t);
    }
    if (in_low && v < p.M) {
      p.M = v;
      p.j = static_cast<std::ptrdiff_t>(t);
    }
  }
  return p;
}

// Bias from the KKT conditions: free support vectors pin it exactly, and
// their -y_t·G_t values are averaged; without any, the midpoint of the
// feasible interval [M, m] is used.
double estimate_bias(const SmoState& s, const ViolatingPair& p) {
  double sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < s.y.size(); ++t) {
    if (s.alpha[t] > 0.0 && s.alpha[t] < s.C) {
      sum += -s.y[t] * s.G[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    return sum / static_cast<double>(free_count);
  }
  return 0.5 * (p.m + p.M);
}

double dual_value(const SmoState& s) {
  // Σα - ½αᵀQα, with (Qα)_t taken from the gradient cache.
  double v = 0.0;
  for (std::size_t t = 0; t < s.y.size(); ++t) {
    v += 0.5 * s.alpha[t] * (1.0 - s.G[t]);
  }
  return v;
}

// Primal-minus-dual for the current α and a concrete bias. Weak duality
// makes this non-negative for every bias choice, so it is a sound
// certificate of closeness to the optimum.
double duality_gap(const SmoState& s, double bias) {
  double gap = 0.0;
  for (std::size_t t = 0; t < s.y.size(); ++t) {
    gap += s.alpha[t] * s.G[t];
    gap += s.C * std::max(0.0, -s.G[t] - s.y[t] * bias);
  }
  return gap;
}

}  // namespace

SvmBinaryModel train_binary(const GramMatrix& gram,
                            const std::vector<int>& signed_labels,
                            const SvmTrainOptions& options) {
  const std::size_t n = signed_labels.size();
  if (gram.n != n) {
    throw DimensionError("gram size " + std::to_string(gram.n) + " vs " +
                         std::to_string(n) + " labels");
  }
  if (n == 0) {
    throw ValueError("cannot train on zero samples");
  }
  if (!(options.C > 0.0)) {
    throw ValueError("C must be positive, got " + std::to_string(options.C));
  }
  bool has_pos = false;
  bool has_neg = false;
  for (int y : signed_labels) {
    if (y == 1) {
      has_pos = true;
    } else if (y == -1) {
      has_neg = true;
    } else {
      throw ValueError("labels must be +1 or -1, got " + std::to_string(y));
    }
  }
  if (!has_pos || !has_neg) {
    throw ValueError(
        "training needs both label signs, got all-same-sign labels");
  }

  SmoState s{gram, signed_labels, options.C,
             std::vector<double>(n, 0.0), std::vector<double>(n, -1.0)};

  const double gap_tol_scale = 1e-3;
  double stop_tol = options.tol;
  std::size_t passes = 0;
  ViolatingPair pair;

  while (true) {
    pair = select_pair(s);
    if (pair.i < 0 || pair.j < 0) {
      // Unreachable while Σαy = 0 holds with both signs present; a box
      // side can only empty out if feasibility was lost.
      throw ConvergenceError("SMO lost dual feasibility", 0.0);
    }
    if (pair.m - pair.M <= stop_tol) {
      const double bias = estimate_bias(s, pair);
      const double objective = dual_value(s);
      const double gap = duality_gap(s, bias);
      if (gap <= gap_tol_scale * (1.0 + std::abs(objective))) {
        break;
      }
      if (pair.m - pair.M <= 1e-14) {
        throw ConvergenceError(
            "SMO stalled at duality gap " + std::to_string(gap), gap);
      }
      // KKT tolerance met but the gap certificate is not; tighten and
      // keep optimizing.
      stop_tol = std::max(stop_tol * 0.1, 1e-14);
      continue;
    }

    const std::size_t i = static_cast<std::size_t>(pair.i);
    const std::size_t j = static_cast<std::size_t>(pair.j);
    const double yi = s.y[i];
    const double yj = s.y[j];

    double quad = gram.at(i, i) + gram.at(j, j) - 2.0 * gram.at(i, j);
    if (quad <= 1e-12) {
      quad = 1e-12;  // flat or indefinite direction; take a box-bounded step
    }
    double step = (pair.m - pair.M) / quad;
    const double cap_i = (yi > 0) ? options.C - s.alpha[i] : s.alpha[i];
    const double cap_j = (yj > 0) ? s.alpha[j] : options.C - s.alpha[j];
    step = std::min(step, std::min(cap_i, cap_j));

    s.alpha[i] += yi * step;
    s.alpha[j] -= yj * step;
    for (std::size_t t = 0; t < n; ++t) {
      s.G[t] += step * s.y[t] * (gram.at(t, i) - gram.at(t, j));
    }

    if (++passes >= options.max_passes) {
      const double bias = estimate_bias(s, select_pair(s));
      const double gap = duality_gap(s, bias);
      throw ConvergenceError("SMO did not converge within " +
                                 std::to_string(options.max_passes) +
                                 " pair updates, duality gap " +
                                 std::to_string(gap),
                             gap);
    }
  }

  SvmBinaryModel model;
  model.alpha = std::move(s.alpha);
  model.signed_labels = signed_labels;
  model.C = options.C;
  model.bias = estimate_bias(
      SmoState{gram, signed_labels, options.C, model.alpha, s.G}, pair);
  return model;
}

OvrSvmModel train_ovr(const GramMatrix& gram, const MultiLabelSet& labels,
                      const SvmTrainOptions& options, unsigned threads) {
  if (gram.n != labels.n) {
    throw DimensionError("gram size " + std::to_string(gram.n) + " vs " +
                         std::to_string(labels.n) + " labeled samples");
  }
  OvrSvmModel model;
  model.kernel = gram.kind;
  model.classes.resize(labels.class_count);
  parallel_for(labels.class_count, threads,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t j = begin; j < end; ++j) {
                   std::vector<int> signed_labels(labels.n);
                   for (std::size_t i = 0; i < labels.n; ++i) {
                     signed_labels[i] = labels.relevant(i, j) ? 1 : -1;
                   }
                   try {
                     model.classes[j] =
                         train_binary(gram, signed_labels, options);
                   } catch (const ConvergenceError& e) {
                     throw ConvergenceError("class " + std::to_string(j) +
                                                ": " + e.what(),
                                            e.final_gap);
                   } catch (const ValueError& e) {
                     throw ValueError("class " + std::to_string(j) + ": " +
                                      e.what());
                   }
                 }
               });
  return model;
}

MatrixD decision_scores(const OvrSvmModel& model, const MatrixD& cross) {
  if (model.classes.empty()) {
    throw ValueError("model has no classes");
  }
  const std::size_t n_train = model.train_count();
  if (cross.cols != n_train) {
    throw DimensionError("cross gram has " + std::to_string(cross.cols) +
                         " columns, model was trained on " +
                         std::to_string(n_train) + " samples");
  }
  MatrixD scores(cross.rows, model.classes.size());
  for (std::size_t t = 0; t < cross.rows; ++t) {
    for (std::size_t j = 0; j < model.classes.size(); ++j) {
      const SvmBinaryModel& m = model.classes[j];
      double acc = 0.0;
      for (std::size_t i = 0; i < n_train; ++i) {
        acc += m.alpha[i] * m.signed_labels[i] * cross.at(t, i);
      }
      scores.at(t, j) = acc + m.bias;
    }
  }
  return scores;
}

double dual_objective(const GramMatrix& gram,
                      const std::vector<int>& signed_labels,
                      const std::vector<double>& alpha) {
  if (gram.n != signed_labels.size() || gram.n != alpha.size()) {
    throw DimensionError("objective needs matching gram/label/alpha sizes");
  }
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      quadratic += alpha[i] * alpha[j] * signed_labels[i] * signed_labels[j] *
                   gram.at(i, j);
    }
  }
  return linear - 0.5 * quadratic;
}

void save_model(const OvrSvmModel& model, const std::string& path) {
  if (model.classes.empty()) {
    throw ValueError("refusing to save a model with no classes");
  }
  nlohmann::json doc;
  doc["format"] = "deepfeat-svm-model";
  doc["version"] = 1;
  doc["kernel"] = kernel_name(model.kernel);
  doc["n_train"] = model.train_count();
  doc["train_fingerprint"] = model.train_fingerprint;
  nlohmann::json classes = nlohmann::json::array();
  for (const SvmBinaryModel& m : model.classes) {
    nlohmann::json c;
    c["alpha"] = m.alpha;
    c["signed_labels"] = m.signed_labels;
    c["bias"] = m.bias;
    c["C"] = m.C;
    classes.push_back(std::move(c));
  }
  doc["classes"] = std::move(classes);
  atomic_write_text(path, doc.dump(2) + "\n");
}

OvrSvmModel load_model(const std::string& path) {
  nlohmann::json doc;
  {
    const auto bytes = read_file_bytes(path);
    doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) {
      throw FormatError(path + ": not valid JSON");
    }
  }
  try {
    if (doc.at("format").get<std::string>() != "deepfeat-svm-model") {
      throw FormatError(path + ": not a deepfeat SVM model file");
    }
    if (doc.at("version").get<int>() != 1) {
      throw FormatError(path + ": unsupported model version " +
                        doc["version"].dump());
    }
    OvrSvmModel model;
    const std::string kernel = doc.at("kernel").get<std::string>();
    if (kernel == "trace") {
      model.kernel = KernelKind::Trace;
    } else if (kernel == "dot") {
      model.kernel = KernelKind::Dot;
    } else {
      throw FormatError(path + ": unknown kernel \"" + kernel + "\"");
    }
    model.train_fingerprint =
        doc.at("train_fingerprint").get<std::string>();
    const std::size_t n_train = doc.at("n_train").get<std::size_t>();
    for (const auto& c : doc.at("classes")) {
      SvmBinaryModel m;
      m.alpha = c.at("alpha").get<std::vector<double>>();
      m.signed_labels = c.at("signed_labels").get<std::vector<int>>();
      m.bias = c.at("bias").get<double>();
      m.C = c.at("C").get<double>();
      if (m.alpha.size() != n_train || m.signed_labels.size() != n_train) {
        throw FormatError(path + ": class arrays disagree with n_train");
      }
      for (int y : m.signed_labels) {
        if (y != 1 && y != -1) {
          throw FormatError(path + ": signed labels must be +1/-1");
        }
      }
      for (double a : m.alpha) {
        if (!(a >= 0.0 && a <= m.C)) {
          throw FormatError(path + ": alpha outside [0, C]");
        }
      }
      model.classes.push_back(std::move(m));
    }
    if (model.classes.empty()) {
      throw FormatError(path + ": model has no classes");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace deepfeat
