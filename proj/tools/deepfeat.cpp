// Command line front end for the deepfeat library. Subcommands cover the
// whole pipeline: synthesize fixtures, extract features, build gram
// matrices, train one-vs-rest SVMs, evaluate rankings, run the oracle
// suites, and inspect any file the tool writes.
//
// Exit codes: 0 success, 1 usage error, 2 data or format error,
// 3 self-check failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "deepfeat/dataset.hpp"
#include "deepfeat/errors.hpp"
#include "deepfeat/features.hpp"
#include "deepfeat/gradient.hpp"
#include "deepfeat/io.hpp"
#include "deepfeat/kernel.hpp"
#include "deepfeat/metrics.hpp"
#include "deepfeat/network.hpp"
#include "deepfeat/pipeline.hpp"
#include "deepfeat/selfcheck.hpp"
#include "deepfeat/svm.hpp"

namespace {

using namespace deepfeat;

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string piece =
        text.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(piece, &used);
      if (used != piece.size() || v == 0) throw std::invalid_argument(piece);
      dims.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValueError("bad --dims entry '" + piece +
                       "': expected comma-separated positive integers");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return dims;
}

ApVariant parse_ap_variant(const std::string& name) {
  if (name == "non-interpolated") return ApVariant::NonInterpolated;
  if (name == "11-point") return ApVariant::ElevenPoint;
  throw ValueError("unknown AP variant '" + name + "'");
}

FeatureMode parse_mode(const std::string& name) {
  if (name == "gradient") return FeatureMode::Gradient;
  if (name == "forward") return FeatureMode::Forward;
  if (name == "concat") return FeatureMode::Concat;
  throw ValueError("unknown feature mode '" + name + "'");
}

// The kernel a feature kind supports; pairs of rank-1 factors get the
// factorized trace kernel, single vectors the plain dot product.
KernelKind kernel_for(FeatureKind kind) {
  return kind == FeatureKind::GradientPair ? KernelKind::Trace
                                           : KernelKind::Dot;
}

void require_kernel_match(KernelKind requested, FeatureKind kind) {
  const KernelKind natural = kernel_for(kind);
  if (requested != natural) {
    throw ValueError(std::string("kernel '") + kernel_name(requested) +
                     "' does not apply to " + feature_kind_name(kind) +
                     " features; use '" + kernel_name(natural) + "'");
  }
}

std::string fingerprint_of(const std::string& path) {
  return to_hex(fnv1a64_file(path));
}

// ---------------------------------------------------------------- commands

struct MakeSyntheticArgs {
  std::uint64_t seed = 42;
  std::string dims_text = "40,64,48,8";
  std::size_t n = 200;
  std::size_t classes = 5;
  std::size_t dim = 0;  // 0: take the first entry of --dims
  double noise = 0.0;
  double extra_rate = 0.25;
  double scale = 1.0;
  bool with_bias = false;
  std::string net_path;
  std::string data_path;
};

int run_make_synthetic(const MakeSyntheticArgs& a) {
  if (a.net_path.empty() && a.data_path.empty()) {
    throw ValueError("nothing to do: give --net and/or --data output paths");
  }
  const std::vector<std::size_t> dims = parse_dims(a.dims_text);
  if (!a.net_path.empty()) {
    const Network net = make_synthetic_network(a.seed, dims, a.with_bias);
    save_network(net, a.net_path);
    std::cout << "wrote network " << a.net_path << " (layers "
              << net.layer_count() << ", input " << net.input_dim()
              << ", output " << net.class_count() << ")\n";
  }
  if (!a.data_path.empty()) {
    PlantedTaskOptions opt;
    opt.n = a.n;
    opt.dim = a.dim != 0 ? a.dim : dims.front();
    opt.class_count = a.classes;
    opt.noise = a.noise;
    opt.extra_rate = a.extra_rate;
    opt.prototype_scale = a.scale;
    const Dataset data = make_planted_dataset(a.seed, opt);
    save_dataset(data, a.data_path);
    std::cout << "wrote dataset " << a.data_path << " (n " << data.n
              << ", dim " << data.dim << ", classes "
              << data.labels.class_count << ")\n";
  }
  return 0;
}

struct ExtractArgs {
  std::string net_path;
  std::string data_path;
  std::string out_path;
  std::string mode = "gradient";
  std::int64_t layer = -1;  // -1: default to L-1
  double tau = 2.0;
  unsigned threads = 1;
};

int run_extract(const ExtractArgs& a) {
  const Network net = load_network(a.net_path);
  const Dataset data = load_dataset(a.data_path);
  ExtractOptions opt;
  opt.mode = parse_mode(a.mode);
  opt.layer = a.layer >= 0 ? static_cast<std::size_t>(a.layer)
                           : net.layer_count() - 1;
  opt.tau = a.tau;
  opt.threads = a.threads;
  const FeatureSet features = extract_features(net, data, opt);
  save_features(features, a.out_path);
  std::cout << "wrote " << features.sample_count() << " "
            << feature_kind_name(features.kind) << " features to "
            << a.out_path << " (mode " << feature_mode_name(opt.mode)
            << ", layer " << opt.layer << ", dims " << features.dim_a;
  if (features.kind == FeatureKind::GradientPair) {
    std::cout << "x" << features.dim_u;
  }
  std::cout << ")\n";
  return 0;
}

struct GramArgs {
  std::string features_path;
  std::string test_path;  // empty: square gram over --features
  std::string out_path;
  std::string kernel = "auto";
  unsigned threads = 1;
};

int run_gram(const GramArgs& a) {
  const FeatureSet train = load_features(a.features_path);
  if (a.kernel != "auto") {
    KernelKind requested;
    if (a.kernel == "trace") {
      requested = KernelKind::Trace;
    } else if (a.kernel == "dot") {
      requested = KernelKind::Dot;
    } else {
      throw ValueError("unknown kernel '" + a.kernel + "'");
    }
    require_kernel_match(requested, train.kind);
  }
  if (a.test_path.empty()) {
    GramMatrix g;
    if (train.kind == FeatureKind::GradientPair) {
      g = gram(train.to_gradient_features(), a.threads);
    } else {
      g = gram(train.to_forward_features(), a.threads);
    }
    save_gram(g, a.out_path);
    std::cout << "wrote " << g.n << "x" << g.n << " " << kernel_name(g.kind)
              << " gram to " << a.out_path << "\n";
    return 0;
  }
  const FeatureSet test = load_features(a.test_path);
  if (test.kind != train.kind) {
    throw DimensionError(std::string("feature kinds differ: --test holds ") +
                         feature_kind_name(test.kind) + ", --features holds " +
                         feature_kind_name(train.kind));
  }
  MatrixD cross;
  if (train.kind == FeatureKind::GradientPair) {
    cross = cross_gram(test.to_gradient_features(),
                       train.to_gradient_features(), a.threads);
  } else {
    cross = cross_gram(test.to_forward_features(), train.to_forward_features(),
                       a.threads);
  }
  save_cross_gram(cross, kernel_for(train.kind), a.out_path);
  std::cout << "wrote " << cross.rows << "x" << cross.cols << " "
            << kernel_name(kernel_for(train.kind)) << " cross gram to "
            << a.out_path << " (rows = test, cols = train)\n";
  return 0;
}

struct TrainArgs {
  std::string gram_path;
  std::string labels_path;
  std::string features_path;
  std::string out_path;
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 1'000'000;
  unsigned threads = 1;
};

int run_train(const TrainArgs& a) {
  const LoadedGram loaded = load_gram(a.gram_path);
  const GramMatrix g = loaded.as_square();
  const Dataset data = load_dataset(a.labels_path);
  if (data.labels.n != g.n) {
    throw DimensionError("gram holds " + std::to_string(g.n) +
                         " samples but the label file holds " +
                         std::to_string(data.labels.n));
  }
  const FeatureSet features = load_features(a.features_path);
  if (features.sample_count() != g.n) {
    throw DimensionError("gram holds " + std::to_string(g.n) +
                         " samples but the feature file holds " +
                         std::to_string(features.sample_count()));
  }
  if (kernel_for(features.kind) != g.kind) {
    throw ValueError(std::string("gram kernel '") + kernel_name(g.kind) +
                     "' does not match the feature kind '" +
                     feature_kind_name(features.kind) + "'");
  }
  SvmTrainOptions opt;
  opt.C = a.C;
  opt.tol = a.tol;
  opt.max_passes = a.max_passes;
  OvrSvmModel model = train_ovr(g, data.labels, opt, a.threads);
  model.train_fingerprint = fingerprint_of(a.features_path);
  save_model(model, a.out_path);
  std::size_t support = 0;
  for (const auto& c : model.classes) support += c.support_count();
  std::cout << "wrote model " << a.out_path << " (classes "
            << model.class_count() << ", train " << model.train_count()
            << ", support vectors " << support << " total)\n";
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string train_features_path;
  std::string test_features_path;
  std::string cross_gram_path;
  std::string labels_path;
  std::string report_path;
  std::string mode;   // annotation only
  std::string layer;  // annotation only
  std::string ap_variant = "non-interpolated";
  unsigned threads = 1;
};

int run_eval(const EvalArgs& a) {
  if (a.test_features_path.empty() == a.cross_gram_path.empty()) {
    throw ValueError(
        "give exactly one of --test-features or --cross-gram");
  }
  const OvrSvmModel model = load_model(a.model_path);
  const FeatureSet train = load_features(a.train_features_path);
  const std::string fingerprint = fingerprint_of(a.train_features_path);
  if (!model.train_fingerprint.empty() &&
      model.train_fingerprint != fingerprint) {
    throw ValueError("training feature fingerprint " + fingerprint +
                     " does not match the model's " + model.train_fingerprint +
                     "; the model was trained on different features");
  }
  if (train.sample_count() != model.train_count()) {
    throw DimensionError("model was trained on " +
                         std::to_string(model.train_count()) +
                         " samples but --train-features holds " +
                         std::to_string(train.sample_count()));
  }
  if (kernel_for(train.kind) != model.kernel) {
    throw ValueError(std::string("model kernel '") +
                     kernel_name(model.kernel) +
                     "' does not match the training feature kind '" +
                     feature_kind_name(train.kind) + "'");
  }

  MatrixD cross;
  if (!a.test_features_path.empty()) {
    const FeatureSet test = load_features(a.test_features_path);
    if (test.kind != train.kind) {
      throw DimensionError(
          std::string("feature kinds differ: --test-features holds ") +
          feature_kind_name(test.kind) + ", --train-features holds " +
          feature_kind_name(train.kind));
    }
    if (train.kind == FeatureKind::GradientPair) {
      cross = cross_gram(test.to_gradient_features(),
                         train.to_gradient_features(), a.threads);
    } else {
      cross = cross_gram(test.to_forward_features(),
                         train.to_forward_features(), a.threads);
    }
  } else {
    const LoadedGram loaded = load_gram(a.cross_gram_path);
    if (loaded.kind != model.kernel) {
      throw ValueError(std::string("cross gram kernel '") +
                       kernel_name(loaded.kind) +
                       "' does not match the model kernel '" +
                       kernel_name(model.kernel) + "'");
    }
    if (loaded.cols != model.train_count()) {
      throw DimensionError("cross gram has " + std::to_string(loaded.cols) +
                           " columns but the model was trained on " +
                           std::to_string(model.train_count()) + " samples");
    }
    cross.rows = loaded.rows;
    cross.cols = loaded.cols;
    cross.data = loaded.entries;
  }

  const Dataset data = load_dataset(a.labels_path);
  if (data.labels.n != cross.rows) {
    throw DimensionError("label file holds " + std::to_string(data.labels.n) +
                         " samples but " + std::to_string(cross.rows) +
                         " are being scored");
  }
  if (data.labels.class_count != model.class_count()) {
    throw DimensionError("label file has " +
                         std::to_string(data.labels.class_count) +
                         " classes but the model has " +
                         std::to_string(model.class_count()));
  }

  const MatrixD scores = decision_scores(model, cross);
  EvalSummary summary;
  summary.result = mean_ap(scores, data.labels, parse_ap_variant(a.ap_variant));
  summary.kernel = model.kernel;
  if (!a.mode.empty()) summary.mode = a.mode;
  if (!a.layer.empty()) summary.layer = a.layer;
  summary.train_count = model.train_count();
  summary.test_count = cross.rows;

  const std::string report = format_eval_report(summary);
  std::cout << report;
  if (!a.report_path.empty()) {
    atomic_write_text(a.report_path, report);
  }
  return 0;
}

struct CompareArgs {
  std::string net_path;
  std::string data_path;
  std::string report_path;
  std::string ap_variant = "non-interpolated";
  double tau = 2.0;
  double C = 1.0;
  double train_fraction = 0.5;
  unsigned threads = 1;
};

int run_compare(const CompareArgs& a) {
  const Network net = load_network(a.net_path);
  const Dataset data = load_dataset(a.data_path);
  CompareOptions opt;
  opt.tau = a.tau;
  opt.C = a.C;
  opt.train_fraction = a.train_fraction;
  opt.threads = a.threads;
  opt.ap_variant = parse_ap_variant(a.ap_variant);
  const std::vector<CompareRow> rows = run_comparison(net, data, opt);
  const std::string report = format_compare_report(net, data, opt, rows);
  std::cout << report;
  if (!a.report_path.empty()) {
    atomic_write_text(a.report_path, report);
  }
  return 0;
}

int run_check(std::uint64_t seed) {
  const std::vector<CheckResult> results = run_all_checks(seed);
  bool all_passed = true;
  for (const CheckResult& r : results) {
    char error_text[64];
    std::snprintf(error_text, sizeof error_text, "%.3g", r.max_error);
    char tol_text[64];
    std::snprintf(tol_text, sizeof tol_text, "%.3g", r.tolerance);
    std::cout << "check " << r.name << ": " << (r.passed ? "PASS" : "FAIL")
              << " (max error " << error_text << ", tolerance " << tol_text
              << "; " << r.detail << ")\n";
    all_passed = all_passed && r.passed;
  }
  if (!all_passed) {
    std::cout << "self-check FAILED\n";
    return 3;
  }
  std::cout << "all checks passed\n";
  return 0;
}

int run_info(const std::string& path) {
  const std::vector<std::uint8_t> head_probe = read_file_bytes(path);
  if (head_probe.empty()) {
    throw FormatError(path + ": empty file", 0);
  }
  std::cout << "file " << path << "\n";
  const std::string magic(head_probe.begin(),
                          head_probe.begin() +
                              std::min<std::size_t>(4, head_probe.size()));
  if (magic == "DFN1") {
    const Network net = load_network(path);
    std::cout << "format network (DFN1)\nlayers " << net.layer_count() << "\n";
    std::size_t params = 0;
    for (std::size_t k = 1; k <= net.layer_count(); ++k) {
      const LayerSpec& layer = net.layer(k);
      params += layer.weights.size() + (layer.bias ? layer.bias->size() : 0);
      std::cout << "layer " << k << ": " << layer.in_dim() << " -> "
                << layer.out_dim() << " " << activation_name(layer.activation)
                << (layer.bias ? " bias" : "") << "\n";
    }
    std::cout << "parameters " << params << "\n";
  } else if (magic == "DFF1") {
    const FeatureSet f = load_features(path);
    std::cout << "format features (DFF1)\nkind " << feature_kind_name(f.kind)
              << "\nsamples " << f.sample_count() << "\ndim-a " << f.dim_a
              << "\n";
    if (f.kind == FeatureKind::GradientPair) {
      std::cout << "dim-u " << f.dim_u << "\n";
    }
    std::cout << "fingerprint " << fingerprint_of(path) << "\n";
  } else if (magic == "DFG1") {
    const LoadedGram g = load_gram(path);
    std::cout << "format gram (DFG1)\nkernel " << kernel_name(g.kind) << "\n";
    if (g.square) {
      std::cout << "shape " << g.rows << "x" << g.cols << " square\n";
      std::cout << "trace " << format_double(g.as_square().trace()) << "\n";
    } else {
      std::cout << "shape " << g.rows << "x" << g.cols
                << " rectangular (rows = test, cols = train)\n";
    }
  } else if (magic == "DFS1") {
    const Dataset d = load_dataset(path);
    std::cout << "format dataset (DFS1)\nsamples " << d.n << "\ndim " << d.dim
              << "\nclasses " << d.labels.class_count << "\n";
    for (std::size_t j = 0; j < d.labels.class_count; ++j) {
      std::cout << "class " << j << " positives " << d.labels.positives(j)
                << "\n";
    }
  } else if (head_probe.front() == '{') {
    const OvrSvmModel m = load_model(path);
    std::cout << "format model (json)\nkernel " << kernel_name(m.kernel)
              << "\nclasses " << m.class_count() << "\ntrain "
              << m.train_count() << "\nfingerprint "
              << (m.train_fingerprint.empty() ? "none" : m.train_fingerprint)
              << "\n";
    for (std::size_t j = 0; j < m.class_count(); ++j) {
      std::cout << "class " << j << " support " << m.classes[j].support_count()
                << " bias " << format_double(m.classes[j].bias) << "\n";
    }
  } else {
    throw FormatError(path + ": unrecognized format (magic '" + magic + "')",
                      0);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "deepfeat: gradient features from fully connected stacks, trace "
      "kernels, and one-vs-rest SVM evaluation"};
  app.require_subcommand(1);

  MakeSyntheticArgs ms;
  CLI::App* make_synthetic = app.add_subcommand(
      "make-synthetic", "Generate a deterministic network and/or dataset");
  make_synthetic->add_option("--seed", ms.seed, "Master seed");
  make_synthetic->add_option(
      "--dims", ms.dims_text,
      "Layer dimensions d_0,d_1,...,d_L (input first)");
  make_synthetic->add_option("--n", ms.n, "Dataset size");
  make_synthetic->add_option("--classes", ms.classes, "Class count");
  make_synthetic->add_option("--dim", ms.dim,
                             "Dataset dim (default: first --dims entry)");
  make_synthetic->add_option("--noise", ms.noise, "Gaussian noise sigma");
  make_synthetic->add_option("--extra-rate", ms.extra_rate,
                             "Extra class membership probability");
  make_synthetic->add_option("--scale", ms.scale, "Prototype scale");
  make_synthetic->add_flag("--with-bias", ms.with_bias, "Add bias vectors");
  make_synthetic->add_option("--net", ms.net_path, "Network output path");
  make_synthetic->add_option("--data", ms.data_path, "Dataset output path");

  ExtractArgs ex;
  CLI::App* extract =
      app.add_subcommand("extract", "Extract features from a dataset");
  extract->add_option("--net", ex.net_path, "Network file")->required();
  extract->add_option("--data", ex.data_path, "Dataset file")->required();
  extract->add_option("--mode", ex.mode, "gradient | forward | concat")
      ->check(CLI::IsMember({"gradient", "forward", "concat"}));
  extract->add_option("--layer", ex.layer, "Layer index (default L-1)");
  extract->add_option("--tau", ex.tau, "SoftMax temperature");
  extract->add_option("--threads", ex.threads, "Worker threads");
  extract->add_option("-o,--out", ex.out_path, "Feature output path")
      ->required();

  GramArgs gr;
  CLI::App* gram_cmd =
      app.add_subcommand("gram", "Compute a kernel matrix from features");
  gram_cmd->add_option("--features", gr.features_path, "Training feature file")
      ->required();
  gram_cmd->add_option("--test", gr.test_path,
                       "Test feature file (makes a rectangular test x train "
                       "gram instead of a square one)");
  gram_cmd->add_option("--kernel", gr.kernel, "auto | trace | dot")
      ->check(CLI::IsMember({"auto", "trace", "dot"}));
  gram_cmd->add_option("--threads", gr.threads, "Worker threads");
  gram_cmd->add_option("-o,--out", gr.out_path, "Gram output path")
      ->required();

  TrainArgs tr;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train one-vs-rest SVMs on a square gram");
  train_cmd->add_option("--gram", tr.gram_path, "Square gram file")
      ->required();
  train_cmd->add_option("--labels", tr.labels_path, "Dataset file with labels")
      ->required();
  train_cmd
      ->add_option("--features", tr.features_path,
                   "Training feature file (fingerprinted into the model)")
      ->required();
  train_cmd->add_option("-C", tr.C, "Box constraint");
  train_cmd->add_option("--tol", tr.tol, "KKT violation tolerance");
  train_cmd->add_option("--max-passes", tr.max_passes,
                        "Pair update budget per class");
  train_cmd->add_option("--threads", tr.threads, "Worker threads");
  train_cmd->add_option("-o,--out", tr.out_path, "Model output path")
      ->required();

  EvalArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score test samples and report mean AP");
  eval_cmd->add_option("--model", ev.model_path, "Model file")->required();
  eval_cmd
      ->add_option("--train-features", ev.train_features_path,
                   "Feature file the model was trained on")
      ->required();
  eval_cmd->add_option("--test-features", ev.test_features_path,
                       "Test feature file (kernel values computed here)");
  eval_cmd->add_option("--cross-gram", ev.cross_gram_path,
                       "Precomputed test x train gram file");
  eval_cmd->add_option("--labels", ev.labels_path, "Test label dataset file")
      ->required();
  eval_cmd->add_option("--ap-variant", ev.ap_variant,
                       "non-interpolated | 11-point")
      ->check(CLI::IsMember({"non-interpolated", "11-point"}));
  eval_cmd->add_option("--mode", ev.mode, "Report annotation");
  eval_cmd->add_option("--layer", ev.layer, "Report annotation");
  eval_cmd->add_option("--threads", ev.threads, "Worker threads");
  eval_cmd->add_option("--report", ev.report_path, "Also write report here");

  CompareArgs cp;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Train and evaluate every feature choice side by side");
  compare_cmd->add_option("--net", cp.net_path, "Network file")->required();
  compare_cmd->add_option("--data", cp.data_path, "Dataset file")->required();
  compare_cmd->add_option("--tau", cp.tau, "SoftMax temperature");
  compare_cmd->add_option("-C", cp.C, "Box constraint");
  compare_cmd->add_option("--train-fraction", cp.train_fraction,
                          "Leading fraction of samples used for training");
  compare_cmd->add_option("--ap-variant", cp.ap_variant,
                          "non-interpolated | 11-point")
      ->check(CLI::IsMember({"non-interpolated", "11-point"}));
  compare_cmd->add_option("--threads", cp.threads, "Worker threads");
  compare_cmd->add_option("--report", cp.report_path,
                          "Also write report here");

  std::uint64_t check_seed = 42;
  CLI::App* check_cmd =
      app.add_subcommand("check", "Run the oracle suites against the library");
  check_cmd->add_option("--seed", check_seed, "Suite seed");

  std::string info_path;
  CLI::App* info_cmd =
      app.add_subcommand("info", "Describe any deepfeat file");
  info_cmd->add_option("path", info_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*make_synthetic) return run_make_synthetic(ms);
    if (*extract) return run_extract(ex);
    if (*gram_cmd) return run_gram(gr);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*compare_cmd) return run_compare(cp);
    if (*check_cmd) return run_check(check_seed);
    if (*info_cmd) return run_info(info_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
