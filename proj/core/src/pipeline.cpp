#include "deepfeat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include "deepfeat/concurrency.hpp"
#include "deepfeat/gradient.hpp"
#include "deepfeat/kernel.hpp"

namespace deepfeat {

const char* feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::Gradient:
      return "gradient";
    case FeatureMode::Forward:
      return "forward";
    case FeatureMode::Concat:
      return "concat";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void check_extract_layer(const Network& net, const ExtractOptions& options) {
  const std::size_t L = net.layer_count();
  switch (options.mode) {
    case FeatureMode::Gradient:
    case FeatureMode::Concat:
      if (options.layer < 1 || options.layer > L) {
        throw ValueError(std::string(feature_mode_name(options.mode)) +
                         " features need a layer in 1.." + std::to_string(L) +
                         ", got " + std::to_string(options.layer));
      }
      break;
    case FeatureMode::Forward:
      if (options.layer > L) {
        throw ValueError("forward features need a layer in 0.." +
                         std::to_string(L) + ", got " +
                         std::to_string(options.layer));
      }
      break;
  }
}

std::vector<FeatureSelector> concat_selectors(std::size_t layer,
                                              std::size_t layer_count) {
  // Pair the activation below the layer with the layer's own output; at
  // the top, the probabilities are replaced by the logits, which carry
  // the same information without the softmax compression.
  if (layer == layer_count) {
    return {FeatureSelector::x(layer - 1), FeatureSelector::top_logits()};
  }
  return {FeatureSelector::x(layer - 1), FeatureSelector::x(layer)};
}

std::vector<ForwardTrace> all_traces(const Network& net, const Dataset& data,
                                     double tau, unsigned threads) {
  std::vector<ForwardTrace> traces(data.n);
  parallel_for(data.n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      traces[i] = forward(net, data.sample(i), tau);
    }
  });
  return traces;
}

MultiLabelSet slice_labels(const MultiLabelSet& labels, std::size_t begin,
                           std::size_t end) {
  MultiLabelSet out(end - begin, labels.class_count);
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t j = 0; j < labels.class_count; ++j) {
      out.set(i - begin, j, labels.relevant(i, j));
    }
  }
  return out;
}

}  // namespace

FeatureSet extract_features(const Network& net, const Dataset& data,
                            const ExtractOptions& options) {
  if (data.dim != net.input_dim()) {
    throw DimensionError("dataset dimension " + std::to_string(data.dim) +
                         " vs network input " +
                         std::to_string(net.input_dim()));
  }
  check_extract_layer(net, options);
  if (data.n == 0) {
    throw ValueError("dataset has no samples");
  }

  const std::vector<ForwardTrace> traces =
      all_traces(net, data, options.tau, options.threads);

  if (options.mode == FeatureMode::Gradient) {
    std::vector<GradientFeature> features(data.n);
    parallel_for(data.n, options.threads,
                 [&](std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     features[i] =
                         gradient_feature(traces[i], net, options.layer);
                   }
                 });
    return FeatureSet::from_gradient(features);
  }

  const std::vector<FeatureSelector> selectors =
      options.mode == FeatureMode::Forward
          ? std::vector<FeatureSelector>{FeatureSelector::x(options.layer)}
          : concat_selectors(options.layer, net.layer_count());
  std::vector<ForwardFeature> features(data.n);
  parallel_for(data.n, options.threads,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   features[i] = forward_feature(traces[i], selectors);
                 }
               });
  return FeatureSet::from_forward(features);
}

std::string format_eval_report(const EvalSummary& summary) {
  std::ostringstream out;
  out << "deepfeat eval report\n";
  out << "kernel " << kernel_name(summary.kernel) << "\n";
  out << "mode " << summary.mode << "\n";
  out << "layer " << summary.layer << "\n";
  out << "train " << summary.train_count << " test " << summary.test_count
      << "\n";
  out << "ap-variant " << ap_variant_name(summary.result.variant) << "\n";
  for (std::size_t j = 0; j < summary.result.per_class.size(); ++j) {
    const bool skipped =
        std::find(summary.result.skipped.begin(), summary.result.skipped.end(),
                  j) != summary.result.skipped.end();
    if (skipped) {
      out << "class " << j << " ap skipped-no-positives\n";
    } else {
      out << "class " << j << " ap " << format_double(summary.result.per_class[j])
          << "\n";
    }
  }
  out << "map " << format_double(summary.result.map) << "\n";
  return out.str();
}

namespace {

struct RowSpec {
  std::string name;
  std::string mode;
  FeatureMode feature_mode;
  std::size_t layer;
  std::vector<FeatureSelector> selectors;  // forward/concat rows only
};

std::vector<RowSpec> comparison_rows(std::size_t L) {
  std::vector<RowSpec> rows;
  for (std::size_t k = 0; k <= L; ++k) {
    rows.push_back({"x" + std::to_string(k), "forward", FeatureMode::Forward,
                    k,
                    {FeatureSelector::x(k)}});
  }
  rows.push_back({"y" + std::to_string(L), "forward", FeatureMode::Forward, L,
                  {FeatureSelector::top_logits()}});
  for (std::size_t k = 1; k < L; ++k) {
    rows.push_back({"x" + std::to_string(k - 1) + "+x" + std::to_string(k),
                    "concat", FeatureMode::Concat, k,
                    concat_selectors(k, L)});
  }
  rows.push_back({"x" + std::to_string(L - 1) + "+y" + std::to_string(L),
                  "concat", FeatureMode::Concat, L, concat_selectors(L, L)});
  for (std::size_t k = 1; k <= L; ++k) {
    rows.push_back({"dW" + std::to_string(k), "gradient",
                    FeatureMode::Gradient, k, {}});
  }
  return rows;
}

template <typename Feature>
double evaluate_split(const std::vector<Feature>& features,
                      const MultiLabelSet& train_labels,
                      const MultiLabelSet& test_labels,
                      const CompareOptions& options,
                      std::vector<double>* per_class) {
  const std::size_t n_train = train_labels.n;
  const std::vector<Feature> train(features.begin(),
                                   features.begin() + n_train);
  const std::vector<Feature> test(features.begin() + n_train, features.end());

  const GramMatrix train_gram = gram(train, options.threads);
  SvmTrainOptions svm_options;
  svm_options.C = options.C;
  const OvrSvmModel model =
      train_ovr(train_gram, train_labels, svm_options, options.threads);
  const MatrixD cross = cross_gram(test, train, options.threads);
  const MatrixD scores = decision_scores(model, cross);
  const MeanApResult result = mean_ap(scores, test_labels, options.ap_variant);
  *per_class = result.per_class;
  return result.map;
}

}  // namespace

std::vector<CompareRow> run_comparison(const Network& net, const Dataset& data,
                                       const CompareOptions& options) {
  if (data.dim != net.input_dim()) {
    throw DimensionError("dataset dimension " + std::to_string(data.dim) +
                         " vs network input " +
                         std::to_string(net.input_dim()));
  }
  if (data.n < 2) {
    throw ValueError("comparison needs at least 2 samples");
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw ValueError("train fraction must lie strictly between 0 and 1");
  }
  std::size_t n_train = static_cast<std::size_t>(
      std::lround(options.train_fraction * static_cast<double>(data.n)));
  n_train = std::clamp<std::size_t>(n_train, 1, data.n - 1);

  const MultiLabelSet train_labels = slice_labels(data.labels, 0, n_train);
  const MultiLabelSet test_labels =
      slice_labels(data.labels, n_train, data.n);

  const std::vector<ForwardTrace> traces =
      all_traces(net, data, options.tau, options.threads);

  std::vector<CompareRow> rows;
  for (const RowSpec& spec : comparison_rows(net.layer_count())) {
    CompareRow row;
    row.name = spec.name;
    row.mode = spec.mode;
    if (spec.feature_mode == FeatureMode::Gradient) {
      std::vector<GradientFeature> features(data.n);
      parallel_for(data.n, options.threads,
                   [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i) {
                       features[i] = gradient_feature(traces[i], net,
                                                      spec.layer);
                     }
                   });
      row.dim = features[0].a.size() + features[0].u.size();
      row.map = evaluate_split(features, train_labels, test_labels, options,
                               &row.per_class);
    } else {
      std::vector<ForwardFeature> features(data.n);
      parallel_for(data.n, options.threads,
                   [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i) {
                       features[i] = forward_feature(traces[i],
                                                     spec.selectors);
                     }
                   });
      row.dim = features[0].concat_length();
      row.map = evaluate_split(features, train_labels, test_labels, options,
                               &row.per_class);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_compare_report(const Network& net, const Dataset& data,
                                  const CompareOptions& options,
                                  const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  std::size_t n_train = static_cast<std::size_t>(
      std::lround(options.train_fraction * static_cast<double>(data.n)));
  n_train = std::clamp<std::size_t>(n_train, 1, data.n - 1);
  out << "deepfeat compare report\n";
  out << "layers " << net.layer_count() << " classes "
      << data.labels.class_count << " input-dim " << net.input_dim() << "\n";
  out << "samples " << data.n << " train " << n_train << " test "
      << (data.n - n_train) << "\n";
  out << "tau " << format_double(options.tau) << " C "
      << format_double(options.C) << " ap-variant "
      << ap_variant_name(options.ap_variant) << "\n";
  for (const CompareRow& row : rows) {
    out << "row " << row.name << " mode " << row.mode << " dim " << row.dim
        << " map " << format_double(row.map) << "\n";
  }
  return out.str();
}

}  // namespace deepfeat
