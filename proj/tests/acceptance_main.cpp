// Acceptance gate for the deepfeat library and CLI. Each numbered check
// prints one PASS/FAIL line with its measured errors and pinned tolerances;
// the process exits nonzero if any check fails. Checks 8 and 9 drive the
// installed CLI binary, whose path arrives as argv[1].

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "deepfeat/gradient.hpp"
#include "deepfeat/kernel.hpp"
#include "deepfeat/metrics.hpp"
#include "deepfeat/network.hpp"
#include "deepfeat/rng.hpp"
#include "deepfeat/selfcheck.hpp"
#include "deepfeat/svm.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& label, bool passed,
            const std::string& detail) {
  std::cout << "criterion " << id << " " << (passed ? "PASS" : "FAIL") << " "
            << label << " (" << detail << ")\n";
  if (!passed) {
    ++failures;
  }
}

std::string format_seconds(double s) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << s << " s";
  return out.str();
}

bool run_command(const std::string& command) {
  return std::system(command.c_str()) == 0;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool same_bytes(const std::string& a, const std::string& b) {
  const std::string ba = read_text(a);
  const std::string bb = read_text(b);
  return !ba.empty() && ba == bb;
}

// Value after `key` on the first line that starts with it, NaN when absent.
double parse_line_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.compare(0, key.size(), key) == 0) {
      return std::strtod(line.c_str() + key.size(), nullptr);
    }
  }
  return std::nan("");
}

std::size_t count_lines_starting_with(const std::string& text,
                                      const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.compare(0, prefix.size(), prefix) == 0) {
      ++count;
    }
  }
  return count;
}

void check_suite(int id, const std::string& label,
                 deepfeat::CheckResult (*suite)(std::uint64_t),
                 double time_budget) {
  const Clock::time_point start = Clock::now();
  const deepfeat::CheckResult result = suite(42);
  const double elapsed = seconds_since(start);
  report(id, label, result.passed && elapsed < time_budget,
         result.detail + "; " + format_seconds(elapsed) + " of " +
             format_seconds(time_budget));
}

void check_size_arithmetic() {
  const std::vector<std::size_t> dims = {9216, 4096, 4096, 1000};
  const std::vector<std::size_t> entries = {37'748'736, 16'777'216, 4'096'000};
  const std::vector<std::size_t> factors = {13'312, 8'192, 5'096};
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t k = 1; k <= 3; ++k) {
    const deepfeat::GradientShape shape = deepfeat::gradient_shape(dims, k);
    ok = ok && shape.entry_count() == entries[k - 1] &&
         shape.factor_count() == factors[k - 1];
    if (k > 1) {
      detail << ", ";
    }
    detail << "layer " << k << " " << shape.entry_count() << "/"
           << shape.factor_count();
  }
  report(3, "gradient size arithmetic", ok, detail.str());
}

void check_gram_properties() {
  using namespace deepfeat;
  const Network net = make_synthetic_network(4401, {16, 12, 10, 8});
  Rng rng(4402);
  std::vector<GradientFeature> features;
  for (int i = 0; i < 32; ++i) {
    Vector input(net.input_dim());
    for (float& v : input) {
      v = static_cast<float>(rng.gaussian());
    }
    features.push_back(gradient_feature(forward(net, input, 2.0), net, 2));
  }
  const GramMatrix g = gram(features);

  bool symmetric = true;
  double worst_diag = 0.0;
  double worst_cs = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const bool zero = g.at(i, i) == 0.0;
    if (!zero) {
      ++nonzero;
      worst_diag = std::max(worst_diag, std::abs(g.at(i, i) - 1.0));
    }
    for (std::size_t j = 0; j < g.n; ++j) {
      symmetric = symmetric && g.at(i, j) == g.at(j, i);
      const double bound = std::sqrt(g.at(i, i) * g.at(j, j));
      worst_cs = std::max(worst_cs, std::abs(g.at(i, j)) - bound);
    }
  }
  const double min_eig = min_eigenvalue(g);
  const double eig_floor = -1e-8 * g.trace();

  const bool ok = symmetric && nonzero >= 30 && worst_diag <= 1e-9 &&
                  worst_cs <= 1e-12 && min_eig >= eig_floor;
  std::ostringstream detail;
  detail.precision(3);
  detail << (symmetric ? "symmetric" : "NOT symmetric") << ", " << nonzero
         << " nonzero features, diag off by " << worst_diag
         << " (tol 1e-9), cauchy-schwarz slack " << worst_cs
         << " (tol 1e-12), min eigenvalue " << min_eig << " >= " << eig_floor;
  report(4, "gram matrix properties", ok, detail.str());
}

void check_frobenius_identity() {
  using namespace deepfeat;
  Rng rng(4501);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    std::vector<double> a(30), u(20);
    for (double& v : a) {
      v = rng.gaussian();
    }
    for (double& v : u) {
      v = rng.gaussian();
    }
    double sum_sq = 0.0;
    for (double av : a) {
      for (double uv : u) {
        sum_sq += (av * uv) * (av * uv);
      }
    }
    const double frobenius = std::sqrt(sum_sq);
    const double product = l2_norm(a) * l2_norm(u);
    worst = std::max(worst, std::abs(frobenius - product) / product);
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "100 pairs, max rel err " << worst << " (tol 1e-5)";
  report(5, "frobenius norm identity", worst < 1e-5, detail.str());
}

void check_svm_solver() {
  using namespace deepfeat;

  GramMatrix tiny(2, KernelKind::Trace);
  tiny.at(0, 0) = 1.0;
  tiny.at(0, 1) = -1.0;
  tiny.at(1, 0) = -1.0;
  tiny.at(1, 1) = 1.0;
  const SvmBinaryModel closed = train_binary(tiny, {+1, -1});
  const double closed_err =
      std::max({std::abs(closed.alpha[0] - 0.5), std::abs(closed.alpha[1] - 0.5),
                std::abs(closed.bias)});

  double worst_rel = 0.0;
  for (int p = 0; p < 20; ++p) {
    Rng rng(derive_seed(4600, static_cast<std::uint64_t>(p)));
    const std::size_t n = 12;
    const std::size_t dim = 6;
    std::vector<std::vector<double>> points(n, std::vector<double>(dim));
    for (auto& point : points) {
      for (double& v : point) {
        v = rng.gaussian();
      }
    }
    GramMatrix g(n, KernelKind::Dot);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        g.at(i, j) = dot(points[i], points[j]);
      }
    }
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < n / 2 ? +1 : -1;
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(y[i], y[rng.below(i + 1)]);
    }
    const SvmBinaryModel model = train_binary(g, y);
    const std::vector<double> reference = projected_gradient_dual(g, y, 1.0);
    const double smo_obj = dual_objective(g, y, model.alpha);
    const double ref_obj = dual_objective(g, y, reference);
    worst_rel = std::max(worst_rel, std::abs(smo_obj - ref_obj) /
                                        std::max(1e-12, std::abs(ref_obj)));
  }

  const bool ok = closed_err <= 1e-9 && worst_rel < 1e-4;
  std::ostringstream detail;
  detail.precision(3);
  detail << "closed-form err " << closed_err
         << " (tol 1e-9), 20 random problems max objective rel err "
         << worst_rel << " (tol 1e-4)";
  report(6, "smo against qp oracle", ok, detail.str());
}

void check_ap_hand_cases() {
  using namespace deepfeat;
  const double three_item =
      std::abs(average_precision({0.9, 0.5, 0.2}, {1, 0, 1}) - 5.0 / 6.0);
  const double all_relevant =
      std::abs(average_precision({0.3, 0.9, 0.5}, {1, 1, 1}) - 1.0);
  std::vector<double> scores;
  std::vector<std::uint8_t> rel;
  for (int i = 0; i < 8; ++i) {
    scores.push_back(8.0 - i);
    rel.push_back(i == 7 ? 1 : 0);
  }
  const double last_ranked = std::abs(average_precision(scores, rel) - 0.125);
  const double worst = std::max({three_item, all_relevant, last_ranked});
  std::ostringstream detail;
  detail.precision(3);
  detail << "max deviation " << worst << " (tol 1e-12)";
  report(7, "average precision hand cases", worst <= 1e-12, detail.str());
}

struct CliRun {
  std::string cli;
  std::string dir;

  // Runs one subcommand with stdout+stderr captured next to its outputs.
  bool step(const std::string& args, const std::string& log) const {
    const std::string command =
        "\"" + cli + "\" " + args + " > " + dir + "/" + log + " 2>&1";
    if (!run_command(command)) {
      std::cout << "  command failed: " << command << "\n";
      const std::string text = read_text(dir + "/" + log);
      if (!text.empty()) {
        std::cout << text;
      }
      return false;
    }
    return true;
  }
};

void check_end_to_end(const CliRun& cli) {
  const Clock::time_point start = Clock::now();
  const std::string d = cli.dir;
  bool ok = true;
  std::ostringstream detail;

  ok = ok &&
       cli.step("make-synthetic --seed 42 --dims 40,64,48,8 --n 200"
                " --classes 5 --noise 0 --net " +
                    d + "/net.dfn --data " + d + "/data.dfs",
                "log-synthetic.txt") &&
       cli.step("extract --net " + d + "/net.dfn --data " + d +
                    "/data.dfs --mode gradient --layer 2 --tau 2"
                    " --threads 2 -o " +
                    d + "/train.dff",
                "log-extract.txt") &&
       cli.step("gram --features " + d + "/train.dff --threads 2 -o " + d +
                    "/gram.dfg",
                "log-gram.txt") &&
       cli.step("train --gram " + d + "/gram.dfg --labels " + d +
                    "/data.dfs --features " + d + "/train.dff -C 1 -o " + d +
                    "/model.json",
                "log-train.txt") &&
       cli.step("eval --model " + d + "/model.json --train-features " + d +
                    "/train.dff --labels " + d + "/data.dfs --cross-gram " +
                    d + "/gram.dfg --mode gradient --layer 2 --report " + d +
                    "/report.txt",
                "log-eval.txt");

  double map = std::nan("");
  if (ok) {
    map = parse_line_value(read_text(d + "/report.txt"), "map ");
    ok = std::abs(map - 1.0) <= 1e-12;
    detail << "noise-0 map " << map << " (want 1 within 1e-12)";
  } else {
    detail << "pipeline command failed";
  }

  bool table_ok = false;
  if (ok) {
    table_ok =
        cli.step("make-synthetic --seed 43 --dims 40,64,48,8 --n 200"
                 " --classes 5 --noise 0.05 --data " +
                     d + "/data-noisy.dfs",
                 "log-noisy.txt") &&
        cli.step("compare --net " + d + "/net.dfn --data " + d +
                     "/data-noisy.dfs --threads 2 --report " + d +
                     "/compare.txt",
                 "log-compare.txt");
    if (table_ok) {
      const std::string table = read_text(d + "/compare.txt");
      const std::size_t rows = count_lines_starting_with(table, "row ");
      table_ok = rows == 11 &&
                 table.find("deepfeat compare report") != std::string::npos;
      detail << ", noisy comparison rows " << rows << " (want 11)";
    } else {
      detail << ", comparison command failed";
    }
  }

  const double elapsed = seconds_since(start);
  detail << "; " << format_seconds(elapsed) << " of " << format_seconds(60.0);
  report(8, "end-to-end planted pipeline", ok && table_ok && elapsed < 60.0,
         detail.str());
}

void check_determinism(const CliRun& cli) {
  const std::string d = cli.dir;
  bool ok = true;
  std::ostringstream detail;

  ok = ok &&
       cli.step("make-synthetic --seed 42 --dims 40,64,48,8 --n 200"
                " --classes 5 --noise 0 --net " +
                    d + "/net-b.dfn --data " + d + "/data-b.dfs",
                "log-synthetic-b.txt") &&
       cli.step("extract --net " + d + "/net.dfn --data " + d +
                    "/data.dfs --mode gradient --layer 2 --tau 2"
                    " --threads 1 -o " +
                    d + "/train-t1.dff",
                "log-extract-t1.txt") &&
       cli.step("extract --net " + d + "/net.dfn --data " + d +
                    "/data.dfs --mode gradient --layer 2 --tau 2"
                    " --threads 4 -o " +
                    d + "/train-t4.dff",
                "log-extract-t4.txt") &&
       cli.step("gram --features " + d + "/train.dff --threads 1 -o " + d +
                    "/gram-t1.dfg",
                "log-gram-t1.txt") &&
       cli.step("gram --features " + d + "/train.dff --threads 4 -o " + d +
                    "/gram-t4.dfg",
                "log-gram-t4.txt") &&
       cli.step("eval --model " + d + "/model.json --train-features " + d +
                    "/train.dff --labels " + d + "/data.dfs --cross-gram " +
                    d + "/gram.dfg --mode gradient --layer 2 --report " + d +
                    "/report-b.txt",
                "log-eval-b.txt") &&
       cli.step("compare --net " + d + "/net.dfn --data " + d +
                    "/data-noisy.dfs --threads 4 --report " + d +
                     "/compare-b.txt",
                "log-compare-b.txt");

  if (ok) {
    const bool net_same = same_bytes(d + "/net.dfn", d + "/net-b.dfn");
    const bool data_same = same_bytes(d + "/data.dfs", d + "/data-b.dfs");
    const bool features_same = same_bytes(d + "/train.dff", d + "/train-t1.dff") &&
                               same_bytes(d + "/train-t1.dff", d + "/train-t4.dff");
    const bool gram_same = same_bytes(d + "/gram.dfg", d + "/gram-t1.dfg") &&
                           same_bytes(d + "/gram-t1.dfg", d + "/gram-t4.dfg");
    const bool report_same = same_bytes(d + "/report.txt", d + "/report-b.txt");
    const bool compare_same = same_bytes(d + "/compare.txt", d + "/compare-b.txt");
    ok = net_same && data_same && features_same && gram_same && report_same &&
         compare_same;
    detail << "net " << (net_same ? "same" : "DIFFERS") << ", data "
           << (data_same ? "same" : "DIFFERS") << ", features x3 "
           << (features_same ? "same" : "DIFFERS") << ", gram x3 "
           << (gram_same ? "same" : "DIFFERS") << ", eval report "
           << (report_same ? "same" : "DIFFERS") << ", compare report "
           << (compare_same ? "same" : "DIFFERS");
  } else {
    detail << "command failed";
  }
  report(9, "byte-identical reruns across thread counts", ok, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: deepfeat_acceptance <path-to-deepfeat-cli>\n";
    return 2;
  }
  const CliRun cli{argv[1], "acceptance-work"};
  std::error_code ec;
  std::filesystem::create_directories(cli.dir, ec);
  if (ec) {
    std::cerr << "cannot create " << cli.dir << ": " << ec.message() << "\n";
    return 2;
  }

  check_suite(1, "trace kernel factorization oracle",
              deepfeat::check_trace_factorization, 5.0);
  check_suite(2, "gradient finite-difference oracle",
              deepfeat::check_finite_difference, 10.0);
  check_size_arithmetic();
  check_gram_properties();
  check_frobenius_identity();
  check_svm_solver();
  check_ap_hand_cases();
  check_end_to_end(cli);
  check_determinism(cli);

  if (failures > 0) {
    std::cout << failures << " criteria FAILED\n";
    return 1;
  }
  std::cout << "all 9 criteria passed\n";
  return 0;
}
