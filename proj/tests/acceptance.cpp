// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "support.hpp"
#include "tmda/discrepancy.hpp"
#include "tmda/experiment.hpp"

using namespace tmda;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, name, ok, detail, secs);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

MatrixXd join(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd X(a.rows(), a.cols() + b.cols());
  X << a, b;
  return X;
}

// The shared synthetic setting: default generator, tasks with seeds
// 1..10, subspace dimension 50 (five 10-dimensional manifolds).
ExperimentConfig default_tasks() {
  ExperimentConfig c;
  c.synth = SynthConfig{};
  c.synth.seed = 1;
  c.repetitions = 10;
  c.tmda.k = 50;
  c.tmda.seed = 0;
  c.threads = 1;
  return c;
}

// rmse per repetition for each cell of a results file
std::map<std::string, std::vector<double>> rmse_by_cell(const ResultsFile& r) {
  std::map<std::string, std::vector<double>> out;
  for (const Record* run : r.of_kind("run")) {
    std::string key = run->at("cell");
    if (const std::string* n = run->find("N")) key += "@N=" + *n;
    out[key].push_back(run->at("status") == "ok" ? run->number("rmse") : NAN);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

int wins(const std::vector<double>& better, const std::vector<double>& worse) {
  int w = 0;
  for (std::size_t i = 0; i < better.size(); ++i) w += better[i] < worse[i] ? 1 : 0;
  return w;
}

}  // namespace

int main() {
  const auto suite_start = std::chrono::steady_clock::now();

  criterion(1, "m3d with N = 1 equals mmd", [](std::string& detail) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index ns = oracle::uniform_int(rng, 1, 20), nt = oracle::uniform_int(rng, 1, 20);
      const MatrixXd X = oracle::gaussian(oracle::uniform_int(rng, 1, 6), ns + nt, rng);
      const KernelSpec spec = t % 2 ? KernelSpec::linear() : KernelSpec::rbf(0.1 + 0.02 * t);
      const auto K = kernel_matrix(X, spec);
      const double a = empirical_m3d(K, {ns, nt}, ManifoldAssignment::single(ns + nt)).value;
      const double b = empirical_mmd(K, {ns, nt});
      worst = std::max(worst, std::abs(a - b));
    }
    detail = "max |m3d - mmd| = " + fmt(worst) + " over 100 datasets";
    return worst <= 1e-12;
  });

  criterion(2, "trace form matches m3d", [](std::string& detail) {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
      const Index ns = oracle::uniform_int(rng, 1, 15), nt = oracle::uniform_int(rng, 1, 15);
      const int N = oracle::uniform_int(rng, 1, 5);
      const MatrixXd F = oracle::gaussian(oracle::uniform_int(rng, 1, 8), ns + nt, rng);
      ManifoldAssignment a{VectorXi(ns + nt), N};
      for (Index i = 0; i < ns + nt; ++i) a.labels[i] = oracle::uniform_int(rng, 1, N);
      const auto coeffs = build_coefficients({ns, nt}, a);
      if (coeffs.active_count() == 0) continue;
      double sum = 0.0;
      for (const auto& M : coeffs.matrices) sum += (F * M * F.transpose()).trace();
      const double trace = sum / coeffs.active_count();
      const double direct = empirical_m3d(kernel_matrix(F, KernelSpec::linear()), {ns, nt}, a).value;
      worst = std::max(worst, std::abs(trace - direct));
      ++done;
    }
    detail = "max gap = " + fmt(worst) + " over 100 partitions";
    return worst <= 1e-10;
  });

  criterion(3, "admm agrees with coordinate-descent lasso", [](std::string& detail) {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    bool diag = true;
    for (int t = 0; t < 20; ++t) {
      const MatrixXd X = oracle::gaussian(3, 6, rng);
      AdmmConfig cfg;
      cfg.alpha = 0.0;
      cfg.max_iter = 200000;
      cfg.epsilon = 1e-20;
      const AffinityResult r = admm_affinity(X, X, MatrixXd(3, 0), cfg);
      MatrixXd ref(6, 6);
      for (Index i = 0; i < 6; ++i) ref.col(i) = oracle::lasso_column(X, i, r.state.mu);
      worst = std::max(worst, (r.affinity - ref).norm());
      for (Index i = 0; i < 6; ++i) diag = diag && r.affinity(i, i) == 0.0;
    }
    detail = "max Frobenius gap = " + fmt(worst) + (diag ? ", diagonal zero" : ", nonzero diagonal");
    return worst <= 1e-4 && diag;
  });

  criterion(4, "generalized eigen-solve", [](std::string& detail) {
    std::mt19937_64 rng(404);
    double resid = 0.0, constraint = 0.0, undercut = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Index n = oracle::uniform_int(rng, 6, 30);
      const int k = oracle::uniform_int(rng, 1, 5);
      const MatrixXd X = oracle::gaussian(5, n, rng);
      const MatrixXd K =
          t % 2 ? kernel_matrix(X, KernelSpec::rbf(median_bandwidth(X))).values
                : kernel_matrix(X, KernelSpec::linear()).values;
      MatrixXd A = oracle::gaussian(n, n, rng, 0.2);
      A.diagonal().setZero();
      ManifoldAssignment a{VectorXi(n), 3};
      for (Index i = 0; i < n; ++i) a.labels[i] = oracle::uniform_int(rng, 1, 3);
      const auto coeffs = build_coefficients({n / 2, n - n / 2}, a);
      const double alpha = 0.01, beta = 100.0;

      const ProjectionWeights w = solve_projection(K, A, coeffs, alpha, beta, k);
      const Pencil p = build_pencil(K, A, coeffs, alpha, beta);
      const MatrixXd R = p.C * w.W - p.B * w.W * w.eigenvalues.asDiagonal();
      resid = std::max(resid, R.cwiseAbs().maxCoeff() / p.C.cwiseAbs().maxCoeff());
      const MatrixXd G = w.W.transpose() * K * K.transpose() * w.W - MatrixXd::Identity(k, k);
      constraint = std::max(constraint, G.cwiseAbs().maxCoeff());
      const double best = oracle::trace_form(w.W, p.C);
      for (int s = 0; s < 20; ++s) {
        const MatrixXd Wp = oracle::random_b_orthonormal(p.B, k, rng);
        undercut = std::max(undercut, best - oracle::trace_form(Wp, p.C));
      }
    }
    detail = "relative residual " + fmt(resid) + ", constraint " + fmt(constraint) +
             ", best perturbation gain " + fmt(undercut);
    return resid <= 1e-6 && constraint <= 1e-6 && undercut <= 1e-8;
  });

  // Criteria 5, 6 and 8 share the ten default tasks.
  const ExperimentConfig base = default_tasks();

  criterion(5, "synthetic comparison direction", [&](std::string& detail) {
    const ResultsFile r = run_experiment(base);
    if (!r.all_ok()) {
      detail = std::to_string(r.failed) + " run(s) failed";
      return false;
    }
    auto by = rmse_by_cell(r);
    const auto& m3d = by["T_m3d:rbf"];
    const auto& mmd = by["T_mmd:rbf"];
    const int w = wins(m3d, mmd);
    const double ratio = mean(m3d) / mean(mmd);
    const double nt = mean(by["NT"]);
    bool nt_worst = true;
    std::string means = "NT " + fmt(nt);
    for (const auto& cell : default_comparison()) {
      if (cell == "NT") continue;
      means += ", " + cell + " " + fmt(mean(by[cell]));
      nt_worst = nt_worst && nt > mean(by[cell]);
    }
    detail = "T_m3d:rbf wins " + std::to_string(w) + "/10, mean ratio " + fmt(ratio) + "; " + means;
    return w >= 9 && ratio <= 0.6 && nt_worst;
  });

  criterion(6, "manifold-count curve", [&](std::string& detail) {
    const ResultsFile r = sweep_manifold_count(base, {2, 5, 6});
    if (!r.all_ok()) {
      detail = std::to_string(r.failed) + " run(s) failed";
      return false;
    }
    auto by = rmse_by_cell(r);
    const double m2 = mean(by["T_m3d:rbf@N=2"]), m5 = mean(by["T_m3d:rbf@N=5"]),
                 m6 = mean(by["T_m3d:rbf@N=6"]);
    detail = "mean rmse N=2 " + fmt(m2) + ", N=5 " + fmt(m5) + ", N=6 " + fmt(m6);
    return m5 <= m2 && std::abs(m6 - m5) <= 0.5 * (m2 - m5);
  });

  criterion(7, "clustering recovers the manifolds", [](std::string& detail) {
    int good = 0;
    std::string accs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SynthConfig s;
      s.corrupt_fraction = 0.0;
      s.noise_std = 0.0;
      s.seed = seed;
      const TransferTask task = generate_synthetic(s);
      const MatrixXd X = join(task.source.X, task.target.X);
      VectorXi truth(X.cols());
      truth << *task.source.labels, task.target_truth;
      AdmmConfig cfg;
      cfg.normalize_columns = true;
      cfg.max_iter = 1000;
      cfg.mu_scale = 0.2;
      const AffinityResult r = admm_affinity(X, X, MatrixXd(X.rows(), 0), cfg);
      const ManifoldAssignment a = ncut_cluster(r.affinity, s.n_manifolds, 0);
      const double acc = oracle::matched_accuracy(a.labels, truth, s.n_manifolds);
      good += acc >= 0.9 ? 1 : 0;
      accs += (accs.empty() ? "" : " ") + fmt(acc, 3);
    }
    detail = std::to_string(good) + "/10 seeds >= 0.9; accuracies " + accs;
    return good >= 9;
  });

  criterion(8, "ablation direction", [&](std::string& detail) {
    const ResultsFile r = run_ablation(base);
    if (!r.all_ok()) {
      detail = std::to_string(r.failed) + " run(s) failed";
      return false;
    }
    auto by = rmse_by_cell(r);
    const int v1 = wins(by["TMDA"], by["TMDA_v1"]);
    const int v2 = wins(by["TMDA"], by["TMDA_v2"]);
    detail = "TMDA beats TMDA_v1 on " + std::to_string(v1) + "/10, TMDA_v2 on " +
             std::to_string(v2) + "/10; means " + fmt(mean(by["TMDA"])) + " / " +
             fmt(mean(by["TMDA_v1"])) + " / " + fmt(mean(by["TMDA_v2"]));
    return v1 >= 8 && v2 >= 8;
  });

  criterion(9, "deterministic CLI output and exact matrix round trip", [](std::string& detail) {
    const fs::path dir = fs::temp_directory_path() / "tmda_acceptance";
    fs::create_directories(dir);
    std::ofstream(dir / "small.conf") << "synth.n_manifolds = 3\nsynth.ambient_dim = 20\n"
                                         "synth.manifold_dim = 3\nsynth.points_per_manifold = 10\n"
                                         "tmda.manifolds = 3\ntmda.k = 9\nrepetitions = 2\n";
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = dir / ("run" + std::to_string(i) + ".txt");
      const std::string cmd = std::string(TMDA_CLI) + " --config " + (dir / "small.conf").string() +
                              " --seed 7 experiment --out " + out.string();
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        detail = "CLI run failed";
        return false;
      }
      std::ifstream in(out, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      outputs[i] = ss.str();
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];

    std::mt19937_64 rng(909);
    bool exact = true;
    for (int t = 0; t < 20; ++t) {
      MatrixXd M = oracle::gaussian(7, 5, rng, std::pow(10.0, t - 10));
      M(0, 0) = std::nextafter(1.0, 2.0);
      M(1, 0) = 4.9406564584124654e-324;
      M(2, 0) = 1.7976931348623157e308;
      write_matrix(dir / "m.txt", M);
      exact = exact && read_matrix(dir / "m.txt").X == M;
    }
    detail = std::string(same ? "identical" : "different") + " result files, round trip " +
             (exact ? "exact" : "inexact");
    return same && exact;
  });

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%d criterion(s) failed; total %.1fs\n", failures, total);
  return failures == 0 ? 0 : 1;
}
