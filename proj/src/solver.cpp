#include "tmda/solver.hpp"

#include "tmda/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

namespace tmda {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Full: return "full";
    case Mode::GlobalMmd: return "global_mmd";
    case Mode::Decoupled: return "decoupled";
  }
  return "full";
}

std::string to_string(Mapping mapping) {
  return mapping == Mapping::Raw ? "raw" : "kernel";
}

Mode parse_mode(const std::string& text) {
  if (text == "full") return Mode::Full;
  if (text == "global_mmd" || text == "v1") return Mode::GlobalMmd;
  if (text == "decoupled" || text == "v2") return Mode::Decoupled;
  throw ValidationError("unknown mode '" + text + "'");
}

void TmdaConfig::check() const {
  if (!(alpha >= 0.0)) throw ValidationError("tmda: alpha must be >= 0");
  if (!(beta >= 0.0)) throw ValidationError("tmda: beta must be >= 0");
  if (manifolds < 0) throw ValidationError("tmda: N must be >= 1 (or 0 for auto)");
  if (k < 0) throw ValidationError("tmda: k must be >= 1 (or 0 for auto)");
  if (k_neighbors < 2) throw ValidationError("tmda: k_neighbors must be >= 2");
  if (bandwidth && !(*bandwidth > 0.0)) throw ValidationError("tmda: bandwidth must be > 0");
  if (max_outer < 1) throw ValidationError("tmda: max_outer must be >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("tmda: epsilon must be > 0");
  admm.check();
}

Pencil build_pencil(const MatrixXd& basis, const MatrixXd& affinity,
                    const DiscrepancyCoefficients& coeffs, double alpha, double beta) {
  const Index n = basis.cols();
  const Index r = basis.rows();
  if (affinity.rows() != n || affinity.cols() != n)
    throw ValidationError("build_pencil: affinity size does not match basis columns");
  for (const auto& m : coeffs.matrices)
    if (m.rows() != n || m.cols() != n)
      throw ValidationError("build_pencil: coefficient size does not match basis columns");

  MatrixXd residual = MatrixXd::Identity(n, n) - affinity;
  MatrixXd middle = alpha * (residual * residual.transpose());
  if (!coeffs.matrices.empty()) middle += beta * coeffs.sum();

  Pencil p;
  p.C = basis * middle * basis.transpose();
  p.C.diagonal().array() += 1.0;
  p.C = 0.5 * (p.C + p.C.transpose());

  p.B = basis * basis.transpose();
  p.ridge = 1e-6 * p.B.trace() / static_cast<double>(r);
  if (!(p.ridge > 0.0)) p.ridge = 1e-6;
  p.B.diagonal().array() += p.ridge;
  return p;
}

ProjectionWeights solve_pencil(const Pencil& pencil, int k) {
  const Index r = pencil.C.rows();
  if (k < 1) throw ValidationError("solve_projection: k must be >= 1");
  if (k > r) throw ValidationError("solve_projection: k exceeds the number of eigenpairs");
  if (!all_finite(pencil.C) || !all_finite(pencil.B))
    throw NumericalError("solve_projection: non-finite pencil");

  const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(
      pencil.C, pencil.B, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericalError("solve_projection: pencil is not symmetric definite");

  ProjectionWeights out;
  out.ridge = pencil.ridge;
  out.eigenvalues = ges.eigenvalues().head(k);
  out.W = ges.eigenvectors().leftCols(k);
  if (!all_finite(out.eigenvalues) || !all_finite(out.W))
    throw ValidationError("solve_projection: fewer than k finite eigenpairs");

  for (Index c = 0; c < out.W.cols(); ++c) {
    Index arg = 0;
    out.W.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.W(arg, c) < 0.0) out.W.col(c) = -out.W.col(c);
  }
  return out;
}

ProjectionWeights solve_projection(const MatrixXd& basis, const MatrixXd& affinity,
                                   const DiscrepancyCoefficients& coeffs, double alpha, double beta,
                                   int k) {
  return solve_pencil(build_pencil(basis, affinity, coeffs, alpha, beta), k);
}

double projection_objective(const MatrixXd& W, const MatrixXd& C) {
  return (W.transpose() * C * W).trace();
}

MatrixXd projection_basis(const MatrixXd& X, const KernelSpec& kernel, Mapping mapping) {
  if (mapping == Mapping::Raw) return X;
  return kernel_matrix(X, kernel).values;
}

KernelSpec resolve_kernel(const TmdaConfig& cfg, const MatrixXd& X) {
  if (cfg.kernel == KernelKind::Linear) return KernelSpec::linear();
  return KernelSpec::rbf(cfg.bandwidth ? *cfg.bandwidth : median_bandwidth(X));
}

namespace {

int resolve_manifold_count(const TmdaConfig& cfg, const Dataset& source) {
  if (cfg.manifolds > 0) return cfg.manifolds;
  if (!source.labels) throw ValidationError("fit: N = 0 needs source labels to count classes");
  const std::set<int> classes(source.labels->begin(), source.labels->end());
  return static_cast<int>(classes.size());
}

int resolve_dimension(const TmdaConfig& cfg, const MatrixXd& X, Index basis_rows) {
  const int cap = static_cast<int>(basis_rows);
  if (cfg.k > 0) {
    if (cfg.k > cap) throw ValidationError("fit: k exceeds the projection basis dimension");
    return cfg.k;
  }
  const double estimate = estimate_intrinsic_dim(X, cfg.k_neighbors);
  return subspace_dim_from_estimate(estimate, std::min(cap, static_cast<int>(X.rows())));
}

double embedded_m3d(const MatrixXd& features, const DiscrepancyCoefficients& coeffs) {
  double total = 0.0;
  int active = 0;
  for (std::size_t m = 0; m < coeffs.matrices.size(); ++m) {
    if (!coeffs.active[m]) continue;
    ++active;
    total += (features * coeffs.matrices[m] * features.transpose()).trace();
  }
  return active > 0 ? total / active : 0.0;
}

double objective_value(const MatrixXd& X, const MatrixXd& A, const MatrixXd& W,
                       const MatrixXd& features, const DiscrepancyCoefficients& coeffs, double mu,
                       double alpha, double beta) {
  const double reconstruction = 0.5 * (X - X * A).squaredNorm();
  const double sparsity = mu * A.cwiseAbs().sum();
  const double coupling = 0.5 * alpha * (features - features * A).squaredNorm();
  double discrepancy = 0.0;
  for (const auto& m : coeffs.matrices) discrepancy += (features * m * features.transpose()).trace();
  return reconstruction + sparsity + coupling + 0.5 * beta * discrepancy + 0.5 * W.squaredNorm();
}

}  // namespace

TmdaModel fit(const Dataset& source, const Dataset& target, const TmdaConfig& cfg) {
  cfg.check();
  validate(source, "fit source");
  validate(target, "fit target");
  if (source.dim() != target.dim()) throw ValidationError("fit: source and target dimensions differ");
  if (source.size() < 1 || target.size() < 1) throw ValidationError("fit: empty domain");

  TmdaModel model;
  model.split = {source.size(), target.size()};
  const Index n = model.split.total();
  model.train_columns.resize(source.dim(), n);
  model.train_columns << source.X, target.X;
  const MatrixXd& X = model.train_columns;

  model.mapping = cfg.mapping;
  model.kernel = cfg.mapping == Mapping::Raw ? KernelSpec::linear() : resolve_kernel(cfg, X);
  const MatrixXd basis = projection_basis(X, model.kernel, cfg.mapping);

  const int manifolds = cfg.mode == Mode::GlobalMmd ? 1 : resolve_manifold_count(cfg, source);
  if (manifolds > n) throw ValidationError("fit: more manifolds than points");
  const int k = resolve_dimension(cfg, X, basis.rows());

  AdmmConfig admm = cfg.admm;
  if (!admm.mu) {
    MatrixXd Xn = X;
    if (admm.normalize_columns)
      for (Index j = 0; j < n; ++j)
        if (Xn.col(j).norm() > 0.0) Xn.col(j).normalize();
    admm.mu = admm.mu_scale * default_mu(Xn);
  }
  model.mu = *admm.mu;
  if (cfg.mode == Mode::Decoupled) admm.alpha = 0.0;
  else admm.alpha = cfg.alpha;

  MatrixXd A_prev = MatrixXd::Zero(n, n);
  MatrixXd W_prev = MatrixXd::Zero(basis.rows(), k);
  const int passes = cfg.mode == Mode::Decoupled ? 1 : cfg.max_outer;

  for (int p = 1; p <= passes; ++p) {
    AffinityResult step = admm_affinity(X, basis, W_prev, admm);

    ManifoldAssignment assignment = cfg.mode == Mode::GlobalMmd
                                        ? ManifoldAssignment::single(n)
                                        : ncut_cluster(step.affinity, manifolds, cfg.seed);
    const DiscrepancyCoefficients coeffs = build_coefficients(model.split, assignment);
    ProjectionWeights weights = solve_projection(basis, step.affinity, coeffs, cfg.alpha, cfg.beta, k);

    const MatrixXd features = weights.W.transpose() * basis;
    TraceEntry entry;
    entry.iteration = p;
    entry.m3d = embedded_m3d(features, coeffs);
    entry.objective = objective_value(X, step.affinity, weights.W, features, coeffs, model.mu,
                                      cfg.alpha, cfg.beta);
    entry.a_change = (step.affinity - A_prev).squaredNorm();
    entry.w_change = (weights.W - W_prev).squaredNorm();
    entry.admm_iterations = step.state.iteration;
    entry.admm_converged = step.state.converged;
    model.trace.push_back(entry);

    if (!std::isfinite(entry.m3d) || !std::isfinite(entry.objective))
      throw DivergenceError("fit: non-finite objective at outer iteration " + std::to_string(p));

    A_prev = std::move(step.affinity);
    W_prev = weights.W;
    model.affinity = A_prev;
    model.assignment = std::move(assignment);
    model.weights = std::move(weights);

    if (entry.a_change <= cfg.epsilon && entry.w_change <= cfg.epsilon) {
      model.converged = true;
      break;
    }
  }
  if (cfg.mode == Mode::Decoupled) model.converged = true;
  return model;
}

MatrixXd transform(const TmdaModel& model, const MatrixXd& X_new) {
  if (X_new.rows() != model.dim())
    throw ValidationError("transform: expected " + std::to_string(model.dim()) + " features, got " +
                          std::to_string(X_new.rows()));
  if (!all_finite(X_new)) throw ValidationError("transform: non-finite input");
  if (model.mapping == Mapping::Raw) return model.weights.W.transpose() * X_new;
  return model.weights.W.transpose() * cross_kernel(model.train_columns, X_new, model.kernel);
}

namespace {

void expect_section(std::istream& in, const std::string& name, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    if (line.substr(first, last - first + 1) == "[" + name + "]") return;
    throw ParseError("expected section [" + name + "]", line_no);
  }
  throw ParseError("missing section [" + name + "]", line_no + 1);
}

}  // namespace

void write_model(std::ostream& out, const TmdaModel& model) {
  // [kernel] row: kind (0 linear, 1 rbf), rbf bandwidth (0 if none),
  // mapping (0 kernel, 1 raw), number of source columns.
  MatrixXd kernel(1, 4);
  kernel << (model.kernel.kind == KernelKind::Rbf ? 1.0 : 0.0),
      model.kernel.bandwidth.value_or(0.0), (model.mapping == Mapping::Raw ? 1.0 : 0.0),
      static_cast<double>(model.split.n_source);
  out << "[kernel]\n";
  write_matrix(out, kernel);
  out << "[W]\n";
  write_matrix(out, model.weights.W);
  out << "[train]\n";
  write_matrix(out, model.train_columns);
  out << "[assignment]\n";
  write_matrix(out, model.assignment.labels.cast<double>());
}

TmdaModel read_model(std::istream& in) {
  int line_no = 0;
  TmdaModel model;

  expect_section(in, "kernel", line_no);
  const MatrixXd kernel = read_matrix(in, &line_no);
  if (kernel.rows() != 1 || kernel.cols() != 4) throw ParseError("[kernel] must be a 1 x 4 row", line_no);
  model.kernel = kernel(0, 0) == 1.0 ? KernelSpec::rbf(kernel(0, 1)) : KernelSpec::linear();
  model.kernel.check();
  model.mapping = kernel(0, 2) == 1.0 ? Mapping::Raw : Mapping::Kernel;

  expect_section(in, "W", line_no);
  model.weights.W = read_matrix(in, &line_no);
  expect_section(in, "train", line_no);
  model.train_columns = read_matrix(in, &line_no);
  expect_section(in, "assignment", line_no);
  const MatrixXd labels = read_matrix(in, &line_no);

  const Index n = model.train_columns.cols();
  const Index basis_rows = model.mapping == Mapping::Raw ? model.train_columns.rows() : n;
  if (model.weights.W.rows() != basis_rows) throw ParseError("[W] row count does not match [train]", 0);
  if (labels.cols() != 1 || labels.rows() != n) throw ParseError("[assignment] must be n x 1", 0);

  const auto n_source = static_cast<Index>(kernel(0, 3));
  model.split = {n_source, n - n_source};
  model.assignment.labels = labels.col(0).cast<int>();
  model.assignment.count = n > 0 ? model.assignment.labels.maxCoeff() : 1;
  model.converged = true;
  return model;
}

}  // namespace tmda
