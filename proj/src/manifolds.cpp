#include "tmda/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace tmda {

void AdmmConfig::check() const {
  if (mu && !(*mu >= 0.0)) throw ValidationError("admm: mu must be >= 0");
  if (!(mu_scale > 0.0)) throw ValidationError("admm: mu_scale must be > 0");
  if (!(rho > 0.0)) throw ValidationError("admm: rho must be > 0");
  if (!(alpha >= 0.0)) throw ValidationError("admm: alpha must be >= 0");
  if (max_iter < 1) throw ValidationError("admm: max_iter must be >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("admm: epsilon must be > 0");
}

double default_mu(const MatrixXd& X) {
  const Index n = X.cols();
  const Index d = X.rows();
  if (n < 2) throw ValidationError("default_mu: need at least two points");

  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    double row_max = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (Index r = 0; r < d; ++r) dot += X(r, i) * X(r, j);
      row_max = std::max(row_max, std::abs(dot));
    }
    best = std::min(best, row_max);
  }
  return best;
}

AffinityResult admm_affinity(const MatrixXd& X_in, const MatrixXd& basis, const MatrixXd& W,
                             const AdmmConfig& cfg) {
  cfg.check();
  const Index n = X_in.cols();
  if (n < 2) throw ValidationError("admm_affinity: need at least two points");
  if (basis.cols() != n) throw ValidationError("admm_affinity: basis column count mismatch");
  if (W.cols() > 0 && W.rows() != basis.rows())
    throw ValidationError("admm_affinity: W rows must match basis rows");
  if (!all_finite(X_in) || !all_finite(basis) || !all_finite(W))
    throw ValidationError("admm_affinity: non-finite input");

  MatrixXd X = X_in;
  if (cfg.normalize_columns) {
    for (Index j = 0; j < n; ++j) {
      const double norm = X.col(j).norm();
      if (norm > 0.0) X.col(j) /= norm;
    }
  }

  const double rho = cfg.rho;
  const double mu = cfg.mu ? *cfg.mu : cfg.mu_scale * default_mu(X);

  // Left-hand side of the Z-step: G = X^T X + rho I + alpha K^T W W^T K.
  MatrixXd gram = X.transpose() * X;
  if (cfg.alpha > 0.0 && W.cols() > 0) {
    const MatrixXd projected = W.transpose() * basis;
    gram.noalias() += cfg.alpha * (projected.transpose() * projected);
  }
  MatrixXd lhs = gram;
  lhs.diagonal().array() += rho;

  const Eigen::LLT<MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) throw NumericalError("admm_affinity: Z-step system not positive definite");
  const MatrixXd lhs_inv = llt.solve(MatrixXd::Identity(n, n));

  // G^{-1} (gram + rho A + Delta) = (I - rho G^{-1}) + G^{-1} (rho A + Delta)
  MatrixXd base = -rho * lhs_inv;
  base.diagonal().array() += 1.0;

  AdmmState st;
  st.mu = mu;
  st.A = MatrixXd::Zero(n, n);
  st.Z = MatrixXd::Zero(n, n);
  st.Delta = MatrixXd::Zero(n, n);

  MatrixXd A_prev(n, n);
  MatrixXd rhs(n, n);
  const double shrink = mu / rho;
  for (int q = 1; q <= cfg.max_iter; ++q) {
    rhs = rho * st.A + st.Delta;
    st.Z = base;
    st.Z.noalias() += lhs_inv * rhs;

    A_prev.swap(st.A);
    st.A = soft_threshold(st.Z - st.Delta / rho, shrink);
    st.A.diagonal().setZero();

    st.Delta.noalias() += rho * (st.A - st.Z);

    st.iteration = q;
    st.primal_residual = (st.A - st.Z).squaredNorm();
    st.change_residual = (st.A - A_prev).squaredNorm();
    st.primal_history.push_back(st.primal_residual);
    if (!std::isfinite(st.primal_residual) || !std::isfinite(st.change_residual))
      throw DivergenceError("admm_affinity: non-finite iterate at iteration " + std::to_string(q));
    if (st.primal_residual <= cfg.epsilon && st.change_residual <= cfg.epsilon) {
      st.converged = true;
      break;
    }
  }

  MatrixXd affinity = st.A;
  return {std::move(affinity), std::move(st)};
}

namespace {

double squared_distance_rows(const MatrixXd& a, Index i, const MatrixXd& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

MatrixXd plus_plus_seeds(const MatrixXd& points, int clusters, std::mt19937_64& rng) {
  const Index n = points.rows();
  MatrixXd centers(clusters, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));

  VectorXd closest(n);
  for (Index i = 0; i < n; ++i) closest[i] = squared_distance_rows(points, i, centers, 0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < clusters; ++c) {
    const double total = closest.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i)
      closest[i] = std::min(closest[i], squared_distance_rows(points, i, centers, c));
  }
  return centers;
}

KMeansResult lloyd(const MatrixXd& points, MatrixXd centers, int max_iter) {
  const Index n = points.rows();
  const int k = static_cast<int>(centers.rows());
  VectorXi labels = VectorXi::Constant(n, -1);
  VectorXd dist(n);

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance_rows(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance_rows(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist[i] = best_d;
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    VectorXi counts = VectorXi::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Empty cluster: move it onto the point farthest from its center.
        Index far = 0;
        dist.maxCoeff(&far);
        centers.row(c) = points.row(far);
        dist[far] = 0.0;
      }
    }
  }

  KMeansResult out;
  out.labels = labels;
  out.centers = std::move(centers);
  out.inertia = 0.0;
  for (Index i = 0; i < n; ++i) out.inertia += squared_distance_rows(points, i, out.centers, labels[i]);
  return out;
}

}  // namespace

KMeansResult kmeans(const MatrixXd& points, int clusters, std::uint64_t seed, int restarts,
                    int max_iter) {
  if (clusters < 1 || clusters > points.rows())
    throw ValidationError("kmeans: cluster count must be in [1, number of points]");
  if (restarts < 1) throw ValidationError("kmeans: restarts must be >= 1");

  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd(points, plus_plus_seeds(points, clusters, rng), max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

ManifoldAssignment ncut_cluster(const MatrixXd& affinity, int clusters, std::uint64_t seed) {
  const Index n = affinity.rows();
  if (affinity.cols() != n) throw ValidationError("ncut_cluster: affinity must be square");
  if (clusters < 1) throw ValidationError("ncut_cluster: cluster count must be >= 1");
  if (clusters > n) throw ValidationError("ncut_cluster: more clusters than points");
  if (!all_finite(affinity)) throw ValidationError("ncut_cluster: non-finite affinity");

  if (clusters == 1) return ManifoldAssignment::single(n);

  MatrixXd S = affinity.cwiseAbs() + affinity.cwiseAbs().transpose();
  VectorXd degree = S.rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    if (degree[i] <= 0.0) {
      S(i, i) += 1e-12;
      degree[i] += 1e-12;
    }
  }
  const VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  MatrixXd laplacian = -(inv_sqrt.asDiagonal() * S * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;

  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(laplacian);
  if (eig.info() != Eigen::Success) throw NumericalError("ncut_cluster: eigen decomposition failed");

  MatrixXd embedding = eig.eigenvectors().leftCols(clusters);
  for (Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  const KMeansResult km = kmeans(embedding, clusters, seed);

  // Number clusters by first appearance so equal partitions print equally.
  std::vector<int> relabel(static_cast<std::size_t>(clusters), 0);
  int next = 0;
  ManifoldAssignment out{VectorXi(n), clusters};
  for (Index i = 0; i < n; ++i) {
    int& slot = relabel[static_cast<std::size_t>(km.labels[i])];
    if (slot == 0) slot = ++next;
    out.labels[i] = slot;
  }
  // Clusters left empty by k-means keep the remaining ids unused.
  return out;
}

}  // namespace tmda
