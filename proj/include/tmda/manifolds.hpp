// Manifold discovery: sparse self-representation by ADMM, then normalized-cut
// spectral clustering of the resulting affinity.
#ifndef TMDA_MANIFOLDS_HPP
#define TMDA_MANIFOLDS_HPP

#include "tmda/common.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tmda {

struct AdmmConfig {
  std::optional<double> mu;  // sparsity weight; mu_scale * default_mu(X) when unset
  double mu_scale = 1.0;
  double rho = 1.0;
  double alpha = 0.0;        // weight of the projected self-representation term
  int max_iter = 100;
  double epsilon = 1e-6;
  bool normalize_columns = false;  // L2-normalize the columns of X first

  void check() const;
};

struct AdmmState {
  MatrixXd A;
  MatrixXd Z;
  MatrixXd Delta;
  int iteration = 0;
  double primal_residual = 0.0;  // |A - Z|_F^2
  double change_residual = 0.0;  // |A^q - A^{q-1}|_F^2
  bool converged = false;
  double mu = 0.0;
  std::vector<double> primal_history;
};

struct AffinityResult {
  MatrixXd affinity;  // zero diagonal
  AdmmState state;
};

// min_i max_{j != i} |x_i^T x_j|
double default_mu(const MatrixXd& X);

// Elementwise (|v| - mu)_+ sgn(v).
template <typename Derived>
Matrix<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& V,
                                                typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (mu < Scalar(0)) throw ValidationError("soft_threshold: negative threshold");
  return V.unaryExpr([mu](Scalar v) {
    const Scalar mag = std::abs(v) - mu;
    if (mag <= Scalar(0)) return Scalar(0);
    return v > Scalar(0) ? mag : -mag;
  });
}

// Solves
//   min_A 1/2 |X - XA|^2 + mu |A|_1 + alpha/2 |W^T K - W^T K A|^2,  diag(A) = 0
// by ADMM on the split Z = A, starting from A = Z = Delta = 0.
// `basis` is the n x n kernel matrix (or the d x n data matrix for the
// raw linear map); `W` has basis.rows() rows, or zero columns for W = 0.
AffinityResult admm_affinity(const MatrixXd& X, const MatrixXd& basis, const MatrixXd& W,
                             const AdmmConfig& cfg);

struct KMeansResult {
  VectorXi labels;  // 0-based
  MatrixXd centers;  // one center per row
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds; best inertia over `restarts` runs.
KMeansResult kmeans(const MatrixXd& points, int clusters, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300);

// Normalized-cut spectral clustering on S = |A| + |A|^T. Labels are in
// [1, clusters], numbered by first appearance.
ManifoldAssignment ncut_cluster(const MatrixXd& affinity, int clusters, std::uint64_t seed);

}  // namespace tmda

#endif  // TMDA_MANIFOLDS_HPP
