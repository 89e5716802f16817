// Independent oracles and random generators shared by the unit and
// acceptance tests. Nothing here calls into the library's numerics.
#ifndef TMDA_TESTS_SUPPORT_HPP
#define TMDA_TESTS_SUPPORT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using Index = Eigen::Index;

inline MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng, double std = 1.0) {
  std::normal_distribution<double> nd(0.0, std);
  MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
  return M;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Plain triple loops, one kernel evaluation at a time.
inline double linear_k(const VectorXd& a, const VectorXd& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double rbf_k(const VectorXd& a, const VectorXd& b, double gamma) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * s);
}

template <typename Kern>
double brute_mmd(const MatrixXd& Xs, const MatrixXd& Xt, Kern&& k) {
  const double ns = static_cast<double>(Xs.cols()), nt = static_cast<double>(Xt.cols());
  double ss = 0.0, tt = 0.0, st = 0.0;
  for (Index i = 0; i < Xs.cols(); ++i)
    for (Index j = 0; j < Xs.cols(); ++j) ss += k(Xs.col(i), Xs.col(j));
  for (Index i = 0; i < Xt.cols(); ++i)
    for (Index j = 0; j < Xt.cols(); ++j) tt += k(Xt.col(i), Xt.col(j));
  for (Index i = 0; i < Xs.cols(); ++i)
    for (Index j = 0; j < Xt.cols(); ++j) st += k(Xs.col(i), Xt.col(j));
  return ss / (ns * ns) + tt / (nt * nt) - 2.0 * st / (ns * nt);
}

// |mean(Xs) - mean(Xt)|^2, the linear-kernel MMD.
inline double mean_gap(const MatrixXd& Xs, const MatrixXd& Xt) {
  VectorXd ms = VectorXd::Zero(Xs.rows()), mt = VectorXd::Zero(Xt.rows());
  for (Index j = 0; j < Xs.cols(); ++j) ms += Xs.col(j);
  for (Index j = 0; j < Xt.cols(); ++j) mt += Xt.col(j);
  ms /= static_cast<double>(Xs.cols());
  mt /= static_cast<double>(Xt.cols());
  return (ms - mt).squaredNorm();
}

// Columns of X whose mask entry equals `value`.
inline MatrixXd columns_where(const MatrixXd& X, const std::vector<int>& mask, int value) {
  std::vector<Index> cols;
  for (Index j = 0; j < X.cols(); ++j)
    if (mask[static_cast<std::size_t>(j)] == value) cols.push_back(j);
  MatrixXd out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = X.col(cols[c]);
  return out;
}

// Cyclic coordinate descent for
//   min_a 1/2 |x_i - X a|^2 + mu |a|_1,  a_i = 0.
inline VectorXd lasso_column(const MatrixXd& X, Index i, double mu, int sweeps = 200000,
                             double tol = 1e-15) {
  const Index n = X.cols();
  VectorXd a = VectorXd::Zero(n);
  VectorXd r = X.col(i);
  for (int s = 0; s < sweeps; ++s) {
    double change = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double nj = X.col(j).squaredNorm();
      if (nj == 0.0) continue;
      const double rho = X.col(j).dot(r) + nj * a[j];
      const double mag = std::max(std::abs(rho) - mu, 0.0);
      const double next = (rho > 0 ? mag : -mag) / nj;
      const double delta = next - a[j];
      if (delta != 0.0) {
        r -= delta * X.col(j);
        a[j] = next;
        change = std::max(change, std::abs(delta));
      }
    }
    if (change < tol) break;
  }
  return a;
}

// Fraction of points labelled correctly under the best one-to-one relabelling
// of `pred` (labels 1..clusters). Exhaustive over permutations.
inline double matched_accuracy(const VectorXi& pred, const VectorXi& truth, int clusters) {
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(clusters + 1),
                                       std::vector<int>(static_cast<std::size_t>(clusters + 1), 0));
  for (Index i = 0; i < pred.size(); ++i)
    ++counts[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
  std::vector<int> perm(static_cast<std::size_t>(clusters));
  std::iota(perm.begin(), perm.end(), 1);
  int best = 0;
  do {
    int hit = 0;
    for (int p = 1; p <= clusters; ++p)
      hit += counts[static_cast<std::size_t>(p)][static_cast<std::size_t>(perm[static_cast<std::size_t>(p - 1)])];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

// A random r x k matrix made B-orthonormal: R (R^T B R)^{-1/2}.
inline MatrixXd random_b_orthonormal(const MatrixXd& B, Index k, std::mt19937_64& rng) {
  const MatrixXd R = gaussian(B.rows(), k, rng);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(R.transpose() * B * R);
  const VectorXd inv_sqrt = es.eigenvalues().array().rsqrt();
  return R * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

inline double trace_form(const MatrixXd& W, const MatrixXd& C) {
  double t = 0.0;
  for (Index c = 0; c < W.cols(); ++c) t += W.col(c).dot(C * W.col(c));
  return t;
}

}  // namespace oracle

#endif  // TMDA_TESTS_SUPPORT_HPP
