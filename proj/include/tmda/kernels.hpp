// Linear and Gaussian (rbf) kernels over column-major point sets.
#ifndef TMDA_KERNELS_HPP
#define TMDA_KERNELS_HPP

#include "tmda/common.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace tmda {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  // rbf only: k(x, y) = exp(-bandwidth * |x - y|^2)
  std::optional<double> bandwidth;

  static KernelSpec linear() { return {KernelKind::Linear, std::nullopt}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma}; }

  void check() const {
    if (kind == KernelKind::Rbf && !(bandwidth && *bandwidth > 0.0 && std::isfinite(*bandwidth)))
      throw ValidationError("rbf kernel needs a positive bandwidth");
    if (kind == KernelKind::Linear && bandwidth)
      throw ValidationError("linear kernel takes no bandwidth");
  }

  bool operator==(const KernelSpec&) const = default;
};

inline std::string to_string(KernelKind kind) {
  return kind == KernelKind::Rbf ? "rbf" : "linear";
}

template <typename Scalar>
struct BasicKernelMatrix {
  Matrix<Scalar> values;
  KernelSpec spec;

  Index size() const { return values.rows(); }
};

using KernelMatrix = BasicKernelMatrix<double>;

namespace detail {

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_distance(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).squaredNorm();
}

}  // namespace detail

// Cross kernel K(i, j) = k(left_i, right_j) between the columns of two sets.
template <typename DerivedL, typename DerivedR>
Matrix<typename DerivedL::Scalar> cross_kernel(const Eigen::MatrixBase<DerivedL>& left,
                                               const Eigen::MatrixBase<DerivedR>& right,
                                               const KernelSpec& spec) {
  using Scalar = typename DerivedL::Scalar;
  spec.check();
  if (left.rows() != right.rows())
    throw ValidationError("cross_kernel: feature dimensions differ");
  if (!all_finite(left) || !all_finite(right))
    throw ValidationError("cross_kernel: non-finite entries");

  Matrix<Scalar> out = left.transpose() * right;
  if (spec.kind == KernelKind::Rbf) {
    const Scalar gamma = static_cast<Scalar>(*spec.bandwidth);
    for (Index j = 0; j < right.cols(); ++j)
      for (Index i = 0; i < left.cols(); ++i)
        out(i, j) = std::exp(-gamma * detail::squared_distance(left.col(i), right.col(j)));
  }
  return out;
}

// Gram matrix over the columns of X. Only the upper triangle is evaluated;
// the lower one is mirrored so the result is exactly symmetric.
template <typename Derived>
BasicKernelMatrix<typename Derived::Scalar> kernel_matrix(const Eigen::MatrixBase<Derived>& X,
                                                          const KernelSpec& spec) {
  using Scalar = typename Derived::Scalar;
  spec.check();
  if (X.cols() < 1) throw ValidationError("kernel_matrix: empty point set");
  if (!all_finite(X)) throw ValidationError("kernel_matrix: non-finite entries");

  const Index n = X.cols();
  Matrix<Scalar> K(n, n);
  if (spec.kind == KernelKind::Linear) {
    K.template triangularView<Eigen::Upper>() = X.transpose() * X;
  } else {
    const Scalar gamma = static_cast<Scalar>(*spec.bandwidth);
    for (Index j = 0; j < n; ++j) {
      K(j, j) = Scalar(1);
      for (Index i = 0; i < j; ++i)
        K(i, j) = std::exp(-gamma * detail::squared_distance(X.col(i), X.col(j)));
    }
  }
  K.template triangularView<Eigen::StrictlyLower>() = K.transpose();
  return {std::move(K), spec};
}

template <typename Scalar>
BasicKernelMatrix<Scalar> kernel_matrix(const BasicDataset<Scalar>& data, const KernelSpec& spec) {
  return kernel_matrix(data.X, spec);
}

// Median heuristic: 1 / median of the nonzero pairwise squared distances.
// An even count of distances takes the mean of the two middle values.
template <typename Derived>
double median_bandwidth(const Eigen::MatrixBase<Derived>& X) {
  const Index n = X.cols();
  if (n < 2) throw ValidationError("median_bandwidth: need at least two points");
  if (!all_finite(X)) throw ValidationError("median_bandwidth: non-finite entries");

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const double d = static_cast<double>(detail::squared_distance(X.col(i), X.col(j)));
      if (d > 0.0) dists.push_back(d);
    }
  if (dists.empty()) throw DegenerateError("median_bandwidth: all points coincide");

  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return 1.0 / median;
}

template <typename Scalar>
double median_bandwidth(const BasicDataset<Scalar>& data) {
  return median_bandwidth(data.X);
}

}  // namespace tmda

#endif  // TMDA_KERNELS_HPP
