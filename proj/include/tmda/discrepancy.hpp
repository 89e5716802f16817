// Empirical MMD, per-manifold MMD (M3D), and their trace-form coefficients.
#ifndef TMDA_DISCREPANCY_HPP
#define TMDA_DISCREPANCY_HPP

#include "tmda/common.hpp"
#include "tmda/kernels.hpp"

#include <vector>

namespace tmda {

inline constexpr double kNegativeClamp = 1e-12;

struct M3dValue {
  double value = 0.0;
  int active = 0;
  int skipped = 0;  // manifolds with no source or no target member
};

template <typename Scalar>
struct BasicDiscrepancyCoefficients {
  std::vector<Matrix<Scalar>> matrices;
  std::vector<bool> active;

  int active_count() const {
    int c = 0;
    for (bool a : active) c += a ? 1 : 0;
    return c;
  }

  Matrix<Scalar> sum() const {
    if (matrices.empty()) return {};
    Matrix<Scalar> total = Matrix<Scalar>::Zero(matrices.front().rows(), matrices.front().cols());
    for (const auto& m : matrices) total += m;
    return total;
  }
};

using DiscrepancyCoefficients = BasicDiscrepancyCoefficients<double>;

namespace detail {

inline double clamp_tiny_negative(double v) {
  return (v < 0.0 && v >= -kNegativeClamp) ? 0.0 : v;
}

template <typename Derived>
double block_mean(const Eigen::MatrixBase<Derived>& K, const std::vector<Index>& rows,
                  const std::vector<Index>& cols) {
  double s = 0.0;
  for (Index j : cols)
    for (Index i : rows) s += static_cast<double>(K(i, j));
  return s / (static_cast<double>(rows.size()) * static_cast<double>(cols.size()));
}

template <typename Derived>
double mmd_from_blocks(const Eigen::MatrixBase<Derived>& K, const std::vector<Index>& src,
                       const std::vector<Index>& tgt) {
  return block_mean(K, src, src) + block_mean(K, tgt, tgt) - 2.0 * block_mean(K, src, tgt);
}

}  // namespace detail

template <typename Scalar>
double empirical_mmd(const BasicKernelMatrix<Scalar>& K, const DomainSplit& split) {
  if (K.values.rows() != K.values.cols()) throw ValidationError("empirical_mmd: kernel not square");
  split.check(K.size());
  std::vector<Index> src(static_cast<std::size_t>(split.n_source));
  std::vector<Index> tgt(static_cast<std::size_t>(split.n_target));
  for (Index i = 0; i < split.n_source; ++i) src[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < split.n_target; ++i) tgt[static_cast<std::size_t>(i)] = split.n_source + i;
  return detail::clamp_tiny_negative(detail::mmd_from_blocks(K.values, src, tgt));
}

// Mean of per-manifold MMDs over the manifolds present on both sides.
template <typename Scalar>
M3dValue empirical_m3d(const BasicKernelMatrix<Scalar>& K, const DomainSplit& split,
                       const ManifoldAssignment& assign) {
  if (K.values.rows() != K.values.cols()) throw ValidationError("empirical_m3d: kernel not square");
  split.check(K.size());
  assign.check(K.size());

  const auto count = static_cast<std::size_t>(assign.count);
  std::vector<std::vector<Index>> src(count), tgt(count);
  for (Index i = 0; i < K.size(); ++i) {
    const auto m = static_cast<std::size_t>(assign.labels[i] - 1);
    (split.is_source(i) ? src : tgt)[m].push_back(i);
  }

  M3dValue out;
  double total = 0.0;
  for (std::size_t m = 0; m < count; ++m) {
    if (src[m].empty() || tgt[m].empty()) {
      ++out.skipped;
      continue;
    }
    ++out.active;
    total += detail::mmd_from_blocks(K.values, src[m], tgt[m]);
  }
  if (out.active == 0) throw DegenerateError("empirical_m3d: no manifold has both source and target points");
  out.value = detail::clamp_tiny_negative(total / out.active);
  return out;
}

// M^m = v v^T with v = 1/n_s^m on the manifold's source points and
// -1/n_t^m on its target points; zero (inactive) if either side is empty.
inline DiscrepancyCoefficients build_coefficients(const DomainSplit& split,
                                                  const ManifoldAssignment& assign) {
  const Index n = split.total();
  split.check(n);
  assign.check(n);

  const auto count = static_cast<std::size_t>(assign.count);
  std::vector<Index> n_src(count, 0), n_tgt(count, 0);
  for (Index i = 0; i < n; ++i) {
    const auto m = static_cast<std::size_t>(assign.labels[i] - 1);
    ++(split.is_source(i) ? n_src : n_tgt)[m];
  }

  DiscrepancyCoefficients out;
  out.matrices.reserve(count);
  out.active.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    const bool active = n_src[m] > 0 && n_tgt[m] > 0;
    out.active.push_back(active);
    if (!active) {
      out.matrices.push_back(MatrixXd::Zero(n, n));
      continue;
    }
    VectorXd v = VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(assign.labels[i] - 1) != m) continue;
      v[i] = split.is_source(i) ? 1.0 / static_cast<double>(n_src[m])
                                : -1.0 / static_cast<double>(n_tgt[m]);
    }
    out.matrices.push_back(v * v.transpose());
  }
  return out;
}

// The single global coefficient matrix (all points in one manifold).
inline DiscrepancyCoefficients global_coefficients(const DomainSplit& split) {
  return build_coefficients(split, ManifoldAssignment::single(split.total()));
}

}  // namespace tmda

#endif  // TMDA_DISCREPANCY_HPP
