// Shared types and error classes for the tmda library.
#ifndef TMDA_COMMON_HPP
#define TMDA_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tmda {

inline constexpr const char* kVersion = "0.1.0";

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using VectorXi = Eigen::VectorXi;
using Index = Eigen::Index;

// Bad arguments: shape mismatches, out-of-range options, non-finite input.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but too degenerate for the requested quantity.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A factorization or eigen solve failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterate became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")"
                                    : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// A d x n matrix whose columns are points, with optional integer labels.
template <typename Scalar>
struct BasicDataset {
  Matrix<Scalar> X;
  std::optional<VectorXi> labels;

  Index dim() const { return X.rows(); }
  Index size() const { return X.cols(); }
  bool labeled() const { return labels.has_value(); }
};

using Dataset = BasicDataset<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

template <typename Scalar>
void validate(const BasicDataset<Scalar>& data, const char* what) {
  if (!all_finite(data.X))
    throw ValidationError(std::string(what) + ": non-finite entries");
  if (data.labels && data.labels->size() != data.X.cols())
    throw ValidationError(std::string(what) + ": label count does not match columns");
}

// Columns [0, n_source) are source points, [n_source, n) are target points.
struct DomainSplit {
  Index n_source = 0;
  Index n_target = 0;

  Index total() const { return n_source + n_target; }
  bool is_source(Index i) const { return i < n_source; }

  void check(Index n) const {
    if (n_source < 1 || n_target < 1)
      throw ValidationError("domain split needs at least one source and one target point");
    if (n_source + n_target != n)
      throw ValidationError("domain split size " + std::to_string(total()) +
                            " does not match " + std::to_string(n));
  }
};

// Labels in [1, count] partitioning the joint source+target columns.
struct ManifoldAssignment {
  VectorXi labels;
  int count = 1;

  Index size() const { return labels.size(); }

  void check(Index n) const {
    if (count < 1) throw ValidationError("manifold count must be >= 1");
    if (labels.size() != n)
      throw ValidationError("assignment length " + std::to_string(labels.size()) +
                            " does not match " + std::to_string(n));
    for (Index i = 0; i < labels.size(); ++i)
      if (labels[i] < 1 || labels[i] > count)
        throw ValidationError("manifold label out of range at index " + std::to_string(i));
  }

  static ManifoldAssignment single(Index n) {
    return {VectorXi::Ones(n), 1};
  }
};

}  // namespace tmda

#endif  // TMDA_COMMON_HPP
