// Alternating optimization of the kernelized manifold-discrepancy objective:
// ADMM affinity step, normalized-cut re-clustering, and a generalized
// eigenproblem for the projection.
#ifndef TMDA_SOLVER_HPP
#define TMDA_SOLVER_HPP

#include "tmda/common.hpp"
#include "tmda/discrepancy.hpp"
#include "tmda/kernels.hpp"
#include "tmda/manifolds.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tmda {

enum class Mode {
  Full,       // alternate affinity and per-manifold discrepancy
  GlobalMmd,  // alternate, but align only the global MMD
  Decoupled,  // one sparse-coding pass (alpha = 0), cluster once, one projection step
};

// Kernel: Phi(X) = W^T K.  Raw: Phi(X) = W^T X (K replaced by the data).
enum class Mapping { Kernel, Raw };

std::string to_string(Mode mode);
std::string to_string(Mapping mapping);
Mode parse_mode(const std::string& text);

struct TmdaConfig {
  double alpha = 0.01;
  double beta = 100.0;
  int manifolds = 5;   // 0: number of distinct source labels
  int k = 0;           // subspace dimension; 0: intrinsic-dimension estimate
  int k_neighbors = 10;  // neighbours for the intrinsic-dimension estimate
  KernelKind kernel = KernelKind::Rbf;
  std::optional<double> bandwidth;  // rbf; median heuristic when unset
  Mapping mapping = Mapping::Kernel;
  int max_outer = 50;
  double epsilon = 1e-6;
  AdmmConfig admm;
  std::uint64_t seed = 0;
  Mode mode = Mode::Full;

  void check() const;
};

// W is r x k where r is the basis row count (n for kernels, d for Raw).
struct ProjectionWeights {
  MatrixXd W;
  VectorXd eigenvalues;  // multipliers of the k retained eigenpairs
  double ridge = 0.0;

  Index k() const { return W.cols(); }
};

// The symmetric-definite pencil C w = lambda B w of the projection step.
struct Pencil {
  MatrixXd C;  // I + K (beta sum_m M^m + alpha (I - A)(I - A)^T) K^T
  MatrixXd B;  // K K^T + ridge I
  double ridge = 0.0;
};

Pencil build_pencil(const MatrixXd& basis, const MatrixXd& affinity,
                    const DiscrepancyCoefficients& coeffs, double alpha, double beta);

// Eigenvectors of the k smallest eigenvalues, normalized to W^T B W = I, each
// column signed so its largest-magnitude entry is positive.
ProjectionWeights solve_projection(const MatrixXd& basis, const MatrixXd& affinity,
                                   const DiscrepancyCoefficients& coeffs, double alpha, double beta,
                                   int k);
ProjectionWeights solve_pencil(const Pencil& pencil, int k);

double projection_objective(const MatrixXd& W, const MatrixXd& C);

struct TraceEntry {
  int iteration = 0;
  double m3d = 0.0;        // embedded per-manifold discrepancy
  double objective = 0.0;  // full objective value
  double a_change = 0.0;   // |A_p - A_{p-1}|_F^2
  double w_change = 0.0;   // |W_p - W_{p-1}|_F^2
  int admm_iterations = 0;
  bool admm_converged = false;
};

struct TmdaModel {
  ProjectionWeights weights;
  MatrixXd affinity;
  ManifoldAssignment assignment;
  KernelSpec kernel;
  Mapping mapping = Mapping::Kernel;
  MatrixXd train_columns;  // joint [X_s, X_t]
  DomainSplit split;
  double mu = 0.0;
  bool converged = false;
  std::vector<TraceEntry> trace;

  Index dim() const { return train_columns.rows(); }
};

// The basis the projection acts on: K for the kernel map, X for the raw map.
MatrixXd projection_basis(const MatrixXd& X, const KernelSpec& kernel, Mapping mapping);

KernelSpec resolve_kernel(const TmdaConfig& cfg, const MatrixXd& X);

TmdaModel fit(const Dataset& source, const Dataset& target, const TmdaConfig& cfg);

// W^T k(train, X_new) for kernels, W^T X_new for the raw map.
MatrixXd transform(const TmdaModel& model, const MatrixXd& X_new);

// Text container with [kernel], [W], [train], [assignment] sections.
void write_model(std::ostream& out, const TmdaModel& model);
TmdaModel read_model(std::istream& in);

}  // namespace tmda

#endif  // TMDA_SOLVER_HPP
