// Synthetic multi-manifold transfer tasks, matrix text files, and
// nearest-neighbour intrinsic dimension estimation.
#ifndef TMDA_DATA_HPP
#define TMDA_DATA_HPP

#include "tmda/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tmda {

struct SynthConfig {
  int n_manifolds = 5;
  int ambient_dim = 100;
  int manifold_dim = 10;
  int points_per_manifold = 40;
  double source_mean = 0.05;
  double target_mean = -0.05;
  double sampling_std = 0.1;
  double corrupt_fraction = 0.05;
  double noise_std = 0.1;
  std::uint64_t seed = 1;

  void check() const;
};

struct TransferTask {
  Dataset source;              // labeled
  Dataset target;              // labels withheld
  VectorXi target_truth;       // ground truth for evaluation only
};

// Generator internals, exposed for inspection and tests.
struct SynthBases {
  MatrixXd rotation;               // T, det(T) = +1
  std::vector<MatrixXd> bases;     // U_1 .. U_N, U_{i+1} = T U_i
};

SynthBases synthetic_bases(const SynthConfig& cfg);

// Source and target share the manifold bases U_i; each draws its own
// coordinates Q_i with a domain-specific mean. Labels are manifold ids 1..N,
// points ordered manifold by manifold.
TransferTask generate_synthetic(const SynthConfig& cfg);

// Matrix text format: "rows cols" on the first line, then one line per row
// of space-separated values written with 17 significant digits.
void write_matrix(std::ostream& out, const MatrixXd& M);
MatrixXd read_matrix(std::istream& in, int* line_counter = nullptr);

void write_matrix(const std::filesystem::path& path, const MatrixXd& M);
Dataset read_matrix(const std::filesystem::path& path);

// One integer per line.
void write_labels(const std::filesystem::path& path, const VectorXi& labels);
VectorXi read_labels(const std::filesystem::path& path);
VectorXi parse_labels(std::istream& in);

std::string format_double(double v);
double parse_double(const std::string& token, int line);

// Levina-Bickel maximum likelihood estimate using `k_neighbors` nearest
// neighbours, aggregated by averaging the per-point inverse estimates.
double estimate_intrinsic_dim(const MatrixXd& X, int k_neighbors);

// round(estimate) clamped to [1, max_dim].
int subspace_dim_from_estimate(double estimate, int max_dim);

}  // namespace tmda

#endif  // TMDA_DATA_HPP
