#include "tmda/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace tmda {

void SynthConfig::check() const {
  if (n_manifolds < 1) throw ValidationError("synth: n_manifolds must be >= 1");
  if (ambient_dim < 1 || manifold_dim < 1) throw ValidationError("synth: dimensions must be >= 1");
  if (manifold_dim >= ambient_dim) throw ValidationError("synth: manifold_dim must be < ambient_dim");
  if (points_per_manifold < 1) throw ValidationError("synth: points_per_manifold must be >= 1");
  if (!(sampling_std >= 0.0) || !(noise_std >= 0.0)) throw ValidationError("synth: std must be >= 0");
  if (!(corrupt_fraction >= 0.0 && corrupt_fraction <= 1.0))
    throw ValidationError("synth: corrupt_fraction must be in [0, 1]");
  if (!std::isfinite(source_mean) || !std::isfinite(target_mean))
    throw ValidationError("synth: means must be finite");
}

namespace {

MatrixXd gaussian(Index rows, Index cols, double mean, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd M(rows, cols);
  // Column-major fill order keeps draws independent of Eigen internals.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = mean + stddev * dist(rng);
  return M;
}

MatrixXd orthonormal_factor(const MatrixXd& M) {
  const Eigen::HouseholderQR<MatrixXd> qr(M);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(M.rows(), M.cols());
  // Fix the QR sign ambiguity so Q depends only on M: diag(R) > 0.
  const MatrixXd& R = qr.matrixQR();
  for (Index j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

void corrupt(MatrixXd& X, double fraction, double noise_std, std::mt19937_64& rng) {
  const Index n = X.cols();
  const auto count = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  if (count == 0) return;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Index c = 0; c < count; ++c) {
    const Index j = order[static_cast<std::size_t>(c)];
    for (Index i = 0; i < X.rows(); ++i) X(i, j) += noise_std * dist(rng);
  }
}

SynthBases draw_bases(const SynthConfig& cfg, std::mt19937_64& rng) {
  const Index d = cfg.ambient_dim;
  SynthBases out;
  const MatrixXd first = orthonormal_factor(gaussian(d, cfg.manifold_dim, 0.0, 1.0, rng));
  out.rotation = orthonormal_factor(gaussian(d, d, 0.0, 1.0, rng));
  if (out.rotation.determinant() < 0.0) out.rotation.col(0) = -out.rotation.col(0);

  out.bases.reserve(static_cast<std::size_t>(cfg.n_manifolds));
  out.bases.push_back(first);
  for (int i = 1; i < cfg.n_manifolds; ++i) out.bases.push_back(out.rotation * out.bases.back());
  return out;
}

}  // namespace

SynthBases synthetic_bases(const SynthConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.seed);
  return draw_bases(cfg, rng);
}

TransferTask generate_synthetic(const SynthConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.seed);
  const SynthBases bases = draw_bases(cfg, rng);

  const Index per = cfg.points_per_manifold;
  const Index n = per * cfg.n_manifolds;
  auto draw_domain = [&](double mean) {
    Dataset data;
    data.X.resize(cfg.ambient_dim, n);
    VectorXi labels(n);
    for (int m = 0; m < cfg.n_manifolds; ++m) {
      const MatrixXd Q = gaussian(cfg.manifold_dim, per, mean, cfg.sampling_std, rng);
      data.X.middleCols(m * per, per) = bases.bases[static_cast<std::size_t>(m)] * Q;
      labels.segment(m * per, per).setConstant(m + 1);
    }
    data.labels = labels;
    return data;
  };

  TransferTask task;
  task.source = draw_domain(cfg.source_mean);
  task.target = draw_domain(cfg.target_mean);
  corrupt(task.source.X, cfg.corrupt_fraction, cfg.noise_std, rng);
  corrupt(task.target.X, cfg.corrupt_fraction, cfg.noise_std, rng);
  task.target_truth = *task.target.labels;
  task.target.labels.reset();
  return task;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, int line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError("not a number: '" + token + "'", line);
  return v;
}

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

long parse_count(const std::string& token, int line) {
  long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || v < 0)
    throw ParseError("malformed matrix header: '" + token + "' is not a count", line);
  return v;
}

}  // namespace

void write_matrix(std::ostream& out, const MatrixXd& M) {
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

MatrixXd read_matrix(std::istream& in, int* line_counter) {
  int local_line = 0;
  int& line_no = line_counter ? *line_counter : local_line;

  std::string line;
  std::vector<std::string> header;
  while (header.empty()) {
    if (!std::getline(in, line)) throw ParseError("missing matrix header", line_no + 1);
    ++line_no;
    header = split_tokens(line);
  }
  if (header.size() != 2) throw ParseError("malformed matrix header, expected 'rows cols'", line_no);
  const long rows = parse_count(header[0], line_no);
  const long cols = parse_count(header[1], line_no);

  MatrixXd M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw ParseError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r),
                       line_no + 1);
    ++line_no;
    const auto tokens = split_tokens(line);
    if (static_cast<long>(tokens.size()) != cols)
      throw ParseError("row " + std::to_string(r + 1) + " has " + std::to_string(tokens.size()) +
                           " values, expected " + std::to_string(cols),
                       line_no);
    for (long c = 0; c < cols; ++c) M(r, c) = parse_double(tokens[static_cast<std::size_t>(c)], line_no);
  }
  return M;
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_matrix(out, M);
}

Dataset read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Dataset data;
  int line = 0;
  std::string rest;
  data.X = read_matrix(in, &line);
  while (std::getline(in, rest)) {
    ++line;
    if (!split_tokens(rest).empty()) throw ParseError("trailing content after matrix", line);
  }
  return data;
}

VectorXi parse_labels(std::istream& in) {
  std::vector<int> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 1) throw ParseError("expected one label per line", line_no);
    int v = 0;
    const auto& t = tokens.front();
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw ParseError("not an integer label: '" + t + "'", line_no);
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("empty label file", 0);
  return Eigen::Map<VectorXi>(values.data(), static_cast<Index>(values.size()));
}

void write_labels(const std::filesystem::path& path, const VectorXi& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Index i = 0; i < labels.size(); ++i) out << labels[i] << '\n';
}

VectorXi read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_labels(in);
}

double estimate_intrinsic_dim(const MatrixXd& X, int k_neighbors) {
  const Index n = X.cols();
  if (k_neighbors < 2) throw ValidationError("estimate_intrinsic_dim: need k_neighbors >= 2");
  if (n <= k_neighbors) throw ValidationError("estimate_intrinsic_dim: fewer points than neighbours");
  if (!all_finite(X)) throw ValidationError("estimate_intrinsic_dim: non-finite entries");

  constexpr double kPerturb = 1e-12;
  const auto k = static_cast<std::size_t>(k_neighbors);
  std::vector<double> dist(static_cast<std::size_t>(n - 1));
  double inverse_sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) dist[c++] = (X.col(i) - X.col(j)).norm();
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j)
      if (dist[j] <= 0.0) dist[j] = kPerturb;

    // Inverse of the per-point estimate: mean of log(T_k / T_j), j < k.
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) acc += std::log(dist[k - 1] / dist[j]);
    inverse_sum += acc / static_cast<double>(k - 1);
  }
  const double mean_inverse = inverse_sum / static_cast<double>(n);
  if (!(mean_inverse > 0.0))
    throw DegenerateError("estimate_intrinsic_dim: all neighbour distances coincide");
  return 1.0 / mean_inverse;
}

int subspace_dim_from_estimate(double estimate, int max_dim) {
  if (max_dim < 1) throw ValidationError("subspace_dim_from_estimate: max_dim must be >= 1");
  const long r = std::lround(estimate);
  return static_cast<int>(std::clamp<long>(r, 1, max_dim));
}

}  // namespace tmda
