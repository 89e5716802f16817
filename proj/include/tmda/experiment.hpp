// Batch experiment driver: comparison tables, manifold-count and
// hyper-parameter sweeps, and the ablation study.
#ifndef TMDA_EXPERIMENT_HPP
#define TMDA_EXPERIMENT_HPP

#include "tmda/data.hpp"
#include "tmda/eval.hpp"
#include "tmda/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tmda {

enum class Method { NoTransfer, GlobalMmd, ManifoldMmd, Decoupled };
enum class FeatureMap { Raw, LinearKernel, RbfKernel };

struct Cell {
  std::string name;  // e.g. "NT", "T_mmd:rbf", "T_m3d:raw", "TMDA_v2"
  Method method = Method::NoTransfer;
  FeatureMap map = FeatureMap::RbfKernel;
};

// Accepts NT, T_mmd:<map>, T_m3d:<map>, TMDA, TMDA_v1, TMDA_v2 (the last
// three optionally with :<map>), where <map> is raw, lin or rbf.
Cell parse_cell(const std::string& text, FeatureMap default_map = FeatureMap::RbfKernel);

// NT and the six T_mmd/T_m3d cells of the synthetic comparison table.
std::vector<std::string> default_comparison();

TmdaConfig configure_cell(const TmdaConfig& base, const Cell& cell);

struct ExperimentConfig {
  std::string task = "synthetic";  // "synthetic" or "files"
  SynthConfig synth;
  std::string source_path;
  std::string source_labels_path;
  std::string target_path;
  std::string target_labels_path;
  TmdaConfig tmda;
  int repetitions = 1;
  std::string output;
  std::vector<std::string> comparison = default_comparison();
  std::vector<int> n_values = {2, 3, 4, 5, 6, 7, 8};
  std::vector<double> alpha_values = {0.001, 0.01, 0.1, 1.0, 10.0};
  std::vector<double> beta_values = {0.1, 1.0, 10.0, 100.0, 1000.0};
  int threads = 1;

  void check() const;
};

// key = value lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config(const std::string& path);
// Canonical text, every key in a fixed order; parse_config reads it back.
std::string format_config(const ExperimentConfig& cfg);
// FNV-1a over the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// One line of a results file: a kind word followed by key=value fields.
// Values containing spaces, quotes or '=' are double-quoted.
struct Record {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* find(const std::string& key) const;
  const std::string& at(const std::string& key) const;
  double number(const std::string& key) const;
  void set(const std::string& key, std::string value);
};

struct ResultsFile {
  std::vector<Record> records;
  int failed = 0;

  std::vector<const Record*> of_kind(const std::string& kind) const;
  bool all_ok() const { return failed == 0; }
};

std::string format_results(const ResultsFile& results);
ResultsFile parse_results(std::istream& in);
ResultsFile parse_results(const std::string& text);

// Per-repetition task: synthetic tasks use seed synth.seed + rep; file tasks
// are identical across repetitions.
TransferTask load_task(const ExperimentConfig& cfg, int rep);

// Every comparison cell on every repetition; per-cell summaries and an
// RMSE table (one row per repetition plus a mean row).
ResultsFile run_experiment(const ExperimentConfig& cfg);
// Full-mode fits for each manifold count.
ResultsFile sweep_manifold_count(const ExperimentConfig& cfg, const std::vector<int>& n_values);
// Full-mode fits over the alpha x beta grid.
ResultsFile sweep_sensitivity(const ExperimentConfig& cfg, const std::vector<double>& alpha_values,
                              const std::vector<double>& beta_values);
// NT, TMDA_v1, TMDA_v2 and TMDA on the same tasks.
ResultsFile run_ablation(const ExperimentConfig& cfg);

}  // namespace tmda

#endif  // TMDA_EXPERIMENT_HPP
