// Nearest-neighbour evaluation and linear-strategy selection.
#ifndef TMDA_EVAL_HPP
#define TMDA_EVAL_HPP

#include "tmda/common.hpp"
#include "tmda/solver.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tmda {

// 1-NN under Euclidean distance; ties go to the lowest training column.
VectorXi nn_classify(const MatrixXd& train_feats, const VectorXi& train_labels,
                     const MatrixXd& test_feats);

double rmse(const VectorXi& pred, const VectorXi& truth);
double accuracy(const VectorXi& pred, const VectorXi& truth);

struct EvalReport {
  double rmse = 0.0;
  double accuracy = 0.0;
  std::map<int, double> per_class_accuracy;  // keyed by true label
  Index n_evaluated = 0;
};

EvalReport evaluate(const VectorXi& pred, const VectorXi& truth);

// key=value lines
std::string format_report(const EvalReport& report);

enum class LinearStrategy { RawLinear, LinearKernel };

std::string to_string(LinearStrategy s);

struct StrategySelection {
  LinearStrategy choice = LinearStrategy::RawLinear;
  std::vector<double> raw_fold_errors;
  std::vector<double> kernel_fold_errors;
  bool stratified = true;
  std::string warning;

  double raw_error() const;
  double kernel_error() const;
};

// Fold assignment (0..folds-1) for each column; stratified by label when every
// class has at least `folds` members.
std::vector<int> assign_folds(const VectorXi& labels, int folds, std::uint64_t seed,
                              bool* stratified = nullptr);

// Seeded 5-fold source error of the raw linear map versus the linear kernel;
// the lower mean error wins, ties go to the raw map. The target is kept whole
// in every fold's fit.
StrategySelection select_linear_strategy(const Dataset& source, const Dataset& target,
                                         const TmdaConfig& cfg);

}  // namespace tmda

#endif  // TMDA_EVAL_HPP
