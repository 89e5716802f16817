#include "tmda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "tmda/data.hpp"

namespace tmda {

VectorXi nn_classify(const MatrixXd& train_feats, const VectorXi& train_labels,
                     const MatrixXd& test_feats) {
  if (train_feats.cols() < 1) throw ValidationError("nn_classify: empty training set");
  if (train_labels.size() != train_feats.cols())
    throw ValidationError("nn_classify: training label count mismatch");
  if (train_feats.rows() != test_feats.rows())
    throw ValidationError("nn_classify: feature dimensions differ");

  VectorXi out(test_feats.cols());
  for (Index j = 0; j < test_feats.cols(); ++j) {
    Index best = 0;
    double best_d = (train_feats.col(0) - test_feats.col(j)).squaredNorm();
    for (Index i = 1; i < train_feats.cols(); ++i) {
      const double d = (train_feats.col(i) - test_feats.col(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out[j] = train_labels[best];
  }
  return out;
}

namespace {

void check_pair(const VectorXi& pred, const VectorXi& truth) {
  if (pred.size() != truth.size()) throw ValidationError("prediction and truth lengths differ");
  if (pred.size() < 1) throw ValidationError("empty prediction");
}

}  // namespace

double rmse(const VectorXi& pred, const VectorXi& truth) {
  check_pair(pred, truth);
  double sum = 0.0;
  for (Index i = 0; i < pred.size(); ++i) {
    const double diff = static_cast<double>(pred[i]) - static_cast<double>(truth[i]);
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double accuracy(const VectorXi& pred, const VectorXi& truth) {
  check_pair(pred, truth);
  return static_cast<double>((pred.array() == truth.array()).count()) /
         static_cast<double>(pred.size());
}

EvalReport evaluate(const VectorXi& pred, const VectorXi& truth) {
  EvalReport r;
  r.rmse = rmse(pred, truth);
  r.accuracy = accuracy(pred, truth);
  r.n_evaluated = pred.size();
  std::map<int, std::pair<Index, Index>> counts;  // label -> (correct, total)
  for (Index i = 0; i < truth.size(); ++i) {
    auto& c = counts[truth[i]];
    ++c.second;
    if (pred[i] == truth[i]) ++c.first;
  }
  for (const auto& [label, c] : counts)
    r.per_class_accuracy[label] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return r;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << "rmse=" << format_double(report.rmse) << '\n';
  out << "accuracy=" << format_double(report.accuracy) << '\n';
  out << "n_evaluated=" << report.n_evaluated << '\n';
  for (const auto& [label, acc] : report.per_class_accuracy)
    out << "class_accuracy." << label << '=' << format_double(acc) << '\n';
  return out.str();
}

std::string to_string(LinearStrategy s) {
  return s == LinearStrategy::RawLinear ? "raw_linear" : "linear_kernel";
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Dataset select_columns(const Dataset& data, const std::vector<Index>& cols) {
  Dataset out;
  out.X.resize(data.dim(), static_cast<Index>(cols.size()));
  VectorXi labels(static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.X.col(static_cast<Index>(c)) = data.X.col(cols[c]);
    if (data.labels) labels[static_cast<Index>(c)] = (*data.labels)[cols[c]];
  }
  if (data.labels) out.labels = labels;
  return out;
}

}  // namespace

double StrategySelection::raw_error() const { return mean_of(raw_fold_errors); }
double StrategySelection::kernel_error() const { return mean_of(kernel_fold_errors); }

std::vector<int> assign_folds(const VectorXi& labels, int folds, std::uint64_t seed,
                              bool* stratified) {
  const Index n = labels.size();
  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  bool strat = true;
  for (const auto& [label, members] : by_class)
    if (static_cast<int>(members.size()) < folds) strat = false;
  if (stratified) *stratified = strat;

  std::mt19937_64 rng(seed);
  std::vector<int> fold(static_cast<std::size_t>(n), 0);
  if (strat) {
    int next = 0;
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      for (Index i : members) {
        fold[static_cast<std::size_t>(i)] = next;
        next = (next + 1) % folds;
      }
    }
  } else {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t c = 0; c < order.size(); ++c)
      fold[static_cast<std::size_t>(order[c])] = static_cast<int>(c % static_cast<std::size_t>(folds));
  }
  return fold;
}

StrategySelection select_linear_strategy(const Dataset& source, const Dataset& target,
                                         const TmdaConfig& cfg) {
  constexpr int kFolds = 5;
  if (!source.labels) throw ValidationError("select_linear_strategy: source must be labeled");
  if (source.size() < kFolds) throw ValidationError("select_linear_strategy: need at least 5 source points");

  StrategySelection sel;
  const std::vector<int> fold = assign_folds(*source.labels, kFolds, cfg.seed, &sel.stratified);
  if (!sel.stratified)
    sel.warning = "a class has fewer than 5 members; using unstratified folds";

  const auto fold_error = [&](Mapping mapping, int f) {
    std::vector<Index> train, held;
    for (Index i = 0; i < source.size(); ++i)
      (fold[static_cast<std::size_t>(i)] == f ? held : train).push_back(i);
    const Dataset train_src = select_columns(source, train);
    const Dataset held_src = select_columns(source, held);

    TmdaConfig c = cfg;
    c.mapping = mapping;
    c.kernel = KernelKind::Linear;
    c.bandwidth.reset();
    const TmdaModel model = fit(train_src, target, c);
    const MatrixXd train_feats = transform(model, train_src.X);
    const MatrixXd held_feats = transform(model, held_src.X);
    const VectorXi pred = nn_classify(train_feats, *train_src.labels, held_feats);
    return 1.0 - accuracy(pred, *held_src.labels);
  };

  for (int f = 0; f < kFolds; ++f) {
    sel.raw_fold_errors.push_back(fold_error(Mapping::Raw, f));
    sel.kernel_fold_errors.push_back(fold_error(Mapping::Kernel, f));
  }
  sel.choice = sel.kernel_error() < sel.raw_error() ? LinearStrategy::LinearKernel
                                                    : LinearStrategy::RawLinear;
  return sel;
}

}  // namespace tmda
