#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tmda/data.hpp"
#include "tmda/eval.hpp"

using namespace tmda;

TEST_CASE("a test point equal to a training point takes its label") {
  MatrixXd train(2, 3);
  train << 0, 1, 5, 0, 1, 5;
  VectorXi labels(3);
  labels << 7, 8, 9;
  CHECK(nn_classify(train, labels, train.col(1))[0] == 8);
}

TEST_CASE("ties go to the lower training index") {
  MatrixXd train(1, 2);
  train << -1.0, 1.0;
  VectorXi labels(2);
  labels << 4, 2;
  CHECK(nn_classify(train, labels, MatrixXd::Zero(1, 1))[0] == 4);
}

TEST_CASE("1-nn matches an exhaustive distance table") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd train = oracle::gaussian(3, 20, rng), test = oracle::gaussian(3, 15, rng);
    VectorXi labels(20);
    for (Index i = 0; i < 20; ++i) labels[i] = oracle::uniform_int(rng, 1, 4);
    const VectorXi pred = nn_classify(train, labels, test);
    for (Index j = 0; j < 15; ++j) {
      std::vector<double> d;
      for (Index i = 0; i < 20; ++i) d.push_back((train.col(i) - test.col(j)).squaredNorm());
      const auto best = std::min_element(d.begin(), d.end()) - d.begin();
      CHECK(pred[j] == labels[best]);
    }
  }
}

TEST_CASE("1-nn validation") {
  CHECK_THROWS_AS(nn_classify(MatrixXd(2, 0), VectorXi(0), MatrixXd::Ones(2, 1)), ValidationError);
  CHECK_THROWS_AS(nn_classify(MatrixXd::Ones(2, 2), VectorXi::Ones(3), MatrixXd::Ones(2, 1)), ValidationError);
  CHECK_THROWS_AS(nn_classify(MatrixXd::Ones(2, 2), VectorXi::Ones(2), MatrixXd::Ones(3, 1)), ValidationError);
}

TEST_CASE("rmse and accuracy") {
  VectorXi a(2), b(2);
  a << 1, 1;
  b << 1, 3;
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(accuracy(a, b) == 0.5);
  CHECK_THROWS_AS(rmse(a, VectorXi::Ones(3)), ValidationError);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXi p(30), t(30);
    double s = 0.0;
    for (Index i = 0; i < 30; ++i) {
      p[i] = oracle::uniform_int(rng, 1, 5);
      t[i] = oracle::uniform_int(rng, 1, 5);
      s += double(p[i] - t[i]) * double(p[i] - t[i]);
    }
    CHECK(rmse(p, t) == doctest::Approx(std::sqrt(s / 30.0)).epsilon(1e-12));
  }
}

TEST_CASE("evaluation report") {
  VectorXi p(4), t(4);
  p << 1, 2, 2, 3;
  t << 1, 2, 3, 3;
  const EvalReport r = evaluate(p, t);
  CHECK(r.n_evaluated == 4);
  CHECK(r.per_class_accuracy.at(3) == 0.5);
  CHECK(r.per_class_accuracy.at(1) == 1.0);
  const std::string text = format_report(r);
  CHECK(text.find("accuracy=0.75\n") != std::string::npos);
  CHECK(text.find("class_accuracy.3=0.5\n") != std::string::npos);
}

TEST_CASE("fold assignment") {
  VectorXi labels(20);
  for (Index i = 0; i < 20; ++i) labels[i] = 1 + static_cast<int>(i % 2);
  bool strat = false;
  const auto folds = assign_folds(labels, 5, 3, &strat);
  CHECK(strat);
  for (int f = 0; f < 5; ++f) {
    int ones = 0, twos = 0;
    for (Index i = 0; i < 20; ++i)
      if (folds[static_cast<std::size_t>(i)] == f) (labels[i] == 1 ? ones : twos)++;
    CHECK(ones == 2);
    CHECK(twos == 2);
  }
  CHECK(assign_folds(labels, 5, 3) == folds);

  labels[0] = 9;  // a singleton class
  assign_folds(labels, 5, 3, &strat);
  CHECK_FALSE(strat);
}

TEST_CASE("linear strategy selection reports both fold vectors") {
  SynthConfig s;
  s.n_manifolds = 2;
  s.ambient_dim = 8;
  s.manifold_dim = 2;
  s.points_per_manifold = 10;
  const TransferTask task = generate_synthetic(s);
  TmdaConfig cfg;
  cfg.manifolds = 2;
  cfg.k = 3;
  cfg.max_outer = 2;
  const StrategySelection a = select_linear_strategy(task.source, task.target, cfg);
  CHECK(a.raw_fold_errors.size() == 5);
  CHECK(a.kernel_fold_errors.size() == 5);
  CHECK(a.stratified);
  const StrategySelection b = select_linear_strategy(task.source, task.target, cfg);
  CHECK(a.raw_fold_errors == b.raw_fold_errors);
  CHECK(a.kernel_fold_errors == b.kernel_fold_errors);
  CHECK(a.choice == b.choice);
  if (a.raw_error() == a.kernel_error()) CHECK(a.choice == LinearStrategy::RawLinear);
}

TEST_CASE("strategy selection falls back to unstratified folds") {
  SynthConfig s;
  s.n_manifolds = 2;
  s.ambient_dim = 8;
  s.manifold_dim = 2;
  s.points_per_manifold = 10;
  TransferTask task = generate_synthetic(s);
  (*task.source.labels)[0] = 3;
  TmdaConfig cfg;
  cfg.manifolds = 2;
  cfg.k = 3;
  cfg.max_outer = 2;
  const StrategySelection sel = select_linear_strategy(task.source, task.target, cfg);
  CHECK_FALSE(sel.stratified);
  CHECK_FALSE(sel.warning.empty());
}
