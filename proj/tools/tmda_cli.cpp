// tmda: command-line driver for the TMDA library.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tmda/discrepancy.hpp"
#include "tmda/experiment.hpp"

namespace fs = std::filesystem;
using namespace tmda;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : read_config(g.config);
  if (g.seed) {
    cfg.synth.seed = *g.seed;
    cfg.tmda.seed = *g.seed;
  }
  if (g.threads) cfg.threads = *g.threads;
  if (!g.out.empty()) cfg.output = g.out;
  return cfg;
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Dataset load_labeled(const std::string& x, const std::string& labels) {
  Dataset d = read_matrix(x);
  if (!labels.empty()) {
    d.labels = read_labels(labels);
    if (d.labels->size() != d.size())
      throw ValidationError(labels + ": label count does not match " + x);
  }
  return d;
}

KernelSpec kernel_from(const std::string& name, std::optional<double> bandwidth, const MatrixXd& X) {
  if (name == "linear") return KernelSpec::linear();
  if (name != "rbf") throw ValidationError("kernel must be linear or rbf");
  return KernelSpec::rbf(bandwidth ? *bandwidth : median_bandwidth(X));
}

MatrixXd concat(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows()) throw ValidationError("source and target dimensions differ");
  MatrixXd X(a.rows(), a.cols() + b.cols());
  X << a, b;
  return X;
}

int finish_results(const ResultsFile& results, const ExperimentConfig& cfg) {
  emit(cfg.output, format_results(results));
  if (!results.all_ok())
    std::cerr << "tmda: " << results.failed << " run(s) failed; see status=error records\n";
  return results.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TMDA: transfer with manifold discrepancy alignment"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config file (key = value)");
  app.add_option("--seed", g.seed, "Overrides synth.seed and tmda.seed");
  app.add_option("--out", g.out, "Output file (directory for generate)");
  app.add_option("--threads", g.threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);

  std::string source, source_labels, target, target_labels, model_path, input, pred_path, assignment_path;
  std::string kernel = "rbf";
  std::optional<double> bandwidth;
  std::optional<std::string> mode;
  int clusters = 5;
  bool normalize = false;
  std::optional<int> admm_iter;
  std::optional<double> mu_scale;

  const auto add_source = [&](CLI::App* c, bool labels_required) {
    c->add_option("--source", source, "Source features (d x n_s)")->required();
    auto* l = c->add_option("--source-labels", source_labels, "Source labels");
    if (labels_required) l->required();
    c->add_option("--target", target, "Target features (d x n_t)")->required();
  };

  auto* generate = app.add_subcommand("generate", "Write a synthetic transfer task");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a TMDA model");
  add_source(fit_cmd, true);
  fit_cmd->add_option("--mode", mode, "full, global_mmd (v1) or decoupled (v2)");

  auto* transform_cmd = app.add_subcommand("transform", "Embed features with a fitted model");
  transform_cmd->add_option("--model", model_path)->required();
  transform_cmd->add_option("--input", input, "Features to embed (d x n)")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "RMSE and accuracy of target predictions");
  evaluate_cmd->add_option("--target-labels", target_labels, "Ground-truth target labels")->required();
  evaluate_cmd->add_option("--pred", pred_path, "Predicted labels; otherwise 1-NN through --model");
  evaluate_cmd->add_option("--model", model_path);
  evaluate_cmd->add_option("--source", source);
  evaluate_cmd->add_option("--source-labels", source_labels);
  evaluate_cmd->add_option("--target", target);

  auto* mmd_cmd = app.add_subcommand("mmd", "Empirical MMD between source and target");
  add_source(mmd_cmd, false);
  mmd_cmd->add_option("--kernel", kernel, "linear or rbf")->check(CLI::IsMember({"linear", "rbf"}));
  mmd_cmd->add_option("--bandwidth", bandwidth, "RBF gamma; median heuristic when omitted");

  auto* m3d_cmd = app.add_subcommand("m3d", "Empirical M3D for a manifold assignment");
  add_source(m3d_cmd, false);
  m3d_cmd->add_option("--assignment", assignment_path,
                      "Manifold index per column, source columns first")->required();
  m3d_cmd->add_option("--kernel", kernel)->check(CLI::IsMember({"linear", "rbf"}));
  m3d_cmd->add_option("--bandwidth", bandwidth);

  auto* cluster_cmd = app.add_subcommand("cluster", "Sparse affinity and normalized-cut clustering");
  add_source(cluster_cmd, false);
  cluster_cmd->add_option("-N,--manifolds", clusters, "Number of manifolds")->check(CLI::PositiveNumber);
  cluster_cmd->add_flag("--normalize-columns", normalize, "L2-normalize columns before ADMM");
  cluster_cmd->add_option("--admm-max-iter", admm_iter);
  cluster_cmd->add_option("--mu-scale", mu_scale, "Multiplier on the min-max sparsity weight");

  auto* experiment_cmd = app.add_subcommand("experiment", "Comparison table over repetitions");
  auto* sweep_n_cmd = app.add_subcommand("sweep-n", "RMSE against the manifold count N");
  auto* sweep_ab_cmd = app.add_subcommand("sweep-ab", "RMSE over the alpha x beta grid");
  auto* ablate_cmd = app.add_subcommand("ablate", "NT, TMDA_v1, TMDA_v2 and TMDA on the same tasks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const ExperimentConfig cfg = load_config(g);
      cfg.synth.check();
      const TransferTask task = generate_synthetic(cfg.synth);
      const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      fs::create_directories(dir);
      write_matrix(dir / "source.txt", task.source.X);
      write_labels(dir / "source_labels.txt", *task.source.labels);
      write_matrix(dir / "target.txt", task.target.X);
      write_labels(dir / "target_labels.txt", task.target_truth);
      std::cout << "wrote " << task.source.size() << " source and " << task.target.size()
                << " target points to " << dir.string() << '\n';
      return 0;
    }

    if (fit_cmd->parsed()) {
      ExperimentConfig cfg = load_config(g);
      if (mode) cfg.tmda.mode = parse_mode(*mode);
      const Dataset src = load_labeled(source, source_labels);
      const Dataset tgt = read_matrix(target);
      const TmdaModel model = fit(src, tgt, cfg.tmda);
      for (const auto& t : model.trace)
        std::cerr << "iter=" << t.iteration << " m3d=" << format_double(t.m3d)
                  << " objective=" << format_double(t.objective)
                  << " admm_iterations=" << t.admm_iterations << '\n';
      std::cerr << "converged=" << (model.converged ? "true" : "false") << '\n';
      std::ostringstream text;
      write_model(text, model);
      emit(g.out, text.str());
      return 0;
    }

    if (transform_cmd->parsed()) {
      std::ifstream in(model_path);
      if (!in) throw std::runtime_error("cannot open model " + model_path);
      const TmdaModel model = read_model(in);
      const Dataset X = read_matrix(input);
      std::ostringstream text;
      write_matrix(text, transform(model, X.X));
      emit(g.out, text.str());
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      const VectorXi truth = read_labels(target_labels);
      VectorXi pred;
      if (!pred_path.empty()) {
        pred = read_labels(pred_path);
      } else {
        if (source.empty() || source_labels.empty() || target.empty())
          throw ValidationError("evaluate needs --pred, or --source, --source-labels and --target");
        const Dataset src = load_labeled(source, source_labels);
        const Dataset tgt = read_matrix(target);
        if (model_path.empty()) {
          pred = nn_classify(src.X, *src.labels, tgt.X);
        } else {
          std::ifstream in(model_path);
          if (!in) throw std::runtime_error("cannot open model " + model_path);
          const TmdaModel model = read_model(in);
          pred = nn_classify(transform(model, src.X), *src.labels, transform(model, tgt.X));
        }
      }
      emit(g.out, format_report(evaluate(pred, truth)));
      return 0;
    }

    if (mmd_cmd->parsed() || m3d_cmd->parsed()) {
      const Dataset src = read_matrix(source);
      const Dataset tgt = read_matrix(target);
      const MatrixXd X = concat(src.X, tgt.X);
      const KernelMatrix K = kernel_matrix(X, kernel_from(kernel, bandwidth, X));
      const DomainSplit split{src.size(), tgt.size()};
      std::ostringstream text;
      text << "kernel=" << to_string(K.spec.kind) << '\n';
      if (K.spec.kind == KernelKind::Rbf) text << "bandwidth=" << format_double(*K.spec.bandwidth) << '\n';
      if (mmd_cmd->parsed()) {
        text << "mmd=" << format_double(empirical_mmd(K, split)) << '\n';
      } else {
        ManifoldAssignment assign;
        assign.labels = read_labels(assignment_path);
        assign.count = assign.labels.size() ? assign.labels.maxCoeff() : 0;
        const M3dValue v = empirical_m3d(K, split, assign);
        text << "m3d=" << format_double(v.value) << '\n'
             << "active=" << v.active << '\n'
             << "skipped=" << v.skipped << '\n';
      }
      emit(g.out, text.str());
      return 0;
    }

    if (cluster_cmd->parsed()) {
      const ExperimentConfig cfg = load_config(g);
      const Dataset src = read_matrix(source);
      const Dataset tgt = read_matrix(target);
      const MatrixXd X = concat(src.X, tgt.X);
      AdmmConfig admm = cfg.tmda.admm;
      admm.alpha = 0.0;
      if (normalize) admm.normalize_columns = true;
      if (admm_iter) admm.max_iter = *admm_iter;
      if (mu_scale) admm.mu_scale = *mu_scale;
      const AffinityResult aff = admm_affinity(X, X, MatrixXd(X.cols(), 0), admm);
      const ManifoldAssignment assign = ncut_cluster(aff.affinity, clusters, cfg.tmda.seed);
      std::ostringstream text;
      for (Index i = 0; i < assign.labels.size(); ++i) text << assign.labels[i] << '\n';
      emit(g.out, text.str());
      return 0;
    }

    const ExperimentConfig cfg = load_config(g);
    if (experiment_cmd->parsed()) return finish_results(run_experiment(cfg), cfg);
    if (sweep_n_cmd->parsed()) return finish_results(sweep_manifold_count(cfg, cfg.n_values), cfg);
    if (sweep_ab_cmd->parsed())
      return finish_results(sweep_sensitivity(cfg, cfg.alpha_values, cfg.beta_values), cfg);
    if (ablate_cmd->parsed()) return finish_results(run_ablation(cfg), cfg);
  } catch (const std::exception& e) {
    std::cerr << "tmda: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
