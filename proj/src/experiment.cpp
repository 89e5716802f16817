#include "tmda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace tmda {

// ---------------------------------------------------------------- cells

namespace {

FeatureMap parse_map(const std::string& text) {
  if (text == "raw" || text == "nk") return FeatureMap::Raw;
  if (text == "lin" || text == "linear") return FeatureMap::LinearKernel;
  if (text == "rbf") return FeatureMap::RbfKernel;
  throw ValidationError("unknown feature map '" + text + "'");
}

FeatureMap map_of(const TmdaConfig& cfg) {
  if (cfg.mapping == Mapping::Raw) return FeatureMap::Raw;
  return cfg.kernel == KernelKind::Rbf ? FeatureMap::RbfKernel : FeatureMap::LinearKernel;
}

std::string map_suffix(FeatureMap map) {
  switch (map) {
    case FeatureMap::Raw: return "raw";
    case FeatureMap::LinearKernel: return "lin";
    case FeatureMap::RbfKernel: return "rbf";
  }
  return "rbf";
}

}  // namespace

Cell parse_cell(const std::string& text, FeatureMap default_map) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const bool has_map = colon != std::string::npos;
  Cell cell;
  cell.name = text;
  cell.map = has_map ? parse_map(text.substr(colon + 1)) : default_map;

  if (head == "NT") {
    if (has_map) throw ValidationError("NT takes no feature map");
    cell.method = Method::NoTransfer;
  } else if (head == "T_mmd" || head == "TMDA_v1") {
    cell.method = Method::GlobalMmd;
  } else if (head == "T_m3d" || head == "TMDA") {
    cell.method = Method::ManifoldMmd;
  } else if (head == "TMDA_v2") {
    cell.method = Method::Decoupled;
  } else {
    throw ValidationError("unknown comparison cell '" + text + "'");
  }
  if ((head == "T_mmd" || head == "T_m3d") && !has_map)
    throw ValidationError("cell '" + text + "' needs a feature map (raw, lin or rbf)");
  return cell;
}

std::vector<std::string> default_comparison() {
  return {"NT", "T_mmd:raw", "T_mmd:lin", "T_mmd:rbf", "T_m3d:raw", "T_m3d:lin", "T_m3d:rbf"};
}

TmdaConfig configure_cell(const TmdaConfig& base, const Cell& cell) {
  TmdaConfig cfg = base;
  switch (cell.method) {
    case Method::NoTransfer:
    case Method::ManifoldMmd: cfg.mode = Mode::Full; break;
    case Method::GlobalMmd: cfg.mode = Mode::GlobalMmd; break;
    case Method::Decoupled: cfg.mode = Mode::Decoupled; break;
  }
  switch (cell.map) {
    case FeatureMap::Raw:
      cfg.mapping = Mapping::Raw;
      cfg.kernel = KernelKind::Linear;
      cfg.bandwidth.reset();
      break;
    case FeatureMap::LinearKernel:
      cfg.mapping = Mapping::Kernel;
      cfg.kernel = KernelKind::Linear;
      cfg.bandwidth.reset();
      break;
    case FeatureMap::RbfKernel:
      cfg.mapping = Mapping::Kernel;
      if (base.kernel != KernelKind::Rbf) cfg.bandwidth.reset();
      cfg.kernel = KernelKind::Rbf;
      break;
  }
  return cfg;
}

// --------------------------------------------------------------- config

void ExperimentConfig::check() const {
  if (task != "synthetic" && task != "files")
    throw ValidationError("task must be 'synthetic' or 'files'");
  if (task == "synthetic") synth.check();
  if (task == "files" && (source_path.empty() || source_labels_path.empty() || target_path.empty()))
    throw ValidationError("file tasks need source_path, source_labels_path and target_path");
  tmda.check();
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  for (const auto& c : comparison) (void)parse_cell(c);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects an integer, got '" + v + "'", line);
  }
}

std::uint64_t parse_seed(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects a non-negative integer, got '" + v + "'", line);
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("'" + key + "' expects true or false, got '" + v + "'", line);
}

std::optional<double> parse_auto(const std::string& v, int line) {
  if (v == "auto") return std::nullopt;
  return parse_double(v, line);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T, typename F>
std::string join_with(const std::vector<T>& items, F&& fmt) {
  std::vector<std::string> s;
  for (const auto& x : items) s.push_back(fmt(x));
  return join(s);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    const int L = line_no;

    auto& s = cfg.synth;
    auto& t = cfg.tmda;
    if (key == "task") cfg.task = v;
    else if (key == "synth.n_manifolds") s.n_manifolds = static_cast<int>(parse_int(v, key, L));
    else if (key == "synth.ambient_dim") s.ambient_dim = static_cast<int>(parse_int(v, key, L));
    else if (key == "synth.manifold_dim") s.manifold_dim = static_cast<int>(parse_int(v, key, L));
    else if (key == "synth.points_per_manifold") s.points_per_manifold = static_cast<int>(parse_int(v, key, L));
    else if (key == "synth.source_mean") s.source_mean = parse_double(v, L);
    else if (key == "synth.target_mean") s.target_mean = parse_double(v, L);
    else if (key == "synth.sampling_std") s.sampling_std = parse_double(v, L);
    else if (key == "synth.corrupt_fraction") s.corrupt_fraction = parse_double(v, L);
    else if (key == "synth.noise_std") s.noise_std = parse_double(v, L);
    else if (key == "synth.seed") s.seed = parse_seed(v, key, L);
    else if (key == "source_path") cfg.source_path = v;
    else if (key == "source_labels_path") cfg.source_labels_path = v;
    else if (key == "target_path") cfg.target_path = v;
    else if (key == "target_labels_path") cfg.target_labels_path = v;
    else if (key == "tmda.alpha") t.alpha = parse_double(v, L);
    else if (key == "tmda.beta") t.beta = parse_double(v, L);
    else if (key == "tmda.manifolds") t.manifolds = static_cast<int>(parse_int(v, key, L));
    else if (key == "tmda.k") t.k = static_cast<int>(parse_int(v, key, L));
    else if (key == "tmda.k_neighbors") t.k_neighbors = static_cast<int>(parse_int(v, key, L));
    else if (key == "tmda.kernel") {
      if (v == "rbf") t.kernel = KernelKind::Rbf;
      else if (v == "linear") t.kernel = KernelKind::Linear;
      else throw ParseError("tmda.kernel must be linear or rbf", L);
    } else if (key == "tmda.bandwidth") t.bandwidth = parse_auto(v, L);
    else if (key == "tmda.mapping") {
      if (v == "kernel") t.mapping = Mapping::Kernel;
      else if (v == "raw") t.mapping = Mapping::Raw;
      else throw ParseError("tmda.mapping must be kernel or raw", L);
    } else if (key == "tmda.max_outer") t.max_outer = static_cast<int>(parse_int(v, key, L));
    else if (key == "tmda.epsilon") t.epsilon = parse_double(v, L);
    else if (key == "tmda.admm.mu") t.admm.mu = parse_auto(v, L);
    else if (key == "tmda.admm.mu_scale") t.admm.mu_scale = parse_double(v, L);
    else if (key == "tmda.admm.rho") t.admm.rho = parse_double(v, L);
    else if (key == "tmda.admm.max_iter") t.admm.max_iter = static_cast<int>(parse_int(v, key, L));
    else if (key == "tmda.admm.epsilon") t.admm.epsilon = parse_double(v, L);
    else if (key == "tmda.admm.normalize_columns") t.admm.normalize_columns = parse_bool(v, key, L);
    else if (key == "tmda.seed") t.seed = parse_seed(v, key, L);
    else if (key == "tmda.mode") {
      try {
        t.mode = parse_mode(v);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), L);
      }
    } else if (key == "repetitions") cfg.repetitions = static_cast<int>(parse_int(v, key, L));
    else if (key == "output") cfg.output = v;
    else if (key == "comparison") cfg.comparison = split_list(v);
    else if (key == "n_values") {
      cfg.n_values.clear();
      for (const auto& x : split_list(v)) cfg.n_values.push_back(static_cast<int>(parse_int(x, key, L)));
    } else if (key == "alpha_values") {
      cfg.alpha_values.clear();
      for (const auto& x : split_list(v)) cfg.alpha_values.push_back(parse_double(x, L));
    } else if (key == "beta_values") {
      cfg.beta_values.clear();
      for (const auto& x : split_list(v)) cfg.beta_values.push_back(parse_double(x, L));
    } else if (key == "threads") cfg.threads = static_cast<int>(parse_int(v, key, L));
    else throw ParseError("unknown key '" + key + "'", L);
  }
  return cfg;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
  const auto& s = cfg.synth;
  const auto& t = cfg.tmda;
  std::ostringstream o;
  o << "task = " << cfg.task << '\n'
    << "synth.n_manifolds = " << s.n_manifolds << '\n'
    << "synth.ambient_dim = " << s.ambient_dim << '\n'
    << "synth.manifold_dim = " << s.manifold_dim << '\n'
    << "synth.points_per_manifold = " << s.points_per_manifold << '\n'
    << "synth.source_mean = " << format_double(s.source_mean) << '\n'
    << "synth.target_mean = " << format_double(s.target_mean) << '\n'
    << "synth.sampling_std = " << format_double(s.sampling_std) << '\n'
    << "synth.corrupt_fraction = " << format_double(s.corrupt_fraction) << '\n'
    << "synth.noise_std = " << format_double(s.noise_std) << '\n'
    << "synth.seed = " << s.seed << '\n'
    << "source_path = " << cfg.source_path << '\n'
    << "source_labels_path = " << cfg.source_labels_path << '\n'
    << "target_path = " << cfg.target_path << '\n'
    << "target_labels_path = " << cfg.target_labels_path << '\n'
    << "tmda.alpha = " << format_double(t.alpha) << '\n'
    << "tmda.beta = " << format_double(t.beta) << '\n'
    << "tmda.manifolds = " << t.manifolds << '\n'
    << "tmda.k = " << t.k << '\n'
    << "tmda.k_neighbors = " << t.k_neighbors << '\n'
    << "tmda.kernel = " << to_string(t.kernel) << '\n'
    << "tmda.bandwidth = " << opt(t.bandwidth) << '\n'
    << "tmda.mapping = " << to_string(t.mapping) << '\n'
    << "tmda.max_outer = " << t.max_outer << '\n'
    << "tmda.epsilon = " << format_double(t.epsilon) << '\n'
    << "tmda.admm.mu = " << opt(t.admm.mu) << '\n'
    << "tmda.admm.mu_scale = " << format_double(t.admm.mu_scale) << '\n'
    << "tmda.admm.rho = " << format_double(t.admm.rho) << '\n'
    << "tmda.admm.max_iter = " << t.admm.max_iter << '\n'
    << "tmda.admm.epsilon = " << format_double(t.admm.epsilon) << '\n'
    << "tmda.admm.normalize_columns = " << (t.admm.normalize_columns ? "true" : "false") << '\n'
    << "tmda.seed = " << t.seed << '\n'
    << "tmda.mode = " << to_string(t.mode) << '\n'
    << "repetitions = " << cfg.repetitions << '\n'
    << "output = " << cfg.output << '\n'
    << "comparison = " << join(cfg.comparison) << '\n'
    << "n_values = " << join_with(cfg.n_values, [](int x) { return std::to_string(x); }) << '\n'
    << "alpha_values = " << join_with(cfg.alpha_values, [](double x) { return format_double(x); }) << '\n'
    << "beta_values = " << join_with(cfg.beta_values, [](double x) { return format_double(x); }) << '\n'
    << "threads = " << cfg.threads << '\n';
  return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  // Output path and thread count do not change any number.
  ExperimentConfig c = cfg;
  c.output.clear();
  c.threads = 1;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : format_config(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

// -------------------------------------------------------------- results

const std::string* Record::find(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

const std::string& Record::at(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ValidationError("record has no field '" + key + "'");
  return *v;
}

double Record::number(const std::string& key) const { return parse_double(at(key), 0); }

void Record::set(const std::string& key, std::string value) {
  for (auto& [k, v] : fields)
    if (k == key) {
      v = std::move(value);
      return;
    }
  fields.emplace_back(key, std::move(value));
}

std::vector<const Record*> ResultsFile::of_kind(const std::string& kind) const {
  std::vector<const Record*> out;
  for (const auto& r : records)
    if (r.kind == kind) out.push_back(&r);
  return out;
}

namespace {

bool needs_quotes(const std::string& v) {
  if (v.empty()) return true;
  return v.find_first_of(" \t\"=\\") != std::string::npos;
}

std::string quote(const std::string& v) {
  if (!needs_quotes(v)) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_results(const ResultsFile& results) {
  std::ostringstream o;
  for (const auto& r : results.records) {
    o << r.kind;
    for (const auto& [k, v] : r.fields) o << ' ' << k << '=' << quote(v);
    o << '\n';
  }
  return o.str();
}

ResultsFile parse_results(std::istream& in) {
  ResultsFile out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Record rec;
    std::size_t i = 0;
    const auto skip_space = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    };
    skip_space();
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') rec.kind += line[i++];
    while (true) {
      skip_space();
      if (i >= line.size()) break;
      std::string key;
      while (i < line.size() && line[i] != '=') {
        if (line[i] == ' ') throw ParseError("field without '='", line_no);
        key += line[i++];
      }
      if (i >= line.size()) throw ParseError("field without '='", line_no);
      ++i;
      std::string value;
      if (i < line.size() && line[i] == '"') {
        ++i;
        bool closed = false;
        while (i < line.size()) {
          const char c = line[i++];
          if (c == '\\' && i < line.size()) {
            value += line[i++];
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            value += c;
          }
        }
        if (!closed) throw ParseError("unterminated quoted value", line_no);
      } else {
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') value += line[i++];
      }
      rec.fields.emplace_back(std::move(key), std::move(value));
    }
    if (rec.kind == "run") {
      const std::string* status = rec.find("status");
      if (status && *status != "ok") ++out.failed;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

ResultsFile parse_results(const std::string& text) {
  std::istringstream in(text);
  return parse_results(in);
}

// --------------------------------------------------------------- runner

TransferTask load_task(const ExperimentConfig& cfg, int rep) {
  if (cfg.task == "synthetic") {
    SynthConfig s = cfg.synth;
    s.seed = cfg.synth.seed + static_cast<std::uint64_t>(rep);
    return generate_synthetic(s);
  }
  TransferTask task;
  task.source = read_matrix(cfg.source_path);
  task.source.labels = read_labels(cfg.source_labels_path);
  task.target = read_matrix(cfg.target_path);
  if (!cfg.target_labels_path.empty()) task.target_truth = read_labels(cfg.target_labels_path);
  validate(task.source, "source");
  validate(task.target, "target");
  return task;
}

namespace {

struct Job {
  std::string group;  // summary key
  Cell cell;
  int rep = 0;
  TmdaConfig tmda;
  std::vector<std::pair<std::string, std::string>> extra;
};

struct Outcome {
  bool ok = false;
  double rmse = 0.0;
  double accuracy = 0.0;
  Index n = 0;
  int k = 0;
  int iterations = 0;
  std::string message;
};

Outcome run_job(const Job& job, const TransferTask& task) {
  Outcome out;
  try {
    if (task.target_truth.size() != task.target.size())
      throw ValidationError("target ground-truth labels are required for evaluation");
    VectorXi pred;
    if (job.cell.method == Method::NoTransfer) {
      pred = nn_classify(task.source.X, *task.source.labels, task.target.X);
      out.k = static_cast<int>(task.source.dim());
    } else {
      const TmdaModel model = fit(task.source, task.target, job.tmda);
      const MatrixXd src = transform(model, task.source.X);
      const MatrixXd tgt = transform(model, task.target.X);
      pred = nn_classify(src, *task.source.labels, tgt);
      out.k = static_cast<int>(model.weights.k());
      out.iterations = static_cast<int>(model.trace.size());
    }
    out.rmse = rmse(pred, task.target_truth);
    out.accuracy = accuracy(pred, task.target_truth);
    out.n = pred.size();
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
  }
  return out;
}

std::vector<Outcome> execute(const std::vector<Job>& jobs, const std::vector<TransferTask>& tasks,
                             int threads) {
  std::vector<Outcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      out[i] = run_job(jobs[i], tasks[static_cast<std::size_t>(jobs[i].rep)]);
  };
  const auto count = static_cast<std::size_t>(std::max(1, threads));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(count, jobs.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

double sample_variance(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

std::uint64_t task_seed(const ExperimentConfig& cfg, int rep) {
  return cfg.task == "synthetic" ? cfg.synth.seed + static_cast<std::uint64_t>(rep) : 0;
}

ResultsFile run_jobs(const ExperimentConfig& cfg, const std::string& experiment,
                     const std::vector<Job>& jobs, bool with_table) {
  cfg.check();
  std::vector<TransferTask> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.repetitions));
  for (int r = 0; r < cfg.repetitions; ++r) tasks.push_back(load_task(cfg, r));

  const std::vector<Outcome> outcomes = execute(jobs, tasks, cfg.threads);
  const std::string hash = config_hash(cfg);

  ResultsFile results;
  std::vector<std::string> groups;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const Outcome& o = outcomes[i];
    if (!members.count(job.group)) groups.push_back(job.group);
    members[job.group].push_back(i);

    Record rec{"run", {}};
    rec.set("experiment", experiment);
    rec.set("cell", job.cell.name);
    rec.set("rep", std::to_string(job.rep));
    rec.set("seed", std::to_string(task_seed(cfg, job.rep)));
    rec.set("fit_seed", std::to_string(job.tmda.seed));
    for (const auto& [k, v] : job.extra) rec.set(k, v);
    rec.set("status", o.ok ? "ok" : "error");
    if (o.ok) {
      rec.set("rmse", format_double(o.rmse));
      rec.set("accuracy", format_double(o.accuracy));
      rec.set("n", std::to_string(o.n));
      rec.set("k", std::to_string(o.k));
      rec.set("iterations", std::to_string(o.iterations));
    } else {
      rec.set("message", o.message);
      ++results.failed;
    }
    rec.set("config_hash", hash);
    rec.set("version", kVersion);
    results.records.push_back(std::move(rec));
  }

  for (const auto& g : groups) {
    std::vector<double> rm, ac;
    for (std::size_t i : members[g])
      if (outcomes[i].ok) {
        rm.push_back(outcomes[i].rmse);
        ac.push_back(outcomes[i].accuracy);
      }
    const Job& first = jobs[members[g].front()];
    Record rec{"summary", {}};
    rec.set("experiment", experiment);
    rec.set("cell", first.cell.name);
    for (const auto& [k, v] : first.extra) rec.set(k, v);
    rec.set("runs", std::to_string(members[g].size()));
    rec.set("failed", std::to_string(members[g].size() - rm.size()));
    if (!rm.empty()) {
      const double mr = std::accumulate(rm.begin(), rm.end(), 0.0) / static_cast<double>(rm.size());
      const double ma = std::accumulate(ac.begin(), ac.end(), 0.0) / static_cast<double>(ac.size());
      rec.set("mean_rmse", format_double(mr));
      rec.set("var_rmse", format_double(sample_variance(rm, mr)));
      rec.set("mean_accuracy", format_double(ma));
      rec.set("var_accuracy", format_double(sample_variance(ac, ma)));
    }
    rec.set("seed", std::to_string(task_seed(cfg, 0)));
    rec.set("config_hash", hash);
    rec.set("version", kVersion);
    results.records.push_back(std::move(rec));
  }

  if (with_table) {
    std::vector<double> sums(groups.size(), 0.0);
    std::vector<int> counts(groups.size(), 0);
    for (int r = 0; r < cfg.repetitions; ++r) {
      Record row{"table", {{"row", std::to_string(r)}}};
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::size_t idx = members[groups[g]][static_cast<std::size_t>(r)];
        const Outcome& o = outcomes[idx];
        row.set(jobs[idx].cell.name, o.ok ? format_double(o.rmse) : "error");
        if (o.ok) {
          sums[g] += o.rmse;
          ++counts[g];
        }
      }
      results.records.push_back(std::move(row));
    }
    Record mean{"table", {{"row", "mean"}}};
    for (std::size_t g = 0; g < groups.size(); ++g)
      mean.set(jobs[members[groups[g]].front()].cell.name,
               counts[g] ? format_double(sums[g] / counts[g]) : "error");
    results.records.push_back(std::move(mean));
  }
  return results;
}

Job make_job(const ExperimentConfig& cfg, const Cell& cell, int rep, std::string group) {
  Job job;
  job.group = std::move(group);
  job.cell = cell;
  job.rep = rep;
  job.tmda = configure_cell(cfg.tmda, cell);
  job.tmda.seed = cfg.tmda.seed + static_cast<std::uint64_t>(rep);
  return job;
}

}  // namespace

ResultsFile run_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  std::vector<Cell> cells;
  for (const auto& c : cfg.comparison) cells.push_back(parse_cell(c, map_of(cfg.tmda)));
  std::vector<Job> jobs;
  for (const auto& cell : cells)
    for (int r = 0; r < cfg.repetitions; ++r) jobs.push_back(make_job(cfg, cell, r, cell.name));
  return run_jobs(cfg, "experiment", jobs, true);
}

ResultsFile sweep_manifold_count(const ExperimentConfig& cfg, const std::vector<int>& n_values) {
  if (n_values.empty()) throw ValidationError("sweep-n: no N values");
  const Cell cell = parse_cell("T_m3d:" + map_suffix(map_of(cfg.tmda)));
  std::vector<Job> jobs;
  for (int N : n_values) {
    if (N < 1) throw ValidationError("sweep-n: N must be >= 1");
    for (int r = 0; r < cfg.repetitions; ++r) {
      Job job = make_job(cfg, cell, r, "N=" + std::to_string(N));
      job.tmda.manifolds = N;
      job.extra = {{"N", std::to_string(N)}};
      jobs.push_back(std::move(job));
    }
  }
  return run_jobs(cfg, "sweep-n", jobs, false);
}

ResultsFile sweep_sensitivity(const ExperimentConfig& cfg, const std::vector<double>& alpha_values,
                              const std::vector<double>& beta_values) {
  if (alpha_values.empty() || beta_values.empty()) throw ValidationError("sweep-ab: empty grid");
  const Cell cell = parse_cell("T_m3d:" + map_suffix(map_of(cfg.tmda)));
  std::vector<Job> jobs;
  for (double a : alpha_values)
    for (double b : beta_values)
      for (int r = 0; r < cfg.repetitions; ++r) {
        const std::string as = format_double(a), bs = format_double(b);
        Job job = make_job(cfg, cell, r, "alpha=" + as + ",beta=" + bs);
        job.tmda.alpha = a;
        job.tmda.beta = b;
        job.extra = {{"alpha", as}, {"beta", bs}};
        jobs.push_back(std::move(job));
      }
  return run_jobs(cfg, "sweep-ab", jobs, false);
}

ResultsFile run_ablation(const ExperimentConfig& cfg) {
  const FeatureMap map = map_of(cfg.tmda);
  std::vector<Job> jobs;
  for (const char* name : {"NT", "TMDA_v1", "TMDA_v2", "TMDA"}) {
    const Cell cell = parse_cell(name, map);
    for (int r = 0; r < cfg.repetitions; ++r) jobs.push_back(make_job(cfg, cell, r, cell.name));
  }
  return run_jobs(cfg, "ablate", jobs, true);
}

}  // namespace tmda
