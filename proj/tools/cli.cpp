#include "cli.hpp"

#include "goalskit/evalrank.hpp"
#include "goalskit/goals.hpp"
#include "goalskit/nn_goals.hpp"
#include "goalskit/parallel.hpp"
#include "goalskit/rate.hpp"
#include "goalskit/report.hpp"
#include "goalskit/shapley.hpp"
#include "goalskit/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <glob.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace goalskit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    json c = json::parse(read_text(path));
    if (!c.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

// flags win over the config file; returns whether the value was set by either
template <class T>
bool resolve(const json& config, const CLI::Option* opt, const std::string& key, T& var) {
  if (opt->count() > 0) return true;
  if (config.contains(key)) {
    try {
      var = config.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
    return true;
  }
  return false;
}

void apply_threads(std::size_t flag) {
  std::size_t n = flag;
  if (const char* env = std::getenv("GOALSKIT_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("GOALSKIT_THREADS must be a positive integer, got '" + std::string(env) + "'");
    n = static_cast<std::size_t>(v);
  }
  set_thread_count(n);
}

std::string file_hash(const fs::path& p) {
  const std::string bytes = read_text(p);
  return hex64(fnv1a(bytes.data(), bytes.size()));
}

struct Run {
  std::string command;
  json config = json::object();
  json seeds = json::array();
  json inputs = json::object();
  std::vector<fs::path> outputs;
  json timings = json::object();
};

void write_manifest(const fs::path& dir, const Run& run) {
  const fs::path path = dir / "manifest.json";
  json m = json::object();
  if (fs::exists(path)) {
    try {
      m = json::parse(read_text(path));
    } catch (const json::exception&) {
      m = json::object();
    }
  }
  m["format"] = "goalskit.manifest.v1";
  m["tool_version"] = kVersion;
  if (!m.contains("runs") || !m["runs"].is_object()) m["runs"] = json::object();
  std::vector<std::string> outs;
  for (const auto& o : run.outputs) outs.push_back(fs::relative(o, dir).generic_string());
  std::string key = run.command;
  if (!outs.empty()) key += ":" + outs.front();
  m["runs"][key] = {{"command", run.command}, {"config", run.config},   {"seeds", run.seeds},
                    {"inputs", run.inputs},   {"outputs", outs},        {"timings", run.timings}};
  write_text(path, m.dump(2) + "\n");
}

std::vector<fs::path> expand_globs(const std::vector<std::string>& patterns, const std::string& what) {
  std::vector<fs::path> out;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i)
        if (fs::path(g.gl_pathv[i]).filename() != "manifest.json") out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw DataError("no " + what + " match '" + p + "'");
    if (rc != 0 && rc != GLOB_NOMATCH) throw DataError("cannot expand pattern '" + p + "'");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string number_label(double v) {
  std::string s = format_double(v);
  for (char& c : s)
    if (c == '-') c = 'm';
  return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario = "I";
  Index n = 2000;
  Index p = 25;
  double v2 = 0.6;
  double rho = 0.5;
  double pop_var = 0.0;
  std::string design = "gaussian";
  std::uint64_t seed = 1;
  Index replicates = 1;
  Index n_causal = 30;
  std::string out;
  std::string config;
  std::size_t threads = 0;
  std::map<std::string, CLI::Option*> opts;
};

void setup_simulate(CLI::App& app, SimulateArgs& a) {
  auto* s = app.add_subcommand("simulate", "Generate synthetic datasets and their ground truth");
  a.opts["scenario"] = s->add_option("--scenario", a.scenario, "I..VI, hd1..hd4 or custom");
  a.opts["n"] = s->add_option("--n", a.n, "samples");
  a.opts["p"] = s->add_option("--p", a.p, "features");
  a.opts["v2"] = s->add_option("--v2", a.v2, "signal fraction of the response variance");
  a.opts["rho"] = s->add_option("--rho", a.rho, "additive share of the signal");
  a.opts["pop-var"] = s->add_option("--pop-var", a.pop_var, "variance share of population structure");
  a.opts["design"] = s->add_option("--design", a.design, "gaussian or genotype");
  a.opts["seed"] = s->add_option("--seed", a.seed, "base seed; replicate r uses seed + r");
  a.opts["replicates"] = s->add_option("--replicates", a.replicates, "number of datasets");
  a.opts["n-causal"] = s->add_option("--n-causal", a.n_causal, "causal set size for hd1..hd4");
  s->add_option("--out", a.out, "output directory")->required();
  s->add_option("--config", a.config, "JSON config file; flags take precedence");
  s->add_option("--threads", a.threads, "worker threads (GOALSKIT_THREADS overrides)");
}

int cmd_simulate(SimulateArgs& a, std::ostream& out) {
  const json config = load_config(a.config);
  apply_threads(a.threads);
  resolve(config, a.opts["scenario"], "scenario", a.scenario);
  const Scenario sc = scenario_from_string(a.scenario);
  SimConfig cfg = scenario_preset(sc);
  if (resolve(config, a.opts["n"], "n", a.n) || sc < Scenario::hd1) cfg.n = a.n;
  if (resolve(config, a.opts["p"], "p", a.p) || sc < Scenario::hd1) cfg.j = a.p;
  if (resolve(config, a.opts["v2"], "v2", a.v2) || sc == Scenario::custom || (sc < Scenario::hd1 && sc != Scenario::V))
    cfg.v2 = a.v2;
  if (resolve(config, a.opts["rho"], "rho", a.rho) || sc == Scenario::custom) cfg.rho = a.rho;
  if (resolve(config, a.opts["pop-var"], "pop-var", a.pop_var) || sc == Scenario::custom) cfg.pop_var = a.pop_var;
  if (resolve(config, a.opts["design"], "design", a.design) || sc < Scenario::hd1) cfg.design = design_kind_from_string(a.design);
  if (resolve(config, a.opts["n-causal"], "n-causal", a.n_causal) && cfg.random_causal > 0) cfg.random_causal = a.n_causal;
  resolve(config, a.opts["seed"], "seed", a.seed);
  resolve(config, a.opts["replicates"], "replicates", a.replicates);
  if (a.replicates < 1) throw ConfigError("--replicates must be >= 1");
  if (sc == Scenario::custom) throw ConfigError("--scenario custom needs a causal structure; use the library API");
  if (cfg.random_causal > cfg.j) cfg.random_causal = cfg.j;
  cfg.validate();

  const fs::path dir(a.out);
  fs::create_directories(dir);
  Run run;
  run.command = "simulate";
  run.config = {{"scenario", a.scenario}, {"n", cfg.n},       {"p", cfg.j},
                {"v2", cfg.v2},           {"rho", cfg.rho},   {"pop_var", cfg.pop_var},
                {"design", to_string(cfg.design)}, {"replicates", a.replicates}, {"n_causal", cfg.random_causal}};
  Stopwatch total;
  for (Index r = 0; r < a.replicates; ++r) {
    SimConfig c = cfg;
    c.seed = a.seed + static_cast<std::uint64_t>(r);
    const Simulation sim = simulate(c);
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_rep%03lld", a.scenario.c_str(), static_cast<long long>(r + 1));
    const fs::path data = dir / (std::string(stem) + ".csv");
    const fs::path truth = dir / (std::string(stem) + "_truth.json");
    write_csv(sim.data, data);
    write_truth(sim.truth, sim.config, truth);
    run.seeds.push_back(c.seed);
    run.outputs.push_back(data);
    run.outputs.push_back(truth);
  }
  run.timings["simulate"] = total.seconds();
  write_manifest(dir, run);
  out << "wrote " << a.replicates << " dataset(s) to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string method;
  std::string data;
  std::string response = "y";
  std::vector<double> xi{1.0};
  std::string kernel = "rbf";
  double theta = 0.0;
  double sigma2 = 0.0;
  Index width = 512;
  std::string activation = "relu";
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  std::string cages;
  bool gzip = false;
  std::size_t threads = 0;
  std::map<std::string, CLI::Option*> opts;
};

void setup_score(CLI::App& app, ScoreArgs& a) {
  auto* s = app.add_subcommand("score", "Fit a model and write importance scores");
  a.opts["method"] = s->add_option("--method", a.method, "goals, rate, shap, nn-goals or scanone");
  s->add_option("--data", a.data, "dataset CSV")->required();
  a.opts["response"] = s->add_option("--response", a.response, "response column name");
  a.opts["xi"] = s->add_option("--xi", a.xi, "shift size(s) for goals and nn-goals");
  a.opts["kernel"] = s->add_option("--kernel", a.kernel, "rbf or linear");
  a.opts["theta"] = s->add_option("--theta", a.theta, "rbf bandwidth (default: median criterion)");
  a.opts["sigma2"] = s->add_option("--sigma2", a.sigma2, "noise variance (default: marginal likelihood)");
  a.opts["width"] = s->add_option("--width", a.width, "random features for nn-goals");
  a.opts["activation"] = s->add_option("--activation", a.activation, "relu, tanh or identity");
  a.opts["seed"] = s->add_option("--seed", a.seed, "seed for nn-goals inner weights");
  s->add_option("--out", a.out, "output directory")->required();
  s->add_option("--config", a.config, "JSON config file; flags take precedence");
  a.opts["cages"] = s->add_option("--cages", a.cages, "CSV of per-sample group labels; local scores are averaged by group");
  a.opts["gzip"] = s->add_flag("--gzip", a.gzip, "gzip the local score CSV");
  s->add_option("--threads", a.threads, "worker threads (GOALSKIT_THREADS overrides)");
}

std::vector<std::string> read_groups(const fs::path& path, Index n) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty grouping file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t col = 0;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "group" || header[i] == "cage") col = i;
  std::vector<std::string> groups;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    std::string value;
    while (std::getline(ss, cell, ',')) {
      if (c == col) value = cell;
      ++c;
    }
    if (c <= col) throw DataError(path.string() + ": row " + std::to_string(groups.size() + 2) + " lacks the group column");
    groups.push_back(value);
  }
  if (static_cast<Index>(groups.size()) != n)
    throw DataError(path.string() + ": " + std::to_string(groups.size()) + " group labels for " + std::to_string(n) + " samples");
  return groups;
}

Report group_means(const Report& r, const std::vector<std::string>& groups) {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;
  for (const auto& g : groups)
    if (index.emplace(g, order.size()).second) order.push_back(g);
  const Matrix& l = *r.local;
  Matrix sums = Matrix::Zero(static_cast<Index>(order.size()), l.cols());
  Vector counts = Vector::Zero(static_cast<Index>(order.size()));
  for (Index i = 0; i < l.rows(); ++i) {
    const auto k = static_cast<Index>(index[groups[static_cast<std::size_t>(i)]]);
    sums.row(k) += l.row(i);
    counts(k) += 1.0;
  }
  Report g = r;
  g.local = counts.cwiseInverse().asDiagonal() * sums;
  g.row_labels = order;
  return g;
}

int cmd_score(ScoreArgs& a, std::ostream& out) {
  const json config = load_config(a.config);
  apply_threads(a.threads);
  resolve(config, a.opts["method"], "method", a.method);
  resolve(config, a.opts["response"], "response", a.response);
  resolve(config, a.opts["xi"], "xi", a.xi);
  resolve(config, a.opts["kernel"], "kernel", a.kernel);
  const bool theta_set = resolve(config, a.opts["theta"], "theta", a.theta);
  const bool sigma2_set = resolve(config, a.opts["sigma2"], "sigma2", a.sigma2);
  resolve(config, a.opts["width"], "width", a.width);
  resolve(config, a.opts["activation"], "activation", a.activation);
  resolve(config, a.opts["seed"], "seed", a.seed);
  resolve(config, a.opts["cages"], "cages", a.cages);
  resolve(config, a.opts["gzip"], "gzip", a.gzip);

  static const std::set<std::string> methods{"goals", "rate", "shap", "nn-goals", "scanone"};
  if (a.method.empty()) throw ConfigError("--method is required (goals, rate, shap, nn-goals or scanone)");
  if (!methods.count(a.method)) throw ConfigError("unknown --method '" + a.method + "' (goals, rate, shap, nn-goals or scanone)");
  if (a.xi.empty()) throw ConfigError("--xi needs at least one value");
  if (a.xi.size() > 1 && a.method != "goals" && a.method != "nn-goals")
    throw ConfigError("a grid of --xi values only applies to goals and nn-goals");
  if (sigma2_set && !(a.sigma2 > 0.0)) throw ConfigError("--sigma2 must be positive");
  if (theta_set && !(a.theta > 0.0)) throw ConfigError("--theta must be positive");

  Run run;
  run.command = "score";
  const fs::path data_path(a.data);
  run.inputs[data_path.filename().string()] = file_hash(data_path);
  Stopwatch load_clock;
  Dataset d = standardize(load_csv(data_path, a.response));
  run.timings["load"] = load_clock.seconds();
  if (a.method == "shap" && d.j() > kMaxShapFeatures)
    throw ConfigError("--method shap enumerates 2^J subsets and supports J <= " + std::to_string(kMaxShapFeatures) +
                      "; this dataset has J = " + std::to_string(d.j()));
  std::vector<std::string> groups;
  if (!a.cages.empty()) {
    groups = read_groups(a.cages, d.n());
    run.inputs[fs::path(a.cages).filename().string()] = file_hash(a.cages);
  }

  KernelConfig kcfg;
  const KernelKind kind = kernel_kind_from_string(a.kernel);
  if (kind == KernelKind::precomputed) throw ConfigError("--kernel must be rbf or linear");
  kcfg = kind == KernelKind::linear ? KernelConfig::linear() : KernelConfig::rbf(theta_set ? a.theta : median_bandwidth(d.x));

  const std::string stem = data_path.stem().string();
  json meta = {{"data", stem}, {"data_hash", hex64(d.content_hash())}, {"n", d.n()}, {"p", d.j()}};
  std::vector<Report> reports;
  std::vector<std::string> names;

  auto base = [&](const std::string& method, RankOrder order) {
    Report r;
    r.method = method;
    r.feature_names = d.feature_names;
    r.rank_by = order;
    r.metadata = meta;
    return r;
  };
  auto gp_meta = [&](json& m, const FittedGP& g) {
    m["kernel"] = to_string(g.cfg.kind);
    if (g.cfg.kind == KernelKind::rbf) m["theta"] = g.cfg.theta;
    m["sigma2"] = g.sigma2;
    m["jitter"] = g.jitter;
    m["log_marginal"] = g.log_marginal;
  };

  if (a.method == "scanone") {
    Stopwatch sw;
    Report r = base("scanone", RankOrder::ascending);
    r.global = scanone(d);
    run.timings["score"] = sw.seconds();
    reports.push_back(std::move(r));
    names.push_back(stem + "_scanone");
  } else if (a.method == "nn-goals") {
    Stopwatch fit_clock;
    const RandomFeatureModel m =
        fit_random_features(d, a.width, activation_from_string(a.activation), a.seed);
    run.timings["fit"] = fit_clock.seconds();
    run.seeds.push_back(a.seed);
    Stopwatch sw;
    for (double xi : a.xi) {
      const GoalsReport g = nn_goals_scores(m, d, xi);
      Report r = base("nn-goals", RankOrder::abs);
      r.metadata["xi"] = xi;
      r.metadata["architecture"] = {{"width", m.width()},
                                    {"activation", to_string(m.activation)},
                                    {"v", m.v_diag(0)},
                                    {"seed", a.seed},
                                    {"inner_weight_sd", 1.0 / std::sqrt(static_cast<double>(d.j()))}};
      r.metadata["sigma2"] = m.sigma2;
      r.metadata["residual_var"] = m.residual_var;
      r.metadata["label"] = a.xi.size() > 1 ? "nn-goals-xi" + number_label(xi) : "nn-goals";
      r.local = g.local;
      r.global = g.global;
      r.warnings = m.warnings;
      r.warnings.insert(r.warnings.end(), g.warnings.begin(), g.warnings.end());
      names.push_back(stem + "_nn-goals" + (a.xi.size() > 1 ? "_xi" + number_label(xi) : ""));
      reports.push_back(std::move(r));
    }
    run.timings["score"] = sw.seconds();
  } else {
    Stopwatch fit_clock;
    const FittedGP g = fit(d, kcfg, sigma2_set ? std::optional<double>(a.sigma2) : std::nullopt);
    run.timings["fit"] = fit_clock.seconds();
    Stopwatch sw;
    if (a.method == "goals") {
      for (double xi : a.xi) {
        const GoalsReport gr = goals_local(g, d, xi);
        Report r = base("goals", RankOrder::abs);
        gp_meta(r.metadata, g);
        r.metadata["xi"] = xi;
        r.metadata["label"] = a.xi.size() > 1 ? "goals-xi" + number_label(xi) : "goals";
        r.local = gr.local;
        r.global = gr.global;
        r.warnings = gr.warnings;
        names.push_back(stem + "_goals" + (a.xi.size() > 1 ? "_xi" + number_label(xi) : ""));
        reports.push_back(std::move(r));
      }
    } else if (a.method == "rate") {
      const RateReport rr = rate_scores(effect_size_analog(g, d));
      Report r = base("rate", RankOrder::signed_);
      gp_meta(r.metadata, g);
      r.metadata["kld"] = std::vector<double>(rr.kld.data(), rr.kld.data() + rr.kld.size());
      r.global = rr.rate;
      r.warnings = rr.warnings;
      names.push_back(stem + "_rate");
      reports.push_back(std::move(r));
    } else {
      const ShapReport sr = exact_shap(d, kcfg, g.sigma2);
      Report r = base("shap", RankOrder::abs);
      gp_meta(r.metadata, g);
      r.metadata["subset_fits"] = sr.fits_performed;
      r.local = sr.local;
      r.global = sr.global;
      r.warnings = sr.warnings;
      names.push_back(stem + "_shap");
      reports.push_back(std::move(r));
    }
    run.timings["score"] = sw.seconds();
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  Stopwatch write_clock;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const auto& w : reports[i].warnings) out << "warning: " << w << "\n";
    const auto files = write_report(reports[i], dir / (names[i] + ".json"), a.gzip);
    run.outputs.insert(run.outputs.end(), files.begin(), files.end());
    if (!groups.empty() && reports[i].local) {
      const Report gm = group_means(reports[i], groups);
      std::string text = "group";
      for (const auto& n : gm.feature_names) text += "," + n;
      text += "\n";
      for (Index k = 0; k < gm.local->rows(); ++k) {
        text += gm.row_labels[static_cast<std::size_t>(k)];
        for (Index c = 0; c < gm.local->cols(); ++c) text += "," + format_double((*gm.local)(k, c));
        text += "\n";
      }
      const fs::path gpath = dir / (names[i] + "_groups.csv" + (a.gzip ? ".gz" : ""));
      write_text(gpath, text);
      run.outputs.push_back(gpath);
    }
  }
  run.timings["write"] = write_clock.seconds();
  run.config = {{"method", a.method}, {"xi", a.xi},         {"kernel", a.kernel},
                {"theta", kcfg.theta}, {"response", a.response}, {"width", a.width},
                {"activation", a.activation}, {"gzip", a.gzip}};
  if (sigma2_set) run.config["sigma2"] = a.sigma2;
  write_manifest(dir, run);
  out << "wrote " << reports.size() << " report(s) to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> reports;
  std::vector<std::string> truth;
  std::string out;
  std::string scenario;
};

void setup_eval(CLI::App& app, EvalArgs& a) {
  auto* s = app.add_subcommand("eval", "ROC curves and AUC tables against simulation truth");
  s->add_option("--reports", a.reports, "report JSON glob(s)")->required();
  s->add_option("--truth", a.truth, "truth JSON glob(s)")->required();
  s->add_option("--out", a.out, "output directory")->required();
  s->add_option("--scenario", a.scenario, "label used in output names (default: from truth files)");
}

std::string truth_key(const fs::path& p) {
  std::string s = p.filename().string();
  const std::string suffix = "_truth.json";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return p.stem().string();
}

int cmd_eval(EvalArgs& a, std::ostream& out) {
  const auto report_files = expand_globs(a.reports, "report files");
  const auto truth_files = expand_globs(a.truth, "truth files");

  std::map<std::string, fs::path> truth_by_key;
  for (const auto& t : truth_files) truth_by_key[truth_key(t)] = t;
  std::set<std::string> used;
  std::vector<std::string> unmatched;
  struct Item {
    std::string key;
    std::string label;
    Report report;
  };
  std::vector<Item> items;
  for (const auto& rf : report_files) {
    Report r = read_report(rf);
    const std::string key = r.metadata.value("data", "");
    if (!truth_by_key.count(key)) {
      unmatched.push_back("report without truth: " + rf.string());
      continue;
    }
    used.insert(key);
    const std::string label = r.metadata.value("label", r.method);
    items.push_back({key, label, std::move(r)});
  }
  for (const auto& [k, p] : truth_by_key)
    if (!used.count(k)) unmatched.push_back("truth without report: " + p.string());
  if (!unmatched.empty()) {
    std::string msg = std::to_string(report_files.size()) + " report(s) and " + std::to_string(truth_files.size()) +
                      " truth file(s) do not pair up:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw DataError(msg);
  }

  std::map<std::string, TruthFile> truths;
  std::set<std::string> scenarios;
  for (const auto& k : used) {
    truths[k] = read_truth(truth_by_key[k]);
    scenarios.insert(truths[k].scenario);
  }
  const std::string scenario = !a.scenario.empty() ? a.scenario : (scenarios.size() == 1 ? *scenarios.begin() : "mixed");

  const fs::path dir(a.out);
  fs::create_directories(dir / "replicates");
  Run run;
  run.command = "eval";
  for (const auto& rf : report_files) run.inputs[rf.filename().string()] = file_hash(rf);
  for (const auto& tf : truth_files) run.inputs[tf.filename().string()] = file_hash(tf);

  std::map<std::string, std::vector<std::pair<std::string, RocCurve>>> curves;
  for (const auto& it : items) {
    const TruthFile& t = truths[it.key];
    if (t.j != it.report.global.size())
      throw DataError("report for " + it.key + " has " + std::to_string(it.report.global.size()) +
                      " features but its truth file declares " + std::to_string(t.j));
    curves[it.label].emplace_back(it.key, roc_from_scores(it.report.global, t.causal, it.report.rank_by));
  }

  std::string table = "scenario,method,replicates,mean_auc,sd_auc\n";
  std::string per_rep = "scenario,method,replicate,auc\n";
  for (auto& [label, list] : curves) {
    std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<RocCurve> reps;
    for (const auto& [key, c] : list) {
      const fs::path p = dir / "replicates" / (key + "_" + label + "_roc.csv");
      write_text(p, roc_csv(c));
      run.outputs.push_back(p);
      per_rep += scenario + "," + label + "," + key + "," + format_double(c.auc) + "\n";
      reps.push_back(c);
    }
    const AucSummary s = auc_summary(reps);
    std::string mean = "fpr,tpr\n";
    for (std::size_t i = 1; i < s.mean_curve.points.size(); ++i)
      mean += format_double(s.mean_curve.points[i].fpr) + "," + format_double(s.mean_curve.points[i].tpr) + "\n";
    const fs::path mp = dir / (scenario + "_" + label + "_roc.csv");
    write_text(mp, mean);
    run.outputs.push_back(mp);
    double var = 0.0;
    for (double x : s.aucs) var += (x - s.mean_auc) * (x - s.mean_auc);
    const double sd = s.aucs.size() > 1 ? std::sqrt(var / static_cast<double>(s.aucs.size() - 1)) : 0.0;
    table += scenario + "," + label + "," + std::to_string(s.aucs.size()) + "," + format_double(s.mean_auc) + "," +
             format_double(sd) + "\n";
    out << label << ": mean AUC " << s.mean_auc << " over " << s.aucs.size() << " replicate(s)\n";
  }
  write_text(dir / "auc_table.csv", table);
  write_text(dir / "auc_replicates.csv", per_rep);
  run.outputs.insert(run.outputs.begin(), dir / "auc_table.csv");
  run.outputs.push_back(dir / "auc_replicates.csv");
  run.config = {{"scenario", scenario}, {"reports", a.reports}, {"truth", a.truth}};
  write_manifest(dir, run);
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<Index> n{1000};
  std::vector<Index> p{500};
  std::vector<std::string> methods{"goals"};
  double xi = 1.0;
  std::uint64_t seed = 1;
  int repeats = 1;
  Index width = 256;
  std::string out;
  std::size_t threads = 0;
};

void setup_bench(CLI::App& app, BenchArgs& a) {
  auto* s = app.add_subcommand("bench", "Wall-clock timing of post-fit scoring");
  s->add_option("--n", a.n, "sample sizes")->expected(1, -1);
  s->add_option("--p", a.p, "feature counts")->expected(1, -1);
  s->add_option("--methods", a.methods, "goals, rate, shap, nn-goals, scanone")->expected(1, -1);
  s->add_option("--xi", a.xi, "shift size");
  s->add_option("--seed", a.seed, "simulation seed");
  s->add_option("--repeats", a.repeats, "timed repetitions per cell (minimum reported)");
  s->add_option("--width", a.width, "random features for nn-goals");
  s->add_option("--out", a.out, "output directory")->required();
  s->add_option("--threads", a.threads, "worker threads (GOALSKIT_THREADS overrides)");
}

int cmd_bench(BenchArgs& a, std::ostream& out) {
  apply_threads(a.threads);
  static const std::set<std::string> methods{"goals", "rate", "shap", "nn-goals", "scanone"};
  for (const auto& m : a.methods)
    if (!methods.count(m)) throw ConfigError("unknown bench method '" + m + "'");
  if (a.repeats < 1) throw ConfigError("--repeats must be >= 1");

  Run run;
  run.command = "bench";
  std::string csv = "method,n,p,seconds\n";
  json fits = json::object();
  for (const auto& m : a.methods)
    for (Index n : a.n)
      for (Index p : a.p) {
        if (m == "shap" && p > kMaxShapFeatures)
          throw ConfigError("bench shap needs p <= " + std::to_string(kMaxShapFeatures));
        SimConfig cfg;
        cfg.n = n;
        cfg.j = p;
        cfg.v2 = 0.5;
        cfg.rho = 1.0;
        cfg.random_causal = std::min<Index>(5, p);
        cfg.seed = a.seed;
        const Simulation sim = simulate(cfg);
        const Dataset& d = sim.data;
        const std::string cell = m + "," + std::to_string(n) + "," + std::to_string(p);
        double best = INFINITY;
        Stopwatch fit_clock;
        if (m == "nn-goals") {
          const RandomFeatureModel rf = fit_random_features(d, a.width, Activation::relu, a.seed);
          fits[cell] = fit_clock.seconds();
          for (int r = 0; r < a.repeats; ++r) {
            Stopwatch sw;
            (void)nn_goals_scores(rf, d, a.xi);
            best = std::min(best, sw.seconds());
          }
        } else if (m == "scanone") {
          fits[cell] = 0.0;
          for (int r = 0; r < a.repeats; ++r) {
            Stopwatch sw;
            (void)scanone(d);
            best = std::min(best, sw.seconds());
          }
        } else {
          const KernelConfig k = KernelConfig::rbf(median_bandwidth(d.x));
          const FittedGP g = fit(d, k);
          fits[cell] = fit_clock.seconds();
          for (int r = 0; r < a.repeats; ++r) {
            Stopwatch sw;
            if (m == "goals") (void)goals_local(g, d, a.xi);
            else if (m == "rate") (void)rate_scores(effect_size_analog(g, d));
            else (void)exact_shap(d, k, g.sigma2);
            best = std::min(best, sw.seconds());
          }
        }
        csv += cell + "," + format_double(best) + "\n";
        out << cell << " " << best << " s\n";
      }
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_text(dir / "bench.csv", csv);
  run.outputs.push_back(dir / "bench.csv");
  run.seeds.push_back(a.seed);
  run.timings["fit"] = fits;
  run.config = {{"n", a.n}, {"p", a.p}, {"methods", a.methods}, {"xi", a.xi}, {"repeats", a.repeats},
                {"threads", thread_count()}};
  write_manifest(dir, run);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"goalskit: global and local variable importance for Gaussian-process regression", "goalskit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  SimulateArgs sim;
  ScoreArgs score;
  EvalArgs eval;
  BenchArgs bench;
  setup_simulate(app, sim);
  setup_score(app, score);
  setup_eval(app, eval);
  setup_bench(app, bench);

  std::vector<std::string> argv_store{"goalskit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(sim, out);
    if (app.got_subcommand("score")) return cmd_score(score, out);
    if (app.got_subcommand("eval")) return cmd_eval(eval, out);
    if (app.got_subcommand("bench")) return cmd_bench(bench, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace goalskit::cli
