// pipadmm command-line driver: fit, tune, simulate, bench, audit.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pipadmm/pipadmm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pipadmm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIter = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by the subcommands. Optional values stay unset until given.
struct ModelFlags {
  std::string loss = "quantile";
  double tau = 0.5;
  std::optional<double> c;
  std::optional<double> kappa;
  std::optional<double> delta;
  std::string penalty = "snet";
  std::optional<double> a;
  std::optional<double> lambda1;
  double lambda2 = 0.0;
};

struct SolverFlags {
  std::optional<double> mu;
  std::optional<double> eta;
  Index workers = 1;
  int max_iter = 500;
  double tol = 1e-4;
  double primal_tol = 1e-3;
  bool normalize = false;
  bool trace = false;
  std::uint64_t seed = 42;
};

void add_model_flags(CLI::App* app, ModelFlags& m, bool with_lambda1) {
  app->add_option("--loss", m.loss, "sqc | sqk | quantile | ls | huber")->capture_default_str();
  app->add_option("--tau", m.tau, "quantile level")->capture_default_str();
  app->add_option("--c", m.c, "smoothing width of sqc");
  app->add_option("--kappa", m.kappa, "smoothing width of sqk");
  app->add_option("--delta", m.delta, "huber threshold");
  app->add_option("--penalty", m.penalty, "snet | mnet | cnet | enet")->capture_default_str();
  app->add_option("--a", m.a, "concavity (default 3.7 snet, 3 mnet, 1 cnet)");
  if (with_lambda1) app->add_option("--lambda1", m.lambda1, "sparsity level");
  app->add_option("--lambda2", m.lambda2, "ridge level")->capture_default_str();
}

void add_solver_flags(CLI::App* app, SolverFlags& s) {
  app->add_option("--mu", s.mu, "augmentation parameter");
  app->add_option("--eta", s.eta, "linearization constant (pins eta)");
  app->add_option("--workers", s.workers, "row shards")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "iteration cap")->capture_default_str();
  app->add_option("--tol", s.tol, "relative coefficient change tolerance")->capture_default_str();
  app->add_option("--primal-tol", s.primal_tol, "relative primal residual tolerance")->capture_default_str();
  app->add_flag("--normalize", s.normalize, "minimize the mean loss instead of the sum");
  app->add_flag("--trace", s.trace, "record per-iteration diagnostics");
  app->add_option("--seed", s.seed, "seed for every random draw")->capture_default_str();
}

LossSpec make_loss(const ModelFlags& m) {
  LossSpec s;
  s.kind = parse_loss_kind(m.loss);
  s.tau = m.tau;
  auto need = [](const std::optional<double>& v, const char* flag, const char* what) {
    if (!v) throw UsageError(std::string("missing required flag ") + flag + " for loss " + what);
    return *v;
  };
  if (s.kind == LossKind::SmoothQuantileC) s.c = need(m.c, "--c", "sqc");
  if (s.kind == LossKind::SmoothQuantileKappa) s.kappa = need(m.kappa, "--kappa", "sqk");
  if (s.kind == LossKind::Huber) s.huber_delta = need(m.delta, "--delta", "huber");
  validate(s);
  return s;
}

PenaltySpec make_penalty(const ModelFlags& m, bool need_lambda1) {
  PenaltySpec s;
  s.kind = parse_penalty_kind(m.penalty);
  switch (s.kind) {
    case PenaltyKind::Snet: s.a = 3.7; break;
    case PenaltyKind::Mnet: s.a = 3.0; break;
    case PenaltyKind::Cnet: s.a = 1.0; break;
    case PenaltyKind::ElasticNet: s.a = 0.0; break;
  }
  if (m.a) s.a = *m.a;
  if (need_lambda1) {
    if (!m.lambda1) throw UsageError("missing required flag --lambda1 for penalty " + m.penalty);
    s.lambda1 = *m.lambda1;
  }
  s.lambda2 = m.lambda2;
  validate(s);
  return s;
}

SolverConfig make_solver(const SolverFlags& f) {
  SolverConfig cfg;
  cfg.mu = f.mu;
  cfg.eta = f.eta;
  cfg.max_iter = f.max_iter;
  cfg.tol = f.tol;
  cfg.primal_tol = f.primal_tol;
  cfg.normalize_loss = f.normalize;
  cfg.record_trace = f.trace;
  cfg.power.seed = f.seed;
  validate(cfg);
  if (f.workers < 1) throw UsageError("--workers must be >= 1");
  return cfg;
}

json to_json(const LossSpec& s) {
  return {{"kind", to_string(s.kind)}, {"tau", s.tau}, {"c", s.c}, {"kappa", s.kappa}, {"huber_delta", s.huber_delta}};
}

json to_json(const PenaltySpec& s) {
  return {{"kind", to_string(s.kind)}, {"a", s.a}, {"lambda1", s.lambda1}, {"lambda2", s.lambda2}};
}

json to_json(const SolverConfig& c, double mu, std::optional<double> eta, Index workers, std::uint64_t seed) {
  json j = {{"mu", mu},
            {"mu_auto", c.mu_auto && !c.mu},
            {"eta_pinned", c.eta.has_value()},
            {"eta_safety", c.eta_safety},
            {"max_iter", c.max_iter},
            {"tol", c.tol},
            {"primal_tol", c.primal_tol},
            {"normalize_loss", c.normalize_loss},
            {"record_trace", c.record_trace},
            {"power_tol", c.power.tol},
            {"power_max_iter", c.power.max_iter},
            {"workers", workers},
            {"seed", seed}};
  j["eta"] = eta ? json(*eta) : json(nullptr);
  return j;
}

json to_json(const ScenarioSpec& s) {
  return {{"scenario", to_string(s.scenario)},
          {"n", s.n},
          {"p", s.p},
          {"seed", s.seed},
          {"error", {{"kind", s.error.kind == ErrorDist::Kind::Normal ? "normal" : "lognormal"},
                     {"mu", s.error.mu},
                     {"sigma", s.error.sigma}}},
          {"tau_eval", s.tau_eval}};
}

json vec_json(VectorRef v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json fit_json(const FitResult& fit, double threshold) {
  json j;
  j["beta"] = vec_json(fit.beta);
  j["iterations"] = fit.iterations;
  j["stop_reason"] = to_string(fit.stop_reason);
  j["eta_used"] = fit.eta_used;
  j["mu_used"] = fit.mu_used;
  j["support"] = support_of(fit.beta, threshold);
  j["timings"] = {{"wall_seconds", fit.wall_time_seconds}, {"setup_seconds", fit.setup_time_seconds}};
  j["workers"] = fit.workers;
  if (!fit.shard_etas.empty()) j["shard_etas"] = fit.shard_etas;
  if (!fit.trace.empty()) {
    json t = json::array();
    for (const auto& e : fit.trace) {
      t.push_back({{"objective", e.objective},
                   {"lagrangian", e.lagrangian},
                   {"primal_residual", e.primal_residual},
                   {"beta_change", e.beta_change},
                   {"dual_gap", std::isnan(e.dual_gap) ? json(nullptr) : json(e.dual_gap)}});
    }
    j["trace"] = std::move(t);
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse '") + part + "' in " + flag);
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

struct Data {
  Matrix X;
  Vector y;
};

Data load(const std::string& xpath, const std::string& ypath, bool header) {
  Data d{read_csv_matrix(xpath, header), read_csv_vector(ypath, header)};
  if (d.X.rows() != d.y.size()) {
    throw DimensionMismatch(xpath + " has " + std::to_string(d.X.rows()) + " rows but " + ypath + " has " +
                            std::to_string(d.y.size()));
  }
  return d;
}

FitResult run_fit(const Data& d, const Loss& loss, const Penalty& pen, const SolverConfig& cfg, Index workers,
                  MessageLog* log) {
  if (workers == 1 && log == nullptr) return fit_sequential(d.X, d.y, loss, pen, cfg);
  ParallelOptions opts;
  opts.workers = workers;
  opts.log = log;
  return fit_parallel(d.X, d.y, loss, pen, cfg, opts);
}

// ---- subcommands ----

struct FitArgs {
  std::string x, y, out, messages;
  bool header = false;
  double threshold = 1e-6;
  ModelFlags model;
  SolverFlags solver;
};

int cmd_fit(const FitArgs& a) {
  const LossSpec ls = make_loss(a.model);
  const PenaltySpec ps = make_penalty(a.model, true);
  const SolverConfig cfg = make_solver(a.solver);
  const Data d = load(a.x, a.y, a.header);
  MessageLog log;
  const FitResult fit = run_fit(d, Loss(ls), Penalty(ps), cfg, a.solver.workers, a.messages.empty() ? nullptr : &log);
  if (!a.messages.empty()) {
    std::ofstream m(a.messages);
    if (!m) throw IoError("cannot open '" + a.messages + "' for writing");
    log.write_jsonl(m);
  }
  json j = fit_json(fit, a.threshold);
  j["config"] = {{"command", "fit"},
                 {"x", a.x},
                 {"y", a.y},
                 {"header", a.header},
                 {"support_threshold", a.threshold},
                 {"loss", to_json(ls)},
                 {"penalty", to_json(ps)},
                 {"solver", to_json(cfg, fit.mu_used, fit.eta_used, a.solver.workers, a.solver.seed)}};
  write_json(a.out, j);
  return fit.stop_reason == StopReason::Tolerance ? kExitOk : kExitMaxIter;
}

struct TuneArgs {
  FitArgs fit;
  std::string lambda1_grid;
  std::string lambda2_grid = "0";
  int grid_size = 50;
  double grid_ratio = 0.01;
  std::string cn_rule = "6logp";
  double cn = 0.0;
};

CnRule parse_cn_rule(const std::string& s) {
  if (s == "6logp") return CnRule::SixLogP;
  if (s == "custom") return CnRule::Custom;
  throw UsageError("--cn-rule must be 6logp or custom");
}

int cmd_tune(const TuneArgs& a) {
  const LossSpec ls = make_loss(a.fit.model);
  const PenaltySpec tmpl = make_penalty(a.fit.model, false);
  const SolverConfig cfg = make_solver(a.fit.solver);
  const Data d = load(a.fit.x, a.fit.y, a.fit.header);
  const Loss loss(ls);
  TuneGrid grid;
  grid.lambda2_values = parse_list(a.lambda2_grid, "--lambda2-grid");
  grid.cn_rule = parse_cn_rule(a.cn_rule);
  grid.cn_custom = a.cn;
  double lmax = 0.0;
  if (!a.lambda1_grid.empty()) {
    grid.lambda1_values = parse_list(a.lambda1_grid, "--lambda1-grid");
  } else {
    lmax = lambda_max(d.X, d.y, loss, tmpl, cfg);
    grid.lambda1_values = log_grid(lmax, a.grid_size, a.grid_ratio);
  }
  TuneOptions opts;
  opts.workers = a.fit.solver.workers;
  opts.support_threshold = a.fit.threshold;
  const TuneResult res = tune(d.X, d.y, loss, tmpl, grid, cfg, opts);

  json j = fit_json(res.fit, a.fit.threshold);
  j["best"] = to_json(res.best);
  j["best_index"] = res.best_index;
  json table = json::array();
  for (const auto& r : res.table) {
    table.push_back({{"lambda1", r.lambda1},
                     {"lambda2", r.lambda2},
                     {"hbic", std::isfinite(r.hbic) ? json(r.hbic) : json(nullptr)},
                     {"loss_sum", r.loss_sum},
                     {"support_size", r.support_size},
                     {"iterations", r.iterations},
                     {"stop_reason", to_string(r.stop_reason)},
                     {"diverged", r.diverged}});
  }
  j["table"] = std::move(table);
  j["config"] = {{"command", "tune"},
                 {"x", a.fit.x},
                 {"y", a.fit.y},
                 {"header", a.fit.header},
                 {"support_threshold", a.fit.threshold},
                 {"loss", to_json(ls)},
                 {"penalty_template", to_json(tmpl)},
                 {"grid",
                  {{"lambda1", grid.lambda1_values},
                   {"lambda2", grid.lambda2_values},
                   {"lambda_max", lmax},
                   {"grid_size", a.grid_size},
                   {"grid_ratio", a.grid_ratio},
                   {"cn_rule", a.cn_rule},
                   {"cn", cn_value(grid.cn_rule, grid.cn_custom, d.X.cols())}}},
                 {"solver", to_json(cfg, res.fit.mu_used, std::nullopt, a.fit.solver.workers, a.fit.solver.seed)}};
  write_json(a.fit.out, j);
  return res.fit.stop_reason == StopReason::Tolerance ? kExitOk : kExitMaxIter;
}

struct ScenarioFlags {
  std::string scenario = "hetero-quantile";
  Index n = 200;
  Index p = 100;
  std::string error;
  std::optional<double> error_mu;
  std::optional<double> error_sigma;
  std::optional<double> tau_eval;
};

void add_scenario_flags(CLI::App* app, ScenarioFlags& s) {
  app->add_option("--scenario", s.scenario, "hetero-quantile | hetero-quadratic | ar-correlated")->capture_default_str();
  app->add_option("--n", s.n, "rows")->capture_default_str();
  app->add_option("--p", s.p, "columns")->capture_default_str();
  app->add_option("--error", s.error, "normal | lognormal (default: the scenario's normal errors)");
  app->add_option("--error-mu", s.error_mu, "error location");
  app->add_option("--error-sigma", s.error_sigma, "error scale");
  app->add_option("--tau-eval", s.tau_eval, "quantile level for the hetero-quantile truth");
}

ScenarioSpec make_scenario(const ScenarioFlags& f, std::uint64_t seed) {
  ScenarioSpec s = ScenarioSpec::defaults(parse_scenario(f.scenario), f.n, f.p, seed);
  if (!f.error.empty()) {
    if (f.error == "normal") {
      s.error.kind = ErrorDist::Kind::Normal;
    } else if (f.error == "lognormal") {
      s.error = {ErrorDist::Kind::LogNormal, 0.0, 1.2};
    } else {
      throw UsageError("--error must be normal or lognormal");
    }
  }
  if (f.error_mu) s.error.mu = *f.error_mu;
  if (f.error_sigma) s.error.sigma = *f.error_sigma;
  if (f.tau_eval) s.tau_eval = *f.tau_eval;
  validate(s);
  return s;
}

struct SimulateArgs {
  ScenarioFlags scenario;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& a) {
  const ScenarioSpec spec = make_scenario(a.scenario, a.seed);
  const Dataset d = generate(spec);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_csv_matrix((dir / "X.csv").string(), d.X);
  write_csv_vector((dir / "y.csv").string(), d.y);
  json truth = {{"true_beta", vec_json(d.true_beta)},
                {"true_support", d.true_support},
                {"p1_indices", d.p1_indices},
                {"p2_indices", d.p2_indices},
                {"config", {{"command", "simulate"}, {"scenario", to_json(spec)}}}};
  write_json((dir / "truth.json").string(), truth);
  return kExitOk;
}

struct BenchArgs {
  ScenarioFlags scenario;
  ModelFlags model;
  SolverFlags solver;
  int replications = 20;
  std::string lambda1_grid;
  std::string lambda2_grid = "0";
  int grid_size = 50;
  double grid_ratio = 0.01;
  bool kkt_lambda_max = false;
  std::string cn_rule = "6logp";
  double cn = 0.0;
  double threshold = 1e-6;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  BenchSpec spec;
  spec.scenario = make_scenario(a.scenario, a.solver.seed);
  spec.replications = a.replications;
  spec.loss = make_loss(a.model);
  spec.penalty = make_penalty(a.model, false);
  spec.cfg = make_solver(a.solver);
  if (!a.lambda1_grid.empty()) spec.lambda1_values = parse_list(a.lambda1_grid, "--lambda1-grid");
  spec.lambda2_values = parse_list(a.lambda2_grid, "--lambda2-grid");
  spec.grid_size = a.grid_size;
  spec.grid_ratio = a.grid_ratio;
  spec.kkt_lambda_max = a.kkt_lambda_max;
  spec.cn_rule = parse_cn_rule(a.cn_rule);
  spec.cn_custom = a.cn;
  spec.workers = a.solver.workers;
  spec.support_threshold = a.threshold;
  const auto results = run_bench(spec);
  const auto sum = summarize(results);

  std::ofstream file;
  if (!a.out.empty() && a.out != "-") {
    file.open(a.out);
    if (!file) throw IoError("cannot open '" + a.out + "' for writing");
  }
  std::ostream& os = file.is_open() ? file : std::cout;
  const double mu = resolve_mu(Loss(spec.loss), spec.scenario.n, spec.cfg);
  std::ostringstream prov;
  prov << to_string(spec.scenario.scenario) << ',' << spec.scenario.n << ',' << spec.scenario.p << ','
       << to_string(spec.loss.kind) << ',' << format_double(spec.loss.tau) << ',' << to_string(spec.penalty.kind)
       << ',' << format_double(spec.penalty.a) << ',' << spec.workers << ',' << format_double(mu) << ','
       << spec.cfg.max_iter << ',' << format_double(spec.cfg.tol) << ',' << spec.grid_size << ','
       << format_double(spec.grid_ratio) << ',' << a.cn_rule << ',' << format_double(spec.support_threshold) << ','
       << "l1";
  os << "row,seed,P1,P2,AE,FP,FN,Nonzero,Ite,Time,fit_time,lambda1,lambda2,stop_reason,"
        "scenario,n,p,loss,tau,penalty,a,workers,mu,max_iter,tol,grid_size,grid_ratio,cn_rule,threshold,ae_norm\n";
  for (const auto& r : results) {
    os << r.replicate << ',' << r.seed << ',' << (r.metrics.P1 ? 100 : 0) << ',' << (r.metrics.P2 ? 100 : 0) << ','
       << format_double(r.metrics.AE) << ',' << r.metrics.FP << ',' << r.metrics.FN << ',' << r.metrics.Nonzero << ','
       << r.iterations << ',' << format_double(r.path_time) << ',' << format_double(r.fit_time) << ',' << format_double(r.lambda1) << ','
       << format_double(r.lambda2) << ',' << to_string(r.stop_reason) << ',' << prov.str() << '\n';
  }
  os << "mean,," << format_double(sum.P1) << ',' << format_double(sum.P2) << ',' << format_double(sum.AE_mean) << ','
     << format_double(sum.FP_mean) << ',' << format_double(sum.FN_mean) << ',' << format_double(sum.Nonzero_mean)
     << ',' << format_double(sum.Ite_mean) << ',' << format_double(sum.Time_mean) << ",,,,"
     << (sum.all_converged ? "Tolerance" : "MaxIter") << ',' << prov.str() << '\n';
  return sum.all_converged ? kExitOk : kExitMaxIter;
}

struct AuditArgs {
  FitArgs fit;
  ScenarioFlags scenario;
  std::string workers_list = "1,2,5";
  int iterations = 200;
};

int cmd_audit(const AuditArgs& a) {
  const LossSpec ls = make_loss(a.fit.model);
  const PenaltySpec ps = make_penalty(a.fit.model, true);
  SolverConfig cfg = make_solver(a.fit.solver);
  Data d;
  json source;
  if (!a.fit.x.empty() || !a.fit.y.empty()) {
    if (a.fit.x.empty() || a.fit.y.empty()) throw UsageError("audit needs both --x and --y, or neither");
    d = load(a.fit.x, a.fit.y, a.fit.header);
    source = {{"x", a.fit.x}, {"y", a.fit.y}, {"header", a.fit.header}};
  } else {
    const ScenarioSpec spec = make_scenario(a.scenario, a.fit.solver.seed);
    Dataset ds = generate(spec);
    d = {std::move(ds.X), std::move(ds.y)};
    source = to_json(spec);
  }
  std::vector<Index> workers;
  for (double w : parse_list(a.workers_list, "--workers-list")) {
    if (w < 1 || w != std::floor(w)) throw UsageError("--workers-list entries must be positive integers");
    workers.push_back(static_cast<Index>(w));
  }
  const Loss loss(ls);
  const Penalty pen(ps);
  cfg.max_iter = a.iterations;
  cfg.tol = 1e-300;
  cfg.record_trace = false;
  const double mu = resolve_mu(loss, d.X.rows(), cfg);
  cfg.mu = mu;
  if (!cfg.eta) cfg.eta = auto_eta(spectral_bound(d.X, mu, cfg.power).value, pen, cfg.eta_safety);
  const AuditReport rep = run_equivalence_audit(d.X, d.y, loss, pen, cfg, workers);

  json entries = json::array();
  for (const auto& e : rep.entries) {
    entries.push_back({{"workers", e.workers},
                       {"iterations", e.iterations},
                       {"max_deviation", e.max_deviation},
                       {"final_r_deviation", e.final_r_deviation},
                       {"final_d_deviation", e.final_d_deviation},
                       {"per_iteration", e.per_iteration}});
  }
  json j = {{"max_deviation", rep.max_deviation},
            {"reference_iterations", rep.reference_iterations},
            {"eta", rep.eta},
            {"entries", std::move(entries)},
            {"config",
             {{"command", "audit"},
              {"data", source},
              {"workers_list", workers},
              {"loss", to_json(ls)},
              {"penalty", to_json(ps)},
              {"solver", to_json(cfg, mu, cfg.eta, 1, a.fit.solver.seed)}}}};
  write_json(a.fit.out, j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse penalized regression by linearized ADMM"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit one penalized model");
  fit_cmd->add_option("--x", fit.x, "design matrix CSV")->required();
  fit_cmd->add_option("--y", fit.y, "response CSV (one column)")->required();
  fit_cmd->add_flag("--header", fit.header, "skip one header line in each CSV");
  fit_cmd->add_option("--out", fit.out, "result JSON (default stdout)");
  fit_cmd->add_option("--messages", fit.messages, "write the message log as JSON lines");
  fit_cmd->add_option("--threshold", fit.threshold, "support threshold")->capture_default_str();
  add_model_flags(fit_cmd, fit.model, true);
  add_solver_flags(fit_cmd, fit.solver);

  TuneArgs tn;
  auto* tune_cmd = app.add_subcommand("tune", "select lambda by HBIC over a grid");
  tune_cmd->add_option("--x", tn.fit.x, "design matrix CSV")->required();
  tune_cmd->add_option("--y", tn.fit.y, "response CSV (one column)")->required();
  tune_cmd->add_flag("--header", tn.fit.header, "skip one header line in each CSV");
  tune_cmd->add_option("--out", tn.fit.out, "result JSON (default stdout)");
  tune_cmd->add_option("--threshold", tn.fit.threshold, "support threshold")->capture_default_str();
  tune_cmd->add_option("--lambda1-grid", tn.lambda1_grid, "comma-separated descending lambda1 values");
  tune_cmd->add_option("--lambda2-grid", tn.lambda2_grid, "comma-separated lambda2 values")->capture_default_str();
  tune_cmd->add_option("--grid-size", tn.grid_size, "lambda1 points when no grid is given")->capture_default_str();
  tune_cmd->add_option("--grid-ratio", tn.grid_ratio, "smallest / largest lambda1")->capture_default_str();
  tune_cmd->add_option("--cn-rule", tn.cn_rule, "6logp | custom")->capture_default_str();
  tune_cmd->add_option("--cn", tn.cn, "C_n for --cn-rule custom");
  add_model_flags(tune_cmd, tn.fit.model, false);
  add_solver_flags(tune_cmd, tn.fit.solver);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic dataset");
  add_scenario_flags(sim_cmd, sim.scenario);
  sim_cmd->add_option("--seed", sim.seed, "generator seed")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir, "directory for X.csv, y.csv, truth.json")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "replicated simulation study");
  add_scenario_flags(bench_cmd, bench.scenario);
  add_model_flags(bench_cmd, bench.model, false);
  add_solver_flags(bench_cmd, bench.solver);
  bench_cmd->add_option("--replications", bench.replications, "replicates (seed, seed + 1, ...)")
      ->capture_default_str();
  bench_cmd->add_option("--lambda1-grid", bench.lambda1_grid, "comma-separated descending lambda1 values");
  bench_cmd->add_option("--lambda2-grid", bench.lambda2_grid, "comma-separated lambda2 values")
      ->capture_default_str();
  bench_cmd->add_option("--grid-size", bench.grid_size, "lambda1 points")->capture_default_str();
  bench_cmd->add_option("--grid-ratio", bench.grid_ratio, "smallest / largest lambda1")->capture_default_str();
  bench_cmd->add_flag("--kkt-lambda-max", bench.kkt_lambda_max, "grid top from the KKT bound, not bisection");
  bench_cmd->add_option("--cn-rule", bench.cn_rule, "6logp | custom")->capture_default_str();
  bench_cmd->add_option("--cn", bench.cn, "C_n for --cn-rule custom");
  bench_cmd->add_option("--threshold", bench.threshold, "support threshold")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "table CSV (default stdout)");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "check that iterates do not depend on the row partition");
  audit_cmd->add_option("--x", audit.fit.x, "design matrix CSV (default: simulate)");
  audit_cmd->add_option("--y", audit.fit.y, "response CSV");
  audit_cmd->add_flag("--header", audit.fit.header, "skip one header line in each CSV");
  audit_cmd->add_option("--out", audit.fit.out, "result JSON (default stdout)");
  audit_cmd->add_option("--workers-list", audit.workers_list, "comma-separated shard counts")->capture_default_str();
  audit_cmd->add_option("--iterations", audit.iterations, "iterations compared")->capture_default_str();
  add_scenario_flags(audit_cmd, audit.scenario);
  add_model_flags(audit_cmd, audit.fit.model, true);
  add_solver_flags(audit_cmd, audit.fit.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*tune_cmd) return cmd_tune(tn);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*bench_cmd) return cmd_bench(bench);
    if (*audit_cmd) return cmd_audit(audit);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
