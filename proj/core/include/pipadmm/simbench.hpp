#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "pipadmm/ladmm.hpp"
#include "pipadmm/model_select.hpp"
#include "pipadmm/types.hpp"

namespace pipadmm {

enum class Scenario {
  HeteroQuantile,   // y = x6 + x12 + x15 + x20 + 0.7 x1 eps, x1 = Phi(x~1)
  HeteroQuadratic,  // y = x'b + (x'b)^2 eps / c, c = sqrt(3) b'b
  ArCorrelated,     // y = x'b + eps, AR(0.5) covariates, 20 nonzeros
};

std::string_view to_string(Scenario s);
/// Accepts "hetero-quantile", "hetero-quadratic", "ar-correlated" and the enum spellings.
Scenario parse_scenario(std::string_view name);

struct ErrorDist {
  enum class Kind { Normal, LogNormal };
  Kind kind = Kind::Normal;
  double mu = 0.0;
  double sigma = 1.0;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::HeteroQuantile;
  Index n = 200;
  Index p = 100;
  std::uint64_t seed = 42;
  ErrorDist error{};
  /// Quantile level used for the population coefficient of x1 (hetero-quantile only).
  double tau_eval = 0.5;

  /// Standard errors per scenario: N(0, 1), N(0, 1.5^2), N(0, 5^2).
  static ScenarioSpec defaults(Scenario s, Index n, Index p, std::uint64_t seed = 42);
};

void validate(const ScenarioSpec& spec);

struct Dataset {
  Matrix X;
  Vector y;
  Vector true_beta;
  /// 0-based indices of the true nonzeros (index 0 included for hetero-quantile).
  std::vector<Index> true_support;
  /// Indices behind the P1 and P2 selection rates. For hetero-quantile these are {x1} and
  /// {x6, x12, x15, x20}; otherwise P1 is empty and P2 is the whole support.
  std::vector<Index> p1_indices;
  std::vector<Index> p2_indices;
};

/// Deterministic in (spec, seed).
Dataset generate(const ScenarioSpec& spec);

/// AR(1) correlation 0.5^|i-j| of size p.
Matrix ar1_correlation(Index p, double rho = 0.5);

struct MetricReport {
  bool P1 = true;
  bool P2 = true;
  Index FP = 0;
  Index FN = 0;
  Index Nonzero = 0;
  /// l1 estimation error.
  double AE = 0.0;
};

MetricReport metrics(VectorRef fit_beta, VectorRef true_beta, const std::vector<Index>& true_support,
                     double threshold = 1e-6, const std::vector<Index>& p1_indices = {},
                     const std::vector<Index>& p2_indices = {});
MetricReport metrics(VectorRef fit_beta, const Dataset& data, double threshold = 1e-6);

/// Mean absolute prediction error.
double prediction_error(VectorRef beta, MatrixRef X_test, VectorRef y_test);

struct BenchSpec {
  ScenarioSpec scenario;
  int replications = 20;
  LossSpec loss;
  /// Kind and a; lambdas come from the grid.
  PenaltySpec penalty;
  SolverConfig cfg;
  /// Explicit lambda1 grid; empty means log_grid(lambda_max, grid_size, grid_ratio)
  /// per replicate.
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values{0.0};
  int grid_size = 50;
  double grid_ratio = 0.01;
  /// Use lambda_max_kkt instead of the bisection estimate.
  bool kkt_lambda_max = false;
  CnRule cn_rule = CnRule::SixLogP;
  double cn_custom = 0.0;
  Index workers = 1;
  double support_threshold = 1e-6;
  /// Replicates run concurrently on up to this many threads (0: PIPADMM_THREADS
  /// or the processor count).
  int max_threads = 0;
};

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  MetricReport metrics;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_max = 0.0;
  /// Total path time and the time of the selected fit, seconds.
  double path_time = 0.0;
  double fit_time = 0.0;
};

struct BenchSummary {
  int replications = 0;
  double P1 = 0.0;  // percent
  double P2 = 0.0;  // percent
  double AE_mean = 0.0;
  double AE_sd = 0.0;
  double FP_mean = 0.0;
  double FN_mean = 0.0;
  double Nonzero_mean = 0.0;
  double Ite_mean = 0.0;
  double Time_mean = 0.0;
  /// Fraction of replicates with exact support recovery (FP = FN = 0).
  double exact_rate = 0.0;
  bool all_converged = true;
};

/// Replicate i uses seed scenario.seed + i.
ReplicateResult run_replicate(const BenchSpec& spec, int replicate);
std::vector<ReplicateResult> run_bench(const BenchSpec& spec,
                                       const std::function<void(const ReplicateResult&)>& on_done = {});
BenchSummary summarize(const std::vector<ReplicateResult>& results);

}  // namespace pipadmm
