#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "pipadmm/linalg.hpp"
#include "pipadmm/loss.hpp"
#include "pipadmm/penalty.hpp"
#include "pipadmm/types.hpp"

namespace pipadmm {

struct SolverConfig {
  /// Augmentation parameter. Unset means: 1.05 times the descent bound for
  /// smooth quantile losses when mu_auto is on, 1.0 otherwise (1/n under
  /// normalize_loss).
  std::optional<double> mu;
  bool mu_auto = true;
  /// Linearization constant. Unset means eta_safety times the spectral bound.
  /// A user value must exceed the power-method estimate of eigen(mu X^T X).
  std::optional<double> eta;
  double eta_safety = 1.01;
  /// Skip the power-method check of a pinned eta (for callers that computed it).
  bool verify_eta = true;
  int max_iter = 500;
  /// ||beta^k - beta^{k-1}|| / max(1, ||beta^k||) threshold.
  double tol = 1e-4;
  /// Convergence also requires ||X beta + r - y|| <= primal_tol * max(1, ||y||).
  double primal_tol = 1e-3;
  bool record_trace = false;
  /// Keep beta after every iteration (equivalence audits).
  bool record_iterates = false;
  /// Minimize (1/n) sum L instead of sum L.
  bool normalize_loss = false;
  PowerMethodOptions power{};
};

void validate(const SolverConfig& cfg);

struct IterState {
  Vector beta;
  Vector r;
  Vector d;
  int k = 0;
};

/// beta = 0, r = y, d = 0.
IterState feasible_start(Index p, VectorRef y);

enum class StopReason { Tolerance, MaxIter };
std::string_view to_string(StopReason reason);

struct TraceEntry {
  /// sum L(y - X beta) + P(beta), scaled by 1/n under normalize_loss.
  double objective = 0.0;
  /// Augmented Lagrangian at (beta^k, r^k, d^k).
  double lagrangian = 0.0;
  double primal_residual = 0.0;
  double beta_change = 0.0;
  /// ||grad L(r^k) - d^k||_inf, NaN for the quantile loss.
  double dual_gap = 0.0;
};

struct FitResult {
  Vector beta;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  std::vector<TraceEntry> trace;
  /// Lagrangian at the starting point (filled when the trace is recorded).
  double initial_lagrangian = 0.0;
  /// beta^1, ..., beta^K when record_iterates is set.
  std::vector<Vector> iterates;
  IterState final_state;
  double eta_used = 0.0;
  double mu_used = 0.0;
  /// Power-method estimate of eigen(mu X^T X) (0 when eta was pinned unverified).
  double spectral_estimate = 0.0;
  Index workers = 1;
  /// Per-shard bounds of a parallel fit.
  std::vector<double> shard_etas;
  double wall_time_seconds = 0.0;
  /// Seconds spent on eta setup (power method).
  double setup_time_seconds = 0.0;
};

/// Descent-bound mu threshold sqrt(2n) / min{c, kappa} (divided by n under
/// normalize_loss). Throws NotApplicable for losses that are not smooth quantile.
double mu_lower_bound(const Loss& loss, Index n, bool normalize_loss = false);

/// The mu a fit with this config will use.
double resolve_mu(const Loss& loss, Index n, const SolverConfig& cfg);

/// max(eta_safety * spectral, smallest eta making the penalty prox valid).
double auto_eta(double spectral, const Penalty& penalty, double eta_safety);

FitResult fit_sequential(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                         const std::optional<IterState>& init = std::nullopt);

bool stopping_criterion(VectorRef beta_prev, VectorRef beta_curr, double tol);

/// L(r) + P(beta) - d^T (X beta + r - y) + (mu / 2)||X beta + r - y||^2.
double augmented_lagrangian(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                            const IterState& state, double mu, bool normalize_loss = false);

struct DescentViolation {
  /// 1-based iteration whose Lagrangian exceeded the previous one.
  int iteration = 0;
  double previous = 0.0;
  double current = 0.0;
};

struct DescentReport {
  std::vector<DescentViolation> violations;
  double max_increase = 0.0;
  bool ok() const { return violations.empty(); }
};

/// Lists every step where L_mu rose by more than rel_tol * (1 + |L_mu|).
/// The first comparison is against `initial` when given. The descent
/// guarantee needs d = grad L(r), which a feasible start with d = 0 does not
/// satisfy, so the FitResult overload checks the recorded iterates only.
DescentReport check_descent_certificate(const std::vector<TraceEntry>& trace,
                                        std::optional<double> initial = std::nullopt, double rel_tol = 1e-8);
DescentReport check_descent_certificate(const FitResult& fit, double rel_tol = 1e-8);

/// ||grad L(r) - d||_inf. Throws NotApplicable for the quantile loss.
double check_dual_optimality(const IterState& state, const Loss& loss, double grad_scale = 1.0);

}  // namespace pipadmm
