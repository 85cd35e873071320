#include "pipadmm/ladmm.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "pipadmm/error.hpp"

namespace pipadmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

void validate(const SolverConfig& cfg) {
  if (cfg.mu && !(std::isfinite(*cfg.mu) && *cfg.mu > 0.0)) throw InvalidSpec("solver: mu must be positive");
  if (cfg.eta && !(std::isfinite(*cfg.eta) && *cfg.eta > 0.0)) throw InvalidSpec("solver: eta must be positive");
  if (!(cfg.eta_safety >= 1.0)) throw InvalidSpec("solver: eta_safety must be >= 1");
  if (cfg.max_iter < 1) throw InvalidSpec("solver: max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw InvalidSpec("solver: tol must be positive");
  if (!(cfg.primal_tol > 0.0)) throw InvalidSpec("solver: primal_tol must be positive");
}

IterState feasible_start(Index p, VectorRef y) {
  IterState s;
  s.beta = Vector::Zero(p);
  s.r = y;
  s.d = Vector::Zero(y.size());
  return s;
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::Tolerance ? "Tolerance" : "MaxIter";
}

double mu_lower_bound(const Loss& loss, Index n, bool normalize_loss) {
  if (!loss.is_smooth_quantile()) throw NotApplicable("mu_lower_bound: only defined for smooth quantile losses");
  const double bound = std::sqrt(2.0 * static_cast<double>(n)) / loss.smoothing_width();
  return normalize_loss ? bound / static_cast<double>(n) : bound;
}

double resolve_mu(const Loss& loss, Index n, const SolverConfig& cfg) {
  if (cfg.mu) return *cfg.mu;
  if (cfg.mu_auto && loss.is_smooth_quantile()) return 1.05 * mu_lower_bound(loss, n, cfg.normalize_loss);
  // Under normalize_loss, mu = 1/n runs the same iteration as mu = 1 on data scaled by 1/sqrt(n).
  return cfg.normalize_loss ? 1.0 / static_cast<double>(n) : 1.0;
}

double auto_eta(double spectral, const Penalty& penalty, double eta_safety) {
  double eta = eta_safety * spectral;
  if (!(eta > 0.0)) eta = eta_safety;
  const auto& s = penalty.spec();
  // The nonconvex closed forms need eta above a penalty-dependent floor.
  double floor = 0.0;
  if (s.kind == PenaltyKind::Snet) floor = 1.0 / (s.a - 1.0) - s.lambda2;
  if (s.kind == PenaltyKind::Mnet) floor = 1.0 / s.a - s.lambda2;
  if (floor > 0.0 && eta <= floor) eta = eta_safety * floor * (1.0 + 1e-12) + 1e-12;
  return eta;
}

namespace detail {

void check_pinned_eta(double eta, double spectral, const Penalty& penalty) {
  if (!(eta > spectral)) {
    throw EtaBelowSpectralBound("eta = " + std::to_string(eta) + " does not exceed eigen(mu X^T X) ~ " +
                                std::to_string(spectral));
  }
  penalty.check_eta(eta);
}

void check_inputs(MatrixRef X, VectorRef y, const SolverConfig& cfg, const std::optional<IterState>& init) {
  validate(cfg);
  validate_design(X);
  if (X.rows() != y.size()) {
    throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
  }
  if (!y.allFinite()) throw InvalidSpec("response contains nonfinite entries");
  if (init) {
    if (init->beta.size() != X.cols() || init->r.size() != X.rows() || init->d.size() != X.rows()) {
      throw DimensionMismatch("initial state dimensions do not match (p, n, n)");
    }
    if (!init->beta.allFinite() || !init->r.allFinite() || !init->d.allFinite()) {
      throw InvalidSpec("initial state contains nonfinite entries");
    }
  }
}

}  // namespace detail

FitResult fit_sequential(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                         const std::optional<IterState>& init) {
  const auto t0 = Clock::now();
  detail::check_inputs(X, y, cfg, init);
  const Index n = X.rows();
  const Index p = X.cols();

  FitResult out;
  out.mu_used = resolve_mu(loss, n, cfg);
  const double mu = out.mu_used;

  if (cfg.eta && !cfg.verify_eta) {
    out.eta_used = *cfg.eta;
    penalty.check_eta(out.eta_used);
  } else {
    out.spectral_estimate = spectral_bound(X, mu, cfg.power).value;
    if (cfg.eta) {
      detail::check_pinned_eta(*cfg.eta, out.spectral_estimate, penalty);
      out.eta_used = *cfg.eta;
    } else {
      out.eta_used = auto_eta(out.spectral_estimate, penalty, cfg.eta_safety);
    }
  }
  const double eta = out.eta_used;
  out.setup_time_seconds = seconds_since(t0);

  IterState start = init ? *init : feasible_start(p, y);
  Vector beta = std::move(start.beta);
  detail::ShardKernel kernel(X, y, std::move(start.r), std::move(start.d), beta);
  const auto ctx = detail::LossContext::make(loss, mu, n, cfg.normalize_loss);
  const double primal_thresh = cfg.primal_tol * std::max(1.0, y.norm());

  if (cfg.record_trace) {
    const auto part = kernel.current_partials(ctx);
    out.initial_lagrangian = part.r_loss + penalty.value(beta) - part.d_dot_res + 0.5 * mu * part.res_sq;
    out.trace.reserve(static_cast<std::size_t>(cfg.max_iter));
  }

  Vector xi(p);
  Vector next(p);
  out.stop_reason = StopReason::MaxIter;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const double lagged_res = std::sqrt(kernel.res_sq());
    kernel.compute_xi(mu, xi);
    detail::coordinator_step(beta, xi, mu, eta, penalty, next);
    if (!next.allFinite()) throw Diverged("nonfinite coefficients at iteration " + std::to_string(k));
    const double change = detail::relative_change(beta, next);
    beta.swap(next);

    const auto part = kernel.local_update(beta, ctx, cfg.record_trace);
    if (!kernel.finite()) throw Diverged("nonfinite residual or dual at iteration " + std::to_string(k));
    out.iterations = k;
    if (cfg.record_trace) {
      const double pen = penalty.value(beta);
      out.trace.push_back(TraceEntry{part.fit_loss + pen, part.r_loss + pen - part.d_dot_res + 0.5 * mu * part.res_sq,
                                     std::sqrt(part.res_sq), change, part.dual_gap});
    }
    if (cfg.record_iterates) out.iterates.push_back(beta);
    // beta^1 = beta^0 from a feasible start, so the test starts at k = 2.
    if (k >= 2 && change <= cfg.tol && lagged_res <= primal_thresh) {
      out.stop_reason = StopReason::Tolerance;
      break;
    }
  }

  out.final_state.beta = beta;
  out.final_state.r = kernel.r();
  out.final_state.d = kernel.d();
  out.final_state.k = out.iterations;
  out.beta = std::move(beta);
  out.wall_time_seconds = seconds_since(t0);
  return out;
}

bool stopping_criterion(VectorRef beta_prev, VectorRef beta_curr, double tol) {
  if (beta_prev.size() != beta_curr.size()) throw DimensionMismatch("stopping_criterion: length mismatch");
  return (beta_curr - beta_prev).norm() / std::max(1.0, beta_curr.norm()) <= tol;
}

double augmented_lagrangian(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                            const IterState& state, double mu, bool normalize_loss) {
  if (state.beta.size() != X.cols() || state.r.size() != X.rows() || state.d.size() != X.rows() ||
      y.size() != X.rows()) {
    throw DimensionMismatch("augmented_lagrangian: dimension mismatch");
  }
  const Vector res = X * state.beta + state.r - y;
  const double scale = normalize_loss ? 1.0 / static_cast<double>(X.rows()) : 1.0;
  return scale * loss.sum(state.r) + penalty.value(state.beta) - state.d.dot(res) + 0.5 * mu * res.squaredNorm();
}

DescentReport check_descent_certificate(const std::vector<TraceEntry>& trace, std::optional<double> initial,
                                        double rel_tol) {
  DescentReport report;
  std::optional<double> prev = initial;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double cur = trace[i].lagrangian;
    if (prev) {
      const double increase = cur - *prev;
      report.max_increase = std::max(report.max_increase, increase);
      if (increase > rel_tol * (1.0 + std::abs(*prev))) {
        report.violations.push_back({static_cast<int>(i) + 1, *prev, cur});
      }
    }
    prev = cur;
  }
  return report;
}

DescentReport check_descent_certificate(const FitResult& fit, double rel_tol) {
  return check_descent_certificate(fit.trace, std::nullopt, rel_tol);
}

double check_dual_optimality(const IterState& state, const Loss& loss, double grad_scale) {
  if (!loss.differentiable()) throw NotApplicable("check_dual_optimality: the quantile loss is not differentiable");
  if (state.r.size() != state.d.size()) throw DimensionMismatch("check_dual_optimality: r and d lengths differ");
  double gap = 0.0;
  for (Index i = 0; i < state.r.size(); ++i) {
    gap = std::max(gap, std::abs(grad_scale * loss.gradient(state.r[i]) - state.d[i]));
  }
  return gap;
}

}  // namespace pipadmm
