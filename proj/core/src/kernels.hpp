#pragma once

// Per-shard update kernels shared by the sequential and the parallel solver.
// Running the parallel engine with one shard executes exactly the same
// floating-point operations as fit_sequential.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pipadmm/ladmm.hpp"
#include "pipadmm/loss.hpp"
#include "pipadmm/penalty.hpp"
#include "pipadmm/types.hpp"

namespace pipadmm::detail {

struct LossContext {
  const Loss* loss = nullptr;
  double mu = 1.0;
  /// mu passed to the loss prox (n * mu under normalize_loss).
  double prox_mu = 1.0;
  /// Multiplier on loss values and gradients (1 / n under normalize_loss).
  double scale = 1.0;

  static LossContext make(const Loss& loss, double mu, Index n_total, bool normalize) {
    LossContext ctx;
    ctx.loss = &loss;
    ctx.mu = mu;
    const double n = static_cast<double>(n_total);
    ctx.prox_mu = normalize ? mu * n : mu;
    ctx.scale = normalize ? 1.0 / n : 1.0;
    return ctx;
  }
};

/// Sums over one shard, used to assemble trace entries.
struct RoundPartial {
  double fit_loss = 0.0;   // sum L(y - X beta)
  double r_loss = 0.0;     // sum L(r)
  double d_dot_res = 0.0;  // d^T (X beta + r - y)
  double res_sq = 0.0;     // ||X beta + r - y||^2
  double dual_gap = 0.0;   // max |grad L(r) - d|
};

class ShardKernel {
 public:
  ShardKernel(MatrixRef X, VectorRef y, Vector r0, Vector d0, VectorRef beta0)
      : X_(X), y_(y), r_(std::move(r0)), d_(std::move(d0)), xb_(X.rows()), res_(X.rows()) {
    xb_.noalias() = X_ * beta0;
    res_ = xb_ + r_ - y_;
    res_sq_ = res_.squaredNorm();
  }

  /// xi = X_m^T (X_m beta + r_m - y_m - d_m / mu) for the current local state.
  void compute_xi(double mu, Vector& xi) {
    const double inv_mu = 1.0 / mu;
    res_ = xb_ + r_ - y_ - inv_mu * d_;
    xi.noalias() = X_.transpose() * res_;
  }

  /// r-prox and dual step for a new beta. Returns shard sums for the trace
  /// when want_partials is set.
  RoundPartial local_update(const Vector& beta, const LossContext& ctx, bool want_partials) {
    const double inv_mu = 1.0 / ctx.mu;
    xb_.noalias() = X_ * beta;
    const Index n = r_.size();
    for (Index i = 0; i < n; ++i) r_[i] = ctx.loss->prox(ctx.prox_mu, y_[i] + inv_mu * d_[i] - xb_[i]);
    res_ = xb_ + r_ - y_;
    d_ -= ctx.mu * res_;
    res_sq_ = res_.squaredNorm();
    RoundPartial part;
    part.res_sq = res_sq_;
    if (want_partials) fill_partials(ctx, part);
    return part;
  }

  /// Partials for the current state without updating it.
  RoundPartial current_partials(const LossContext& ctx) {
    res_ = xb_ + r_ - y_;
    RoundPartial part;
    part.res_sq = res_.squaredNorm();
    fill_partials(ctx, part);
    return part;
  }

  double res_sq() const { return res_sq_; }
  bool finite() const { return std::isfinite(res_sq_) && d_.allFinite(); }
  const Vector& r() const { return r_; }
  const Vector& d() const { return d_; }
  Index rows() const { return r_.size(); }

 private:
  // Expects res_ = X beta + r - y.
  void fill_partials(const LossContext& ctx, RoundPartial& part) const {
    const Loss& loss = *ctx.loss;
    const Index n = r_.size();
    double fit = 0.0;
    double rl = 0.0;
    double gap = 0.0;
    const bool diff = loss.differentiable();
    for (Index i = 0; i < n; ++i) {
      fit += loss.value(y_[i] - xb_[i]);
      rl += loss.value(r_[i]);
      if (diff) gap = std::max(gap, std::abs(ctx.scale * loss.gradient(r_[i]) - d_[i]));
    }
    part.fit_loss = ctx.scale * fit;
    part.r_loss = ctx.scale * rl;
    part.d_dot_res = d_.dot(res_);
    part.dual_gap = diff ? gap : std::numeric_limits<double>::quiet_NaN();
  }

  MatrixRef X_;
  VectorRef y_;
  Vector r_;
  Vector d_;
  Vector xb_;
  Vector res_;
  double res_sq_ = 0.0;
};

/// Throws EtaBelowSpectralBound unless eta exceeds `spectral` and the prox
/// condition of the penalty holds.
void check_pinned_eta(double eta, double spectral, const Penalty& penalty);

void check_inputs(MatrixRef X, VectorRef y, const SolverConfig& cfg, const std::optional<IterState>& init);

/// out = prox_{eta, P}(beta - (mu / eta) xi_sum).
inline void coordinator_step(const Vector& beta, const Vector& xi_sum, double mu, double eta, const Penalty& penalty,
                             Vector& out) {
  const double step = mu / eta;
  const Index p = beta.size();
  for (Index j = 0; j < p; ++j) out[j] = penalty.prox_unchecked(eta, beta[j] - step * xi_sum[j]);
}

inline double relative_change(const Vector& prev, const Vector& curr) {
  return (curr - prev).norm() / std::max(1.0, curr.norm());
}

}  // namespace pipadmm::detail
