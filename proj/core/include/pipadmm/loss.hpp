#pragma once

#include <string_view>

#include "pipadmm/types.hpp"

namespace pipadmm {

enum class LossKind {
  SmoothQuantileC,      // quadratic on [-c, c), linear outside
  SmoothQuantileKappa,  // quadratic on [(tau-1)kappa, tau kappa]
  Quantile,             // check function rho_tau
  LeastSquares,         // u^2 / 2
  Huber,                // u^2 / 2 on |u| <= delta, delta |u| - delta^2 / 2 outside
};

struct LossSpec {
  LossKind kind = LossKind::Quantile;
  double tau = 0.5;
  double c = 0.0;
  double kappa = 0.0;
  double huber_delta = 0.0;
};

/// Throws InvalidSpec when a parameter required by `spec.kind` is out of range.
void validate(const LossSpec& spec);

std::string_view to_string(LossKind kind);
/// Accepts "sqc", "sqk", "quantile", "ls", "huber" and the enum spellings.
LossKind parse_loss_kind(std::string_view name);

/// A validated scalar loss L together with its gradient and proximal operator
///
///   prox_{mu, L}(v) = argmin_u  L(u) + (mu / 2)(u - v)^2.
///
/// Construction rejects invalid specs, so per-call work never re-validates the
/// parameters. Vector operations apply the scalar kernel elementwise.
class Loss {
 public:
  explicit Loss(const LossSpec& spec);

  static Loss smooth_quantile_c(double tau, double c);
  static Loss smooth_quantile_kappa(double tau, double kappa);
  static Loss quantile(double tau);
  static Loss least_squares();
  static Loss huber(double delta);

  const LossSpec& spec() const { return spec_; }
  LossKind kind() const { return spec_.kind; }
  double tau() const { return spec_.tau; }

  double value(double u) const;
  /// Sum of value() over the entries of u.
  double sum(VectorRef u) const;

  /// False only for the quantile check function.
  bool differentiable() const { return spec_.kind != LossKind::Quantile; }
  /// Throws NotApplicable for Quantile.
  double gradient(double u) const;
  /// Lipschitz constant of the gradient; throws NotApplicable for Quantile.
  double gradient_lipschitz() const;
  bool is_smooth_quantile() const {
    return spec_.kind == LossKind::SmoothQuantileC || spec_.kind == LossKind::SmoothQuantileKappa;
  }
  /// c or kappa for the smooth quantile losses, 0 otherwise.
  double smoothing_width() const;

  double prox(double mu, double v) const;
  void prox(double mu, VectorRef v, VectorMut out) const;

 private:
  LossSpec spec_;
};

double loss_value(const Loss& loss, double u);
double prox_loss(const Loss& loss, double mu, double v);
Vector prox_loss_vec(const Loss& loss, double mu, VectorRef v);

}  // namespace pipadmm
