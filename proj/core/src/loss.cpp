#include "pipadmm/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pipadmm/error.hpp"

namespace pipadmm {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require_mu(double mu) {
  if (!positive_finite(mu)) throw InvalidSpec("prox_loss: mu must be positive, got " + std::to_string(mu));
}

}  // namespace

void validate(const LossSpec& spec) {
  if (!(spec.tau > 0.0 && spec.tau < 1.0)) {
    throw InvalidSpec("loss: tau must lie strictly inside (0, 1), got " + std::to_string(spec.tau));
  }
  switch (spec.kind) {
    case LossKind::SmoothQuantileC:
      if (!positive_finite(spec.c)) throw InvalidSpec("loss: smooth quantile width c must be positive");
      break;
    case LossKind::SmoothQuantileKappa:
      if (!positive_finite(spec.kappa)) throw InvalidSpec("loss: smooth quantile width kappa must be positive");
      break;
    case LossKind::Huber:
      if (!positive_finite(spec.huber_delta)) throw InvalidSpec("loss: huber delta must be positive");
      break;
    case LossKind::Quantile:
    case LossKind::LeastSquares:
      break;
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SmoothQuantileC: return "sqc";
    case LossKind::SmoothQuantileKappa: return "sqk";
    case LossKind::Quantile: return "quantile";
    case LossKind::LeastSquares: return "ls";
    case LossKind::Huber: return "huber";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "sqc" || name == "smooth-quantile-c" || name == "SmoothQuantileC") return LossKind::SmoothQuantileC;
  if (name == "sqk" || name == "smooth-quantile-kappa" || name == "SmoothQuantileKappa")
    return LossKind::SmoothQuantileKappa;
  if (name == "quantile" || name == "Quantile") return LossKind::Quantile;
  if (name == "ls" || name == "least-squares" || name == "LeastSquares") return LossKind::LeastSquares;
  if (name == "huber" || name == "Huber") return LossKind::Huber;
  throw InvalidSpec("unknown loss '" + std::string(name) + "'");
}

Loss::Loss(const LossSpec& spec) : spec_(spec) { validate(spec_); }

Loss Loss::smooth_quantile_c(double tau, double c) {
  return Loss(LossSpec{.kind = LossKind::SmoothQuantileC, .tau = tau, .c = c});
}
Loss Loss::smooth_quantile_kappa(double tau, double kappa) {
  return Loss(LossSpec{.kind = LossKind::SmoothQuantileKappa, .tau = tau, .kappa = kappa});
}
Loss Loss::quantile(double tau) { return Loss(LossSpec{.kind = LossKind::Quantile, .tau = tau}); }
Loss Loss::least_squares() { return Loss(LossSpec{.kind = LossKind::LeastSquares}); }
Loss Loss::huber(double delta) { return Loss(LossSpec{.kind = LossKind::Huber, .huber_delta = delta}); }

double Loss::value(double u) const {
  const double tau = spec_.tau;
  switch (spec_.kind) {
    case LossKind::SmoothQuantileC: {
      const double c = spec_.c;
      if (u >= c) return tau * (u - 0.5 * c);
      if (u >= 0.0) return tau * u * u / (2.0 * c);
      if (u >= -c) return (1.0 - tau) * u * u / (2.0 * c);
      return (tau - 1.0) * (u + 0.5 * c);
    }
    case LossKind::SmoothQuantileKappa: {
      const double k = spec_.kappa;
      if (u > tau * k) return tau * (u - tau * k / 2.0);
      if (u >= (tau - 1.0) * k) return u * u / (2.0 * k);
      return (tau - 1.0) * (u - (tau - 1.0) * k / 2.0);
    }
    case LossKind::Quantile:
      return u * (tau - (u < 0.0 ? 1.0 : 0.0));
    case LossKind::LeastSquares:
      return 0.5 * u * u;
    case LossKind::Huber: {
      const double delta = spec_.huber_delta;
      const double a = std::abs(u);
      return a <= delta ? 0.5 * u * u : delta * a - 0.5 * delta * delta;
    }
  }
  return 0.0;
}

double Loss::sum(VectorRef u) const {
  double s = 0.0;
  for (Index i = 0; i < u.size(); ++i) s += value(u[i]);
  return s;
}

double Loss::gradient(double u) const {
  const double tau = spec_.tau;
  switch (spec_.kind) {
    case LossKind::SmoothQuantileC: {
      const double c = spec_.c;
      if (u >= c) return tau;
      if (u >= 0.0) return tau * u / c;
      if (u >= -c) return (1.0 - tau) * u / c;
      return tau - 1.0;
    }
    case LossKind::SmoothQuantileKappa: {
      const double k = spec_.kappa;
      if (u > tau * k) return tau;
      if (u >= (tau - 1.0) * k) return u / k;
      return tau - 1.0;
    }
    case LossKind::LeastSquares:
      return u;
    case LossKind::Huber:
      return std::clamp(u, -spec_.huber_delta, spec_.huber_delta);
    case LossKind::Quantile:
      break;
  }
  throw NotApplicable("gradient: the quantile check function is not differentiable");
}

double Loss::gradient_lipschitz() const {
  switch (spec_.kind) {
    case LossKind::SmoothQuantileC: return std::max(spec_.tau, 1.0 - spec_.tau) / spec_.c;
    case LossKind::SmoothQuantileKappa: return 1.0 / spec_.kappa;
    case LossKind::LeastSquares:
    case LossKind::Huber: return 1.0;
    case LossKind::Quantile: break;
  }
  throw NotApplicable("gradient_lipschitz: the quantile check function has no Lipschitz gradient");
}

double Loss::smoothing_width() const {
  switch (spec_.kind) {
    case LossKind::SmoothQuantileC: return spec_.c;
    case LossKind::SmoothQuantileKappa: return spec_.kappa;
    default: return 0.0;
  }
}

double Loss::prox(double mu, double v) const {
  require_mu(mu);
  const double tau = spec_.tau;
  switch (spec_.kind) {
    case LossKind::SmoothQuantileC: {
      const double c = spec_.c;
      if (v >= c + tau / mu) return v - tau / mu;
      if (v >= 0.0) return c * mu * v / (c * mu + tau);
      if (v >= -c + (tau - 1.0) / mu) return c * mu * v / (c * mu + 1.0 - tau);
      return v - (tau - 1.0) / mu;
    }
    case LossKind::SmoothQuantileKappa: {
      const double k = spec_.kappa;
      if (v >= tau * k + tau / mu) return v - tau / mu;
      if (v >= (tau - 1.0) * k + (tau - 1.0) / mu) return k * mu * v / (k * mu + 1.0);
      return v - (tau - 1.0) / mu;
    }
    case LossKind::Quantile: {
      if (v >= tau / mu) return v - tau / mu;
      if (v >= (tau - 1.0) / mu) return 0.0;
      return v - (tau - 1.0) / mu;
    }
    case LossKind::LeastSquares:
      return mu * v / (mu + 1.0);
    case LossKind::Huber: {
      const double delta = spec_.huber_delta;
      if (std::abs(v) <= delta * (1.0 + mu) / mu) return mu * v / (mu + 1.0);
      return v > 0.0 ? v - delta / mu : v + delta / mu;
    }
  }
  return v;
}

void Loss::prox(double mu, VectorRef v, VectorMut out) const {
  if (v.size() != out.size()) throw DimensionMismatch("prox_loss_vec: output length differs from input");
  require_mu(mu);
  for (Index i = 0; i < v.size(); ++i) out[i] = prox(mu, v[i]);
}

double loss_value(const Loss& loss, double u) { return loss.value(u); }

double prox_loss(const Loss& loss, double mu, double v) { return loss.prox(mu, v); }

Vector prox_loss_vec(const Loss& loss, double mu, VectorRef v) {
  Vector out(v.size());
  loss.prox(mu, v, out);
  return out;
}

}  // namespace pipadmm
