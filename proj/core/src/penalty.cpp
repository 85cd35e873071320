#include "pipadmm/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pipadmm/error.hpp"

namespace pipadmm {

namespace {

bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

double pos(double x) { return x > 0.0 ? x : 0.0; }

double with_sign_of(double magnitude, double v) { return v < 0.0 ? -magnitude : magnitude; }

void require_eta(double eta) {
  if (!(std::isfinite(eta) && eta > 0.0)) {
    throw InvalidSpec("prox_penalty: eta must be positive, got " + std::to_string(eta));
  }
}

}  // namespace

void validate(const PenaltySpec& spec) {
  if (!nonneg_finite(spec.lambda1)) throw InvalidSpec("penalty: lambda1 must be finite and >= 0");
  if (!nonneg_finite(spec.lambda2)) throw InvalidSpec("penalty: lambda2 must be finite and >= 0");
  const bool finite_a = std::isfinite(spec.a);
  switch (spec.kind) {
    case PenaltyKind::Snet:
      if (!finite_a || spec.a <= 2.0) throw InvalidSpec("penalty: Snet requires a > 2");
      break;
    case PenaltyKind::Mnet:
      if (!finite_a || spec.a <= 1.0) throw InvalidSpec("penalty: Mnet requires a > 1");
      break;
    case PenaltyKind::Cnet:
      if (!finite_a || spec.a <= 0.0) throw InvalidSpec("penalty: Cnet requires a > 0");
      break;
    case PenaltyKind::ElasticNet:
      break;
  }
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Snet: return "snet";
    case PenaltyKind::Mnet: return "mnet";
    case PenaltyKind::Cnet: return "cnet";
    case PenaltyKind::ElasticNet: return "enet";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "snet" || name == "Snet" || name == "scad") return PenaltyKind::Snet;
  if (name == "mnet" || name == "Mnet" || name == "mcp") return PenaltyKind::Mnet;
  if (name == "cnet" || name == "Cnet" || name == "capl1") return PenaltyKind::Cnet;
  if (name == "enet" || name == "elastic-net" || name == "ElasticNet" || name == "lasso")
    return PenaltyKind::ElasticNet;
  throw InvalidSpec("unknown penalty '" + std::string(name) + "'");
}

Penalty::Penalty(const PenaltySpec& spec) : spec_(spec) { validate(spec_); }

Penalty Penalty::snet(double a, double lambda1, double lambda2) {
  return Penalty(PenaltySpec{PenaltyKind::Snet, a, lambda1, lambda2});
}
Penalty Penalty::mnet(double a, double lambda1, double lambda2) {
  return Penalty(PenaltySpec{PenaltyKind::Mnet, a, lambda1, lambda2});
}
Penalty Penalty::cnet(double a, double lambda1, double lambda2) {
  return Penalty(PenaltySpec{PenaltyKind::Cnet, a, lambda1, lambda2});
}
Penalty Penalty::elastic_net(double lambda1, double lambda2) {
  return Penalty(PenaltySpec{PenaltyKind::ElasticNet, 1.0, lambda1, lambda2});
}

double Penalty::value(double u) const {
  const double t = std::abs(u);
  const double a = spec_.a;
  const double l1 = spec_.lambda1;
  double core = 0.0;
  switch (spec_.kind) {
    case PenaltyKind::Snet:
      if (t <= l1) {
        core = l1 * t;
      } else if (t <= a * l1) {
        core = (2.0 * a * l1 * t - t * t - l1 * l1) / (2.0 * (a - 1.0));
      } else {
        core = (a + 1.0) * l1 * l1 / 2.0;
      }
      break;
    case PenaltyKind::Mnet:
      core = t <= a * l1 ? l1 * t - t * t / (2.0 * a) : a * l1 * l1 / 2.0;
      break;
    case PenaltyKind::Cnet:
      core = l1 * std::min(t, a);
      break;
    case PenaltyKind::ElasticNet:
      core = l1 * t;
      break;
  }
  return core + 0.5 * spec_.lambda2 * t * t;
}

double Penalty::value(VectorRef beta) const {
  double s = 0.0;
  for (Index j = 0; j < beta.size(); ++j) s += value(beta[j]);
  return s;
}

bool Penalty::eta_valid(double eta) const {
  if (!(std::isfinite(eta) && eta > 0.0)) return false;
  switch (spec_.kind) {
    case PenaltyKind::Snet: return (spec_.a - 1.0) * (eta + spec_.lambda2) > 1.0;
    case PenaltyKind::Mnet: return spec_.a * (eta + spec_.lambda2) > 1.0;
    default: return true;
  }
}

void Penalty::check_eta(double eta) const {
  require_eta(eta);
  if (eta_valid(eta)) return;
  if (spec_.kind == PenaltyKind::Snet) {
    throw SnetConditionViolated("Snet prox requires (a - 1)(eta + lambda2) > 1; got a = " + std::to_string(spec_.a) +
                                ", eta = " + std::to_string(eta) + ", lambda2 = " + std::to_string(spec_.lambda2));
  }
  throw MnetConditionViolated("Mnet prox requires a (eta + lambda2) > 1; got a = " + std::to_string(spec_.a) +
                              ", eta = " + std::to_string(eta) + ", lambda2 = " + std::to_string(spec_.lambda2));
}

double Penalty::prox_unchecked(double eta, double v) const {
  const double t = std::abs(v);
  const double a = spec_.a;
  const double l1 = spec_.lambda1;
  const double l2 = spec_.lambda2;
  const double ridge = eta + l2;
  switch (spec_.kind) {
    case PenaltyKind::ElasticNet:
      return with_sign_of(pos(eta * t - l1) / ridge, v);

    case PenaltyKind::Snet:
      if (t <= l1 * (1.0 + ridge) / eta) return with_sign_of(pos(eta * t - l1) / ridge, v);
      if (t < a * l1 * ridge / eta) {
        return with_sign_of(pos((a - 1.0) * eta * t - a * l1) / ((a - 1.0) * ridge - 1.0), v);
      }
      return eta * v / ridge;

    case PenaltyKind::Mnet:
      if (t < a * l1 * ridge / eta) return with_sign_of(pos(a * eta * t - a * l1) / (a * ridge - 1.0), v);
      return eta * v / ridge;

    case PenaltyKind::Cnet: {
      // Nonconvex: compare the minimizer below the cap with the one above it.
      const double below = std::clamp(pos(eta * t - l1) / ridge, 0.0, a);
      const double above = std::max(eta * t / ridge, a);
      auto objective = [&](double u) {
        const double du = u - t;
        return l1 * std::min(u, a) + 0.5 * l2 * u * u + 0.5 * eta * du * du;
      };
      const double u = objective(above) <= objective(below) ? above : below;
      return with_sign_of(u, v);
    }
  }
  return v;
}

double Penalty::prox(double eta, double v) const {
  check_eta(eta);
  return prox_unchecked(eta, v);
}

void Penalty::prox(double eta, VectorRef v, VectorMut out) const {
  if (v.size() != out.size()) throw DimensionMismatch("prox_penalty_vec: output length differs from input");
  check_eta(eta);
  for (Index j = 0; j < v.size(); ++j) out[j] = prox_unchecked(eta, v[j]);
}

double penalty_value(const Penalty& penalty, VectorRef beta) { return penalty.value(beta); }

double prox_penalty(const Penalty& penalty, double eta, double v) { return penalty.prox(eta, v); }

Vector prox_penalty_vec(const Penalty& penalty, double eta, VectorRef v) {
  Vector out(v.size());
  penalty.prox(eta, v, out);
  return out;
}

}  // namespace pipadmm
