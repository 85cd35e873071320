#pragma once

#include <string_view>

#include "pipadmm/types.hpp"

namespace pipadmm {

enum class PenaltyKind {
  Snet,        // SCAD + ridge
  Mnet,        // MCP + ridge
  Cnet,        // capped L1 + ridge
  ElasticNet,  // L1 + ridge
};

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Snet;
  double a = 3.7;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Throws InvalidSpec for a out of range (a > 2 Snet, a > 1 Mnet, a > 0 Cnet)
/// or negative lambdas.
void validate(const PenaltySpec& spec);

std::string_view to_string(PenaltyKind kind);
/// Accepts "snet", "mnet", "cnet", "enet" / "elastic-net" and the enum spellings.
PenaltyKind parse_penalty_kind(std::string_view name);

/// Validated separable penalty P(beta) = sum_j p(|beta_j|) + (lambda2 / 2)||beta||^2
/// with the proximal map
///
///   prox_{eta, P}(v) = argmin_u  P(u) + (eta / 2)(u - v)^2.
class Penalty {
 public:
  explicit Penalty(const PenaltySpec& spec);

  static Penalty snet(double a, double lambda1, double lambda2);
  static Penalty mnet(double a, double lambda1, double lambda2);
  static Penalty cnet(double a, double lambda1, double lambda2);
  static Penalty elastic_net(double lambda1, double lambda2);

  const PenaltySpec& spec() const { return spec_; }
  PenaltyKind kind() const { return spec_.kind; }

  /// Scalar penalty including the ridge part.
  double value(double t) const;
  double value(VectorRef beta) const;

  /// Throws SnetConditionViolated / MnetConditionViolated when the closed form
  /// is not valid for this eta. Solvers call it once per fit.
  void check_eta(double eta) const;
  bool eta_valid(double eta) const;

  /// Checks eta on every call.
  double prox(double eta, double v) const;
  void prox(double eta, VectorRef v, VectorMut out) const;

  /// Same as prox but assumes check_eta(eta) already passed.
  double prox_unchecked(double eta, double v) const;

 private:
  PenaltySpec spec_;
};

double penalty_value(const Penalty& penalty, VectorRef beta);
double prox_penalty(const Penalty& penalty, double eta, double v);
Vector prox_penalty_vec(const Penalty& penalty, double eta, VectorRef v);

}  // namespace pipadmm
