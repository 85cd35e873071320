#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls the closed forms under test.

#include <cstdint>
#include <functional>
#include <random>

#include "pipadmm/pipadmm.hpp"

namespace oracle {

using pipadmm::Index;
using pipadmm::Matrix;
using pipadmm::Vector;

struct MinResult {
  double argmin = 0.0;
  double value = 0.0;
  /// Second-best local minimum value (infinity when there is only one).
  double runner_up = 0.0;
};

/// Global minimizer of a scalar function on [lo, hi]: dense grid, then
/// golden-section refinement of the best few grid minima.
MinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi, int grid_points = 4000,
                          int refine = 4, double xtol = 1e-13);

/// Reference loss values written from the piecewise definitions.
double loss_value(const pipadmm::LossSpec& spec, double u);
/// Reference penalty p(|u|) including the ridge part, via numerical
/// integration of the derivative (Simpson on each smooth piece).
double penalty_value_integral(const pipadmm::PenaltySpec& spec, double u);
/// Closed-form penalty value written independently of the library.
double penalty_value(const pipadmm::PenaltySpec& spec, double u);

/// argmin_u L(u) + (mu / 2)(u - v)^2 by brute force.
MinResult prox_loss(const pipadmm::LossSpec& spec, double mu, double v, int grid_points = 4000);
/// argmin_u P(u) + (eta / 2)(u - v)^2 by brute force.
MinResult prox_penalty(const pipadmm::PenaltySpec& spec, double eta, double v, int grid_points = 4000);

/// Central difference derivative of the reference loss.
double loss_derivative_fd(const pipadmm::LossSpec& spec, double u, double h = 1e-6);

/// Largest eigenvalue of mu X^T X by a dense symmetric eigensolver.
double max_eig_dense(const Matrix& X, double mu);

/// L(r) + P(beta) - d^T (X beta + r - y) + mu/2 ||X beta + r - y||^2, summed term by term.
double lagrangian(const Matrix& X, const Vector& y, const pipadmm::LossSpec& loss, const pipadmm::PenaltySpec& pen,
                  const Vector& beta, const Vector& r, const Vector& d, double mu);

/// Random instance: X with iid N(0,1) entries, y = X b + noise.
struct Instance {
  Matrix X;
  Vector y;
};
Instance random_instance(Index n, Index p, std::uint64_t seed, double noise = 1.0, Index nonzeros = 5);

/// log-uniform draw on [lo, hi].
double log_uniform(std::mt19937_64& rng, double lo, double hi);

}  // namespace oracle
