#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "oracle.hpp"
#include "pipadmm/pipadmm.hpp"

using namespace pipadmm;

namespace {

SolverConfig traced(int max_iter = 300) {
  SolverConfig cfg;
  cfg.max_iter = max_iter;
  cfg.record_trace = true;
  return cfg;
}

}  // namespace

TEST_CASE("zero response is a fixed point") {
  const auto inst = oracle::random_instance(30, 8, 1);
  const Vector y = Vector::Zero(30);
  const auto fit = fit_sequential(inst.X, y, Loss::smooth_quantile_c(0.5, 0.1), Penalty::snet(3.7, 10, 0), {});
  CHECK(fit.beta.isZero(0));
  CHECK(fit.final_state.r.isZero(0));
  CHECK(fit.iterations <= 2);
  CHECK(fit.stop_reason == StopReason::Tolerance);
}

TEST_CASE("unpenalised least squares matches the normal equations") {
  const auto inst = oracle::random_instance(200, 10, 2);
  SolverConfig cfg;
  cfg.max_iter = 20000;
  cfg.tol = 1e-12;
  cfg.primal_tol = 1e-10;
  const auto fit = fit_sequential(inst.X, inst.y, Loss::least_squares(), Penalty::elastic_net(0, 0), cfg);
  const Vector ols = (inst.X.transpose() * inst.X).ldlt().solve(inst.X.transpose() * inst.y);
  CHECK((fit.beta - ols).norm() <= 1e-4 * ols.norm());
}

TEST_CASE("stopping rule arithmetic") {
  const Vector a = Vector::LinSpaced(4, 0, 1);
  CHECK(stopping_criterion(a, a, 1e-12));
  Vector z = Vector::Zero(2);
  Vector half(2);
  half << 0.3, 0.4;
  CHECK_FALSE(stopping_criterion(z, half, 1e-4));
  Vector b(1), c(1);
  b << 4.0;
  c << 4.0 - 2e-4;
  CHECK(stopping_criterion(c, b, 1e-4));
  CHECK_THROWS_AS(stopping_criterion(a, half, 1e-4), DimensionMismatch);
}

TEST_CASE("augmented Lagrangian") {
  const auto inst = oracle::random_instance(25, 6, 3);
  const Loss loss = Loss::smooth_quantile_kappa(0.3, 0.2);
  const Penalty pen = Penalty::mnet(3, 0.2, 0.1);
  const auto start = feasible_start(6, inst.y);
  CHECK(augmented_lagrangian(inst.X, inst.y, loss, pen, start, 2.0) == doctest::Approx(loss.sum(inst.y)));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  IterState s;
  s.beta = Vector::NullaryExpr(6, [&] { return g(rng); });
  s.r = Vector::NullaryExpr(25, [&] { return g(rng); });
  s.d = Vector::Zero(25);
  const Vector res = inst.X * s.beta + s.r - inst.y;
  const double obj = loss.sum(s.r) + pen.value(s.beta);
  CHECK(augmented_lagrangian(inst.X, inst.y, loss, pen, s, 1.5) == doctest::Approx(obj + 0.75 * res.squaredNorm()));

  s.d = Vector::NullaryExpr(25, [&] { return g(rng); });
  const double ref = oracle::lagrangian(inst.X, inst.y, loss.spec(), pen.spec(), s.beta, s.r, s.d, 1.5);
  CHECK(augmented_lagrangian(inst.X, inst.y, loss, pen, s, 1.5) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("descent certificate under the mu bound") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto inst = oracle::random_instance(120, 30, 50 + seed);
    const auto fit = fit_sequential(inst.X, inst.y, Loss::smooth_quantile_c(0.7, 0.1), Penalty::snet(3.7, 2, 0),
                                    traced());
    CHECK(fit.mu_used == doctest::Approx(1.05 * std::sqrt(240.0) / 0.1));
    CHECK(check_descent_certificate(fit).ok());
    // The trace agrees with an independent recomputation at the final state.
    const double ref = oracle::lagrangian(inst.X, inst.y, Loss::smooth_quantile_c(0.7, 0.1).spec(),
                                          Penalty::snet(3.7, 2, 0).spec(), fit.final_state.beta, fit.final_state.r,
                                          fit.final_state.d, fit.mu_used);
    CHECK(fit.trace.back().lagrangian == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("descent report contract") {
  std::vector<TraceEntry> flat(5);
  for (auto& e : flat) e.lagrangian = 3.0;
  CHECK(check_descent_certificate(flat).ok());
  std::vector<TraceEntry> up(3);
  up[0].lagrangian = 1.0;
  up[1].lagrangian = 2.0;
  up[2].lagrangian = 1.5;
  const auto rep = check_descent_certificate(up);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].iteration == 2);
  CHECK(rep.max_increase == doctest::Approx(1.0));
  CHECK(check_descent_certificate(up, 0.5).violations.size() == 2);

  // A tiny mu breaks the guarantee; the check still returns normally.
  const auto inst = oracle::random_instance(60, 10, 5);
  auto cfg = traced(100);
  cfg.mu = 0.01;
  const auto fit = fit_sequential(inst.X, inst.y, Loss::smooth_quantile_c(0.5, 0.1), Penalty::snet(3.7, 0.5, 0), cfg);
  CHECK_NOTHROW(check_descent_certificate(fit));
}

TEST_CASE("dual optimality after every iteration") {
  const auto inst = oracle::random_instance(80, 12, 6);
  for (const Loss& loss : {Loss::smooth_quantile_c(0.3, 0.2), Loss::smooth_quantile_kappa(0.6, 0.1),
                           Loss::least_squares(), Loss::huber(0.8)}) {
    const auto fit = fit_sequential(inst.X, inst.y, loss, Penalty::snet(3.7, 1, 0.1), traced(50));
    for (const auto& e : fit.trace) CHECK(e.dual_gap <= 1e-10);
    CHECK(check_dual_optimality(fit.final_state, loss) <= 1e-10);
  }
  const auto q = fit_sequential(inst.X, inst.y, Loss::quantile(0.5), Penalty::snet(3.7, 1, 0), traced(20));
  CHECK(std::isnan(q.trace.back().dual_gap));
  CHECK_THROWS_AS(check_dual_optimality(q.final_state, Loss::quantile(0.5)), NotApplicable);

  // Linear zone with d = tau.
  IterState s;
  s.r = Vector::Constant(4, 5.0);
  s.d = Vector::Constant(4, 0.7);
  CHECK(check_dual_optimality(s, Loss::smooth_quantile_c(0.7, 0.1)) == 0.0);

  // Mismatched d: the gap is the largest gradient error.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  s.r = Vector::NullaryExpr(10, [&] { return u(rng); });
  s.d = Vector::NullaryExpr(10, [&] { return u(rng); });
  const auto spec = Loss::smooth_quantile_kappa(0.4, 0.5).spec();
  double ref = 0;
  for (Index i = 0; i < 10; ++i) ref = std::max(ref, std::abs(oracle::loss_derivative_fd(spec, s.r[i]) - s.d[i]));
  CHECK(check_dual_optimality(s, Loss(spec)) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("dual update identity") {
  const auto inst = oracle::random_instance(40, 8, 9);
  const Loss loss = Loss::huber(1.0);
  const Penalty pen = Penalty::elastic_net(0.5, 0.2);
  SolverConfig cfg;
  cfg.max_iter = 7;
  cfg.tol = 1e-300;
  cfg.eta = 1.5 * oracle::max_eig_dense(inst.X, 1.0);
  const auto a = fit_sequential(inst.X, inst.y, loss, pen, cfg);
  cfg.max_iter = 8;
  const auto b = fit_sequential(inst.X, inst.y, loss, pen, cfg);
  // d^{k+1} = d^k - mu (X beta^{k+1} + r^{k+1} - y)
  const Vector expect = a.final_state.d - b.mu_used * (inst.X * b.beta + b.final_state.r - inst.y);
  CHECK((expect - b.final_state.d).lpNorm<Eigen::Infinity>() <= 1e-12);
  // Warm start from the 7-iteration state reproduces the 8th iteration.
  cfg.max_iter = 1;
  const auto c = fit_sequential(inst.X, inst.y, loss, pen, cfg, a.final_state);
  CHECK((c.beta - b.beta).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("mu and eta resolution") {
  const Loss sqc = Loss::smooth_quantile_c(0.5, 0.2);
  CHECK(mu_lower_bound(sqc, 50) == doctest::Approx(std::sqrt(100.0) / 0.2));
  CHECK(mu_lower_bound(sqc, 50, true) == doctest::Approx(std::sqrt(100.0) / 0.2 / 50));
  CHECK_THROWS_AS(mu_lower_bound(Loss::least_squares(), 50), NotApplicable);
  SolverConfig cfg;
  CHECK(resolve_mu(sqc, 50, cfg) == doctest::Approx(1.05 * 50));
  CHECK(resolve_mu(Loss::quantile(0.5), 50, cfg) == 1.0);
  cfg.normalize_loss = true;
  CHECK(resolve_mu(Loss::least_squares(), 50, cfg) == doctest::Approx(0.02));
  cfg.mu = 3.0;
  CHECK(resolve_mu(sqc, 50, cfg) == 3.0);

  CHECK(auto_eta(10, Penalty::snet(3.7, 1, 0), 1.01) == doctest::Approx(10.1));
  // Below the validity floor 1 / (a - 1) - lambda2 the floor wins.
  const double e = auto_eta(0.01, Penalty::snet(3, 1, 0), 1.01);
  CHECK(e > 0.5);
  CHECK(Penalty::snet(3, 1, 0).eta_valid(e));
  CHECK(Penalty::mnet(2, 1, 0).eta_valid(auto_eta(0.01, Penalty::mnet(2, 1, 0), 1.01)));
}

TEST_CASE("input errors") {
  const auto inst = oracle::random_instance(20, 4, 10);
  const Loss loss = Loss::least_squares();
  const Penalty pen = Penalty::snet(3.7, 0.1, 0);
  const Vector short_y = inst.y.head(19);
  CHECK_THROWS_AS(fit_sequential(inst.X, short_y, loss, pen, {}), DimensionMismatch);
  SolverConfig cfg;
  cfg.eta = 1e-6;
  CHECK_THROWS_AS(fit_sequential(inst.X, inst.y, loss, pen, cfg), EtaBelowSpectralBound);
  cfg = {};
  cfg.max_iter = 0;
  CHECK_THROWS_AS(fit_sequential(inst.X, inst.y, loss, pen, cfg), InvalidSpec);
  cfg = {};
  cfg.mu = -1;
  CHECK_THROWS_AS(fit_sequential(inst.X, inst.y, loss, pen, cfg), InvalidSpec);
  IterState bad = feasible_start(3, inst.y);
  CHECK_THROWS_AS(fit_sequential(inst.X, inst.y, loss, pen, {}, bad), DimensionMismatch);
  Vector nan_y = inst.y;
  nan_y[0] = std::nan("");
  CHECK_THROWS_AS(fit_sequential(inst.X, nan_y, loss, pen, {}), InvalidSpec);

  // An unverified eta far below the bound blows up and is reported.
  cfg = {};
  cfg.eta = 1e-3;
  cfg.verify_eta = false;
  cfg.max_iter = 5000;
  CHECK_THROWS_AS(fit_sequential(inst.X, inst.y, loss, Penalty::elastic_net(0, 0), cfg), Diverged);
}

TEST_CASE("primal residual shrinks by convergence") {
  for (Scenario s : {Scenario::HeteroQuantile, Scenario::ArCorrelated}) {
    const auto data = generate(ScenarioSpec::defaults(s, 300, 40, 3));
    const auto fit = fit_sequential(data.X, data.y, Loss::quantile(0.5), Penalty::snet(3.7, 5, 0),
                                    traced(2000));
    INFO("iterations ", fit.iterations, " residual ", fit.trace.back().primal_residual, " change ", fit.trace.back().beta_change);
    CHECK(fit.stop_reason == StopReason::Tolerance);
    CHECK(fit.trace.back().primal_residual <= 1e-3 * data.y.norm());
  }
}
