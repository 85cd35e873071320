#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "pipadmm/pipadmm.hpp"

using namespace pipadmm;

TEST_CASE("generators are reproducible") {
  for (Scenario s : {Scenario::HeteroQuantile, Scenario::HeteroQuadratic, Scenario::ArCorrelated}) {
    const auto a = generate(ScenarioSpec::defaults(s, 50, 25, 9));
    const auto b = generate(ScenarioSpec::defaults(s, 50, 25, 9));
    const auto c = generate(ScenarioSpec::defaults(s, 50, 25, 10));
    CHECK((a.X.array() == b.X.array()).all());
    CHECK((a.y.array() == b.y.array()).all());
    CHECK_FALSE((a.y.array() == c.y.array()).all());
    CHECK(a.X.rows() == 50);
    CHECK(a.X.cols() == 25);
  }
  CHECK(parse_scenario("hetero-quadratic") == Scenario::HeteroQuadratic);
  CHECK(to_string(Scenario::ArCorrelated) == "ar-correlated");
  CHECK_THROWS_AS(parse_scenario("hetero"), InvalidSpec);
  CHECK_THROWS_AS(generate(ScenarioSpec::defaults(Scenario::HeteroQuantile, 50, 10, 1)), InvalidSpec);
}

TEST_CASE("truth layout") {
  auto spec = ScenarioSpec::defaults(Scenario::HeteroQuantile, 10, 30, 1);
  spec.tau_eval = 0.7;
  const auto d41 = generate(spec);
  CHECK(d41.true_support == std::vector<Index>{0, 5, 11, 14, 19});
  CHECK(d41.true_beta[5] == 1.0);
  CHECK(d41.true_beta[0] == doctest::Approx(0.7 * 0.52440051270804067));
  CHECK(d41.p1_indices == std::vector<Index>{0});
  CHECK(d41.p2_indices == std::vector<Index>{5, 11, 14, 19});

  const auto d43 = generate(ScenarioSpec::defaults(Scenario::ArCorrelated, 10, 40, 1));
  CHECK(d43.true_support.size() == 20);
  CHECK(d43.true_beta.head(20).cwiseAbs().minCoeff() > 0);
  CHECK(d43.true_beta.tail(20).isZero(0));
}

TEST_CASE("distributional checks at large n") {
  const Index n = 100000;
  const auto d41 = generate(ScenarioSpec::defaults(Scenario::HeteroQuantile, n, 20, 3));
  auto corr = [&](Index i, Index j) {
    const Vector a = d41.X.col(i).array() - d41.X.col(i).mean();
    const Vector b = d41.X.col(j).array() - d41.X.col(j).mean();
    return a.dot(b) / (a.norm() * b.norm());
  };
  for (Index lag = 1; lag <= 3; ++lag) {
    for (Index i = 2; i < 6; ++i) CHECK(std::abs(corr(i, i + lag) - std::pow(0.5, lag)) <= 0.01);
  }

  std::vector<double> u;
  u.reserve(n);
  for (Index i = 0; i < n; ++i) u.push_back(d41.X(i, 0));
  std::sort(u.begin(), u.end());
  CHECK(u.front() >= 0.0);
  CHECK(u.back() <= 1.0);
  double ks = 0;
  for (Index i = 0; i < n; ++i) {
    const double x = u[static_cast<std::size_t>(i)];
    ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - x), std::abs(static_cast<double>(i) / n - x)});
  }
  CHECK(ks < 0.01);

  const auto d42 = generate(ScenarioSpec::defaults(Scenario::HeteroQuadratic, n, 20, 4));
  const double c = std::sqrt(3.0) * d42.true_beta.squaredNorm();
  const Vector xb = d42.X * d42.true_beta;
  const double m = (xb.array().square() / c).square().mean();
  CHECK(std::abs(m - 1.0) <= 0.05);
}

TEST_CASE("metrics") {
  Vector truth = Vector::Zero(10);
  truth.head(5).setConstant(1.0);
  const std::vector<Index> sup{0, 1, 2, 3, 4};
  const auto same = metrics(truth, truth, sup);
  CHECK(same.AE == 0.0);
  CHECK(same.FP == 0);
  CHECK(same.FN == 0);
  CHECK(same.Nonzero == 5);

  const auto zero = metrics(Vector::Zero(10), truth, sup);
  CHECK(zero.FN == 5);
  CHECK(zero.FP == 0);
  CHECK(zero.Nonzero == 0);
  CHECK(zero.AE == doctest::Approx(5.0));

  Vector hand = truth;
  hand[4] = 0;
  hand[7] = 0.5;
  const auto h = metrics(hand, truth, sup, 1e-6, {0}, {1, 4});
  CHECK(h.FP == 1);
  CHECK(h.FN == 1);
  CHECK(h.P1);
  CHECK_FALSE(h.P2);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    const Vector a = Vector::NullaryExpr(10, [&] { return g(rng); });
    const Vector b = Vector::NullaryExpr(10, [&] { return g(rng); });
    const Vector z = Vector::NullaryExpr(10, [&] { return g(rng); });
    CHECK(metrics(a, a, sup).AE == 0.0);
    CHECK(metrics(a, z, sup).AE <= metrics(a, b, sup).AE + metrics(b, z, sup).AE + 1e-12);
  }
  CHECK_THROWS_AS(metrics(Vector::Zero(3), truth, sup), DimensionMismatch);
}

TEST_CASE("prediction error") {
  const auto inst = oracle::random_instance(30, 4, 2);
  const Vector beta = Vector::LinSpaced(4, -1, 1);
  const Vector yhat = inst.X * beta;
  CHECK(prediction_error(beta, inst.X, yhat) == doctest::Approx(0.0));
  CHECK(prediction_error(beta, inst.X, (yhat.array() + 1.0).matrix()) == doctest::Approx(1.0));
  double ref = 0;
  for (Index i = 0; i < 30; ++i) {
    double f = 0;
    for (Index j = 0; j < 4; ++j) f += inst.X(i, j) * beta[j];
    ref += std::abs(inst.y[i] - f);
  }
  CHECK(prediction_error(beta, inst.X, inst.y) == doctest::Approx(ref / 30));
  CHECK_THROWS_AS(prediction_error(beta, Matrix(0, 4), Vector(0)), InvalidSpec);
}

TEST_CASE("small benchmark run") {
  BenchSpec spec;
  spec.scenario = ScenarioSpec::defaults(Scenario::HeteroQuantile, 600, 20, 100);
  spec.replications = 3;
  spec.loss = LossSpec{.kind = LossKind::Quantile, .tau = 0.7};
  spec.penalty = PenaltySpec{.kind = PenaltyKind::Snet, .a = 3.7};
  spec.cfg.max_iter = 3000;
  spec.grid_size = 20;
  spec.kkt_lambda_max = true;
  int seen = 0;
  const auto results = run_bench(spec, [&](const ReplicateResult&) { ++seen; });
  REQUIRE(results.size() == 3);
  CHECK(seen == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(results[static_cast<std::size_t>(i)].replicate == i);
    CHECK(results[static_cast<std::size_t>(i)].seed == 100u + static_cast<unsigned>(i));
  }
  const auto again = run_replicate(spec, 1);
  CHECK(again.lambda1 == results[1].lambda1);
  CHECK(again.metrics.AE == results[1].metrics.AE);

  const auto sum = summarize(results);
  CHECK(sum.replications == 3);
  CHECK(sum.P2 == doctest::Approx(100.0));
  CHECK(sum.all_converged);
  double ae = 0;
  for (const auto& r : results) ae += r.metrics.AE;
  CHECK(sum.AE_mean == doctest::Approx(ae / 3));
}
