#include <cmath>
#include <random>
#include <utility>

#include "doctest.h"
#include "oracle.hpp"
#include "pipadmm/pipadmm.hpp"

using namespace pipadmm;

TEST_CASE("power method on known spectra") {
  const Matrix I = Matrix::Identity(5, 5);
  CHECK(spectral_bound(I, 2.0).value == doctest::Approx(2.0).epsilon(1e-6));

  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1, 2, 3;
  const auto est = spectral_bound(D, 1.0);
  CHECK(est.value == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(est.converged);
  CHECK_FALSE(est.used_fallback);

  const auto inst = oracle::random_instance(50, 20, 3);
  const double ref = oracle::max_eig_dense(inst.X, 1.5);
  CHECK(spectral_bound(inst.X, 1.5).value == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("power method is insensitive to its start vector") {
  const auto inst = oracle::random_instance(80, 30, 4);
  const double ref = oracle::max_eig_dense(inst.X, 1.0);
  for (std::uint64_t seed : {1u, 2u, 99u, 12345u}) {
    PowerMethodOptions o;
    o.seed = seed;
    CHECK(spectral_bound(inst.X, 1.0, o).value == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("power method falls back when it cannot converge") {
  const auto inst = oracle::random_instance(40, 15, 8);
  PowerMethodOptions o;
  o.max_iter = 1;
  const auto est = spectral_bound(inst.X, 1.0, o);
  CHECK(est.used_fallback);
  CHECK(est.value == doctest::Approx(fallback_bound(inst.X, 1.0)));
  CHECK(est.value >= oracle::max_eig_dense(inst.X, 1.0));

  // A zero operator has eigenvalue zero.
  const auto zero = power_method_max_eig([](const Vector& v, Vector& out) { out = Vector::Zero(v.size()); }, 4);
  CHECK(zero.value == 0.0);
}

TEST_CASE("fallback bounds dominate the spectrum") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    for (auto [n, p] : {std::pair<Index, Index>{30, 12}, {12, 30}}) {
      const auto inst = oracle::random_instance(n, p, 100 + s);
      const double top = oracle::max_eig_dense(inst.X, 2.0);
      CHECK(norm_product_bound(inst.X, 2.0) >= top);
      CHECK(gram_row_sum_bound(inst.X, 2.0) >= top * (1 - 1e-12));
      CHECK(fallback_bound(inst.X, 2.0) <= norm_product_bound(inst.X, 2.0));
    }
  }
  const auto inst = oracle::random_instance(30, 12, 7);
  CHECK(std::isinf(gram_row_sum_bound(inst.X, 1.0, 5)));
  CHECK(fallback_bound(Matrix::Identity(4, 4), 3.0) == doctest::Approx(3.0));
}

TEST_CASE("partition rules") {
  const auto one = partition_rows(10, 1);
  REQUIRE(one.shards() == 1);
  CHECK(one.ranges[0] == RowRange{0, 10});

  const auto three = partition_rows(10, 3);
  REQUIRE(three.shards() == 3);
  CHECK(three.ranges[0].size() == 4);
  CHECK(three.ranges[1].size() == 3);
  CHECK(three.ranges[2].size() == 3);
  CHECK(three.rows() == 10);

  const auto seven = partition_rows(7, 7);
  for (Index m = 0; m < 7; ++m) CHECK(seven.ranges[static_cast<std::size_t>(m)] == RowRange{m, m + 1});

  const auto custom = partition_rows(10, 3, {2, 5, 3});
  CHECK(custom.ranges[1] == RowRange{2, 7});

  CHECK_THROWS_AS(partition_rows(5, 6), InvalidSpec);
  CHECK_THROWS_AS(partition_rows(5, 0), InvalidSpec);
  CHECK_THROWS_AS(partition_rows(10, 2, {4, 5}), InvalidSpec);
  CHECK_THROWS_AS(partition_rows(10, 2, {10, 0}), InvalidSpec);

  const Matrix X = Matrix::Ones(6, 2);
  const Vector y = Vector::Ones(5);
  CHECK_THROWS_AS(partition_rows(X, y, 2), DimensionMismatch);
}

TEST_CASE("shard products") {
  Vector v(3);
  v << 1, -2, 4;
  CHECK(shard_matvec(Matrix::Identity(3, 3), v) == v);
  const Matrix ones = Matrix::Ones(2, 3);
  const Vector w = shard_matvec(ones, Vector::Ones(3));
  CHECK(w[0] == 3.0);
  CHECK(w[1] == 3.0);

  const auto inst = oracle::random_instance(40, 10, 21);
  const auto part = partition_rows(40, 3);
  Vector b = Vector::LinSpaced(10, -1, 1);
  const Vector xb = inst.X * b;
  Vector u = Vector::LinSpaced(40, 0, 2);
  Vector xtu = Vector::Zero(10);
  for (const auto& r : part.ranges) {
    const Vector local = shard_matvec(shard_rows(MatrixRef(inst.X), r), b);
    CHECK((local - xb.segment(r.begin, r.size())).lpNorm<Eigen::Infinity>() <= 1e-14);
    xtu += shard_matvec_t(shard_rows(MatrixRef(inst.X), r), shard_rows(VectorRef(u), r));
  }
  const Vector ref = inst.X.transpose() * u;
  CHECK((xtu - ref).lpNorm<Eigen::Infinity>() <= 1e-12);

  Vector short_out(2);
  CHECK_THROWS_AS(shard_matvec(ones, Vector::Ones(2), short_out), DimensionMismatch);
}

TEST_CASE("shard bounds dominate the global bound") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto inst = oracle::random_instance(60, 15, 300 + s);
    for (Index M : {1, 2, 5}) {
      auto part = partition_rows(60, M);
      fill_shard_etas(part, inst.X, 1.3);
      double sum = 0;
      for (double e : part.eta_m) sum += e;
      CHECK(sum >= oracle::max_eig_dense(inst.X, 1.3) * (1 - 1e-6));
    }
  }
}

TEST_CASE("design validation") {
  Matrix X = Matrix::Ones(3, 2);
  CHECK_NOTHROW(validate_design(X));
  X(1, 1) = std::nan("");
  CHECK_THROWS_AS(validate_design(X), InvalidSpec);
  CHECK_THROWS_AS(validate_design(Matrix(0, 2)), InvalidSpec);
}
