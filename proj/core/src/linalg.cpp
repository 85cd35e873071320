#include "pipadmm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pipadmm/error.hpp"

namespace pipadmm {

void validate_design(MatrixRef X) {
  if (X.rows() < 1 || X.cols() < 1) throw InvalidSpec("design matrix must have at least one row and column");
  if (!X.allFinite()) throw InvalidSpec("design matrix contains nonfinite entries");
}

SpectralEstimate power_method_max_eig(const LinearOperator& apply, Index p, const PowerMethodOptions& opts) {
  if (p < 1) throw InvalidSpec("power method: dimension must be positive");
  if (!(opts.tol > 0.0)) throw InvalidSpec("power method: tol must be positive");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Vector v(p);
  for (Index j = 0; j < p; ++j) v[j] = normal(rng);
  v.normalize();

  Vector w(p);
  SpectralEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    apply(v, w);
    const double rho = v.dot(w);
    const double wn = w.norm();
    est.value = rho;
    est.iterations = it;
    if (wn == 0.0) {
      // v lies in the null space; A = 0 on a generic start.
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    // The residual test needs a spectral gap. With clustered top eigenvalues
    // the vector never settles but rho does, so a flat rho also counts.
    if ((w - rho * v).norm() <= opts.tol * rho || (it > 1 && std::abs(rho - prev) <= 1e-2 * opts.tol * rho)) {
      est.converged = true;
      return est;
    }
    prev = rho;
    v = w / wn;
  }
  return est;
}

double norm_product_bound(MatrixRef X, double mu) {
  const double col = X.cwiseAbs().colwise().sum().maxCoeff();
  const double row = X.cwiseAbs().rowwise().sum().maxCoeff();
  return mu * col * row;
}

double gram_row_sum_bound(MatrixRef X, double mu, Index max_dim) {
  const bool tall = X.rows() >= X.cols();
  const Index m = tall ? X.cols() : X.rows();
  if (m > max_dim) return std::numeric_limits<double>::infinity();
  // X^T X and X X^T share their nonzero spectrum; build the smaller one.
  const Matrix G = tall ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  return mu * G.cwiseAbs().rowwise().sum().maxCoeff();
}

double fallback_bound(MatrixRef X, double mu) { return std::min(norm_product_bound(X, mu), gram_row_sum_bound(X, mu)); }

SpectralEstimate spectral_bound(MatrixRef X, double mu, const PowerMethodOptions& opts) {
  if (!(mu > 0.0)) throw InvalidSpec("spectral_bound: mu must be positive");
  Vector tmp(X.rows());
  LinearOperator op = [&](const Vector& v, Vector& out) {
    tmp.noalias() = X * v;
    out.noalias() = X.transpose() * tmp;
    out *= mu;
  };
  SpectralEstimate est = power_method_max_eig(op, X.cols(), opts);
  if (!est.converged) {
    est.value = fallback_bound(X, mu);
    est.used_fallback = true;
  }
  return est;
}

Partition partition_rows(Index n, Index M, const std::vector<Index>& sizes) {
  if (n < 1) throw InvalidSpec("partition: n must be positive");
  if (M < 1 || M > n) {
    throw InvalidSpec("partition: need 1 <= M <= n, got M = " + std::to_string(M) + ", n = " + std::to_string(n));
  }
  Partition part;
  part.ranges.reserve(static_cast<std::size_t>(M));
  if (!sizes.empty()) {
    if (static_cast<Index>(sizes.size()) != M) throw InvalidSpec("partition: sizes list length differs from M");
    Index begin = 0;
    for (Index s : sizes) {
      if (s < 1) throw InvalidSpec("partition: every shard needs at least one row");
      part.ranges.push_back({begin, begin + s});
      begin += s;
    }
    if (begin != n) throw InvalidSpec("partition: sizes sum to " + std::to_string(begin) + ", expected " + std::to_string(n));
    return part;
  }
  const Index base = n / M;
  const Index extra = n % M;
  Index begin = 0;
  for (Index m = 0; m < M; ++m) {
    const Index s = base + (m < extra ? 1 : 0);
    part.ranges.push_back({begin, begin + s});
    begin += s;
  }
  return part;
}

Partition partition_rows(MatrixRef X, VectorRef y, Index M, const std::vector<Index>& sizes) {
  if (X.rows() != y.size()) {
    throw DimensionMismatch("partition: X has " + std::to_string(X.rows()) + " rows but y has " +
                            std::to_string(y.size()) + " entries");
  }
  return partition_rows(X.rows(), M, sizes);
}

void validate_partition(const Partition& partition, Index n) {
  if (partition.ranges.empty()) throw InvalidSpec("partition: no shards");
  Index expect = 0;
  for (const auto& r : partition.ranges) {
    if (r.begin != expect || r.size() < 1) throw InvalidSpec("partition: ranges must be contiguous and nonempty");
    expect = r.end;
  }
  if (expect != n) throw InvalidSpec("partition: ranges do not cover all rows");
  if (!partition.eta_m.empty() && partition.eta_m.size() != partition.ranges.size()) {
    throw InvalidSpec("partition: eta_m length differs from shard count");
  }
}

void fill_shard_etas(Partition& partition, MatrixRef X, double mu, const PowerMethodOptions& opts) {
  validate_partition(partition, X.rows());
  partition.eta_m.clear();
  for (const auto& r : partition.ranges) partition.eta_m.push_back(spectral_bound(shard_rows(X, r), mu, opts).value);
}

void shard_matvec(MatrixRef Xm, VectorRef v, VectorMut out) {
  if (Xm.cols() != v.size() || Xm.rows() != out.size()) throw DimensionMismatch("shard_matvec: dimension mismatch");
  out.noalias() = Xm * v;
}

void shard_matvec_t(MatrixRef Xm, VectorRef u, VectorMut out) {
  if (Xm.rows() != u.size() || Xm.cols() != out.size()) throw DimensionMismatch("shard_matvec_t: dimension mismatch");
  out.noalias() = Xm.transpose() * u;
}

Vector shard_matvec(MatrixRef Xm, VectorRef v) {
  Vector out(Xm.rows());
  shard_matvec(Xm, v, out);
  return out;
}

Vector shard_matvec_t(MatrixRef Xm, VectorRef u) {
  Vector out(Xm.cols());
  shard_matvec_t(Xm, u, out);
  return out;
}

}  // namespace pipadmm
