#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pipadmm/types.hpp"

namespace pipadmm {

/// Throws InvalidSpec unless X has at least one row and column and only finite entries.
void validate_design(MatrixRef X);

struct PowerMethodOptions {
  double tol = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = 20240601;
};

struct SpectralEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set by spectral_bound when the power method did not converge and the
  /// norm-product bound was returned instead.
  bool used_fallback = false;
};

/// out = A v for a symmetric positive semidefinite A.
using LinearOperator = std::function<void(const Vector& v, Vector& out)>;

/// Largest eigenvalue of A by power iteration with Rayleigh-quotient estimates.
/// Stops once ||A v - rho v|| <= tol * rho, or once successive estimates differ
/// by at most 1e-2 * tol * rho (clustered top eigenvalues). On failure returns the last
/// estimate with converged = false.
SpectralEstimate power_method_max_eig(const LinearOperator& apply, Index p, const PowerMethodOptions& opts = {});

/// eigen(mu X^T X) by the power method, applied as X then X^T. Falls back to
/// fallback_bound when the iteration does not converge.
SpectralEstimate spectral_bound(MatrixRef X, double mu, const PowerMethodOptions& opts = {});

/// mu * ||X||_1 * ||X||_inf (max column abs sum times max row abs sum), an
/// upper bound on eigen(mu X^T X).
double norm_product_bound(MatrixRef X, double mu);

/// mu times the largest absolute row sum of the smaller of X^T X and X X^T
/// (Gershgorin). Infinity when that Gram matrix would exceed max_dim square.
double gram_row_sum_bound(MatrixRef X, double mu, Index max_dim = 4096);

/// The smaller of the two bounds above.
double fallback_bound(MatrixRef X, double mu);

struct RowRange {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
  bool operator==(const RowRange&) const = default;
};

struct Partition {
  std::vector<RowRange> ranges;
  /// Per-shard spectral bounds, empty until filled by the engine.
  std::vector<double> eta_m;

  Index shards() const { return static_cast<Index>(ranges.size()); }
  Index rows() const { return ranges.empty() ? 0 : ranges.back().end; }
};

/// Contiguous row blocks. Without sizes the split is as equal as possible,
/// with the remainder going to the leading blocks (n = 10, M = 3 gives 4, 3, 3).
Partition partition_rows(Index n, Index M, const std::vector<Index>& sizes = {});
Partition partition_rows(MatrixRef X, VectorRef y, Index M, const std::vector<Index>& sizes = {});

/// Throws InvalidSpec unless the ranges are sorted, nonempty and cover [0, n).
void validate_partition(const Partition& partition, Index n);

/// Fills partition.eta_m with eigen(mu X_m^T X_m) for every shard.
void fill_shard_etas(Partition& partition, MatrixRef X, double mu, const PowerMethodOptions& opts = {});

/// Views onto the rows of one shard (no copy).
inline MatrixRef shard_rows(MatrixRef X, const RowRange& r) { return MatrixRef(X.middleRows(r.begin, r.size())); }
inline VectorRef shard_rows(VectorRef v, const RowRange& r) { return VectorRef(v.segment(r.begin, r.size())); }

void shard_matvec(MatrixRef Xm, VectorRef v, VectorMut out);
void shard_matvec_t(MatrixRef Xm, VectorRef u, VectorMut out);
Vector shard_matvec(MatrixRef Xm, VectorRef v);
Vector shard_matvec_t(MatrixRef Xm, VectorRef u);

}  // namespace pipadmm
