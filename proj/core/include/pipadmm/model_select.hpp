#pragma once

#include <vector>

#include "pipadmm/ladmm.hpp"
#include "pipadmm/loss.hpp"
#include "pipadmm/penalty.hpp"

namespace pipadmm {

enum class CnRule { SixLogP, Custom };

struct TuneGrid {
  /// Strictly descending, positive.
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values{0.0};
  CnRule cn_rule = CnRule::SixLogP;
  /// C_n under CnRule::Custom.
  double cn_custom = 0.0;
};

void validate(const TuneGrid& grid);

double cn_value(CnRule rule, double custom, Index p);

struct HbicValue {
  double value = 0.0;
  /// Residual loss was exactly zero; value is -infinity.
  bool perfect_fit = false;
};

/// log(sum L(y_i - x_i^T beta)) + |S| (log log n / n) C_n. Requires n >= 3 and
/// a nonnegative residual loss.
HbicValue hbic(double residual_loss_sum, Index support_size, Index n, Index p, CnRule rule = CnRule::SixLogP,
               double cn_custom = 0.0);

/// Indices with |beta_j| > threshold.
std::vector<Index> support_of(VectorRef beta, double threshold = 1e-6);

struct TuneRow {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double hbic = 0.0;
  double loss_sum = 0.0;
  Index support_size = 0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  bool diverged = false;
};

struct TuneOptions {
  /// Row shards; 1 uses fit_sequential.
  Index workers = 1;
  double support_threshold = 1e-6;
  /// Reuse the previous solution along each lambda1 path.
  bool warm_start = true;
};

struct TuneResult {
  PenaltySpec best;
  FitResult fit;
  std::vector<TuneRow> table;
  std::size_t best_index = 0;
};

/// Fits every grid point and returns the HBIC minimizer. Ties go to the
/// larger lambda1, then to the earlier lambda2. Throws TuneFailed when every
/// fit diverges.
TuneResult tune(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template, const TuneGrid& grid,
                const SolverConfig& cfg, const TuneOptions& opts = {});

/// sup-norm of X^T grad L(y) (or its subgradient for the quantile loss): the
/// smallest lambda1 for which beta = 0 satisfies the first-order conditions.
double lambda_max_kkt(MatrixRef X, VectorRef y, const Loss& loss, bool normalize_loss = false);

/// Smallest lambda1 whose fit is all zero, found by bisection below the KKT
/// value (which is checked and enlarged when needed).
double lambda_max(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template,
                  const SolverConfig& cfg, int bisection_steps = 8, double support_threshold = 1e-6);

/// `count` log-spaced values from lmax down to ratio * lmax.
std::vector<double> log_grid(double lmax, int count = 50, double ratio = 0.01);

/// 50 log-spaced lambda1 values from the empirical lambda_max to 1% of it and
/// lambda2 in {0, 0.1, 1}.
TuneGrid default_grid(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template,
                      const SolverConfig& cfg);

}  // namespace pipadmm
