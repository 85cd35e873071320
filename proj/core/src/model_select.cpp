#include "pipadmm/model_select.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "pipadmm/error.hpp"
#include "pipadmm/parallel.hpp"

namespace pipadmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Index count_support(VectorRef beta, double threshold) {
  Index s = 0;
  for (Index j = 0; j < beta.size(); ++j) s += std::abs(beta[j]) > threshold ? 1 : 0;
  return s;
}

bool all_zero(VectorRef beta, double threshold) { return count_support(beta, threshold) == 0; }

// Fits with a fixed eta, so repeated fits skip the power method.
class PathSolver {
 public:
  PathSolver(MatrixRef X, VectorRef y, const Loss& loss, const SolverConfig& cfg, Index workers)
      : X_(X), y_(y), loss_(loss), cfg_(cfg), workers_(workers) {
    const double mu = resolve_mu(loss, X.rows(), cfg);
    cfg_.mu = mu;
    if (workers_ > 1) {
      partition_ = partition_rows(X.rows(), workers_);
      bound_ = compute_eta_aggregate(partition_, X, mu, 1.0, cfg.power);
    } else if (!cfg.eta) {
      bound_ = spectral_bound(X, mu, cfg.power).value;
    }
  }

  FitResult fit(const Penalty& penalty, const std::optional<IterState>& init) const {
    SolverConfig cfg = cfg_;
    if (workers_ > 1) {
      ParallelOptions opts;
      opts.workers = workers_;
      opts.shard_etas = partition_.eta_m;
      return fit_parallel(X_, y_, loss_, penalty, cfg, opts, init);
    }
    if (!cfg.eta) {
      cfg.eta = auto_eta(bound_, penalty, cfg.eta_safety);
      cfg.verify_eta = false;
    }
    return fit_sequential(X_, y_, loss_, penalty, cfg, init);
  }

 private:
  MatrixRef X_;
  VectorRef y_;
  const Loss& loss_;
  SolverConfig cfg_;
  Index workers_;
  Partition partition_;
  double bound_ = 0.0;
};

}  // namespace

void validate(const TuneGrid& grid) {
  if (grid.lambda1_values.empty()) throw InvalidSpec("tune grid: lambda1 list is empty");
  if (grid.lambda2_values.empty()) throw InvalidSpec("tune grid: lambda2 list is empty");
  for (std::size_t i = 0; i < grid.lambda1_values.size(); ++i) {
    const double v = grid.lambda1_values[i];
    if (!(std::isfinite(v) && v > 0.0)) throw InvalidSpec("tune grid: lambda1 values must be positive");
    if (i > 0 && !(v < grid.lambda1_values[i - 1])) throw InvalidSpec("tune grid: lambda1 must be strictly descending");
  }
  for (double v : grid.lambda2_values) {
    if (!(std::isfinite(v) && v >= 0.0)) throw InvalidSpec("tune grid: lambda2 values must be >= 0");
  }
  if (grid.cn_rule == CnRule::Custom && !(std::isfinite(grid.cn_custom) && grid.cn_custom >= 0.0)) {
    throw InvalidSpec("tune grid: custom C_n must be >= 0");
  }
}

double cn_value(CnRule rule, double custom, Index p) {
  return rule == CnRule::SixLogP ? 6.0 * std::log(static_cast<double>(p)) : custom;
}

HbicValue hbic(double residual_loss_sum, Index support_size, Index n, Index p, CnRule rule, double cn_custom) {
  if (n < 3) throw InvalidSpec("hbic: n must be at least 3");
  if (p < 1) throw InvalidSpec("hbic: p must be positive");
  if (!(residual_loss_sum >= 0.0)) throw InvalidSpec("hbic: residual loss must be nonnegative");
  if (residual_loss_sum == 0.0) return {-kInf, true};
  const double nn = static_cast<double>(n);
  const double pen = static_cast<double>(support_size) * std::log(std::log(nn)) / nn * cn_value(rule, cn_custom, p);
  return {std::log(residual_loss_sum) + pen, false};
}

std::vector<Index> support_of(VectorRef beta, double threshold) {
  std::vector<Index> s;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta[j]) > threshold) s.push_back(j);
  }
  return s;
}

TuneResult tune(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template, const TuneGrid& grid,
                const SolverConfig& cfg, const TuneOptions& opts) {
  validate(grid);
  validate(cfg);
  const Index n = X.rows();
  const Index p = X.cols();
  const PathSolver solver(X, y, loss, cfg, opts.workers);

  TuneResult result;
  double best_hbic = kInf;
  double best_lambda1 = -kInf;
  bool found = false;
  for (double l2 : grid.lambda2_values) {
    std::optional<IterState> warm;
    for (double l1 : grid.lambda1_values) {
      PenaltySpec spec = penalty_template;
      spec.lambda1 = l1;
      spec.lambda2 = l2;
      const Penalty penalty(spec);
      TuneRow row;
      row.lambda1 = l1;
      row.lambda2 = l2;
      FitResult fit;
      try {
        fit = solver.fit(penalty, opts.warm_start ? warm : std::nullopt);
      } catch (const Diverged&) {
        row.diverged = true;
        row.hbic = kInf;
        result.table.push_back(row);
        warm.reset();
        continue;
      }
      const Vector resid = y - X * fit.beta;
      row.loss_sum = loss.sum(resid);
      row.support_size = count_support(fit.beta, opts.support_threshold);
      row.hbic = hbic(row.loss_sum, row.support_size, n, p, grid.cn_rule, grid.cn_custom).value;
      row.iterations = fit.iterations;
      row.stop_reason = fit.stop_reason;
      result.table.push_back(row);
      if (!found || row.hbic < best_hbic || (row.hbic == best_hbic && l1 > best_lambda1)) {
        found = true;
        best_hbic = row.hbic;
        best_lambda1 = l1;
        result.best = spec;
        result.best_index = result.table.size() - 1;
        result.fit = fit;
      }
      warm = std::move(fit.final_state);
    }
  }
  if (!found) throw TuneFailed("tune: every grid fit diverged");
  return result;
}

double lambda_max_kkt(MatrixRef X, VectorRef y, const Loss& loss, bool normalize_loss) {
  if (X.rows() != y.size()) throw DimensionMismatch("lambda_max: X and y row counts differ");
  Vector g(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (loss.differentiable()) {
      g[i] = loss.gradient(y[i]);
    } else {
      g[i] = loss.tau() - (y[i] < 0.0 ? 1.0 : 0.0);
    }
  }
  double lmax = (X.transpose() * g).lpNorm<Eigen::Infinity>();
  if (normalize_loss) lmax /= static_cast<double>(X.rows());
  return lmax;
}

double lambda_max(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template,
                  const SolverConfig& cfg, int bisection_steps, double support_threshold) {
  const PathSolver solver(X, y, loss, cfg, 1);
  auto zero_at = [&](double l1) {
    PenaltySpec spec = penalty_template;
    spec.lambda1 = l1;
    return all_zero(solver.fit(Penalty(spec), std::nullopt).beta, support_threshold);
  };
  double hi = lambda_max_kkt(X, y, loss, cfg.normalize_loss);
  if (!(hi > 0.0)) return 0.0;
  for (int i = 0; i < 20 && !zero_at(hi); ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (zero_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<double> log_grid(double lmax, int count, double ratio) {
  if (!(lmax > 0.0) || count < 1 || !(ratio > 0.0 && ratio <= 1.0)) {
    throw InvalidSpec("log_grid: need lmax > 0, count >= 1, 0 < ratio <= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {lmax};
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) out.push_back(lmax * std::exp(step * i));
  return out;
}

TuneGrid default_grid(MatrixRef X, VectorRef y, const Loss& loss, const PenaltySpec& penalty_template,
                      const SolverConfig& cfg) {
  TuneGrid grid;
  grid.lambda1_values = log_grid(lambda_max(X, y, loss, penalty_template, cfg));
  grid.lambda2_values = {0.0, 0.1, 1.0};
  return grid;
}

}  // namespace pipadmm
