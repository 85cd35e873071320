#include "pipadmm/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Cholesky>
#include <boost/math/distributions/normal.hpp>

#include "pipadmm/error.hpp"
#include "pipadmm/parallel.hpp"

namespace pipadmm {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

Matrix correlated_gaussian(Index n, Index p, const Matrix* chol_upper, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix Z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
  }
  if (chol_upper == nullptr) return Z;
  // Rows z_i ~ N(0, I); x_i = L z_i, i.e. X = Z L^T.
  return Z * (*chol_upper);
}

Vector draw_errors(Index n, const ErrorDist& e, std::mt19937_64& rng) {
  Vector eps(n);
  if (e.kind == ErrorDist::Kind::Normal) {
    std::normal_distribution<double> dist(e.mu, e.sigma);
    for (Index i = 0; i < n; ++i) eps[i] = dist(rng);
  } else {
    std::lognormal_distribution<double> dist(e.mu, e.sigma);
    for (Index i = 0; i < n; ++i) eps[i] = dist(rng);
  }
  return eps;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::HeteroQuantile: return "hetero-quantile";
    case Scenario::HeteroQuadratic: return "hetero-quadratic";
    case Scenario::ArCorrelated: return "ar-correlated";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "HeteroQuantile" || name == "hetero-quantile") return Scenario::HeteroQuantile;
  if (name == "HeteroQuadratic" || name == "hetero-quadratic") return Scenario::HeteroQuadratic;
  if (name == "ArCorrelated" || name == "ar-correlated") return Scenario::ArCorrelated;
  throw InvalidSpec("unknown scenario '" + std::string(name) + "'");
}

ScenarioSpec ScenarioSpec::defaults(Scenario s, Index n, Index p, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = s;
  spec.n = n;
  spec.p = p;
  spec.seed = seed;
  switch (s) {
    case Scenario::HeteroQuantile: spec.error = {ErrorDist::Kind::Normal, 0.0, 1.0}; break;
    case Scenario::HeteroQuadratic: spec.error = {ErrorDist::Kind::Normal, 0.0, 1.5}; break;
    case Scenario::ArCorrelated: spec.error = {ErrorDist::Kind::Normal, 0.0, 5.0}; break;
  }
  return spec;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n < 1) throw InvalidSpec("scenario: n must be positive");
  if (spec.p < 20) throw InvalidSpec("scenario: p must be at least 20 for the fixed coefficient indices");
  if (!(spec.error.sigma > 0.0)) throw InvalidSpec("scenario: error sigma must be positive");
  if (!(spec.tau_eval > 0.0 && spec.tau_eval < 1.0)) throw InvalidSpec("scenario: tau_eval must lie in (0, 1)");
}

Matrix ar1_correlation(Index p, double rho) {
  Matrix S(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) S(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return S;
}

Dataset generate(const ScenarioSpec& spec) {
  validate(spec);
  const Index n = spec.n;
  const Index p = spec.p;
  std::mt19937_64 rng(spec.seed);
  Dataset out;
  out.true_beta = Vector::Zero(p);

  Matrix upper;
  const bool correlated = spec.scenario != Scenario::HeteroQuadratic;
  if (correlated) {
    const Matrix sigma = ar1_correlation(p);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    upper = llt.matrixU();
  }
  out.X = correlated_gaussian(n, p, correlated ? &upper : nullptr, rng);
  const Vector eps = draw_errors(n, spec.error, rng);

  switch (spec.scenario) {
    case Scenario::HeteroQuantile: {
      for (Index i = 0; i < n; ++i) out.X(i, 0) = std_normal_cdf(out.X(i, 0));
      for (Index j : {5, 11, 14, 19}) out.true_beta[j] = 1.0;
      out.y = out.X.col(5) + out.X.col(11) + out.X.col(14) + out.X.col(19) +
              0.7 * out.X.col(0).cwiseProduct(eps);
      // Conditional tau-quantile of 0.7 x1 eps is 0.7 q_tau(eps) x1 since x1 > 0.
      const double z = std_normal_quantile(spec.tau_eval);
      const double q = spec.error.kind == ErrorDist::Kind::Normal ? spec.error.mu + spec.error.sigma * z
                                                                  : std::exp(spec.error.mu + spec.error.sigma * z);
      out.true_beta[0] = 0.7 * q;
      out.true_support = {0, 5, 11, 14, 19};
      out.p1_indices = {0};
      out.p2_indices = {5, 11, 14, 19};
      break;
    }
    case Scenario::HeteroQuadratic: {
      const double b[] = {4, 3, 2, -2, -2, -2};
      for (Index j = 0; j < 6; ++j) out.true_beta[j] = b[j];
      const double c = std::sqrt(3.0) * out.true_beta.squaredNorm();
      const Vector xb = out.X * out.true_beta;
      out.y = xb + xb.cwiseProduct(xb).cwiseProduct(eps) / c;
      out.true_support = {0, 1, 2, 3, 4, 5};
      out.p2_indices = out.true_support;
      break;
    }
    case Scenario::ArCorrelated: {
      const double block[] = {3.0, -1.5, 1.0, 2.0};
      for (Index j = 0; j < 20; ++j) {
        out.true_beta[j] = block[j / 5];
        out.true_support.push_back(j);
      }
      out.y = out.X * out.true_beta + eps;
      out.p2_indices = out.true_support;
      break;
    }
  }
  return out;
}

MetricReport metrics(VectorRef fit_beta, VectorRef true_beta, const std::vector<Index>& true_support,
                     double threshold, const std::vector<Index>& p1_indices,
                     const std::vector<Index>& p2_indices) {
  if (fit_beta.size() != true_beta.size()) throw DimensionMismatch("metrics: coefficient lengths differ");
  const Index p = fit_beta.size();
  std::vector<bool> truth(static_cast<std::size_t>(p), false);
  for (Index j : true_support) {
    if (j < 0 || j >= p) throw InvalidSpec("metrics: support index out of range");
    truth[static_cast<std::size_t>(j)] = true;
  }
  MetricReport m;
  for (Index j = 0; j < p; ++j) {
    const bool sel = std::abs(fit_beta[j]) > threshold;
    m.Nonzero += sel ? 1 : 0;
    if (sel && !truth[static_cast<std::size_t>(j)]) ++m.FP;
    if (!sel && truth[static_cast<std::size_t>(j)]) ++m.FN;
  }
  auto selected = [&](const std::vector<Index>& idx) {
    return std::all_of(idx.begin(), idx.end(), [&](Index j) { return std::abs(fit_beta[j]) > threshold; });
  };
  m.P1 = selected(p1_indices);
  m.P2 = selected(p2_indices);
  m.AE = (fit_beta - true_beta).lpNorm<1>();
  return m;
}

MetricReport metrics(VectorRef fit_beta, const Dataset& data, double threshold) {
  return metrics(fit_beta, data.true_beta, data.true_support, threshold, data.p1_indices, data.p2_indices);
}

double prediction_error(VectorRef beta, MatrixRef X_test, VectorRef y_test) {
  if (X_test.rows() == 0) throw InvalidSpec("prediction_error: empty test set");
  if (X_test.cols() != beta.size() || X_test.rows() != y_test.size()) {
    throw DimensionMismatch("prediction_error: dimension mismatch");
  }
  return (y_test - X_test * beta).cwiseAbs().mean();
}

ReplicateResult run_replicate(const BenchSpec& spec, int replicate) {
  using Clock = std::chrono::steady_clock;
  ScenarioSpec sc = spec.scenario;
  sc.seed = spec.scenario.seed + static_cast<std::uint64_t>(replicate);
  if (spec.loss.kind != LossKind::LeastSquares && spec.loss.kind != LossKind::Huber) sc.tau_eval = spec.loss.tau;
  const Dataset data = generate(sc);
  const Loss loss(spec.loss);

  const auto t0 = Clock::now();
  TuneGrid grid;
  grid.lambda2_values = spec.lambda2_values;
  grid.cn_rule = spec.cn_rule;
  grid.cn_custom = spec.cn_custom;
  double lmax = 0.0;
  if (spec.lambda1_values.empty()) {
    lmax = spec.kkt_lambda_max ? lambda_max_kkt(data.X, data.y, loss, spec.cfg.normalize_loss)
                               : lambda_max(data.X, data.y, loss, spec.penalty, spec.cfg);
    grid.lambda1_values = log_grid(lmax, spec.grid_size, spec.grid_ratio);
  } else {
    grid.lambda1_values = spec.lambda1_values;
    lmax = grid.lambda1_values.front();
  }
  TuneOptions topts;
  topts.workers = spec.workers;
  topts.support_threshold = spec.support_threshold;
  const TuneResult tr = tune(data.X, data.y, loss, spec.penalty, grid, spec.cfg, topts);

  ReplicateResult out;
  out.replicate = replicate;
  out.seed = sc.seed;
  out.metrics = metrics(tr.fit.beta, data, spec.support_threshold);
  out.iterations = tr.fit.iterations;
  out.stop_reason = tr.fit.stop_reason;
  out.lambda1 = tr.best.lambda1;
  out.lambda2 = tr.best.lambda2;
  out.lambda_max = lmax;
  out.path_time = std::chrono::duration<double>(Clock::now() - t0).count();
  out.fit_time = tr.fit.wall_time_seconds;
  return out;
}

std::vector<ReplicateResult> run_bench(const BenchSpec& spec, const std::function<void(const ReplicateResult&)>& on_done) {
  if (spec.replications < 1) throw InvalidSpec("bench: replications must be >= 1");
  std::vector<ReplicateResult> results(static_cast<std::size_t>(spec.replications));
  const int T = resolve_thread_count(spec.replications, spec.max_threads);
  std::atomic<int> next{0};
  std::mutex done_mu;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= spec.replications) return;
      try {
        results[static_cast<std::size_t>(i)] = run_replicate(spec, i);
        if (on_done) {
          std::lock_guard lock(done_mu);
          on_done(results[static_cast<std::size_t>(i)]);
        }
      } catch (...) {
        std::lock_guard lock(done_mu);
        if (!failure) failure = std::current_exception();
        next = spec.replications;
      }
    }
  };
  if (T == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < T; ++t) threads.emplace_back(work);
    for (auto& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

BenchSummary summarize(const std::vector<ReplicateResult>& results) {
  BenchSummary s;
  s.replications = static_cast<int>(results.size());
  if (results.empty()) return s;
  const double R = static_cast<double>(results.size());
  for (const auto& r : results) {
    s.P1 += r.metrics.P1 ? 1.0 : 0.0;
    s.P2 += r.metrics.P2 ? 1.0 : 0.0;
    s.AE_mean += r.metrics.AE;
    s.FP_mean += static_cast<double>(r.metrics.FP);
    s.FN_mean += static_cast<double>(r.metrics.FN);
    s.Nonzero_mean += static_cast<double>(r.metrics.Nonzero);
    s.Ite_mean += r.iterations;
    s.Time_mean += r.path_time;
    s.exact_rate += (r.metrics.FP == 0 && r.metrics.FN == 0) ? 1.0 : 0.0;
    s.all_converged = s.all_converged && r.stop_reason == StopReason::Tolerance;
  }
  s.P1 *= 100.0 / R;
  s.P2 *= 100.0 / R;
  s.AE_mean /= R;
  s.FP_mean /= R;
  s.FN_mean /= R;
  s.Nonzero_mean /= R;
  s.Ite_mean /= R;
  s.Time_mean /= R;
  s.exact_rate /= R;
  double var = 0.0;
  for (const auto& r : results) var += (r.metrics.AE - s.AE_mean) * (r.metrics.AE - s.AE_mean);
  s.AE_sd = results.size() > 1 ? std::sqrt(var / (R - 1.0)) : 0.0;
  return s;
}

}  // namespace pipadmm
