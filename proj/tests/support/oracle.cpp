#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

namespace oracle {

using pipadmm::LossKind;
using pipadmm::LossSpec;
using pipadmm::PenaltyKind;
using pipadmm::PenaltySpec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> golden(const std::function<double(double)>& f, double a, double b, double xtol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > xtol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = fc <= fd ? c : d;
  return {x, std::min(fc, fd)};
}

// Integral of a piecewise-linear derivative over [0, t] by Simpson on pieces.
double integrate(const std::function<double(double)>& df, const std::vector<double>& knots, double t) {
  double total = 0.0;
  double a = 0.0;
  std::vector<double> ends;
  for (double k : knots) {
    if (k > 0.0 && k < t) ends.push_back(k);
  }
  std::sort(ends.begin(), ends.end());
  ends.push_back(t);
  for (double b : ends) {
    if (b <= a) continue;
    // Evaluate strictly inside the piece so the one-sided values are used.
    const double e = 1e-15 * (b - a);
    total += (b - a) / 6.0 * (df(a + e) + 4.0 * df(0.5 * (a + b)) + df(b - e));
    a = b;
  }
  return total;
}

}  // namespace

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

MinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi, int grid_points, int refine,
                          double xtol) {
  const int N = grid_points;
  const double h = (hi - lo) / N;
  std::vector<double> vals(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i) vals[static_cast<std::size_t>(i)] = f(lo + h * i);
  // Candidate brackets around grid local minima.
  std::vector<std::pair<double, int>> cands;
  for (int i = 0; i <= N; ++i) {
    const double fi = vals[static_cast<std::size_t>(i)];
    const bool left = i == 0 || fi <= vals[static_cast<std::size_t>(i - 1)];
    const bool right = i == N || fi <= vals[static_cast<std::size_t>(i + 1)];
    if (left && right) cands.emplace_back(fi, i);
  }
  std::sort(cands.begin(), cands.end());
  MinResult best{0.0, kInf, kInf};
  std::vector<double> minima;
  const int K = std::min<int>(refine, static_cast<int>(cands.size()));
  for (int c = 0; c < K; ++c) {
    const int i = cands[static_cast<std::size_t>(c)].second;
    const double a = lo + h * std::max(0, i - 1);
    const double b = lo + h * std::min(N, i + 1);
    auto [x, fx] = golden(f, a, b, xtol);
    // Kinks at the bracket ends or at 0 can beat the interior estimate.
    for (double e : {a, b, lo + h * i}) {
      const double fe = f(e);
      if (fe < fx) {
        x = e;
        fx = fe;
      }
    }
    minima.push_back(fx);
    if (fx < best.value) {
      best.argmin = x;
      best.value = fx;
    }
  }
  std::sort(minima.begin(), minima.end());
  // Count distinct local minima only (adjacent grid cells can share one).
  best.runner_up = kInf;
  for (double m : minima) {
    if (m > best.value + 1e-14 * (1.0 + std::abs(best.value))) {
      best.runner_up = m;
      break;
    }
  }
  return best;
}

double loss_value(const LossSpec& s, double u) {
  const double tau = s.tau;
  switch (s.kind) {
    case LossKind::SmoothQuantileC: {
      const double c = s.c;
      if (u < -c) return (tau - 1.0) * u - (1.0 - tau) * c / 2.0;
      if (u < 0.0) return (1.0 - tau) * u * u / (2.0 * c);
      if (u < c) return tau * u * u / (2.0 * c);
      return tau * u - tau * c / 2.0;
    }
    case LossKind::SmoothQuantileKappa: {
      const double k = s.kappa;
      const double hi = tau * k;
      const double lo = (tau - 1.0) * k;
      if (u > hi) return tau * u - tau * tau * k / 2.0;
      if (u < lo) return (tau - 1.0) * u - (tau - 1.0) * (tau - 1.0) * k / 2.0;
      return u * u / (2.0 * k);
    }
    case LossKind::Quantile:
      return u >= 0.0 ? tau * u : (tau - 1.0) * u;
    case LossKind::LeastSquares:
      return u * u / 2.0;
    case LossKind::Huber: {
      const double dl = s.huber_delta;
      return std::abs(u) <= dl ? u * u / 2.0 : dl * (std::abs(u) - dl / 2.0);
    }
  }
  return 0.0;
}

double penalty_value(const PenaltySpec& s, double u) {
  const double t = std::abs(u);
  const double a = s.a;
  const double l = s.lambda1;
  double core = 0.0;
  switch (s.kind) {
    case PenaltyKind::Snet:
      if (t <= l) core = l * t;
      else if (t <= a * l) core = -(t * t - 2.0 * a * l * t + l * l) / (2.0 * (a - 1.0));
      else core = (a + 1.0) * l * l / 2.0;
      break;
    case PenaltyKind::Mnet:
      core = t <= a * l ? l * t - t * t / (2.0 * a) : a * l * l / 2.0;
      break;
    case PenaltyKind::Cnet:
      core = t < a ? l * t : l * a;
      break;
    case PenaltyKind::ElasticNet:
      core = l * t;
      break;
  }
  return core + s.lambda2 * t * t / 2.0;
}

double penalty_value_integral(const PenaltySpec& s, double u) {
  const double t = std::abs(u);
  const double a = s.a;
  const double l = s.lambda1;
  std::function<double(double)> df;
  std::vector<double> knots;
  switch (s.kind) {
    case PenaltyKind::Snet:
      df = [=](double x) { return x <= l ? l : std::max(a * l - x, 0.0) / (a - 1.0); };
      knots = {l, a * l};
      break;
    case PenaltyKind::Mnet:
      df = [=](double x) { return std::max(l - x / a, 0.0); };
      knots = {a * l};
      break;
    case PenaltyKind::Cnet:
      df = [=](double x) { return x < a ? l : 0.0; };
      knots = {a};
      break;
    case PenaltyKind::ElasticNet:
      df = [=](double) { return l; };
      break;
  }
  const double l2 = s.lambda2;
  auto full = [&](double x) { return df(x) + l2 * x; };
  return integrate(full, knots, t);
}

MinResult prox_loss(const LossSpec& spec, double mu, double v, int grid_points) {
  const double reach = std::abs(v) + (1.0 + spec.huber_delta + spec.c + spec.kappa) / mu + 1.0;
  auto f = [&](double u) { return loss_value(spec, u) + 0.5 * mu * (u - v) * (u - v); };
  return minimize_scalar(f, -reach, reach, grid_points);
}

MinResult prox_penalty(const PenaltySpec& spec, double eta, double v, int grid_points) {
  const double reach = std::abs(v) + 1.0;
  auto f = [&](double u) { return penalty_value(spec, u) + 0.5 * eta * (u - v) * (u - v); };
  return minimize_scalar(f, -reach, reach, grid_points);
}

double loss_derivative_fd(const LossSpec& spec, double u, double h) {
  return (loss_value(spec, u + h) - loss_value(spec, u - h)) / (2.0 * h);
}

double max_eig_dense(const Matrix& X, double mu) {
  const Eigen::MatrixXd G = mu * (X.transpose() * X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lagrangian(const Matrix& X, const Vector& y, const LossSpec& loss, const PenaltySpec& pen, const Vector& beta,
                  const Vector& r, const Vector& d, double mu) {
  double total = 0.0;
  for (Index i = 0; i < r.size(); ++i) total += loss_value(loss, r[i]);
  for (Index j = 0; j < beta.size(); ++j) total += penalty_value(pen, beta[j]);
  for (Index i = 0; i < X.rows(); ++i) {
    double xb = 0.0;
    for (Index j = 0; j < X.cols(); ++j) xb += X(i, j) * beta[j];
    const double c = xb + r[i] - y[i];
    total += -d[i] * c + 0.5 * mu * c * c;
  }
  return total;
}

Instance random_instance(Index n, Index p, std::uint64_t seed, double noise, Index nonzeros) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Instance inst;
  inst.X.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) inst.X(i, j) = normal(rng);
  }
  Vector b = Vector::Zero(p);
  for (Index j = 0; j < std::min(nonzeros, p); ++j) b[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.5 * j);
  inst.y = inst.X * b;
  for (Index i = 0; i < n; ++i) inst.y[i] += noise * normal(rng);
  return inst;
}

}  // namespace oracle
