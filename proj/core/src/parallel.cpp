#include "pipadmm/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <thread>

#include "json.hpp"
#include "kernels.hpp"
#include "pipadmm/error.hpp"

namespace pipadmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename T>
class Channel {
 public:
  void send(T msg) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }

  T receive() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

struct UpMessage {
  enum class Kind { Eta, Xi, Failure };
  Kind kind = Kind::Xi;
  Index shard = 0;
  int round = 0;
  double eta_m = 0.0;
  Vector xi;
  /// ||X_m beta + r_m - y_m||^2 of the state xi was built from.
  double res_sq = 0.0;
  bool finite = true;
  std::string error;
};

struct DownMessage {
  int round = 0;
  std::shared_ptr<const Vector> beta;
  bool final = false;
  bool abort = false;
};

struct Worker {
  Index shard = 0;
  RowRange range;
  std::unique_ptr<detail::ShardKernel> kernel;
  Channel<DownMessage> inbox;
  std::vector<detail::RoundPartial> partials;
  bool finite = true;
};

struct WorkerContext {
  MatrixRef X;
  VectorRef y;
  const detail::LossContext& ctx;
  const SolverConfig& cfg;
  const ParallelOptions& opts;
  Channel<UpMessage>& up;
  double mu;
  Index p;
};

void send_xi(Worker& w, const WorkerContext& wc, int round) {
  UpMessage msg;
  msg.kind = UpMessage::Kind::Xi;
  msg.shard = w.shard;
  msg.round = round;
  msg.xi.resize(wc.p);
  msg.res_sq = w.kernel->res_sq();
  w.kernel->compute_xi(wc.mu, msg.xi);
  msg.finite = w.kernel->finite() && msg.xi.allFinite();
  wc.up.send(std::move(msg));
}

void send_failure(Worker& w, const WorkerContext& wc, int round, std::string what) {
  UpMessage msg;
  msg.kind = UpMessage::Kind::Failure;
  msg.shard = w.shard;
  msg.round = round;
  msg.error = std::move(what);
  wc.up.send(std::move(msg));
}

// Runs every shard in `mine` until each has seen a final or abort message.
void worker_thread(std::vector<Worker*> mine, const WorkerContext& wc) {
  std::vector<bool> done(mine.size(), false);
  for (std::size_t i = 0; i < mine.size(); ++i) {
    Worker& w = *mine[i];
    bool ok = true;
    try {
      UpMessage msg;
      msg.kind = UpMessage::Kind::Eta;
      msg.shard = w.shard;
      msg.round = 0;
      msg.eta_m = wc.opts.shard_etas.empty() ? spectral_bound(shard_rows(wc.X, w.range), wc.mu, wc.cfg.power).value
                                             : wc.opts.shard_etas[static_cast<std::size_t>(w.shard)];
      wc.up.send(std::move(msg));
    } catch (const std::exception& e) {
      send_failure(w, wc, 0, e.what());
      ok = false;
    }
    if (ok) send_xi(w, wc, 1);
  }
  std::size_t remaining = mine.size();
  while (remaining > 0) {
    for (std::size_t i = 0; i < mine.size(); ++i) {
      if (done[i]) continue;
      Worker& w = *mine[i];
      DownMessage msg = w.inbox.receive();
      if (msg.abort) {
        done[i] = true;
        --remaining;
        continue;
      }
      try {
        if (wc.opts.fault_injector) wc.opts.fault_injector(w.shard, msg.round);
        auto part = w.kernel->local_update(*msg.beta, wc.ctx, wc.cfg.record_trace);
        if (wc.cfg.record_trace) w.partials.push_back(part);
        w.finite = w.kernel->finite();
      } catch (const std::exception& e) {
        send_failure(w, wc, msg.round, e.what());
        continue;
      }
      if (msg.final) {
        done[i] = true;
        --remaining;
      } else {
        send_xi(w, wc, msg.round + 1);
      }
    }
  }
}

int env_thread_cap() {
  const char* s = std::getenv("PIPADMM_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1) return 0;
  return static_cast<int>(std::min<long>(v, 1 << 16));
}

}  // namespace

std::string_view to_string(Direction d) {
  return d == Direction::WorkerToCoordinator ? "worker_to_coordinator" : "coordinator_to_worker";
}

std::string_view to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::EtaScalar: return "eta";
    case PayloadKind::Xi: return "xi";
    case PayloadKind::Beta: return "beta";
  }
  return "unknown";
}

void MessageLog::record(const MessageRecord& rec) {
  std::lock_guard lock(mu_);
  records_.push_back(rec);
}

std::vector<MessageRecord> MessageLog::records() const {
  std::vector<MessageRecord> out;
  {
    std::lock_guard lock(mu_);
    out = records_;
  }
  std::stable_sort(out.begin(), out.end(), [](const MessageRecord& a, const MessageRecord& b) {
    if (a.round != b.round) return a.round < b.round;
    if (a.direction != b.direction) return a.direction < b.direction;
    return a.shard_id < b.shard_id;
  });
  return out;
}

std::size_t MessageLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::size_t MessageLog::count(PayloadKind kind) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const MessageRecord& r) { return r.payload_kind == kind; }));
}

void MessageLog::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

void MessageLog::write_jsonl(std::ostream& os) const {
  for (const auto& r : records()) {
    nlohmann::json j = {{"round", r.round},
                        {"direction", to_string(r.direction)},
                        {"shard_id", r.shard_id},
                        {"payload_kind", to_string(r.payload_kind)},
                        {"payload_length", r.payload_length},
                        {"payload_norm", r.payload_norm}};
    os << j.dump() << '\n';
  }
}

int resolve_thread_count(Index workers, int max_threads) {
  int cap = max_threads > 0 ? max_threads : env_thread_cap();
  if (cap <= 0) cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::max<Index>(1, std::min<Index>(workers, cap)));
}

double compute_eta_aggregate(Partition& partition, MatrixRef X, double mu, double eta_safety,
                             const PowerMethodOptions& opts) {
  fill_shard_etas(partition, X, mu, opts);
  double sum = 0.0;
  for (double e : partition.eta_m) sum += e;
  return eta_safety * sum;
}

FitResult fit_parallel(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                       const ParallelOptions& opts, const std::optional<IterState>& init) {
  const auto t0 = Clock::now();
  detail::check_inputs(X, y, cfg, init);
  const Index n = X.rows();
  const Index p = X.cols();
  Partition partition = partition_rows(n, opts.workers, opts.shard_sizes);
  const Index M = partition.shards();
  if (!opts.shard_etas.empty() && static_cast<Index>(opts.shard_etas.size()) != M) {
    throw InvalidSpec("fit_parallel: shard_etas length differs from the number of shards");
  }

  FitResult out;
  out.workers = M;
  out.mu_used = resolve_mu(loss, n, cfg);
  const double mu = out.mu_used;
  if (cfg.eta) {
    if (cfg.verify_eta) {
      out.spectral_estimate = spectral_bound(X, mu, cfg.power).value;
      detail::check_pinned_eta(*cfg.eta, out.spectral_estimate, penalty);
    } else {
      penalty.check_eta(*cfg.eta);
    }
  }

  const IterState start = init ? *init : feasible_start(p, y);
  const auto ctx = detail::LossContext::make(loss, mu, n, cfg.normalize_loss);
  const double primal_thresh = cfg.primal_tol * std::max(1.0, y.norm());

  std::vector<std::unique_ptr<Worker>> workers;
  workers.reserve(static_cast<std::size_t>(M));
  for (Index m = 0; m < M; ++m) {
    auto w = std::make_unique<Worker>();
    w->shard = m;
    w->range = partition.ranges[static_cast<std::size_t>(m)];
    w->kernel = std::make_unique<detail::ShardKernel>(shard_rows(X, w->range), shard_rows(y, w->range),
                                                      start.r.segment(w->range.begin, w->range.size()),
                                                      start.d.segment(w->range.begin, w->range.size()), start.beta);
    workers.push_back(std::move(w));
  }

  Channel<UpMessage> up;
  const WorkerContext wc{X, y, ctx, cfg, opts, up, mu, p};
  const int T = resolve_thread_count(M, opts.max_threads);
  std::vector<std::vector<Worker*>> assignment(static_cast<std::size_t>(T));
  for (Index m = 0; m < M; ++m) assignment[static_cast<std::size_t>(m % T)].push_back(workers[m].get());

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) threads.emplace_back(worker_thread, assignment[static_cast<std::size_t>(t)], std::cref(wc));

  auto log = [&](int round, Direction dir, Index shard, PayloadKind kind, Index len, double norm) {
    if (opts.log) opts.log->record({round, dir, shard, kind, len, norm});
  };

  std::vector<bool> open(static_cast<std::size_t>(M), true);
  auto shutdown = [&] {
    for (Index m = 0; m < M; ++m) {
      if (!open[static_cast<std::size_t>(m)]) continue;
      DownMessage stop;
      stop.abort = true;
      workers[m]->inbox.send(std::move(stop));
      open[static_cast<std::size_t>(m)] = false;
    }
    for (auto& th : threads) th.join();
    threads.clear();
  };

  std::vector<double> etas(static_cast<std::size_t>(M), 0.0);
  std::vector<UpMessage> xis(static_cast<std::size_t>(M));
  std::size_t etas_seen = 0;

  // Collects one xi per shard for `round`, plus any setup messages still in flight.
  auto gather = [&](int round, bool need_etas) {
    std::size_t xi_seen = 0;
    while (xi_seen < static_cast<std::size_t>(M) || (need_etas && etas_seen < static_cast<std::size_t>(M))) {
      UpMessage msg = up.receive();
      const auto m = static_cast<std::size_t>(msg.shard);
      switch (msg.kind) {
        case UpMessage::Kind::Failure:
          shutdown();
          throw WorkerFailure("worker " + std::to_string(msg.shard) + " failed in round " + std::to_string(msg.round) +
                              ": " + msg.error);
        case UpMessage::Kind::Eta:
          etas[m] = msg.eta_m;
          ++etas_seen;
          log(0, Direction::WorkerToCoordinator, msg.shard, PayloadKind::EtaScalar, 1, std::abs(msg.eta_m));
          break;
        case UpMessage::Kind::Xi:
          log(msg.round, Direction::WorkerToCoordinator, msg.shard, PayloadKind::Xi, msg.xi.size(), msg.xi.norm());
          xis[m] = std::move(msg);
          ++xi_seen;
          break;
      }
    }
    for (const auto& x : xis) {
      if (!x.finite) {
        shutdown();
        throw Diverged("worker " + std::to_string(x.shard) + " produced nonfinite values before round " +
                       std::to_string(round));
      }
    }
  };

  Vector beta = start.beta;
  std::vector<double> pen_values;
  std::vector<double> changes;
  try {
    gather(1, true);
    partition.eta_m = etas;
    double eta_sum = 0.0;
    for (double e : etas) eta_sum += e;
    out.shard_etas = etas;
    out.eta_used = cfg.eta ? *cfg.eta : auto_eta(eta_sum, penalty, cfg.eta_safety);
    penalty.check_eta(out.eta_used);
    if (!cfg.eta) out.spectral_estimate = eta_sum;
    const double eta = out.eta_used;
    out.setup_time_seconds = seconds_since(t0);

    Vector xi_sum(p);
    Vector next(p);
    out.stop_reason = StopReason::MaxIter;

    for (int k = 1; k <= cfg.max_iter; ++k) {
      // Fixed ascending shard order keeps the reduction bit-stable.
      xi_sum = xis[0].xi;
      double res_sq = xis[0].res_sq;
      for (std::size_t m = 1; m < xis.size(); ++m) {
        xi_sum += xis[m].xi;
        res_sq += xis[m].res_sq;
      }
      const double lagged_res = std::sqrt(res_sq);
      detail::coordinator_step(beta, xi_sum, mu, eta, penalty, next);
      if (!next.allFinite()) {
        shutdown();
        throw Diverged("nonfinite coefficients at iteration " + std::to_string(k));
      }
      const double change = detail::relative_change(beta, next);
      beta.swap(next);
      out.iterations = k;
      if (cfg.record_trace) {
        pen_values.push_back(penalty.value(beta));
        changes.push_back(change);
      }
      if (cfg.record_iterates) out.iterates.push_back(beta);

      const bool converged = k >= 2 && change <= cfg.tol && lagged_res <= primal_thresh;
      const bool final = converged || k == cfg.max_iter;
      if (converged) out.stop_reason = StopReason::Tolerance;

      auto shared = std::make_shared<const Vector>(beta);
      const double bnorm = beta.norm();
      for (Index m = 0; m < M; ++m) {
        DownMessage msg;
        msg.round = k;
        msg.beta = shared;
        msg.final = final;
        log(k, Direction::CoordinatorToWorker, m, PayloadKind::Beta, p, bnorm);
        workers[m]->inbox.send(std::move(msg));
        if (final) open[static_cast<std::size_t>(m)] = false;
      }
      if (final) break;
      gather(k + 1, false);
    }
  } catch (...) {
    shutdown();
    throw;
  }
  for (auto& th : threads) th.join();
  threads.clear();

  for (const auto& w : workers) {
    if (!w->finite) throw Diverged("worker " + std::to_string(w->shard) + " produced nonfinite values");
  }

  out.final_state.beta = beta;
  out.final_state.r.resize(n);
  out.final_state.d.resize(n);
  for (const auto& w : workers) {
    out.final_state.r.segment(w->range.begin, w->range.size()) = w->kernel->r();
    out.final_state.d.segment(w->range.begin, w->range.size()) = w->kernel->d();
  }
  out.final_state.k = out.iterations;

  if (cfg.record_trace) {
    {
      // Initial Lagrangian from the starting state.
      const Vector res = X * start.beta + start.r - y;
      out.initial_lagrangian = ctx.scale * loss.sum(start.r) + penalty.value(start.beta) - start.d.dot(res) +
                               0.5 * mu * res.squaredNorm();
    }
    out.trace.reserve(static_cast<std::size_t>(out.iterations));
    for (int k = 0; k < out.iterations; ++k) {
      detail::RoundPartial sum = workers[0]->partials[static_cast<std::size_t>(k)];
      for (Index m = 1; m < M; ++m) {
        const auto& part = workers[m]->partials[static_cast<std::size_t>(k)];
        sum.fit_loss += part.fit_loss;
        sum.r_loss += part.r_loss;
        sum.d_dot_res += part.d_dot_res;
        sum.res_sq += part.res_sq;
        sum.dual_gap = std::isnan(sum.dual_gap) ? sum.dual_gap : std::max(sum.dual_gap, part.dual_gap);
      }
      const double pen = pen_values[static_cast<std::size_t>(k)];
      out.trace.push_back(TraceEntry{sum.fit_loss + pen, sum.r_loss + pen - sum.d_dot_res + 0.5 * mu * sum.res_sq,
                                     std::sqrt(sum.res_sq), changes[static_cast<std::size_t>(k)], sum.dual_gap});
    }
  }

  out.beta = std::move(beta);
  out.wall_time_seconds = seconds_since(t0);
  return out;
}

FitResult fit_parallel(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                       Index workers) {
  ParallelOptions opts;
  opts.workers = workers;
  return fit_parallel(X, y, loss, penalty, cfg, opts);
}

AuditReport run_equivalence_audit(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                                  const std::vector<AuditRun>& runs, const std::optional<IterState>& init) {
  if (runs.empty()) throw AuditPreconditionFailed("audit: no runs requested");
  for (const auto& run : runs) {
    if (!run.cfg.eta) throw AuditPreconditionFailed("audit: every run must pin eta");
    if (*run.cfg.eta != *runs.front().cfg.eta) throw AuditPreconditionFailed("audit: runs use different eta values");
    if (run.cfg.max_iter != runs.front().cfg.max_iter) {
      throw AuditPreconditionFailed("audit: runs use different iteration caps");
    }
    if (resolve_mu(loss, X.rows(), run.cfg) != resolve_mu(loss, X.rows(), runs.front().cfg)) {
      throw AuditPreconditionFailed("audit: runs use different mu values");
    }
  }

  SolverConfig ref_cfg = runs.front().cfg;
  ref_cfg.record_iterates = true;
  const FitResult ref = fit_sequential(X, y, loss, penalty, ref_cfg, init);

  AuditReport report;
  report.reference_iterations = ref.iterations;
  report.eta = ref.eta_used;
  for (const auto& run : runs) {
    SolverConfig cfg = run.cfg;
    cfg.record_iterates = true;
    ParallelOptions opts;
    opts.workers = run.workers;
    opts.shard_sizes = run.shard_sizes;
    const FitResult fit = fit_parallel(X, y, loss, penalty, cfg, opts, init);

    AuditEntry entry;
    entry.workers = run.workers;
    entry.iterations = fit.iterations;
    const std::size_t common = std::min(fit.iterates.size(), ref.iterates.size());
    for (std::size_t k = 0; k < common; ++k) {
      const double dev = (fit.iterates[k] - ref.iterates[k]).lpNorm<Eigen::Infinity>();
      entry.per_iteration.push_back(dev);
      entry.max_deviation = std::max(entry.max_deviation, dev);
    }
    if (fit.iterations == ref.iterations) {
      entry.final_r_deviation = (fit.final_state.r - ref.final_state.r).lpNorm<Eigen::Infinity>();
      entry.final_d_deviation = (fit.final_state.d - ref.final_state.d).lpNorm<Eigen::Infinity>();
    } else {
      entry.final_r_deviation = std::numeric_limits<double>::infinity();
      entry.final_d_deviation = std::numeric_limits<double>::infinity();
    }
    report.max_deviation = std::max(report.max_deviation, entry.max_deviation);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

AuditReport run_equivalence_audit(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                                  const SolverConfig& cfg, const std::vector<Index>& workers_list,
                                  const std::optional<IterState>& init) {
  std::vector<AuditRun> runs;
  for (Index m : workers_list) runs.push_back(AuditRun{m, cfg, {}});
  return run_equivalence_audit(X, y, loss, penalty, runs, init);
}

}  // namespace pipadmm
