#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include "pipadmm/ladmm.hpp"
#include "pipadmm/linalg.hpp"

namespace pipadmm {

enum class Direction { WorkerToCoordinator, CoordinatorToWorker };
enum class PayloadKind { EtaScalar, Xi, Beta };

std::string_view to_string(Direction d);
std::string_view to_string(PayloadKind k);

struct MessageRecord {
  int round = 0;
  Direction direction = Direction::WorkerToCoordinator;
  Index shard_id = 0;
  PayloadKind payload_kind = PayloadKind::Xi;
  Index payload_length = 0;
  double payload_norm = 0.0;
};

/// Thread-safe record of every message exchanged during parallel fits.
class MessageLog {
 public:
  void record(const MessageRecord& rec);
  /// Records sorted by (round, direction, shard), independent of arrival order.
  std::vector<MessageRecord> records() const;
  std::size_t size() const;
  std::size_t count(PayloadKind kind) const;
  void clear();
  /// One JSON object per line with fields round, direction, shard_id,
  /// payload_kind, payload_norm (plus payload_length).
  void write_jsonl(std::ostream& os) const;

 private:
  mutable std::mutex mu_;
  std::vector<MessageRecord> records_;
};

struct ParallelOptions {
  Index workers = 1;
  /// Explicit shard sizes; empty means balanced contiguous blocks.
  std::vector<Index> shard_sizes;
  /// Thread cap. 0 reads PIPADMM_THREADS, then falls back to the number of
  /// logical processors.
  int max_threads = 0;
  /// Precomputed per-shard bounds for this partition. The setup round then
  /// sends these values instead of rerunning the power method.
  std::vector<double> shard_etas;
  MessageLog* log = nullptr;
  /// Called by a worker before each local update (round >= 1). Throwing from
  /// it simulates a failed worker round.
  std::function<void(Index shard, int round)> fault_injector;
};

/// Threads used for M workers under the given cap (see ParallelOptions).
int resolve_thread_count(Index workers, int max_threads = 0);

/// Fills partition.eta_m and returns eta_safety * sum_m eta_m.
double compute_eta_aggregate(Partition& partition, MatrixRef X, double mu, double eta_safety = 1.01,
                             const PowerMethodOptions& opts = {});

/// Coordinator/worker LADMM over row shards. With a pinned eta the iterates
/// agree with fit_sequential for every partition; with M = 1 they are
/// bit-identical.
FitResult fit_parallel(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                       const ParallelOptions& opts, const std::optional<IterState>& init = std::nullopt);
FitResult fit_parallel(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty, const SolverConfig& cfg,
                       Index workers);

struct AuditRun {
  Index workers = 1;
  SolverConfig cfg;
  std::vector<Index> shard_sizes;
};

struct AuditEntry {
  Index workers = 1;
  int iterations = 0;
  /// max_k ||beta_M^k - beta_ref^k||_inf over the common iterations.
  double max_deviation = 0.0;
  std::vector<double> per_iteration;
  /// Deviation of the assembled final r and d from the reference.
  double final_r_deviation = 0.0;
  double final_d_deviation = 0.0;
};

struct AuditReport {
  int reference_iterations = 0;
  double eta = 0.0;
  double max_deviation = 0.0;
  std::vector<AuditEntry> entries;
};

/// Compares every run against a sequential reference. Throws
/// AuditPreconditionFailed unless each run pins the same eta and max_iter.
AuditReport run_equivalence_audit(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                                  const std::vector<AuditRun>& runs,
                                  const std::optional<IterState>& init = std::nullopt);
AuditReport run_equivalence_audit(MatrixRef X, VectorRef y, const Loss& loss, const Penalty& penalty,
                                  const SolverConfig& cfg, const std::vector<Index>& workers_list,
                                  const std::optional<IterState>& init = std::nullopt);

}  // namespace pipadmm
