#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "disco/linalg.hpp"

namespace disco {

/// How simulated workers are run between collectives.
enum class Scheduler { Sequential, Parallel };

Scheduler scheduler_from_name(std::string_view name);

/// Cumulative collective counters. One round per collective call regardless
/// of m; bytes are 8 per payload element.
struct CommStats {
  std::uint64_t broadcast_rounds = 0;
  std::uint64_t reduce_rounds = 0;
  std::uint64_t reduceall_rounds = 0;
  std::uint64_t broadcast_bytes = 0;
  std::uint64_t reduce_bytes = 0;
  std::uint64_t reduceall_bytes = 0;

  std::uint64_t total_rounds() const { return broadcast_rounds + reduce_rounds + reduceall_rounds; }
  std::uint64_t total_bytes() const { return broadcast_bytes + reduce_bytes + reduceall_bytes; }

  friend bool operator==(const CommStats&, const CommStats&) = default;
  CommStats operator-(const CommStats& earlier) const;
};

inline constexpr std::uint64_t kBytesPerElement = sizeof(double);

/// m simulated nodes in one process. Node 0 is the master.
///
/// Workers exchange data only through broadcast / reduce_all /
/// reduce_concat; every call is metered. Reductions always sum in ascending
/// node order, so the sequential and parallel schedulers agree bit for bit.
class Cluster {
 public:
  explicit Cluster(std::size_t m, Scheduler scheduler = Scheduler::Sequential);

  std::size_t size() const { return m_; }
  std::size_t master() const { return 0; }
  Scheduler scheduler() const { return scheduler_; }
  /// Kernel flavour that matches the scheduler.
  Exec exec() const { return scheduler_ == Scheduler::Parallel ? Exec::Parallel : Exec::Serial; }

  /// Copies `payload` from node `from` to every node.
  std::vector<DenseVec> broadcast(std::size_t from, std::span<const double> payload);

  /// Element-wise sum of one contribution per node, replicated to all nodes.
  std::vector<DenseVec> reduce_all(std::span<const DenseVec> contributions);
  /// Scalar convenience: a length-1 reduce_all (one round, 8 bytes).
  double reduce_all_scalar(std::span<const double> per_node);

  /// Concatenates per-node blocks in node order onto node `to`.
  PartitionedVec reduce_concat(std::span<const DenseVec> blocks, std::size_t to);

  CommStats snapshot_stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  /// Runs `fn(node)` for every node; in parallel mode nodes run on OpenMP
  /// threads. The first exception thrown by any node is rethrown after all
  /// nodes have finished.
  void for_each_node(const std::function<void(std::size_t)>& fn) const;

 private:
  void check_node(std::size_t node) const;

  std::size_t m_;
  Scheduler scheduler_;
  CommStats stats_;
};

}  // namespace disco
