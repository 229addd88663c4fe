#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "disco/comm.hpp"
#include "disco/linalg.hpp"
#include "disco/loss.hpp"
#include "disco/partition.hpp"

namespace disco {

enum class PartitionMode { Samples, Features };

/// Which preconditioner the inner solver uses.
///   Full          one dense d x d block on the master (sample layout only)
///   BlockDiagonal one block per feature shard, no cross-node coupling
///   Auto          Full for the sample layout, BlockDiagonal for the feature layout
enum class PreconditionerKind { Auto, Full, BlockDiagonal };

PartitionMode partition_mode_from_name(std::string_view name);
std::string_view to_string(PartitionMode mode);
PreconditionerKind preconditioner_kind_from_name(std::string_view name);

struct SolverConfig {
  double lambda = 1e-3;
  double mu = 1e-4;
  std::size_t tau = 0;  // 0: min(1000, ceil(n/m))
  double rho = 0.0;     // accepted for interface compatibility, unused
  Loss loss = Loss::square();
  double theta = 1e-4;  // inner tolerance eps_k = theta * ||grad f(w_k)||
  double outer_tol = 1e-8;
  std::size_t max_outer = 50;
  std::size_t max_inner = 0;  // 0: min(5d, 10000)
  PartitionMode mode = PartitionMode::Samples;
  PreconditionerKind preconditioner = PreconditionerKind::Auto;

  std::size_t resolved_tau(std::size_t n, std::size_t m) const;
  std::size_t resolved_max_inner(std::size_t d) const;
  Objective objective(std::size_t n, std::size_t d) const { return {loss, lambda, n, d}; }
  void validate() const;
};

struct NewtonStepResult {
  DenseVec v;  // approximate Newton direction, length d, on the master
  double delta = 0.0;
  std::size_t inner_iters = 0;
  double final_residual_norm = 0.0;
  bool converged = true;
};

/// Snapshot handed to a PcgObserver after each inner iteration. Vectors are
/// gathered outside the metered collectives; this is instrumentation only.
struct PcgIterate {
  std::size_t t = 0;
  const DenseVec& v;
  const DenseVec& r;
  const DenseVec& Hv;
};
using PcgObserver = std::function<void(const PcgIterate&)>;

struct TraceRecord {
  std::size_t outer_iter = 0;
  double grad_norm = 0.0;
  std::uint64_t inner_iters_cum = 0;
  std::uint64_t rounds_cum = 0;
  std::uint64_t bytes_cum = 0;
  double wall_ms = 0.0;
};

struct OuterResult {
  DenseVec w;
  std::vector<DenseVec> iterates;  // w_0, w_1, ..., final
  std::vector<double> grad_norms;  // ||grad f|| at each iterate
  std::vector<NewtonStepResult> steps;
  std::vector<TraceRecord> trace;  // one per executed outer iteration
  CommStats comm;
  bool converged = false;
};

// Hessian-vector products on partitioned data.
//
// Sample layout: `w` is the iterate every node already holds; each node
// weighs its own samples. Costs one broadcast of u and one length-d
// reduce_all.
DenseVec hessian_vec_samples(Cluster& cluster, const SamplePartition& part, const Objective& obj,
                             std::span<const double> w, std::span<const double> u);
// Feature layout: `h` is the per-sample curvature weight vector every node
// holds after the margin exchange of the gradient step. Costs one length-n
// reduce_all of partial margins X_i^T u_i.
PartitionedVec hessian_vec_features(Cluster& cluster, const FeaturePartition& part, const Objective& obj,
                                    std::span<const double> h, const PartitionedVec& u);

/// Inexact Newton direction with the data split by samples. Includes the
/// broadcast of w and the gradient reduce_all that seed the residual.
NewtonStepResult pcg_samples(Cluster& cluster, const SamplePartition& part, std::span<const double> w,
                             double eps, const SolverConfig& config, const PcgObserver& observer = {});

/// Inexact Newton direction with the data split by features. `w` holds the
/// per-node blocks. The direction is gathered onto the master at the end.
NewtonStepResult pcg_features(Cluster& cluster, const FeaturePartition& part, const PartitionedVec& w,
                              double eps, const SolverConfig& config, const PcgObserver& observer = {});

/// Damped Newton outer loop from w_0 = 0, dispatching to the inner solver
/// selected by config.mode. X is the d x n feature-by-sample matrix.
OuterResult disco_outer(Cluster& cluster, const SparseBlock& X, std::span<const double> y,
                        const SolverConfig& config);

/// w - v / (1 + delta), element by element.
DenseVec damped_update(std::span<const double> w, std::span<const double> v, double delta);

}  // namespace disco
