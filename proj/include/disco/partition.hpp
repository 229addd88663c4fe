#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "disco/linalg.hpp"

namespace disco {

/// Contiguous balanced split of `total` items into m parts: the first
/// total % m parts get one extra item. Returns m offsets starting at 0.
std::vector<std::size_t> balanced_offsets(std::size_t total, std::size_t m);

struct SampleShard {
  SparseBlock X;  // all d rows, n_j sample columns
  DenseVec y;     // labels of those n_j samples
};

/// Columns of X (samples) split across nodes.
struct SamplePartition {
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<SampleShard> shards;
  std::vector<std::size_t> col_offsets;

  std::size_t nodes() const { return shards.size(); }
  std::vector<std::size_t> sizes() const;
  /// Column-wise concatenation of all shards.
  SparseBlock reassemble() const;
};

/// Rows of X (features) split across nodes; every node sees all samples.
struct FeaturePartition {
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<SparseBlock> shards;  // d_i rows, all n columns
  DenseVec y;                       // replicated on every node
  std::vector<std::size_t> row_offsets;

  std::size_t nodes() const { return shards.size(); }
  std::vector<std::size_t> sizes() const;
  /// Row-wise concatenation of all shards.
  SparseBlock reassemble() const;
};

SamplePartition partition_by_samples(const SparseBlock& X, std::span<const double> y, std::size_t m);
FeaturePartition partition_by_features(const SparseBlock& X, std::span<const double> y, std::size_t m);

}  // namespace disco
