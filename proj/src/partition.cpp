#include "disco/partition.hpp"

#include <stdexcept>
#include <string>

namespace disco {

std::vector<std::size_t> balanced_offsets(std::size_t total, std::size_t m) {
  if (m < 1) throw std::invalid_argument("partition: need at least one node");
  if (m > total)
    throw std::invalid_argument("partition: " + std::to_string(m) + " nodes but only " + std::to_string(total) +
                                " items; some shard would be empty");
  std::vector<std::size_t> offsets(m);
  const auto base = total / m;
  const auto extra = total % m;
  std::size_t at = 0;
  for (std::size_t j = 0; j < m; ++j) {
    offsets[j] = at;
    at += base + (j < extra ? 1 : 0);
  }
  return offsets;
}

namespace {

std::vector<std::size_t> sizes_from(const std::vector<std::size_t>& offsets, std::size_t total) {
  std::vector<std::size_t> out(offsets.size());
  for (std::size_t j = 0; j < offsets.size(); ++j)
    out[j] = (j + 1 < offsets.size() ? offsets[j + 1] : total) - offsets[j];
  return out;
}

}  // namespace

std::vector<std::size_t> SamplePartition::sizes() const { return sizes_from(col_offsets, n); }
std::vector<std::size_t> FeaturePartition::sizes() const { return sizes_from(row_offsets, d); }

SamplePartition partition_by_samples(const SparseBlock& X, std::span<const double> y, std::size_t m) {
  check_same_length(y.size(), X.cols(), "partition_by_samples: labels");
  SamplePartition p;
  p.d = X.rows();
  p.n = X.cols();
  p.col_offsets = balanced_offsets(p.n, m);
  auto sizes = p.sizes();
  for (std::size_t j = 0; j < m; ++j) {
    auto begin = p.col_offsets[j];
    auto end = begin + sizes[j];
    p.shards.push_back({X.slice_cols(begin, end), DenseVec(y.begin() + begin, y.begin() + end)});
  }
  return p;
}

FeaturePartition partition_by_features(const SparseBlock& X, std::span<const double> y, std::size_t m) {
  check_same_length(y.size(), X.cols(), "partition_by_features: labels");
  FeaturePartition p;
  p.d = X.rows();
  p.n = X.cols();
  p.row_offsets = balanced_offsets(p.d, m);
  p.y.assign(y.begin(), y.end());
  auto sizes = p.sizes();
  for (std::size_t i = 0; i < m; ++i) p.shards.push_back(X.slice_rows(p.row_offsets[i], p.row_offsets[i] + sizes[i]));
  return p;
}

SparseBlock SamplePartition::reassemble() const {
  std::vector<Triplet> entries;
  for (const auto& s : shards) {
    const auto off = s.X.global_col_offset();
    for (std::size_t r = 0; r < s.X.rows(); ++r) {
      auto idx = s.X.row_indices(r);
      auto val = s.X.row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) entries.push_back({r, off + idx[k], val[k]});
    }
  }
  return SparseBlock::from_triplets(d, n, std::move(entries));
}

SparseBlock FeaturePartition::reassemble() const {
  std::vector<Triplet> entries;
  for (const auto& s : shards) {
    const auto off = s.global_row_offset();
    for (std::size_t r = 0; r < s.rows(); ++r) {
      auto idx = s.row_indices(r);
      auto val = s.row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) entries.push_back({off + r, idx[k], val[k]});
    }
  }
  return SparseBlock::from_triplets(d, n, std::move(entries));
}

}  // namespace disco
