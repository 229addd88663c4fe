#include "disco/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace disco {

namespace {

bool want_threads(Exec exec) {
#ifdef _OPENMP
  return exec == Exec::Parallel && !omp_in_parallel();
#else
  (void)exec;
  return false;
#endif
}

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

}  // namespace

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch " + dims(a, b));
}

SparseBlock::SparseBlock(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                         std::vector<std::size_t> col_idx, std::vector<double> values,
                         std::size_t global_row_offset, std::size_t global_col_offset)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      global_row_offset_(global_row_offset),
      global_col_offset_(global_col_offset) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != values_.size())
    throw std::invalid_argument("SparseBlock: inconsistent CSR arrays");
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw std::invalid_argument("SparseBlock: row_ptr not monotone");
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= cols_)
        throw std::invalid_argument("SparseBlock: column index " + std::to_string(col_idx_[k]) +
                                    " out of range in row " + std::to_string(r));
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1])
        throw std::invalid_argument("SparseBlock: row " + std::to_string(r) +
                                    " not strictly sorted by column");
    }
  }
  build_transpose();
}

void SparseBlock::build_transpose() {
  t_col_ptr_.assign(cols_ + 1, 0);
  for (auto c : col_idx_) ++t_col_ptr_[c + 1];
  for (std::size_t c = 0; c < cols_; ++c) t_col_ptr_[c + 1] += t_col_ptr_[c];
  t_row_idx_.resize(col_idx_.size());
  t_values_.resize(values_.size());
  std::vector<std::size_t> fill(t_col_ptr_.begin(), t_col_ptr_.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      auto pos = fill[col_idx_[k]]++;
      t_row_idx_[pos] = r;
      t_values_[pos] = values_[k];
    }
  }
}

SparseBlock SparseBlock::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols)
      throw std::invalid_argument("SparseBlock: triplet (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") outside " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
    ++row_ptr[e.row + 1];
    col_idx.push_back(e.col);
    values.push_back(e.value);
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return SparseBlock(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseBlock SparseBlock::from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
  check_same_length(row_major.size(), rows * cols, "SparseBlock::from_dense");
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double v = row_major[r * cols + c];
      if (v != 0.0) {
        col_idx.push_back(c);
        values.push_back(v);
      }
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return SparseBlock(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseBlock SparseBlock::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1), col_idx(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
  return SparseBlock(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

SparseBlock SparseBlock::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw std::invalid_argument("slice_rows: bad range");
  std::vector<std::size_t> row_ptr(end - begin + 1, 0);
  auto first = row_ptr_[begin];
  for (std::size_t r = begin; r < end; ++r) row_ptr[r - begin + 1] = row_ptr_[r + 1] - first;
  std::vector<std::size_t> col_idx(col_idx_.begin() + first, col_idx_.begin() + row_ptr_[end]);
  std::vector<double> values(values_.begin() + first, values_.begin() + row_ptr_[end]);
  return SparseBlock(end - begin, cols_, std::move(row_ptr), std::move(col_idx), std::move(values),
                     global_row_offset_ + begin, global_col_offset_);
}

SparseBlock SparseBlock::slice_cols(std::size_t begin, std::size_t end) const {
  if (begin > end || end > cols_) throw std::invalid_argument("slice_cols: bad range");
  std::vector<std::size_t> row_ptr(rows_ + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    auto lo = std::lower_bound(idx.begin(), idx.end(), begin);
    auto hi = std::lower_bound(lo, idx.end(), end);
    for (auto it = lo; it != hi; ++it) {
      col_idx.push_back(*it - begin);
      values.push_back(val[static_cast<std::size_t>(it - idx.begin())]);
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return SparseBlock(rows_, end - begin, std::move(row_ptr), std::move(col_idx), std::move(values),
                     global_row_offset_, global_col_offset_ + begin);
}

std::vector<double> SparseBlock::to_dense() const {
  std::vector<double> out(rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[r * cols_ + col_idx_[k]] = values_[k];
  return out;
}

PartitionedVec PartitionedVec::split(std::span<const double> full, std::span<const std::size_t> offsets) {
  if (offsets.empty() || offsets.front() != 0) throw std::invalid_argument("PartitionedVec: offsets must start at 0");
  PartitionedVec out;
  out.total_len = full.size();
  out.block_offsets.assign(offsets.begin(), offsets.end());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    auto begin = offsets[i];
    auto end = i + 1 < offsets.size() ? offsets[i + 1] : full.size();
    if (end <= begin || end > full.size())
      throw std::invalid_argument("PartitionedVec: offsets must be strictly increasing within length");
    out.blocks.emplace_back(full.begin() + begin, full.begin() + end);
  }
  return out;
}

DenseVec PartitionedVec::assemble() const {
  DenseVec out;
  out.reserve(total_len);
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  check_same_length(out.size(), total_len, "PartitionedVec::assemble");
  return out;
}

DenseVec spmv(const SparseBlock& block, std::span<const double> x, Exec exec) {
  check_same_length(x.size(), block.cols(), "spmv");
  DenseVec y(block.rows(), 0.0);
  const auto& ptr = block.row_ptr();
  const auto& idx = block.col_idx();
  const auto& val = block.values();
  const auto rows = static_cast<std::ptrdiff_t>(block.rows());
#pragma omp parallel for schedule(static) if (want_threads(exec))
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t k = ptr[r]; k < ptr[r + 1]; ++k) acc += val[k] * x[idx[k]];
    y[r] = acc;
  }
  return y;
}

DenseVec spmv_transpose(const SparseBlock& block, std::span<const double> x, Exec exec) {
  check_same_length(x.size(), block.rows(), "spmv_transpose");
  DenseVec y(block.cols(), 0.0);
  const auto cols = static_cast<std::ptrdiff_t>(block.cols());
#pragma omp parallel for schedule(static) if (want_threads(exec))
  for (std::ptrdiff_t c = 0; c < cols; ++c) {
    auto idx = block.col_indices(c);
    auto val = block.col_values(c);
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) acc += val[k] * x[idx[k]];
    y[c] = acc;
  }
  return y;
}

namespace reference {

DenseVec spmv(const SparseBlock& block, std::span<const double> x) {
  check_same_length(x.size(), block.cols(), "spmv");
  DenseVec y(block.rows(), 0.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto idx = block.row_indices(r);
    auto val = block.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) y[r] += val[k] * x[idx[k]];
  }
  return y;
}

// Scatter form: walks rows in ascending order, so each y[c] accumulates in
// ascending row order just like the gather kernel.
DenseVec spmv_transpose(const SparseBlock& block, std::span<const double> x) {
  check_same_length(x.size(), block.rows(), "spmv_transpose");
  DenseVec y(block.cols(), 0.0);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto idx = block.row_indices(r);
    auto val = block.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) y[idx[k]] += val[k] * x[r];
  }
  return y;
}

}  // namespace reference

DenseVec axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  check_same_length(x.size(), y.size(), "axpy");
  DenseVec out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_length(x.size(), y.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace disco
