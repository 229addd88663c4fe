#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace disco {

using DenseVec = std::vector<double>;

/// Kernel execution flavour. Serial kernels are the reference path; the
/// OpenMP kernels must produce bit-identical output.
enum class Exec { Serial, Parallel };

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row block of the feature-by-sample matrix X.
///
/// Rows are features and columns are samples. The block also keeps a
/// transposed copy of itself so column gathers (per-sample access) are
/// row-major too. Both views are built once at construction and never
/// change afterwards.
class SparseBlock {
 public:
  SparseBlock() = default;

  /// Builds from raw CSR arrays. Throws std::invalid_argument if any row is
  /// unsorted, has duplicates, or references a column >= cols.
  SparseBlock(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
              std::vector<std::size_t> col_idx, std::vector<double> values,
              std::size_t global_row_offset = 0, std::size_t global_col_offset = 0);

  /// Builds from unordered triplets; duplicates are rejected.
  static SparseBlock from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> entries);

  /// Dense row-major input, zeros dropped.
  static SparseBlock from_dense(std::size_t rows, std::size_t cols,
                                std::span<const double> row_major);

  static SparseBlock identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::size_t global_row_offset() const { return global_row_offset_; }
  std::size_t global_col_offset() const { return global_col_offset_; }

  std::span<const std::size_t> row_indices(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  // Column c as (row index, value) pairs sorted by row.
  std::span<const std::size_t> col_indices(std::size_t c) const {
    return {t_row_idx_.data() + t_col_ptr_[c], t_col_ptr_[c + 1] - t_col_ptr_[c]};
  }
  std::span<const double> col_values(std::size_t c) const {
    return {t_values_.data() + t_col_ptr_[c], t_col_ptr_[c + 1] - t_col_ptr_[c]};
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// Rows [begin, end) as a new block; global row offset is shifted accordingly.
  SparseBlock slice_rows(std::size_t begin, std::size_t end) const;
  /// Columns [begin, end) as a new block; global column offset is shifted accordingly.
  SparseBlock slice_cols(std::size_t begin, std::size_t end) const;

  std::vector<double> to_dense() const;

  friend bool operator==(const SparseBlock& a, const SparseBlock& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_ptr_ == b.row_ptr_ &&
           a.col_idx_ == b.col_idx_ && a.values_ == b.values_;
  }

 private:
  void build_transpose();

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
  std::size_t global_row_offset_ = 0;
  std::size_t global_col_offset_ = 0;

  std::vector<std::size_t> t_col_ptr_{0};
  std::vector<std::size_t> t_row_idx_;
  std::vector<double> t_values_;
};

/// A length-total vector stored as contiguous per-node blocks.
struct PartitionedVec {
  std::vector<DenseVec> blocks;
  std::vector<std::size_t> block_offsets;
  std::size_t total_len = 0;

  /// Splits `full` at `offsets` (offsets[0] == 0, strictly increasing).
  static PartitionedVec split(std::span<const double> full,
                              std::span<const std::size_t> offsets);
  DenseVec assemble() const;
};

// y = block * x. Summation per output row in ascending column order.
DenseVec spmv(const SparseBlock& block, std::span<const double> x, Exec exec = Exec::Serial);
// y = block^T * x. Summation per output entry in ascending row order.
DenseVec spmv_transpose(const SparseBlock& block, std::span<const double> x,
                        Exec exec = Exec::Serial);

namespace reference {
// Straight-line serial kernels, kept for cross-checking the OpenMP versions.
DenseVec spmv(const SparseBlock& block, std::span<const double> x);
DenseVec spmv_transpose(const SparseBlock& block, std::span<const double> x);
}  // namespace reference

DenseVec axpy(double alpha, std::span<const double> x, std::span<const double> y);
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

void check_same_length(std::size_t a, std::size_t b, const char* what);

}  // namespace disco
