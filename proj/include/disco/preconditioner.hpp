#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "disco/linalg.hpp"

namespace disco {

/// Subsampled curvature preconditioner
///
///   P = (1/tau) sum_{j < tau} h_j x_j x_j^T + mu I
///
/// built from the first tau sample columns of a block, optionally restricted
/// to a block-diagonal pattern over contiguous feature ranges. Each diagonal
/// block is Cholesky-factored once; applying P^{-1} is a pair of triangular
/// solves per block and never mixes blocks.
class Preconditioner {
 public:
  Preconditioner();
  ~Preconditioner();
  Preconditioner(Preconditioner&&) noexcept;
  Preconditioner& operator=(Preconditioner&&) noexcept;

  /// `X` has features as rows and at least `tau` sample columns; `h` holds
  /// the curvature weight of each of the first `tau` samples. `block_offsets`
  /// splits the rows of X into diagonal blocks ({0} for one full block).
  /// Throws std::runtime_error if a block is not positive definite.
  static Preconditioner build(const SparseBlock& X, std::span<const double> h, std::size_t tau, double mu,
                              std::span<const std::size_t> block_offsets);

  std::size_t dim() const { return dim_; }
  std::size_t num_blocks() const { return offsets_.size(); }
  std::span<const std::size_t> block_offsets() const { return offsets_; }

  /// Solves P s = r.
  DenseVec apply(std::span<const double> r) const;
  /// Solves P_b s_b = r_b for diagonal block b alone.
  DenseVec apply_block(std::size_t b, std::span<const double> r) const;

  /// Assembled (unfactored) block b, row-major.
  std::vector<double> dense_block(std::size_t b) const;

 private:
  struct Block;
  std::size_t dim_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::unique_ptr<Block>> blocks_;
};

}  // namespace disco
