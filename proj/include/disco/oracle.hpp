#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "disco/dataset.hpp"
#include "disco/linalg.hpp"
#include "disco/loss.hpp"

namespace disco::oracle {

// Dense brute-force references used to check the distributed solver.
// Everything here materializes d x d matrices, so it refuses d > kMaxDim.

inline constexpr std::size_t kMaxDim = 500;

/// Row-major square matrix.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<double> a;

  explicit DenseMatrix(std::size_t n = 0) : dim(n), a(n * n, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
  DenseVec multiply(std::span<const double> x) const;
};

/// (1/n) sum_i h_i x_i x_i^T + lambda I, assembled sample by sample.
DenseMatrix assemble_hessian(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                             std::span<const double> w);

/// Gaussian elimination with partial pivoting.
DenseVec solve(DenseMatrix A, DenseVec b);

/// Exact Newton direction H(w)^{-1} grad f(w).
DenseVec newton_direction(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                          std::span<const double> w);

/// Minimizer of the square-loss objective: (2/n X X^T + lambda I)^{-1} (2/n) X y.
DenseVec ridge_closed_form(const SparseBlock& X, std::span<const double> y, double lambda);

struct NewtonTrajectory {
  std::vector<DenseVec> iterates;    // w_0 = 0, w_1, ...
  std::vector<DenseVec> directions;  // exact v_k at each iterate
};

/// Damped Newton with exact directions, from w_0 = 0, until ||grad|| <= tol
/// or max_iter steps. For the square loss the last iterate agrees with
/// ridge_closed_form.
NewtonTrajectory dense_newton(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                              double tol = 1e-12, std::size_t max_iter = 100);

}  // namespace disco::oracle
