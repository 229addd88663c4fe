#include "disco/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace disco::oracle {

namespace {

void guard(std::size_t d) {
  if (d > kMaxDim)
    throw std::invalid_argument("dense oracle: d=" + std::to_string(d) + " exceeds the " + std::to_string(kMaxDim) +
                                " limit for dense assembly");
}

}  // namespace

DenseVec DenseMatrix::multiply(std::span<const double> x) const {
  check_same_length(x.size(), dim, "DenseMatrix::multiply");
  DenseVec y(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) y[i] += a[i * dim + j] * x[j];
  return y;
}

DenseMatrix assemble_hessian(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                             std::span<const double> w) {
  guard(X.rows());
  check_same_length(w.size(), X.rows(), "assemble_hessian");
  const auto dense = X.to_dense();
  const auto d = X.rows(), n = X.cols();
  DenseMatrix H(d);
  for (std::size_t c = 0; c < n; ++c) {
    double margin = 0.0;
    for (std::size_t r = 0; r < d; ++r) margin += dense[r * n + c] * w[r];
    const double h = loss_hess_coeff(obj, margin, y[c]);
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = dense[i * n + c];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) H(i, j) += h * xi * dense[j * n + c];
    }
  }
  for (auto& e : H.a) e /= static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) H(i, i) += obj.lambda;
  return H;
}

DenseVec solve(DenseMatrix A, DenseVec b) {
  const auto n = A.dim;
  check_same_length(b.size(), n, "oracle::solve");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
    if (A(piv, k) == 0.0) throw std::runtime_error("oracle::solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A(i, k) / A(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
      b[i] -= f * b[k];
    }
  }
  DenseVec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= A(i, j) * x[j];
    x[i] = acc / A(i, i);
  }
  return x;
}

DenseVec newton_direction(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                          std::span<const double> w) {
  return solve(assemble_hessian(obj, X, y, w), full_gradient(obj, X, y, w));
}

DenseVec ridge_closed_form(const SparseBlock& X, std::span<const double> y, double lambda) {
  guard(X.rows());
  const auto d = X.rows(), n = X.cols();
  const auto dense = X.to_dense();
  const double scale = 2.0 / static_cast<double>(n);
  DenseMatrix A(d);
  DenseVec b(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += dense[i * n + c] * dense[j * n + c];
      A(i, j) = scale * acc;
    }
    A(i, i) += lambda;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += dense[i * n + c] * y[c];
    b[i] = scale * acc;
  }
  return solve(std::move(A), std::move(b));
}

NewtonTrajectory dense_newton(const Objective& obj, const SparseBlock& X, std::span<const double> y, double tol,
                              std::size_t max_iter) {
  guard(X.rows());
  NewtonTrajectory out;
  DenseVec w(X.rows(), 0.0);
  out.iterates.push_back(w);
  for (std::size_t k = 0; k < max_iter; ++k) {
    auto g = full_gradient(obj, X, y, w);
    if (norm2(g) <= tol) break;
    auto H = assemble_hessian(obj, X, y, w);
    auto v = solve(H, g);
    const double delta = std::sqrt(dot(v, H.multiply(v)));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= v[i] / (1.0 + delta);
    out.directions.push_back(std::move(v));
    out.iterates.push_back(w);
  }
  return out;
}

}  // namespace disco::oracle
