#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "disco/linalg.hpp"

namespace disco {

enum class LossKind { Square, Logistic };

/// Loss descriptor. `self_concordance_M` is carried as metadata only;
/// nothing in the solver reads it.
struct Loss {
  LossKind kind = LossKind::Square;
  double self_concordance_M = 0.0;

  static Loss square() { return {LossKind::Square, 0.0}; }
  // log(1+exp(-t)) satisfies |phi'''| <= phi''^{3/2} only after rescaling;
  // 1 is the usual constant quoted for it.
  static Loss logistic() { return {LossKind::Logistic, 1.0}; }
  static Loss from_name(std::string_view name);
};

std::string_view to_string(LossKind kind);

/// f(w) = (1/n) sum_i phi(w^T x_i, y_i) + (lambda/2) ||w||^2
struct Objective {
  Loss loss;
  double lambda = 1e-3;
  std::size_t n = 1;
  std::size_t d = 1;

  void validate() const;
};

// Per-sample scalars. The square loss is (y - t)^2 with no 1/2 factor, so
// its curvature coefficient is 2.
double loss_value(const Objective& obj, double margin, double label);
double loss_grad_coeff(const Objective& obj, double margin, double label);
double loss_hess_coeff(const Objective& obj, double margin, double label);

/// Logistic sigmoid 1/(1+exp(-z)), evaluated without overflow.
double sigmoid(double z);

// Whole-data operations on the d x n matrix X (rows = features).
double objective_value(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                       std::span<const double> w);
DenseVec full_gradient(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                       std::span<const double> w);
DenseVec hess_vec_dense(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                        std::span<const double> w, std::span<const double> u);

// Coefficient vectors over a set of margins; shared by the distributed code
// so every layout evaluates the loss through the same arithmetic.
DenseVec grad_coeffs(const Objective& obj, std::span<const double> margins, std::span<const double> labels);
DenseVec hess_coeffs(const Objective& obj, std::span<const double> margins, std::span<const double> labels);

/// out[i] = out[i] / n + lambda * w[i]; the final step of every gradient and
/// Hessian-vector product in this library.
void finish_with_regularizer(std::span<double> out, std::size_t n, double lambda, std::span<const double> w);

}  // namespace disco
