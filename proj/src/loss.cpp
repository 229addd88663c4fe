#include "disco/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace disco {

namespace {

void check_margin(double margin) {
  if (!std::isfinite(margin)) throw std::domain_error("loss: non-finite margin " + std::to_string(margin));
}

// log(1 + exp(-z)) without overflow for large |z|.
double log1p_exp_neg(double z) {
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace

Loss Loss::from_name(std::string_view name) {
  if (name == "square") return square();
  if (name == "logistic") return logistic();
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (expected square|logistic)");
}

std::string_view to_string(LossKind kind) { return kind == LossKind::Square ? "square" : "logistic"; }

void Objective::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("objective: lambda must be > 0");
  if (n < 1 || d < 1) throw std::invalid_argument("objective: empty problem");
  if (loss.self_concordance_M < 0.0) throw std::invalid_argument("objective: self-concordance M must be >= 0");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double loss_value(const Objective& obj, double margin, double label) {
  check_margin(margin);
  if (obj.loss.kind == LossKind::Square) {
    double r = label - margin;
    return r * r;
  }
  return log1p_exp_neg(label * margin);
}

double loss_grad_coeff(const Objective& obj, double margin, double label) {
  check_margin(margin);
  if (obj.loss.kind == LossKind::Square) return 2.0 * (margin - label);
  return -label * sigmoid(-label * margin);
}

double loss_hess_coeff(const Objective& obj, double margin, double label) {
  check_margin(margin);
  if (obj.loss.kind == LossKind::Square) return 2.0;
  double z = label * margin;
  // sigma(z)(1 - sigma(z)) == sigma(z) sigma(-z); the product form keeps the
  // tails from cancelling to zero.
  return label * label * sigmoid(z) * sigmoid(-z);
}

DenseVec grad_coeffs(const Objective& obj, std::span<const double> margins, std::span<const double> labels) {
  check_same_length(margins.size(), labels.size(), "grad_coeffs");
  DenseVec g(margins.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = loss_grad_coeff(obj, margins[i], labels[i]);
  return g;
}

DenseVec hess_coeffs(const Objective& obj, std::span<const double> margins, std::span<const double> labels) {
  check_same_length(margins.size(), labels.size(), "hess_coeffs");
  DenseVec h(margins.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = loss_hess_coeff(obj, margins[i], labels[i]);
  return h;
}

void finish_with_regularizer(std::span<double> out, std::size_t n, double lambda, std::span<const double> w) {
  check_same_length(out.size(), w.size(), "finish_with_regularizer");
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] / nn + lambda * w[i];
}

namespace {

void check_problem(const Objective& obj, const SparseBlock& X, std::span<const double> y) {
  obj.validate();
  check_same_length(X.rows(), obj.d, "objective: feature count");
  check_same_length(X.cols(), obj.n, "objective: sample count");
  check_same_length(y.size(), obj.n, "objective: label count");
}

}  // namespace

double objective_value(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                       std::span<const double> w) {
  check_problem(obj, X, y);
  auto margins = spmv_transpose(X, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) acc += loss_value(obj, margins[i], y[i]);
  return acc / static_cast<double>(obj.n) + 0.5 * obj.lambda * dot(w, w);
}

DenseVec full_gradient(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                       std::span<const double> w) {
  check_problem(obj, X, y);
  auto margins = spmv_transpose(X, w);
  auto g = spmv(X, grad_coeffs(obj, margins, y));
  finish_with_regularizer(g, obj.n, obj.lambda, w);
  return g;
}

DenseVec hess_vec_dense(const Objective& obj, const SparseBlock& X, std::span<const double> y,
                        std::span<const double> w, std::span<const double> u) {
  check_problem(obj, X, y);
  check_same_length(u.size(), obj.d, "hess_vec_dense");
  auto h = obj.loss.kind == LossKind::Square ? DenseVec(obj.n, 2.0)
                                              : hess_coeffs(obj, spmv_transpose(X, w), y);
  auto z = spmv_transpose(X, u);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= h[i];
  auto out = spmv(X, z);
  finish_with_regularizer(out, obj.n, obj.lambda, u);
  return out;
}

}  // namespace disco
