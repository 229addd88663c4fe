#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "disco/linalg.hpp"

namespace disco {

/// Feature-by-sample data: X is d x n, column i is sample x_i.
struct Dataset {
  SparseBlock X;
  DenseVec y;
  std::string source;

  std::size_t d() const { return X.rows(); }
  std::size_t n() const { return X.cols(); }
};

/// Error raised for malformed input files; `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// LIBSVM / SVMlight text: "label idx:val idx:val ..." with 1-based,
/// strictly increasing indices. Blank lines are skipped. d is the largest
/// index seen unless `dim` is given (it must then cover every index).
Dataset read_libsvm(std::istream& in, std::optional<std::size_t> dim = std::nullopt, std::string source = "<stream>");
Dataset read_libsvm_file(const std::string& path, std::optional<std::size_t> dim = std::nullopt);

/// Writes values in shortest round-trip form, so read(write(x)) == x.
void write_libsvm(std::ostream& out, const Dataset& data);

/// Sparse Gaussian design with a planted model:
///   X_ij ~ Bernoulli(density) * N(0, 1/(density d)), w* ~ N(0, 1),
///   y = X^T w* + noise * N(0, 1).
/// Deterministic for a given seed.
struct SyntheticProblem {
  Dataset data;
  DenseVec w_star;
};
SyntheticProblem gen_synthetic(std::size_t d, std::size_t n, double density, double noise, std::uint64_t seed);

/// Maps labels to {-1, +1} by sign (y > 0 -> +1), for the logistic loss.
void binarize_labels(Dataset& data);

}  // namespace disco
