#include "disco/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string_view>
#include <system_error>
#include <vector>

namespace disco {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view next_token(std::string_view& rest) {
  std::size_t i = 0;
  while (i < rest.size() && is_space(rest[i])) ++i;
  std::size_t j = i;
  while (j < rest.size() && !is_space(rest[j])) ++j;
  auto tok = rest.substr(i, j - i);
  rest.remove_prefix(j);
  return tok;
}

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  if (tok.size() > 1 && tok[0] == '+' && tok[1] != '-') tok.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  return value;
}

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

Dataset read_libsvm(std::istream& in, std::optional<std::size_t> dim, std::string source) {
  std::vector<Triplet> entries;
  DenseVec labels;
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view rest(raw);
    auto label_tok = next_token(rest);
    if (label_tok.empty()) continue;
    const std::size_t col = labels.size();
    labels.push_back(parse_real(label_tok, line_no, "label"));
    std::size_t prev = 0;
    for (auto tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(line_no, "malformed feature '" + std::string(tok) + "' (expected idx:val)");
      std::size_t index = 0;
      auto idx_tok = tok.substr(0, colon);
      auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size())
        throw ParseError(line_no, "bad feature index '" + std::string(idx_tok) + "'");
      if (index == 0) throw ParseError(line_no, "feature indices are 1-based; got 0");
      if (index <= prev)
        throw ParseError(line_no, "feature indices must be strictly increasing (" + std::to_string(index) +
                                      " after " + std::to_string(prev) + ")");
      prev = index;
      double value = parse_real(tok.substr(colon + 1), line_no, "feature value");
      entries.push_back({index - 1, col, value});
      max_index = std::max(max_index, index);
    }
  }
  if (labels.empty()) throw std::runtime_error(source + ": no samples");
  std::size_t d = max_index;
  if (dim) {
    if (*dim < max_index)
      throw std::runtime_error(source + ": --dim " + std::to_string(*dim) + " is smaller than the largest index " +
                               std::to_string(max_index));
    d = *dim;
  }
  if (d == 0) throw std::runtime_error(source + ": no features (every sample is empty); pass a dimension");
  return {SparseBlock::from_triplets(d, labels.size(), std::move(entries)), std::move(labels), std::move(source)};
}

Dataset read_libsvm_file(const std::string& path, std::optional<std::size_t> dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_libsvm(in, dim, path);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (std::size_t c = 0; c < data.n(); ++c) {
    out << shortest(data.y[c]);
    auto idx = data.X.col_indices(c);
    auto val = data.X.col_values(c);
    for (std::size_t k = 0; k < idx.size(); ++k) out << ' ' << idx[k] + 1 << ':' << shortest(val[k]);
    out << '\n';
  }
}

SyntheticProblem gen_synthetic(std::size_t d, std::size_t n, double density, double noise, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("synthetic: density must be in (0, 1]");
  if (d == 0 || n == 0) throw std::invalid_argument("synthetic: d and n must be positive");
  if (noise < 0.0) throw std::invalid_argument("synthetic: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticProblem p;
  p.w_star.resize(d);
  for (auto& w : p.w_star) w = gauss(rng);

  // Scaled so each margin x_i^T w* has unit variance.
  const double scale = 1.0 / std::sqrt(density * static_cast<double>(d));
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(density * static_cast<double>(d * n)) + 16);
  DenseVec y(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double margin = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      if (density < 1.0 && unit(rng) >= density) continue;
      double x = scale * gauss(rng);
      entries.push_back({r, c, x});
      margin += x * p.w_star[r];
    }
    y[c] = margin;
  }
  for (auto& label : y) label += noise * gauss(rng);

  p.data.X = SparseBlock::from_triplets(d, n, std::move(entries));
  p.data.y = std::move(y);
  p.data.source = "synthetic(d=" + std::to_string(d) + ",n=" + std::to_string(n) + ",density=" + shortest(density) +
                  ",noise=" + shortest(noise) + ",seed=" + std::to_string(seed) + ")";
  return p;
}

void binarize_labels(Dataset& data) {
  for (auto& label : data.y) label = label > 0.0 ? 1.0 : -1.0;
}

}  // namespace disco
