#include "disco/preconditioner.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace disco {

struct Preconditioner::Block {
  std::size_t begin = 0;
  std::size_t size = 0;
  Eigen::MatrixXd assembled;
  Eigen::LLT<Eigen::MatrixXd> factor;
};

Preconditioner::Preconditioner() = default;
Preconditioner::~Preconditioner() = default;
Preconditioner::Preconditioner(Preconditioner&&) noexcept = default;
Preconditioner& Preconditioner::operator=(Preconditioner&&) noexcept = default;

Preconditioner Preconditioner::build(const SparseBlock& X, std::span<const double> h, std::size_t tau, double mu,
                                     std::span<const std::size_t> block_offsets) {
  if (tau < 1) throw std::invalid_argument("preconditioner: tau must be >= 1");
  if (tau > X.cols())
    throw std::invalid_argument("preconditioner: tau=" + std::to_string(tau) + " exceeds the " +
                                std::to_string(X.cols()) + " samples available");
  if (h.size() < tau) throw std::invalid_argument("preconditioner: need a curvature weight per sample");
  if (mu < 0.0) throw std::invalid_argument("preconditioner: mu must be >= 0");
  if (block_offsets.empty() || block_offsets.front() != 0)
    throw std::invalid_argument("preconditioner: block offsets must start at 0");

  Preconditioner p;
  p.dim_ = X.rows();
  p.offsets_.assign(block_offsets.begin(), block_offsets.end());
  const double inv_tau = 1.0 / static_cast<double>(tau);
  for (std::size_t b = 0; b < p.offsets_.size(); ++b) {
    auto blk = std::make_unique<Block>();
    blk->begin = p.offsets_[b];
    auto end = b + 1 < p.offsets_.size() ? p.offsets_[b + 1] : p.dim_;
    if (end <= blk->begin || end > p.dim_) throw std::invalid_argument("preconditioner: bad block offsets");
    blk->size = end - blk->begin;
    blk->assembled = Eigen::MatrixXd::Zero(blk->size, blk->size);

    std::vector<std::size_t> local;
    std::vector<double> vals;
    for (std::size_t j = 0; j < tau; ++j) {
      local.clear();
      vals.clear();
      auto idx = X.col_indices(j);
      auto val = X.col_values(j);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= blk->begin && idx[k] < end) {
          local.push_back(idx[k] - blk->begin);
          vals.push_back(val[k]);
        }
      }
      for (std::size_t a = 0; a < local.size(); ++a)
        for (std::size_t c = 0; c < local.size(); ++c) blk->assembled(local[a], local[c]) += h[j] * vals[a] * vals[c];
    }
    blk->assembled *= inv_tau;
    blk->assembled.diagonal().array() += mu;

    blk->factor.compute(blk->assembled);
    // LLT only fails on pivots <= 0; a rank-deficient block usually rounds to
    // tiny positive pivots instead, so compare against the diagonal scale too.
    const double scale = blk->assembled.diagonal().cwiseAbs().maxCoeff();
    const double min_pivot =
        blk->factor.info() == Eigen::Success ? blk->factor.matrixLLT().diagonal().cwiseAbs2().minCoeff() : 0.0;
    if (blk->factor.info() != Eigen::Success || !(min_pivot > 1e-13 * scale))
      throw std::runtime_error("preconditioner block " + std::to_string(b) +
                               " is not positive definite; increase mu (currently " + std::to_string(mu) + ")");
    p.blocks_.push_back(std::move(blk));
  }
  return p;
}

DenseVec Preconditioner::apply_block(std::size_t b, std::span<const double> r) const {
  if (b >= blocks_.size()) throw std::out_of_range("preconditioner: no block " + std::to_string(b));
  const auto& blk = *blocks_[b];
  check_same_length(r.size(), blk.size, "preconditioner apply");
  Eigen::Map<const Eigen::VectorXd> rhs(r.data(), static_cast<Eigen::Index>(r.size()));
  Eigen::VectorXd s = blk.factor.solve(rhs);
  return DenseVec(s.data(), s.data() + s.size());
}

DenseVec Preconditioner::apply(std::span<const double> r) const {
  check_same_length(r.size(), dim_, "preconditioner apply");
  DenseVec out;
  out.reserve(dim_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto part = apply_block(b, r.subspan(blocks_[b]->begin, blocks_[b]->size));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<double> Preconditioner::dense_block(std::size_t b) const {
  if (b >= blocks_.size()) throw std::out_of_range("preconditioner: no block " + std::to_string(b));
  const auto& m = blocks_[b]->assembled;
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return out;
}

}  // namespace disco
