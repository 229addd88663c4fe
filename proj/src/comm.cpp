#include "disco/comm.hpp"

#include <stdexcept>
#include <string>

namespace disco {

Scheduler scheduler_from_name(std::string_view name) {
  if (name == "sequential") return Scheduler::Sequential;
  if (name == "parallel") return Scheduler::Parallel;
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "' (expected sequential|parallel)");
}

CommStats CommStats::operator-(const CommStats& e) const {
  return {broadcast_rounds - e.broadcast_rounds, reduce_rounds - e.reduce_rounds,
          reduceall_rounds - e.reduceall_rounds, broadcast_bytes - e.broadcast_bytes,
          reduce_bytes - e.reduce_bytes,         reduceall_bytes - e.reduceall_bytes};
}

Cluster::Cluster(std::size_t m, Scheduler scheduler) : m_(m), scheduler_(scheduler) {
  if (m_ < 1) throw std::invalid_argument("Cluster: need at least one node");
}

void Cluster::check_node(std::size_t node) const {
  if (node >= m_)
    throw std::out_of_range("Cluster: node " + std::to_string(node) + " out of range for m=" + std::to_string(m_));
}

std::vector<DenseVec> Cluster::broadcast(std::size_t from, std::span<const double> payload) {
  check_node(from);
  std::vector<DenseVec> out(m_, DenseVec(payload.begin(), payload.end()));
  stats_.broadcast_rounds += 1;
  stats_.broadcast_bytes += kBytesPerElement * payload.size();
  return out;
}

std::vector<DenseVec> Cluster::reduce_all(std::span<const DenseVec> contributions) {
  if (contributions.size() != m_)
    throw std::invalid_argument("reduce_all: expected " + std::to_string(m_) + " contributions, got " +
                                std::to_string(contributions.size()));
  const auto len = contributions.front().size();
  for (std::size_t i = 1; i < m_; ++i)
    if (contributions[i].size() != len)
      throw std::invalid_argument("reduce_all: node " + std::to_string(i) + " contributed length " +
                                  std::to_string(contributions[i].size()) + ", node 0 contributed " +
                                  std::to_string(len));
  DenseVec sum = contributions.front();
  for (std::size_t i = 1; i < m_; ++i)
    for (std::size_t k = 0; k < len; ++k) sum[k] += contributions[i][k];
  stats_.reduceall_rounds += 1;
  stats_.reduceall_bytes += kBytesPerElement * len;
  return std::vector<DenseVec>(m_, sum);
}

double Cluster::reduce_all_scalar(std::span<const double> per_node) {
  std::vector<DenseVec> c;
  c.reserve(per_node.size());
  for (double x : per_node) c.push_back({x});
  return reduce_all(c)[master()][0];
}

PartitionedVec Cluster::reduce_concat(std::span<const DenseVec> blocks, std::size_t to) {
  check_node(to);
  if (blocks.size() != m_)
    throw std::invalid_argument("reduce_concat: expected " + std::to_string(m_) + " blocks, got " +
                                std::to_string(blocks.size()));
  PartitionedVec out;
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    out.block_offsets.push_back(offset);
    out.blocks.push_back(b);
    offset += b.size();
  }
  out.total_len = offset;
  stats_.reduce_rounds += 1;
  stats_.reduce_bytes += kBytesPerElement * offset;
  return out;
}

void Cluster::for_each_node(const std::function<void(std::size_t)>& fn) const {
  std::vector<std::exception_ptr> errors(m_);
  const auto m = static_cast<std::ptrdiff_t>(m_);
  const bool threads = scheduler_ == Scheduler::Parallel && m_ > 1;
#pragma omp parallel for schedule(static, 1) if (threads)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace disco
