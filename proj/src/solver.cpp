#include "disco/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "disco/preconditioner.hpp"

namespace disco {

PartitionMode partition_mode_from_name(std::string_view name) {
  if (name == "samples") return PartitionMode::Samples;
  if (name == "features") return PartitionMode::Features;
  throw std::invalid_argument("unknown partition '" + std::string(name) + "' (expected samples|features)");
}

std::string_view to_string(PartitionMode mode) { return mode == PartitionMode::Samples ? "samples" : "features"; }

PreconditionerKind preconditioner_kind_from_name(std::string_view name) {
  if (name == "auto") return PreconditionerKind::Auto;
  if (name == "full") return PreconditionerKind::Full;
  if (name == "block") return PreconditionerKind::BlockDiagonal;
  throw std::invalid_argument("unknown preconditioner '" + std::string(name) + "' (expected auto|full|block)");
}

std::size_t SolverConfig::resolved_tau(std::size_t n, std::size_t m) const {
  if (tau != 0) return tau;
  return std::min<std::size_t>(1000, (n + m - 1) / m);
}

std::size_t SolverConfig::resolved_max_inner(std::size_t d) const {
  if (max_inner != 0) return max_inner;
  return std::min<std::size_t>(5 * d, 10000);
}

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be > 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("config: mu must be >= 0");
  if (!(rho >= 0.0)) throw std::invalid_argument("config: rho must be >= 0");
  if (!(theta > 0.0)) throw std::invalid_argument("config: theta must be > 0");
  if (!(outer_tol > 0.0)) throw std::invalid_argument("config: outer tolerance must be > 0");
  if (mode == PartitionMode::Features && preconditioner == PreconditionerKind::Full)
    throw std::invalid_argument(
        "config: the feature layout cannot use a full preconditioner (applying it would need cross-node "
        "communication); use block");
}

DenseVec damped_update(std::span<const double> w, std::span<const double> v, double delta) {
  check_same_length(w.size(), v.size(), "damped_update");
  const double step = 1.0 / (1.0 + delta);
  DenseVec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - step * v[i];
  return out;
}

namespace {

void scale_by_n(std::span<double> x, std::size_t n) {
  const double nn = static_cast<double>(n);
  for (auto& e : x) e /= nn;
}

void check_positive_curvature(double uHu, std::size_t t) {
  if (!(uHu > 0.0))
    throw std::runtime_error("pcg: non-positive curvature <u, Hu> = " + std::to_string(uHu) + " at iteration " +
                             std::to_string(t) + "; the Hessian is not positive definite");
}

void check_inputs(const SolverConfig& config, double eps) {
  config.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("pcg: eps must be > 0");
}

// ---- sample layout -------------------------------------------------------

DenseVec samples_hess_vec(Cluster& cl, const SamplePartition& part, const Objective& obj,
                          std::span<const DenseVec> h_node, std::span<const double> u) {
  check_same_length(u.size(), part.d, "hessian_vec_samples");
  auto u_node = cl.broadcast(cl.master(), u);
  std::vector<DenseVec> contrib(cl.size());
  const auto exec = cl.exec();
  cl.for_each_node([&](std::size_t j) {
    const auto& X = part.shards[j].X;
    auto z = spmv_transpose(X, u_node[j], exec);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= h_node[j][i];
    contrib[j] = spmv(X, z, exec);
    scale_by_n(contrib[j], part.n);
  });
  auto summed = cl.reduce_all(contrib);
  DenseVec Hu = std::move(summed[cl.master()]);
  for (std::size_t i = 0; i < Hu.size(); ++i) Hu[i] += obj.lambda * u_node[cl.master()][i];
  return Hu;
}

class SampleEngine {
 public:
  SampleEngine(Cluster& cl, const SamplePartition& part, const SolverConfig& cfg)
      : cl_(cl), part_(part), cfg_(cfg), obj_(cfg.objective(part.n, part.d)), h_node_(cl.size()) {
    if (part.nodes() != cl.size())
      throw std::invalid_argument("sample partition has " + std::to_string(part.nodes()) +
                                  " shards for a cluster of " + std::to_string(cl.size()));
    obj_.validate();
    tau_ = cfg.resolved_tau(part.n, cl.size());
    if (tau_ > part.shards[cl.master()].y.size())
      throw std::invalid_argument("config: tau=" + std::to_string(tau_) + " exceeds the master shard's " +
                                  std::to_string(part.shards[cl.master()].y.size()) + " samples");
    w_.assign(part.d, 0.0);
  }

  void set_w(std::span<const double> w) {
    check_same_length(w.size(), part_.d, "pcg_samples: w");
    w_.assign(w.begin(), w.end());
  }
  DenseVec current_w() const { return w_; }

  // Broadcast w, each node forms its weighted local gradient, reduce_all.
  double evaluate_gradient() {
    auto w_node = cl_.broadcast(cl_.master(), w_);
    std::vector<DenseVec> contrib(cl_.size());
    const auto exec = cl_.exec();
    cl_.for_each_node([&](std::size_t j) {
      const auto& sh = part_.shards[j];
      auto margins = spmv_transpose(sh.X, w_node[j], exec);
      h_node_[j] = hess_coeffs(obj_, margins, sh.y);
      contrib[j] = spmv(sh.X, grad_coeffs(obj_, margins, sh.y), exec);
      scale_by_n(contrib[j], part_.n);
    });
    auto summed = cl_.reduce_all(contrib);
    grad_ = std::move(summed[cl_.master()]);
    for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += obj_.lambda * w_node[cl_.master()][i];
    if (obj_.loss.kind != LossKind::Square) precond_.reset();
    return norm2(grad_);
  }

  NewtonStepResult newton_step(double eps, const PcgObserver& observer) {
    ensure_preconditioner();
    const auto& P = *precond_;
    const auto d = part_.d;
    DenseVec r = grad_;
    DenseVec s = P.apply(r);
    DenseVec u = s;
    DenseVec v(d, 0.0), Hv(d, 0.0);
    double rs = dot(r, s);

    NewtonStepResult out;
    out.final_residual_norm = norm2(r);
    if (out.final_residual_norm <= eps) {
      out.v = std::move(v);
      return out;
    }
    out.converged = false;
    double delta_sq = 0.0;
    const auto max_inner = cfg_.resolved_max_inner(d);
    for (std::size_t t = 0; t < max_inner; ++t) {
      auto Hu = samples_hess_vec(cl_, part_, obj_, h_node_, u);
      const double uHu = dot(u, Hu);
      check_positive_curvature(uHu, t);
      const double alpha = rs / uHu;
      axpy_inplace(alpha, u, v);
      delta_sq = dot(v, Hv) + alpha * dot(v, Hu);
      axpy_inplace(alpha, Hu, Hv);
      axpy_inplace(-alpha, Hu, r);
      s = P.apply(r);
      const double rs_next = dot(r, s);
      const double rr = dot(r, r);
      const double beta = rs_next / rs;
      for (std::size_t i = 0; i < d; ++i) u[i] = s[i] + beta * u[i];
      rs = rs_next;
      out.final_residual_norm = std::sqrt(rr);
      out.inner_iters = t + 1;
      if (observer) observer({t, v, r, Hv});
      if (out.final_residual_norm <= eps) {
        out.converged = true;
        break;
      }
    }
    out.delta = std::sqrt(std::max(0.0, delta_sq));
    out.v = std::move(v);
    return out;
  }

  void apply_update(const NewtonStepResult& step) { w_ = damped_update(w_, step.v, step.delta); }

 private:
  void ensure_preconditioner() {
    if (precond_) return;
    const auto& master = part_.shards[cl_.master()];
    std::vector<std::size_t> offsets{0};
    if (cfg_.preconditioner == PreconditionerKind::BlockDiagonal) offsets = balanced_offsets(part_.d, cl_.size());
    precond_ = Preconditioner::build(master.X, h_node_[cl_.master()], tau_, cfg_.mu, offsets);
  }

  Cluster& cl_;
  const SamplePartition& part_;
  SolverConfig cfg_;
  Objective obj_;
  std::size_t tau_ = 0;
  DenseVec w_;
  DenseVec grad_;
  std::vector<DenseVec> h_node_;
  std::optional<Preconditioner> precond_;
};

// ---- feature layout ------------------------------------------------------

PartitionedVec features_hess_vec(Cluster& cl, const FeaturePartition& part, const Objective& obj,
                                 std::span<const DenseVec> h_node, const PartitionedVec& u) {
  if (u.blocks.size() != cl.size()) throw std::invalid_argument("hessian_vec_features: one block per node expected");
  std::vector<DenseVec> partial(cl.size());
  const auto exec = cl.exec();
  cl.for_each_node([&](std::size_t i) { partial[i] = spmv_transpose(part.shards[i], u.blocks[i], exec); });
  auto z_node = cl.reduce_all(partial);
  PartitionedVec Hu;
  Hu.blocks.resize(cl.size());
  Hu.block_offsets = part.row_offsets;
  Hu.total_len = part.d;
  cl.for_each_node([&](std::size_t i) {
    auto& z = z_node[i];
    for (std::size_t k = 0; k < z.size(); ++k) z[k] *= h_node[i][k];
    Hu.blocks[i] = spmv(part.shards[i], z, exec);
    finish_with_regularizer(Hu.blocks[i], part.n, obj.lambda, u.blocks[i]);
  });
  return Hu;
}

class FeatureEngine {
 public:
  FeatureEngine(Cluster& cl, const FeaturePartition& part, const SolverConfig& cfg)
      : cl_(cl), part_(part), cfg_(cfg), obj_(cfg.objective(part.n, part.d)), h_node_(cl.size()) {
    if (part.nodes() != cl.size())
      throw std::invalid_argument("feature partition has " + std::to_string(part.nodes()) +
                                  " shards for a cluster of " + std::to_string(cl.size()));
    if (cfg.preconditioner == PreconditionerKind::Full)
      throw std::invalid_argument("feature layout requires the block-diagonal preconditioner");
    obj_.validate();
    tau_ = cfg.resolved_tau(part.n, cl.size());
    if (tau_ > part.n)
      throw std::invalid_argument("config: tau=" + std::to_string(tau_) + " exceeds n=" + std::to_string(part.n));
    w_ = PartitionedVec::split(DenseVec(part.d, 0.0), part.row_offsets);
    grad_.resize(cl.size());
  }

  void set_w(const PartitionedVec& w) {
    if (w.blocks.size() != cl_.size()) throw std::invalid_argument("pcg_features: one w block per node expected");
    for (std::size_t i = 0; i < cl_.size(); ++i)
      check_same_length(w.blocks[i].size(), part_.shards[i].rows(), "pcg_features: w block");
    w_ = w;
  }
  DenseVec current_w() const { return w_.assemble(); }

  // One length-n reduce_all of partial margins, then one scalar reduce_all
  // for ||grad||^2.
  double evaluate_gradient() {
    const auto exec = cl_.exec();
    std::vector<DenseVec> partial(cl_.size());
    cl_.for_each_node([&](std::size_t i) { partial[i] = spmv_transpose(part_.shards[i], w_.blocks[i], exec); });
    auto margins = cl_.reduce_all(partial);
    std::vector<double> local_sq(cl_.size());
    cl_.for_each_node([&](std::size_t i) {
      h_node_[i] = hess_coeffs(obj_, margins[i], part_.y);
      grad_[i] = spmv(part_.shards[i], grad_coeffs(obj_, margins[i], part_.y), exec);
      finish_with_regularizer(grad_[i], part_.n, obj_.lambda, w_.blocks[i]);
      local_sq[i] = dot(grad_[i], grad_[i]);
    });
    grad_norm_ = std::sqrt(cl_.reduce_all_scalar(local_sq));
    if (obj_.loss.kind != LossKind::Square) precond_.clear();
    return grad_norm_;
  }

  NewtonStepResult newton_step(double eps, const PcgObserver& observer) {
    ensure_preconditioner();
    const auto m = cl_.size();
    std::vector<DenseVec> r = grad_, s(m), u(m), v(m), Hv(m);
    std::vector<double> rs_local(m);
    cl_.for_each_node([&](std::size_t i) {
      s[i] = precond_[i].apply(r[i]);
      u[i] = s[i];
      v[i].assign(r[i].size(), 0.0);
      Hv[i].assign(r[i].size(), 0.0);
      rs_local[i] = dot(r[i], s[i]);
    });

    NewtonStepResult out;
    out.final_residual_norm = grad_norm_;
    if (out.final_residual_norm <= eps) {
      out.v = cl_.reduce_concat(v, cl_.master()).assemble();
      return out;
    }
    out.converged = false;
    double rs = 0.0;
    double delta_sq = 0.0;
    PartitionedVec u_part{{}, part_.row_offsets, part_.d};
    std::vector<double> uHu_local(m), c_local(m), rr_local(m);
    const auto max_inner = cfg_.resolved_max_inner(part_.d);
    for (std::size_t t = 0; t < max_inner; ++t) {
      u_part.blocks = u;
      auto Hu = features_hess_vec(cl_, part_, obj_, h_node_, u_part);

      // alpha round; the first one also carries <r_0, s_0>.
      cl_.for_each_node([&](std::size_t i) { uHu_local[i] = dot(u[i], Hu.blocks[i]); });
      std::vector<DenseVec> alpha_payload(m);
      for (std::size_t i = 0; i < m; ++i)
        alpha_payload[i] = t == 0 ? DenseVec{uHu_local[i], rs_local[i]} : DenseVec{uHu_local[i]};
      auto alpha_sum = cl_.reduce_all(alpha_payload)[cl_.master()];
      if (t == 0) rs = alpha_sum[1];
      const double uHu = alpha_sum[0];
      check_positive_curvature(uHu, t);
      const double alpha = rs / uHu;

      cl_.for_each_node([&](std::size_t i) {
        axpy_inplace(alpha, u[i], v[i]);
        c_local[i] = dot(v[i], Hv[i]) + alpha * dot(v[i], Hu.blocks[i]);
        axpy_inplace(alpha, Hu.blocks[i], Hv[i]);
        axpy_inplace(-alpha, Hu.blocks[i], r[i]);
        s[i] = precond_[i].apply(r[i]);
        rs_local[i] = dot(r[i], s[i]);
        rr_local[i] = dot(r[i], r[i]);
      });

      // beta round: <r,s>, ||r||^2 and the local share of v^T H v.
      std::vector<DenseVec> beta_payload(m);
      for (std::size_t i = 0; i < m; ++i) beta_payload[i] = {rs_local[i], rr_local[i], c_local[i]};
      auto beta_sum = cl_.reduce_all(beta_payload)[cl_.master()];
      const double beta = beta_sum[0] / rs;
      cl_.for_each_node([&](std::size_t i) {
        for (std::size_t k = 0; k < u[i].size(); ++k) u[i][k] = s[i][k] + beta * u[i][k];
      });
      rs = beta_sum[0];
      delta_sq = beta_sum[2];
      out.final_residual_norm = std::sqrt(beta_sum[1]);
      out.inner_iters = t + 1;
      if (observer) {
        auto gather = [&](const std::vector<DenseVec>& blocks) {
          return PartitionedVec{blocks, part_.row_offsets, part_.d}.assemble();
        };
        auto vf = gather(v), rf = gather(r), Hvf = gather(Hv);
        observer({t, vf, rf, Hvf});
      }
      if (out.final_residual_norm <= eps) {
        out.converged = true;
        break;
      }
    }
    out.delta = std::sqrt(std::max(0.0, delta_sq));
    v_blocks_ = v;
    out.v = cl_.reduce_concat(v, cl_.master()).assemble();
    return out;
  }

  // Each node updates its own block; delta is already known everywhere.
  void apply_update(const NewtonStepResult& step) {
    cl_.for_each_node(
        [&](std::size_t i) { w_.blocks[i] = damped_update(w_.blocks[i], v_blocks_[i], step.delta); });
  }

 private:
  void ensure_preconditioner() {
    if (!precond_.empty()) return;
    std::vector<Preconditioner> built(cl_.size());
    const std::size_t offsets[] = {0};
    cl_.for_each_node([&](std::size_t i) {
      built[i] = Preconditioner::build(part_.shards[i], h_node_[i], tau_, cfg_.mu, offsets);
    });
    precond_ = std::move(built);
  }

  Cluster& cl_;
  const FeaturePartition& part_;
  SolverConfig cfg_;
  Objective obj_;
  std::size_t tau_ = 0;
  PartitionedVec w_;
  std::vector<DenseVec> grad_;
  double grad_norm_ = 0.0;
  std::vector<DenseVec> h_node_;
  std::vector<DenseVec> v_blocks_;
  std::vector<Preconditioner> precond_;
};

template <typename Engine>
OuterResult run_outer(Cluster& cl, Engine& engine, const SolverConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto base = cl.snapshot_stats();
  OuterResult res;
  std::uint64_t inner_cum = 0;

  auto finite_or_throw = [](const DenseVec& w, double gnorm, std::size_t k) {
    bool ok = std::isfinite(gnorm) && std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
    if (ok) return;
    std::ostringstream msg;
    msg << "disco: non-finite objective at outer iteration " << k << " (||grad|| = " << gnorm << "); w[0:"
        << std::min<std::size_t>(8, w.size()) << "] =";
    for (std::size_t i = 0; i < std::min<std::size_t>(8, w.size()); ++i) msg << ' ' << w[i];
    throw std::runtime_error(msg.str());
  };

  double gnorm = engine.evaluate_gradient();
  res.iterates.push_back(engine.current_w());
  res.grad_norms.push_back(gnorm);
  finite_or_throw(res.iterates.back(), gnorm, 0);

  for (std::size_t k = 0; k < cfg.max_outer; ++k) {
    if (gnorm <= cfg.outer_tol) break;
    auto step = engine.newton_step(cfg.theta * gnorm, {});
    engine.apply_update(step);
    inner_cum += step.inner_iters;
    res.steps.push_back(std::move(step));

    gnorm = engine.evaluate_gradient();
    res.iterates.push_back(engine.current_w());
    res.grad_norms.push_back(gnorm);
    finite_or_throw(res.iterates.back(), gnorm, k + 1);

    const auto stats = cl.snapshot_stats() - base;
    const std::chrono::duration<double, std::milli> elapsed = clock::now() - start;
    res.trace.push_back({k + 1, gnorm, inner_cum, stats.total_rounds(), stats.total_bytes(), elapsed.count()});
  }
  res.converged = gnorm <= cfg.outer_tol;
  res.w = res.iterates.back();
  res.comm = cl.snapshot_stats() - base;
  return res;
}

void warn_unused_rho(const SolverConfig& cfg) {
  if (cfg.rho != 0.0) std::cerr << "warning: rho=" << cfg.rho << " is accepted but has no effect\n";
}

}  // namespace

DenseVec hessian_vec_samples(Cluster& cluster, const SamplePartition& part, const Objective& obj,
                             std::span<const double> w, std::span<const double> u) {
  obj.validate();
  check_same_length(w.size(), part.d, "hessian_vec_samples: w");
  if (part.nodes() != cluster.size()) throw std::invalid_argument("hessian_vec_samples: shard/node count mismatch");
  std::vector<DenseVec> h_node(cluster.size());
  cluster.for_each_node([&](std::size_t j) {
    const auto& sh = part.shards[j];
    h_node[j] = hess_coeffs(obj, spmv_transpose(sh.X, w), sh.y);
  });
  return samples_hess_vec(cluster, part, obj, h_node, u);
}

PartitionedVec hessian_vec_features(Cluster& cluster, const FeaturePartition& part, const Objective& obj,
                                    std::span<const double> h, const PartitionedVec& u) {
  obj.validate();
  check_same_length(h.size(), part.n, "hessian_vec_features: h");
  if (part.nodes() != cluster.size()) throw std::invalid_argument("hessian_vec_features: shard/node count mismatch");
  for (std::size_t i = 0; i < u.blocks.size(); ++i)
    check_same_length(u.blocks[i].size(), part.shards[i].rows(), "hessian_vec_features: u block");
  std::vector<DenseVec> h_node(cluster.size(), DenseVec(h.begin(), h.end()));
  return features_hess_vec(cluster, part, obj, h_node, u);
}

NewtonStepResult pcg_samples(Cluster& cluster, const SamplePartition& part, std::span<const double> w, double eps,
                             const SolverConfig& config, const PcgObserver& observer) {
  check_inputs(config, eps);
  SampleEngine engine(cluster, part, config);
  engine.set_w(w);
  engine.evaluate_gradient();
  return engine.newton_step(eps, observer);
}

NewtonStepResult pcg_features(Cluster& cluster, const FeaturePartition& part, const PartitionedVec& w, double eps,
                              const SolverConfig& config, const PcgObserver& observer) {
  check_inputs(config, eps);
  FeatureEngine engine(cluster, part, config);
  engine.set_w(w);
  engine.evaluate_gradient();
  return engine.newton_step(eps, observer);
}

OuterResult disco_outer(Cluster& cluster, const SparseBlock& X, std::span<const double> y,
                        const SolverConfig& config) {
  config.validate();
  warn_unused_rho(config);
  if (config.mode == PartitionMode::Samples) {
    auto part = partition_by_samples(X, y, cluster.size());
    SampleEngine engine(cluster, part, config);
    return run_outer(cluster, engine, config);
  }
  auto part = partition_by_features(X, y, cluster.size());
  FeatureEngine engine(cluster, part, config);
  return run_outer(cluster, engine, config);
}

}  // namespace disco
