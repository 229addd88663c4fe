// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "disco/dataset.hpp"
#include "disco/experiment.hpp"
#include "disco/oracle.hpp"
#include "disco/solver.hpp"

using namespace disco;

namespace {

double rel_err(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Instance {
  Dataset data;
  std::size_t m = 1;
};

// Random ridge instances with d <= 50, n <= 200, m in {1, 2, 4}.
std::vector<Instance> ridge_instances() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(5, 50), samples(20, 200);
  std::uniform_real_distribution<double> density(0.1, 1.0);
  const std::size_t nodes[] = {1, 2, 4};
  std::vector<Instance> out;
  for (std::size_t k = 0; k < 24; ++k) {
    const auto d = dim(rng);
    const auto n = samples(rng);
    const double dens = density(rng);
    const auto seed = rng();
    out.push_back({gen_synthetic(d, n, dens, 0.1, seed).data, nodes[k % 3]});
  }
  return out;
}

// Checks delta_k^2 against v_k^T H(w_k) v_k from the dense oracle on every step.
double worst_delta_error(const Objective& obj, const Dataset& data, const OuterResult& res) {
  double worst = 0.0;
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    const auto& step = res.steps[k];
    auto H = oracle::assemble_hessian(obj, data.X, data.y, res.iterates[k]);
    auto Hv = H.multiply(step.v);
    double vHv = 0.0;
    for (std::size_t i = 0; i < Hv.size(); ++i) vHv += step.v[i] * Hv[i];
    worst = std::max(worst, rel_err(step.delta * step.delta, vHv));
  }
  return worst;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Outcome inner_oracle(const std::vector<Instance>& instances) {
  Outcome o;
  double worst = 0.0;
  SolverConfig cfg;
  for (const auto& inst : instances) {
    const auto& data = inst.data;
    auto obj = cfg.objective(data.n(), data.d());
    std::mt19937_64 rng(data.n() * 131 + data.d());
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseVec w(data.d());
    for (auto& x : w) x = gauss(rng);
    auto v_star = oracle::newton_direction(obj, data.X, data.y, w);

    Cluster cs(inst.m);
    auto s = pcg_samples(cs, partition_by_samples(data.X, data.y, inst.m), w, 1e-12, cfg);
    Cluster cf(inst.m);
    auto fp = partition_by_features(data.X, data.y, inst.m);
    auto f = pcg_features(cf, fp, PartitionedVec::split(w, fp.row_offsets), 1e-12, cfg);
    worst = std::max({worst, rel_err(s.v, v_star), rel_err(f.v, v_star)});
  }
  o.pass = worst <= 1e-8;
  o.detail = std::to_string(instances.size()) + " instances, worst relative error " + fmt(worst);
  return o;
}

Outcome layout_equivalence(const std::vector<Instance>& instances, double& delta_worst) {
  Outcome o;
  double worst_iter = 0.0, worst_grad = 0.0;
  std::size_t length_mismatch = 0, diverged = 0;
  std::string diverged_list;
  for (std::size_t idx = 0; idx < instances.size(); ++idx) {
    const auto& inst = instances[idx];
    const auto& data = inst.data;
    SolverConfig cfg;
    cfg.theta = 1e-4;
    cfg.preconditioner = PreconditionerKind::BlockDiagonal;
    cfg.mode = PartitionMode::Samples;
    Cluster cs(inst.m);
    auto s = disco_outer(cs, data.X, data.y, cfg);
    cfg.mode = PartitionMode::Features;
    Cluster cf(inst.m);
    auto f = disco_outer(cf, data.X, data.y, cfg);
    auto obj = cfg.objective(data.n(), data.d());
    delta_worst = std::max({delta_worst, worst_delta_error(obj, data, s), worst_delta_error(obj, data, f)});
    if (s.iterates.size() != f.iterates.size()) {
      ++length_mismatch;
      continue;
    }
    double here = 0.0;
    for (std::size_t k = 0; k < s.iterates.size(); ++k) here = std::max(here, rel_err(f.iterates[k], s.iterates[k]));
    worst_iter = std::max(worst_iter, here);
    // Converged gradient norms sit at rounding level, so compare them against max(1, |g|).
    const double gs = s.grad_norms.back(), gf = f.grad_norms.back();
    worst_grad = std::max(worst_grad, std::abs(gf - gs) / std::max(1.0, gs));
    if (here > 1e-8) {
      std::size_t max_inner = 0, count_diffs = 0;
      for (std::size_t k = 0; k < s.steps.size(); ++k) {
        max_inner = std::max(max_inner, s.steps[k].inner_iters);
        count_diffs += s.steps[k].inner_iters != f.steps[k].inner_iters;
      }
      ++diverged;
      diverged_list += " #" + std::to_string(idx) + "(d=" + std::to_string(data.d()) + ",n=" +
                       std::to_string(data.n()) + ",m=" + std::to_string(inst.m) + ",max inner " +
                       std::to_string(max_inner) + ",steps with different inner counts " +
                       std::to_string(count_diffs) + ",err " + fmt(here) + ")";
    }
  }
  o.pass = length_mismatch == 0 && worst_iter <= 1e-8 && worst_grad <= 1e-8;
  o.detail = std::to_string(instances.size() - diverged - length_mismatch) + "/" + std::to_string(instances.size()) +
             " instances within 1e-8; worst iterate error " + fmt(worst_iter) + ", worst final grad-norm gap " +
             fmt(worst_grad) + ", sequence-length mismatches " + std::to_string(length_mismatch);
  if (diverged) o.detail += "; beyond tolerance:" + diverged_list;
  return o;
}

Outcome closed_form(double& delta_worst) {
  Outcome o;
  auto data = gen_synthetic(12, 30, 1.0, 0.1, 3).data;
  SolverConfig cfg;
  cfg.lambda = 0.1;
  cfg.outer_tol = 1e-10;
  std::string detail;
  for (auto mode : {PartitionMode::Samples, PartitionMode::Features}) {
    cfg.mode = mode;
    Cluster cl(2);
    auto res = disco_outer(cl, data.X, data.y, cfg);
    auto w_star = oracle::ridge_closed_form(data.X, data.y, 0.1);
    const double err = rel_err(res.w, w_star);
    const bool ok = res.grad_norms.back() <= 1e-10 && res.steps.size() <= 10 && err <= 1e-6;
    o.pass = o.pass && ok;
    delta_worst = std::max(delta_worst, worst_delta_error(cfg.objective(30, 12), data, res));
    detail += std::string(to_string(mode)) + ": " + std::to_string(res.steps.size()) + " iters, ||g|| " +
              fmt(res.grad_norms.back()) + ", error " + fmt(err) + "; ";
  }
  o.detail = detail;
  return o;
}

Outcome comm_accounting() {
  Outcome o;
  auto data = gen_synthetic(40, 120, 0.3, 0.1, 11).data;
  const std::uint64_t d = data.d(), n = data.n();
  std::string detail;
  for (auto loss : {Loss::square(), Loss::logistic()}) {
    auto labels = data;
    if (loss.kind == LossKind::Logistic) binarize_labels(labels);
    for (std::size_t m : {1u, 3u}) {
      SolverConfig cfg;
      cfg.loss = loss;
      cfg.lambda = 1e-2;

      cfg.mode = PartitionMode::Features;
      Cluster cf(m);
      auto f = disco_outer(cf, labels.X, labels.y, cfg);
      std::uint64_t K = f.steps.size(), G = K + 1, T = 0, first_alpha = 0;
      for (const auto& s : f.steps) {
        T += s.inner_iters;
        first_alpha += s.inner_iters > 0 ? 1 : 0;
      }
      CommStats ef;
      ef.reduceall_rounds = 2 * G + 3 * T;
      ef.reduceall_bytes = 8 * (G * (n + 1) + T * (n + 1 + 3) + first_alpha);
      ef.reduce_rounds = K;
      ef.reduce_bytes = 8 * K * d;
      const bool f_ok = f.comm == ef;

      cfg.mode = PartitionMode::Samples;
      Cluster cs(m);
      auto s = disco_outer(cs, labels.X, labels.y, cfg);
      std::uint64_t Ks = s.steps.size(), Gs = Ks + 1, Ts = 0;
      for (const auto& st : s.steps) Ts += st.inner_iters;
      CommStats es;
      es.broadcast_rounds = es.reduceall_rounds = Gs + Ts;
      es.broadcast_bytes = es.reduceall_bytes = 8 * d * (Gs + Ts);
      const bool s_ok = s.comm == es;

      o.pass = o.pass && f_ok && s_ok && K > 0 && Ks > 0;
      detail += std::string(to_string(loss.kind)) + "/m=" + std::to_string(m) + (f_ok && s_ok ? " exact" : " MISMATCH") +
                "; ";
    }
  }
  o.detail = detail;
  return o;
}

Outcome paper_claim() {
  Outcome o;
  auto data = gen_synthetic(4000, 500, 0.05, 0.1, 5).data;
  const std::size_t m = 4;
  struct Run {
    std::uint64_t inner = 0;
    double bytes_per_inner = 0.0;
    std::size_t outer = 0;
  };
  auto run = [&](PartitionMode mode, PreconditionerKind precond) {
    SolverConfig cfg;
    cfg.mode = mode;
    cfg.preconditioner = precond;
    Cluster cl(m, Scheduler::Parallel);
    auto res = disco_outer(cl, data.X, data.y, cfg);
    Run r;
    for (const auto& s : res.steps) r.inner += s.inner_iters;
    r.bytes_per_inner =
        static_cast<double>(res.comm.total_bytes()) / static_cast<double>(std::max<std::uint64_t>(r.inner, 1));
    r.outer = res.steps.size();
    return r;
  };
  auto s = run(PartitionMode::Samples, PreconditionerKind::Auto);
  auto f = run(PartitionMode::Features, PreconditionerKind::Auto);
  auto s_block = run(PartitionMode::Samples, PreconditionerKind::BlockDiagonal);
  const double count_gap =
      std::abs(static_cast<double>(f.inner) - static_cast<double>(s.inner)) / static_cast<double>(s.inner);
  const double ratio = f.bytes_per_inner / s.bytes_per_inner;
  const double analytic = (8.0 * 500 + 24) / (16.0 * 4000);
  o.pass = count_gap <= 0.20 && ratio <= 0.25;
  o.detail = "(a) inner iterations samples " + std::to_string(s.inner) + " (" + std::to_string(s.outer) +
             " outer), features " + std::to_string(f.inner) + " (" + std::to_string(f.outer) + " outer), gap " +
             fmt(100 * count_gap) + "% [samples with the block preconditioner: " + std::to_string(s_block.inner) +
             "]; (b) bytes per inner iteration ratio " + fmt(ratio) + " (analytic " + fmt(analytic) + ")";
  return o;
}

Outcome finite_differences() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(3, 30), samples(5, 80);
  double worst_g = 0.0, worst_h = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    for (auto loss : {Loss::square(), Loss::logistic()}) {
      const auto d = dim(rng);
      const auto n = samples(rng);
      auto data = gen_synthetic(d, n, 0.5, 0.3, rng()).data;
      if (loss.kind == LossKind::Logistic) binarize_labels(data);
      Objective obj{loss, 0.05, n, d};
      DenseVec w(d), u(d);
      for (auto& x : w) x = 0.5 * gauss(rng);
      for (auto& x : u) x = gauss(rng);

      // Central differences along every coordinate for the gradient.
      auto g = full_gradient(obj, data.X, data.y, w);
      DenseVec fd_g(d);
      const double h = 1e-6;
      for (std::size_t i = 0; i < d; ++i) {
        auto wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        fd_g[i] = (objective_value(obj, data.X, data.y, wp) - objective_value(obj, data.X, data.y, wm)) / (2 * h);
      }
      worst_g = std::max(worst_g, rel_err(fd_g, g));

      // Central difference of the gradient along u for the Hessian-vector product.
      const double e = 1e-5;
      auto wp = w, wm = w;
      for (std::size_t i = 0; i < d; ++i) {
        wp[i] += e * u[i];
        wm[i] -= e * u[i];
      }
      auto gp = full_gradient(obj, data.X, data.y, wp), gm = full_gradient(obj, data.X, data.y, wm);
      DenseVec fd_h(d);
      for (std::size_t i = 0; i < d; ++i) fd_h[i] = (gp[i] - gm[i]) / (2 * e);
      worst_h = std::max(worst_h, rel_err(fd_h, hess_vec_dense(obj, data.X, data.y, w, u)));
    }
  }
  o.pass = worst_g <= 1e-5 && worst_h <= 1e-4;
  o.detail = "20 instances x 2 losses, worst gradient error " + fmt(worst_g) + ", worst Hv error " + fmt(worst_h);
  return o;
}

std::string trace_without_wall(const std::vector<std::string>& args) {
  std::ostringstream sink;
  auto opts = parse_experiment_args(args, sink);
  auto res = run_experiment(*opts, sink);
  std::ostringstream csv;
  write_trace_csv(csv, res.outer.trace);
  std::istringstream in(csv.str());
  std::string out;
  for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

Outcome determinism() {
  Outcome o;
  std::size_t rows = 0;
  for (const char* partition : {"samples", "features"}) {
    for (const char* loss : {"square", "logistic"}) {
      std::vector<std::string> base{"--synthetic", "300,400,0.1,0.1,21", "--partition", partition, "--nodes", "4",
                                    "--loss", loss};
      auto seq = base, par = base;
      seq.insert(seq.end(), {"--scheduler", "sequential"});
      par.insert(par.end(), {"--scheduler", "parallel"});
      auto a = trace_without_wall(seq), b = trace_without_wall(seq), c = trace_without_wall(par);
      o.pass = o.pass && a == b && a == c;
      rows += static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n')) - 1;
    }
  }
  o.detail = "4 configurations, " + std::to_string(rows) + " trace rows compared";
  return o;
}

}  // namespace

// --known-failures=2,5 lists criteria that are expected to fail; they are
// still reported as FAIL but do not change the exit status.
std::set<int> parse_known_failures(int argc, char** argv) {
  std::set<int> known;
  const std::string flag = "--known-failures=";
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind(flag, 0) != 0) continue;
    std::stringstream ss(arg.substr(flag.size()));
    for (std::string id; std::getline(ss, id, ',');) known.insert(std::stoi(id));
  }
  return known;
}

int main(int argc, char** argv) {
  using clock = std::chrono::steady_clock;
  const auto known = parse_known_failures(argc, argv);
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    const bool in_time = secs < limit_s;
    const bool pass = o.pass && in_time;
    if (!pass && !known.count(id)) ++failures;
    std::printf("[%s] %d %s: %s (%.2fs, limit %.0fs%s)%s\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                secs, limit_s, in_time ? "" : ", TOO SLOW", !pass && known.count(id) ? " [known failure]" : "");
    std::fflush(stdout);
  };

  const auto instances = ridge_instances();
  double delta_worst = 0.0;
  report(1, "inner solver matches dense Newton direction", 10, [&] { return inner_oracle(instances); });
  report(2, "sample and feature layouts agree", 10, [&] { return layout_equivalence(instances, delta_worst); });
  report(3, "closed-form ridge convergence", 1, [&] { return closed_form(delta_worst); });
  report(4, "communication counters match the analytic formula", 10, comm_accounting);
  report(5, "feature layout: similar iterations, far fewer bytes", 30, paper_claim);
  report(6, "finite-difference derivative checks", 5, finite_differences);
  report(7, "deterministic traces across runs and schedulers", 30, determinism);
  report(8, "delta certificate", 1, [&] {
    return Outcome{delta_worst <= 1e-8, "worst |delta^2 - v^T H v| / v^T H v over criteria 2-3: " + fmt(delta_worst)};
  });
  std::printf("%d unexpected failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
