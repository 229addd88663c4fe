#include "disco/experiment.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace disco {

namespace {

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

template <typename T>
T parse_field(const std::string& field, const char* name) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument(std::string("--synthetic: bad ") + name + " '" + field + "'");
  return value;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  std::vector<std::string> fields;
  std::stringstream ss(text);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  if (fields.size() != 4 && fields.size() != 5)
    throw std::invalid_argument("--synthetic expects d,n,density,noise[,seed]; got '" + text + "'");
  SyntheticSpec spec;
  spec.d = parse_field<std::size_t>(fields[0], "d");
  spec.n = parse_field<std::size_t>(fields[1], "n");
  spec.density = parse_field<double>(fields[2], "density");
  spec.noise = parse_field<double>(fields[3], "noise");
  if (fields.size() == 5) spec.seed = parse_field<std::uint64_t>(fields[4], "seed");
  return spec;
}

std::optional<ExperimentOptions> parse_experiment_args(std::span<const std::string> args, std::ostream& help_out) {
  ExperimentOptions opts;
  auto& cfg = opts.solver;
  CLI::App app{"Distributed damped Newton solver for regularized ERM over a simulated cluster", "disco"};

  std::string data, synthetic, partition = "samples", loss = "square", scheduler = "sequential",
                                precond = "auto", trace;
  std::size_t dim = 0, tau = 0, max_inner = 0;
  auto* data_opt = app.add_option("--data", data, "LIBSVM file to load");
  auto* syn_opt = app.add_option("--synthetic", synthetic, "Generate data: d,n,density,noise[,seed]");
  data_opt->excludes(syn_opt);
  app.add_option("--dim", dim, "Override the feature dimension of --data");
  app.add_option("--partition", partition, "samples|features")->capture_default_str();
  app.add_option("--nodes", opts.nodes, "Number of simulated nodes m")->capture_default_str();
  app.add_option("--loss", loss, "square|logistic")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "L2 regularization weight")->capture_default_str();
  app.add_option("--mu", cfg.mu, "Preconditioner shift")->capture_default_str();
  app.add_option("--tau", tau, "Preconditioner sample count (default min(1000, ceil(n/m)))");
  app.add_option("--rho", cfg.rho, "Accepted for compatibility; has no effect")->capture_default_str();
  app.add_option("--theta", cfg.theta, "Inner tolerance: eps_k = theta * ||grad f(w_k)||")->capture_default_str();
  app.add_option("--tol", cfg.outer_tol, "Stop when ||grad f(w)|| <= tol")->capture_default_str();
  app.add_option("--max-outer", cfg.max_outer, "Outer iteration cap K")->capture_default_str();
  app.add_option("--max-inner", max_inner, "Inner iteration cap (default min(5d, 10000))");
  app.add_option("--precond", precond, "auto|full|block")->capture_default_str();
  app.add_option("--trace", trace, "Write per-iteration CSV trace here");
  app.add_option("--scheduler", scheduler, "sequential|parallel")->capture_default_str();
  app.add_option("--seed", opts.seed, "Generator seed when --synthetic has no seed field")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (data_opt->count()) opts.data_path = data;
  if (syn_opt->count()) opts.synthetic = parse_synthetic_spec(synthetic);
  if (!opts.data_path && !opts.synthetic) throw std::invalid_argument("one of --data or --synthetic is required");
  if (dim) opts.dim = dim;
  if (!trace.empty()) opts.trace_path = trace;
  cfg.mode = partition_mode_from_name(partition);
  cfg.loss = Loss::from_name(loss);
  cfg.preconditioner = preconditioner_kind_from_name(precond);
  cfg.tau = tau;
  cfg.max_inner = max_inner;
  opts.scheduler = scheduler_from_name(scheduler);
  if (opts.nodes < 1) throw std::invalid_argument("--nodes must be >= 1");
  cfg.validate();
  return opts;
}

Dataset load_dataset(const ExperimentOptions& opts) {
  Dataset data;
  if (opts.data_path) {
    data = read_libsvm_file(*opts.data_path, opts.dim);
  } else if (opts.synthetic) {
    const auto& s = *opts.synthetic;
    data = gen_synthetic(s.d, s.n, s.density, s.noise, s.seed.value_or(opts.seed)).data;
  } else {
    throw std::invalid_argument("no data source given");
  }
  if (opts.solver.loss.kind == LossKind::Logistic) binarize_labels(data);
  return data;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace) {
  out << kTraceHeader << '\n';
  for (const auto& t : trace) {
    out << t.outer_iter << ',' << shortest(t.grad_norm) << ',' << t.inner_iters_cum << ',' << t.rounds_cum << ','
        << t.bytes_cum << ',' << std::fixed << std::setprecision(3) << t.wall_ms << std::defaultfloat << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentOptions& opts, std::ostream& summary) {
  auto data = load_dataset(opts);
  Cluster cluster(opts.nodes, opts.scheduler);
  ExperimentResult res;
  res.d = data.d();
  res.n = data.n();
  res.outer = disco_outer(cluster, data.X, data.y, opts.solver);

  if (opts.trace_path) {
    std::ofstream out(*opts.trace_path);
    if (!out) throw std::runtime_error("cannot write trace '" + *opts.trace_path + "'");
    write_trace_csv(out, res.outer.trace);
  }

  const auto& o = res.outer;
  const auto& c = o.comm;
  std::uint64_t inner = 0;
  for (const auto& s : o.steps) inner += s.inner_iters;
  summary << "data            " << data.source << " (d=" << res.d << ", n=" << res.n << ")\n"
          << "partition       " << to_string(opts.solver.mode) << ", m=" << opts.nodes << ", loss "
          << to_string(opts.solver.loss.kind) << "\n"
          << "outer iters     " << o.steps.size() << (o.converged ? " (converged)" : " (not converged)") << "\n"
          << "grad norm       " << shortest(o.grad_norms.front()) << " -> " << shortest(o.grad_norms.back()) << "\n"
          << "inner iters     " << inner << "\n"
          << "broadcast       " << c.broadcast_rounds << " rounds, " << c.broadcast_bytes << " bytes\n"
          << "reduce          " << c.reduce_rounds << " rounds, " << c.reduce_bytes << " bytes\n"
          << "reduce_all      " << c.reduceall_rounds << " rounds, " << c.reduceall_bytes << " bytes\n"
          << "total           " << c.total_rounds() << " rounds, " << c.total_bytes() << " bytes\n";
  return res;
}

}  // namespace disco
