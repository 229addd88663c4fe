#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "disco/comm.hpp"
#include "disco/dataset.hpp"
#include "disco/solver.hpp"

namespace disco {

struct SyntheticSpec {
  std::size_t d = 0;
  std::size_t n = 0;
  double density = 1.0;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
};

/// Parses "d,n,density,noise[,seed]".
SyntheticSpec parse_synthetic_spec(const std::string& text);

struct ExperimentOptions {
  std::optional<std::string> data_path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::size_t> dim;
  std::size_t nodes = 1;
  Scheduler scheduler = Scheduler::Sequential;
  std::uint64_t seed = 42;
  std::optional<std::string> trace_path;
  SolverConfig solver;
};

/// Command-line front end. Returns std::nullopt after printing help;
/// throws std::invalid_argument on bad flags.
std::optional<ExperimentOptions> parse_experiment_args(std::span<const std::string> args, std::ostream& help_out);

Dataset load_dataset(const ExperimentOptions& opts);

struct ExperimentResult {
  OuterResult outer;
  std::size_t d = 0;
  std::size_t n = 0;
};

/// Loads or generates data, runs the solver, writes the trace CSV if asked
/// and prints a summary to `summary`.
ExperimentResult run_experiment(const ExperimentOptions& opts, std::ostream& summary);

inline constexpr const char* kTraceHeader = "outer_iter,grad_norm,inner_iters_cum,rounds_cum,bytes_cum,wall_ms";

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);

}  // namespace disco
