// Serial vs OpenMP kernel timings and a full solve under both schedulers.
//
//   bench_kernels [d n density reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include <omp.h>

#include "disco/dataset.hpp"
#include "disco/solver.hpp"

using namespace disco;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t d = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 5000;
  const double density = argc > 3 ? std::strtod(argv[3], nullptr) : 0.01;
  const int reps = argc > 4 ? std::atoi(argv[4]) : 20;

  auto data = gen_synthetic(d, n, density, 0.1, 1).data;
  DenseVec w(d, 0.5), z(n, 0.25);
  std::printf("d=%zu n=%zu nnz=%zu threads=%d\n", d, n, data.X.nnz(), omp_get_max_threads());

  volatile double sink = 0.0;
  auto report = [&](const char* name, const std::function<DenseVec()>& fn) {
    const double ms = time_ms(reps, [&] { sink = sink + fn()[0]; });
    std::printf("  %-28s %9.3f ms\n", name, ms);
  };
  report("spmv reference", [&] { return reference::spmv(data.X, z); });
  report("spmv serial", [&] { return spmv(data.X, z, Exec::Serial); });
  report("spmv openmp", [&] { return spmv(data.X, z, Exec::Parallel); });
  report("spmv_transpose reference", [&] { return reference::spmv_transpose(data.X, w); });
  report("spmv_transpose serial", [&] { return spmv_transpose(data.X, w, Exec::Serial); });
  report("spmv_transpose openmp", [&] { return spmv_transpose(data.X, w, Exec::Parallel); });

  auto small = gen_synthetic(2000, n, density * 5, 0.1, 2).data;
  for (auto mode : {PartitionMode::Samples, PartitionMode::Features}) {
    for (auto sched : {Scheduler::Sequential, Scheduler::Parallel}) {
      SolverConfig cfg;
      cfg.mode = mode;
      Cluster cl(4, sched);
      OuterResult res;
      const double ms = time_ms(1, [&] { res = disco_outer(cl, small.X, small.y, cfg); });
      std::printf("  solve %-8s %-10s %9.3f ms  (%zu outer, %llu bytes)\n", std::string(to_string(mode)).c_str(),
                  sched == Scheduler::Sequential ? "sequential" : "parallel", ms, res.steps.size(),
                  static_cast<unsigned long long>(res.comm.total_bytes()));
    }
  }
  return 0;
}
