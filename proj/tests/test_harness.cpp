#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "disco/dataset.hpp"
#include "disco/experiment.hpp"
#include "disco/oracle.hpp"
#include "test_util.hpp"

using namespace disco;
using disco::test::rel_err;

namespace {

Dataset parse(const std::string& text, std::optional<std::size_t> dim = std::nullopt) {
  std::istringstream in(text);
  return read_libsvm(in, dim);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::optional<ExperimentOptions> cli(std::initializer_list<std::string> args) {
  std::vector<std::string> v(args);
  std::ostringstream help;
  return parse_experiment_args(v, help);
}

}  // namespace

TEST_CASE("libsvm: basic parse") {
  auto d = parse("+1 1:0.5 3:2\n-1 2:1\n");
  CHECK(d.d() == 3);
  CHECK(d.n() == 2);
  CHECK(d.y == DenseVec{1, -1});
  CHECK(d.X.to_dense() == std::vector<double>{0.5, 0, 0, 1, 2, 0});
}

TEST_CASE("libsvm: blank lines, empty samples and --dim") {
  auto d = parse("\n1 2:3\n\n0\n   \n", 5);
  CHECK(d.n() == 2);
  CHECK(d.d() == 5);
  CHECK(d.X.nnz() == 1);
  CHECK(d.y == DenseVec{1, 0});
  CHECK_THROWS_AS(parse("1 4:1\n", 3), std::runtime_error);
}

TEST_CASE("libsvm: malformed input names the line") {
  CHECK(error_line("1 1:1\n1 0:2\n") == 2);
  CHECK(error_line("1 2:1 2:3\n") == 1);
  CHECK(error_line("1 3:1 2:3\n") == 1);
  CHECK(error_line("1 1:1\n\nabc 1:1\n") == 3);
  CHECK(error_line("1 1:x\n") == 1);
  CHECK(error_line("1 1\n") == 1);
  CHECK(error_line("1 :1\n") == 1);
  CHECK_THROWS_AS(parse(""), std::runtime_error);
  CHECK_THROWS_AS(read_libsvm_file("/nonexistent/file.svm"), std::runtime_error);
}

TEST_CASE("libsvm: write then read is the identity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = gen_synthetic(13, 21, 0.3, 0.5, seed);
    std::ostringstream out;
    write_libsvm(out, p.data);
    std::istringstream in(out.str());
    auto back = read_libsvm(in, 13);
    CHECK(back.X == p.data.X);
    CHECK(back.y == p.data.y);
  }
}

TEST_CASE("synthetic generator") {
  auto a = gen_synthetic(30, 50, 0.2, 0.1, 9);
  auto b = gen_synthetic(30, 50, 0.2, 0.1, 9);
  auto c = gen_synthetic(30, 50, 0.2, 0.1, 10);
  CHECK(a.data.X == b.data.X);
  CHECK(a.data.y == b.data.y);
  CHECK(a.w_star == b.w_star);
  CHECK_FALSE(a.data.y == c.data.y);

  CHECK(gen_synthetic(7, 9, 1.0, 0.0, 1).data.X.nnz() == 63);

  // Noise-free labels are exactly X^T w*.
  auto clean = gen_synthetic(20, 40, 0.5, 0.0, 3);
  CHECK(rel_err(spmv_transpose(clean.data.X, clean.w_star), clean.data.y) < 1e-14);

  CHECK_THROWS_AS(gen_synthetic(5, 5, 0.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic(5, 5, 0.5, -1.0, 1), std::invalid_argument);
}

TEST_CASE("planted model is recovered by a lightly regularized solve") {
  auto p = gen_synthetic(10, 2000, 1.0, 0.01, 4);
  auto w = oracle::ridge_closed_form(p.data.X, p.data.y, 1e-8);
  CHECK(rel_err(w, p.w_star) < 0.05);
}

TEST_CASE("oracle examples") {
  oracle::DenseMatrix A(2);
  A(0, 0) = 0;
  A(0, 1) = 2;
  A(1, 0) = 3;
  A(1, 1) = 1;
  auto x = oracle::solve(A, DenseVec{4, 5});  // needs a row swap
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));

  oracle::DenseMatrix singular(2);
  singular(0, 0) = 1;
  singular(0, 1) = 2;
  singular(1, 0) = 2;
  singular(1, 1) = 4;
  CHECK_THROWS(oracle::solve(singular, DenseVec{1, 1}));

  // One sample x = e_1, y = 1, lambda = 1: minimize (w - 1)^2 + w^2 / 2 -> w = 2/3.
  auto X = SparseBlock::identity(1);
  auto w = oracle::ridge_closed_form(X, DenseVec{1}, 1.0);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  Objective obj{Loss::square(), 1.0, 1, 1};
  auto traj = oracle::dense_newton(obj, X, DenseVec{1}, 1e-14);
  CHECK(traj.iterates.back()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("dense Newton agrees with the closed form on ridge") {
  std::mt19937_64 rng(5);
  auto inst = test::random_instance(9, 25, 0.5, rng);
  Objective obj{Loss::square(), 0.2, 25, 9};
  auto traj = oracle::dense_newton(obj, inst.X, inst.y, 1e-12);
  CHECK(rel_err(traj.iterates.back(), oracle::ridge_closed_form(inst.X, inst.y, 0.2)) < 1e-10);
  CHECK(norm2(full_gradient(obj, inst.X, inst.y, traj.iterates.back())) <= 1e-12);
}

TEST_CASE("command line parsing") {
  auto opts = cli({"--synthetic", "20,40,0.5,0.1,7", "--partition", "features", "--nodes", "3", "--loss",
                   "logistic", "--lambda", "0.01", "--tau", "5", "--max-inner", "12", "--scheduler", "parallel"});
  REQUIRE(opts);
  CHECK(opts->synthetic->d == 20);
  CHECK(opts->synthetic->n == 40);
  CHECK(*opts->synthetic->seed == 7);
  CHECK(opts->nodes == 3);
  CHECK(opts->solver.mode == PartitionMode::Features);
  CHECK(opts->solver.loss.kind == LossKind::Logistic);
  CHECK(opts->solver.lambda == 0.01);
  CHECK(opts->solver.tau == 5);
  CHECK(opts->solver.max_inner == 12);
  CHECK(opts->scheduler == Scheduler::Parallel);

  auto defaults = cli({"--data", "x.svm"});
  REQUIRE(defaults);
  CHECK(*defaults->data_path == "x.svm");
  CHECK(defaults->solver.lambda == 1e-3);
  CHECK(defaults->solver.mu == 1e-4);
  CHECK(defaults->solver.theta == 1e-4);
  CHECK(defaults->solver.outer_tol == 1e-8);
  CHECK(defaults->solver.max_outer == 50);
  CHECK(defaults->scheduler == Scheduler::Sequential);

  CHECK_FALSE(cli({"--help"}));
  CHECK_THROWS_AS(cli({}), std::invalid_argument);
  CHECK_THROWS_AS(cli({"--data", "a", "--synthetic", "1,1,1,0"}), std::invalid_argument);
  CHECK_THROWS_AS(cli({"--synthetic", "1,2,3"}), std::invalid_argument);
  CHECK_THROWS_AS(cli({"--synthetic", "5,5,0.5,0", "--partition", "rows"}), std::invalid_argument);
  CHECK_THROWS_AS(cli({"--synthetic", "5,5,0.5,0", "--lambda", "0"}), std::invalid_argument);
  CHECK_THROWS_AS(cli({"--synthetic", "5,5,0.5,0", "--bogus"}), std::invalid_argument);
}

TEST_CASE("experiment writes one trace row per outer iteration") {
  auto opts = cli({"--synthetic", "15,60,0.4,0.1,3", "--partition", "samples", "--nodes", "2"});
  REQUIRE(opts);
  std::ostringstream summary;
  auto res = run_experiment(*opts, summary);
  CHECK(res.d == 15);
  CHECK(res.n == 60);
  CHECK(summary.str().find("total") != std::string::npos);

  std::ostringstream csv;
  write_trace_csv(csv, res.outer.trace);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == kTraceHeader);
  std::size_t rows = 0;
  std::uint64_t prev_inner = 0, prev_rounds = 0, prev_bytes = 0;
  for (const auto& t : res.outer.trace) {
    ++rows;
    CHECK(t.outer_iter == rows);
    CHECK(t.inner_iters_cum > prev_inner);
    CHECK(t.rounds_cum > prev_rounds);
    CHECK(t.bytes_cum > prev_bytes);
    prev_inner = t.inner_iters_cum;
    prev_rounds = t.rounds_cum;
    prev_bytes = t.bytes_cum;
  }
  std::size_t csv_rows = 0;
  for (std::string l; std::getline(lines, l);) ++csv_rows;
  CHECK(rows == res.outer.steps.size());
  CHECK(csv_rows == rows);
  CHECK(res.outer.converged);
}

TEST_CASE("trace CSV formatting") {
  std::vector<TraceRecord> t{{1, 0.125, 3, 8, 64, 1.23456}};
  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str() == std::string(kTraceHeader) + "\n1,0.125,3,8,64,1.235\n");
}
