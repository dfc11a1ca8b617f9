#include <benchmark/benchmark.h>

#include "lqgcap/capacity_lb.hpp"
#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/riccati.hpp"
#include "lqgcap/scop.hpp"
#include "lqgcap/simulator.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

static void BM_FilterRiccatiS2(benchmark::State& state) {
  const SystemModel m = s2_model();
  for (auto _ : state) benchmark::DoNotOptimize(solve_filter_riccati(m));
}
BENCHMARK(BM_FilterRiccatiS2);

static void BM_ControlRiccatiS2(benchmark::State& state) {
  const SystemModel m = s2_model();
  const CostWeights w = s2_weights();
  for (auto _ : state) benchmark::DoNotOptimize(solve_control_riccati(m, w));
}
BENCHMARK(BM_ControlRiccatiS2);

static void BM_SolveScalar(benchmark::State& state) {
  const BudgetedProblem pr = s1_problem(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_scalar(pr));
}
BENCHMARK(BM_SolveScalar);

static void BM_SolveUbS1(benchmark::State& state) {
  const BudgetedProblem pr = s1_problem(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ub(pr));
}
BENCHMARK(BM_SolveUbS1);

static void BM_SolveUbS2(benchmark::State& state) {
  const BudgetedProblem pr = s2_problem(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_ub(pr));
}
BENCHMARK(BM_SolveUbS2)->Arg(90)->Arg(150)->Arg(240);

static void BM_PolicyEvaluationS2(benchmark::State& state) {
  const BudgetedProblem pr = s2_problem(150.0);
  const ProblemConstants pc = problem_constants(pr.model, pr.weights);
  const Policy pol = extract_policy(solve_ub(pr), pc.control);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_policy(pc.estimator, pr.weights, pc.control, pol));
}
BENCHMARK(BM_PolicyEvaluationS2);

static void BM_ScopS1(benchmark::State& state) {
  const BudgetedProblem pr = s1_problem(2.0);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scop(pr, n));
}
BENCHMARK(BM_ScopS1)->Arg(2)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SimulateS1(benchmark::State& state) {
  const BudgetedProblem pr = s1_problem(2.0);
  const ProblemConstants pc = problem_constants(pr.model, pr.weights);
  const Policy pol = extract_policy(solve_ub(pr), pc.control);
  SimConfig cfg;
  cfg.horizon = 2000;
  cfg.trajectories = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(pr.model, pr.weights, pol, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.trajectories * cfg.horizon);
}
BENCHMARK(BM_SimulateS1)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
