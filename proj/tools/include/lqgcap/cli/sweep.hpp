#ifndef LQGCAP_CLI_SWEEP_HPP
#define LQGCAP_CLI_SWEEP_HPP

#include <functional>
#include <string>
#include <vector>

#include "lqgcap/capacity_lb.hpp"
#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/cli/config.hpp"
#include "lqgcap/cli/csv.hpp"

namespace lqgcap::cli {

/// Rates in nats; conversion happens when rows become CSV.
struct SweepRow {
  double budget = 0.0;
  double ub_rate = 0.0;
  double lb_rate = 0.0;
  double rate_gap = 0.0;
  double riccati_residual = 0.0;
  double M_norm = 0.0;
  std::string verdict;  // CertifiedTight, NotCertified, Infeasible or Failed
  int iterations = 0;
  std::string detail;   // certificate reasons or the error message
  bool infeasible() const { return verdict == "Infeasible"; }
};

struct PointSolution {
  UBSolution ub;
  LBSolution lb;
  TightnessCertificate certificate;
};

/// UB, extracted-policy LB and certificate at one budget. Throws on failure.
PointSolution solve_point(const SystemModel& model, const CostWeights& weights, double budget,
                          const SolverOptions& opts);

/// Never throws for a solver failure; the row records it instead.
SweepRow evaluate_budget(const SystemModel& model, const CostWeights& weights, double budget,
                         const SolverOptions& opts);

/// Runs f(0..n-1) on up to `jobs` threads; results keep index order.
void parallel_for(int n, int jobs, const std::function<void(int)>& f);

std::vector<SweepRow> budget_sweep(const SystemModel& model, const CostWeights& weights,
                                   const std::vector<double>& budgets, const SolverOptions& opts, int jobs);

struct ParamRow {
  double value = 0.0;
  SweepRow row;
};

std::vector<ParamRow> parameter_sweep(const RunConfig& cfg, double budget, int jobs);

std::vector<std::string> sweep_header();
std::vector<CsvCell> sweep_cells(const SweepRow& row, RateUnits units);

CsvTable sweep_table(const std::vector<SweepRow>& rows, RateUnits units);
CsvTable parameter_table(const std::vector<ParamRow>& rows, const std::string& entry, RateUnits units);

}  // namespace lqgcap::cli

#endif  // LQGCAP_CLI_SWEEP_HPP
