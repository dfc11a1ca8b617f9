#include "lqgcap/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <thread>

#include <spdlog/spdlog.h>

#include "lqgcap/error.hpp"

namespace lqgcap::cli {

PointSolution solve_point(const SystemModel& model, const CostWeights& weights, double budget,
                          const SolverOptions& opts) {
  const ProblemConstants pc = problem_constants(model, weights);
  PointSolution s;
  s.ub = solve_ub({model, weights, budget}, opts);
  const Policy policy = extract_policy(s.ub, pc.control);
  s.lb = evaluate_policy(pc.estimator, symmetrized(weights), pc.control, policy);
  s.certificate = tightness_certificate(s.ub, s.lb, pc.estimator);
  return s;
}

SweepRow evaluate_budget(const SystemModel& model, const CostWeights& weights, double budget,
                         const SolverOptions& opts) {
  SweepRow row;
  row.budget = budget;
  try {
    const PointSolution s = solve_point(model, weights, budget, opts);
    row.ub_rate = s.ub.rate;
    row.lb_rate = s.lb.rate;
    row.rate_gap = s.certificate.rate_gap;
    row.riccati_residual = s.certificate.riccati_residual;
    row.M_norm = information_noise_norm(s.ub.decision);
    row.iterations = s.ub.iterations;
    row.verdict = s.certificate.tight ? "CertifiedTight" : "NotCertified";
    for (const std::string& r : s.certificate.reasons) row.detail += (row.detail.empty() ? "" : "; ") + r;
    spdlog::debug("budget {:.6g}: ub {:.10g} lb {:.10g} {} ({})", budget, row.ub_rate, row.lb_rate, row.verdict,
                  to_string(s.certificate.route));
  } catch (const Error& e) {
    row.verdict = e.code() == ErrorCode::Infeasible ? "Infeasible" : "Failed";
    row.ub_rate = row.lb_rate = row.rate_gap = row.riccati_residual = row.M_norm =
        std::numeric_limits<double>::quiet_NaN();
    row.detail = std::string(to_string(e.code())) + ": " + e.what();
    spdlog::warn("budget {:.6g}: {}", budget, row.detail);
  }
  return row;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
  jobs = std::clamp(jobs, 1, std::max(1, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<SweepRow> budget_sweep(const SystemModel& model, const CostWeights& weights,
                                   const std::vector<double>& budgets, const SolverOptions& opts, int jobs) {
  std::vector<SweepRow> rows(budgets.size());
  parallel_for(static_cast<int>(budgets.size()), jobs,
               [&](int i) { rows[i] = evaluate_budget(model, weights, budgets[i], opts); });
  return rows;
}

std::vector<ParamRow> parameter_sweep(const RunConfig& cfg, double budget, int jobs) {
  if (!cfg.sweep_param) throw Error(ErrorCode::ConfigError, "sweep-param needs a sweep_param block");
  const ParamSweep& ps = *cfg.sweep_param;
  const std::vector<double> values = ps.grid.values();
  std::vector<ParamRow> rows(values.size());
  parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
    SystemModel m = cfg.system;
    CostWeights w = cfg.cost;
    set_entry(m, w, ps.entry, ps.row, ps.col, values[i]);
    rows[i].value = values[i];
    rows[i].row = evaluate_budget(m, w, budget, cfg.solver);
  });
  return rows;
}

std::vector<std::string> sweep_header() {
  return {"budget", "ub_rate", "lb_rate", "rate_gap", "riccati_residual", "M_norm", "verdict", "iterations"};
}

std::vector<CsvCell> sweep_cells(const SweepRow& r, RateUnits units) {
  return {r.budget,
          to_units(r.ub_rate, units),
          to_units(r.lb_rate, units),
          to_units(r.rate_gap, units),
          r.riccati_residual,
          r.M_norm,
          r.verdict,
          static_cast<long long>(r.iterations)};
}

CsvTable sweep_table(const std::vector<SweepRow>& rows, RateUnits units) {
  CsvTable t;
  t.header = sweep_header();
  for (const SweepRow& r : rows) t.rows.push_back(sweep_cells(r, units));
  return t;
}

CsvTable parameter_table(const std::vector<ParamRow>& rows, const std::string& entry, RateUnits units) {
  CsvTable t;
  t.header = sweep_header();
  t.header.insert(t.header.begin(), entry);
  for (const ParamRow& r : rows) {
    std::vector<CsvCell> cells = sweep_cells(r.row, units);
    cells.insert(cells.begin(), r.value);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace lqgcap::cli
