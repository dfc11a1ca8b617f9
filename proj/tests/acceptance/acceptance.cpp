// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lqgcap/capacity_lb.hpp"
#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/cli/config.hpp"
#include "lqgcap/cli/sweep.hpp"
#include "lqgcap/riccati.hpp"
#include "lqgcap/scop.hpp"
#include "lqgcap/simulator.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_norm(const MatrixXd& r, const MatrixXd& x) { return r.norm() / std::max(1.0, x.norm()); }

Policy extracted(const BudgetedProblem& pr) {
  const ProblemConstants pc = problem_constants(pr.model, pr.weights);
  return extract_policy(solve_ub(pr), pc.control);
}

Outcome riccati_residuals() {
  const Policy pol1 = extracted(s1_problem(2.0));
  const Policy pol2 = extracted(s2_problem(150.0));
  const auto t0 = Clock::now();
  double worst = 0.0, s1_sigma = 0.0, s1_e = 0.0;
  const std::vector<std::tuple<SystemModel, CostWeights, Policy>> cases{
      {s1_model(), s1_weights(), pol1}, {s2_model(), s2_weights(), pol2}};
  for (const auto& [m, w, pol] : cases) {
    const FilterConstants f = solve_filter_riccati(m);
    worst = std::max(worst, rel_norm(m.F * f.Sigma * m.F.transpose() + m.W -
                                         (m.F * f.Sigma * m.H.transpose() + m.L) * f.K_p.transpose() - f.Sigma,
                                     f.Sigma));
    const ControlConstants c = solve_control_riccati(m, w);
    worst = std::max(worst, rel_norm(m.F.transpose() * c.E * m.F + w.Q -
                                         c.K_LQR.transpose() * c.Psi_LQR * c.K_LQR - c.E,
                                     c.E));
    const EstimatorModel e = reduce_to_estimator(m);
    const PolicyRiccatiSolution s = solve_policy_riccati(e, pol);
    const PolicyStep st = policy_step(e, pol.GammaBar, pol.M, s.SigmaHat);
    worst = std::max(worst, rel_norm(st.next - s.SigmaHat, s.SigmaHat));
    if (m.k() == 1) {
      s1_sigma = std::abs(f.Sigma(0, 0) - kS1Sigma);
      s1_e = std::abs(c.E(0, 0) - kS1Sigma);
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && s1_sigma <= 1e-9 && s1_e <= 1e-9 && t < 1.0,
          fmt("max relative residual %.2e (tol 1e-9); S1 |Sigma-root| %.1e, |E-root| %.1e (tol 1e-9); %.3f s (limit 1 s)",
              worst, s1_sigma, s1_e, t)};
}

std::vector<cli::SweepRow> s1_rows;

Outcome scalar_tightness() {
  const cli::RunConfig cfg = cli::load_config(source_path("configs/scalar.json"));
  const auto t0 = Clock::now();
  s1_rows = cli::budget_sweep(cfg.system, cfg.cost, cfg.budget.values(), cfg.solver, jobs());
  const UBSolution at_jstar = solve_scalar(s1_problem(minimal_lqg_cost(cfg.system, cfg.cost)));
  const double t = seconds_since(t0);
  double gap = 0.0;
  int tight = 0;
  for (const auto& r : s1_rows) {
    gap = std::max(gap, std::isnan(r.rate_gap) ? std::numeric_limits<double>::infinity() : r.ub_rate - r.lb_rate);
    tight += r.verdict == "CertifiedTight";
  }
  const bool ok = s1_rows.size() == 28 && gap <= 1e-6 && tight == 28 && std::abs(at_jstar.rate) <= 1e-8 && t < 30.0;
  return {ok, fmt("%zu budgets, max ub-lb %.2e nats (tol 1e-6), %d/28 CertifiedTight, C(J*) = %.1e (tol 1e-8); "
                  "%.2f s (limit 30 s)",
                  s1_rows.size(), gap, tight, at_jstar.rate, t)};
}

Outcome s1_curve_shape() {
  double m_norm = 0.0, mono = 0.0, concave = 0.0;
  for (std::size_t i = 0; i < s1_rows.size(); ++i) {
    m_norm = std::max(m_norm, s1_rows[i].M_norm);
    if (i > 0) mono = std::max(mono, s1_rows[i - 1].ub_rate - s1_rows[i].ub_rate);
    if (i > 0 && i + 1 < s1_rows.size())
      concave = std::max(concave, 0.5 * (s1_rows[i - 1].ub_rate + s1_rows[i + 1].ub_rate) - s1_rows[i].ub_rate);
  }
  const bool ok = !s1_rows.empty() && m_norm <= 1e-6 && mono <= 1e-7 && concave <= 1e-7;
  return {ok, fmt("max M_norm %.2e (tol 1e-6); max decrease %.2e, max midpoint-concavity violation %.2e (tol 1e-7)",
                  m_norm, mono, concave)};
}

Outcome g_sweep_regimes() {
  const cli::RunConfig cfg = cli::load_config(source_path("configs/scalar_gsweep.json"));
  const auto rows = cli::parameter_sweep(cfg, 5.0, jobs());
  int positive = 0, zero = 0;
  double g_pos = std::nan(""), g_zero = std::nan("");
  for (const auto& r : rows) {
    if (r.row.M_norm > 1e-3) {
      if (positive++ == 0) g_pos = r.value;
    } else if (r.row.M_norm <= 1e-6) {
      if (zero++ == 0) g_zero = r.value;
    }
  }
  return {positive > 0 && zero > 0,
          fmt("G in [0.2, 3.0], %zu points at p=5: %d with M_norm > 1e-3 (first G=%.2f), %d with M_norm <= 1e-6 "
              "(first G=%.2f)",
              rows.size(), positive, g_pos, zero, g_zero)};
}

Outcome s2_bounds_coincide() {
  const cli::RunConfig cfg = cli::load_config(source_path("configs/vector3.json"));
  const double jstar = minimal_lqg_cost(cfg.system, cfg.cost);
  const auto budgets = cfg.budget.values();
  const auto t0 = Clock::now();
  const auto rows = cli::budget_sweep(cfg.system, cfg.cost, budgets, cfg.solver, jobs());
  const double t = seconds_since(t0);
  double worst = 0.0;
  bool above = true;
  for (const auto& r : rows) {
    above = above && r.budget > jstar;
    const double g = (r.ub_rate - r.lb_rate) / std::max(r.ub_rate, 1e-9);
    worst = std::max(worst, std::isnan(g) ? std::numeric_limits<double>::infinity() : g);
  }
  const bool ok = rows.size() == 20 && above && worst <= 1e-3 && t < 120.0;
  return {ok, fmt("%zu budgets in [%.0f, %.0f] above J*=%.4f, max relative gap %.2e (tol 1e-3); %.2f s (limit 120 s)",
                  rows.size(), budgets.front(), budgets.back(), jstar, worst, t)};
}

nlohmann::json oracle_points() {
  std::ifstream in(source_path("tests/oracle/fixtures/scalar_oracle.json"));
  return nlohmann::json::parse(in)["points"];
}

Outcome special_cases() {
  CostWeights q0 = s1_weights();
  q0.Q = scalar(0.0);
  double err_q0 = 0.0;
  int n = 0;
  for (const auto& pt : oracle_points()) {
    if (pt["case"] != "S1_Q0") continue;
    err_q0 = std::max(err_q0, std::abs(solve_ub({s1_model(), q0, pt["budget"].get<double>()}).rate -
                                       pt["rate_nats"].get<double>()));
    ++n;
  }
  const ProblemConstants pc = problem_constants(s1_model(), s1_weights());
  const LBSolution lqg =
      evaluate_policy(pc.estimator, s1_weights(), pc.control, Policy{scalar(0.0), scalar(0.0), pc.control.K_LQR});
  const double cost_err = std::abs(lqg.achieved_budget - pc.J_star);
  const bool ok = n > 0 && err_q0 <= 1e-6 && std::abs(lqg.rate) <= 1e-9 && cost_err <= 1e-9;
  return {ok, fmt("(a) Q=0 vs reduced power-constrained program at %d budgets: max error %.2e (tol 1e-6); "
                  "(b) policy (0,0): rate %.1e, |cost-J*| %.1e (tol 1e-9)",
                  n, err_q0, lqg.rate, cost_err)};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  int n = 0;
  for (const auto& pt : oracle_points()) {
    if (pt["case"] != "S1") continue;
    worst = std::max(worst, std::abs(solve_scalar(s1_problem(pt["budget"].get<double>())).rate -
                                     pt["rate_nats"].get<double>()));
    ++n;
  }
  return {n == 3 && worst <= 1e-5,
          fmt("p in {1.5, 2, 3}: %d points, max |solve_scalar - oracle| %.2e nats (tol 1e-5)", n, worst)};
}

Outcome scop_sanity() {
  const BudgetedProblem pr = s1_problem(2.0);
  const double ub = solve_ub(pr).rate;
  bool ok = true;
  std::string detail;
  double prev_slack = std::nan("");
  for (int n : {1, 2, 4, 8, 16}) {
    try {
      const SCOPSolution s = solve_scop(pr, n);
      const AveragedVariables a = average_variables(s);
      double chained = std::numeric_limits<double>::infinity();
      for (double e : chained_lmi_slacks(s)) chained = std::min(chained, e);
      const bool ratio_ok = std::isnan(prev_slack) || a.slack <= 0.75 * prev_slack;
      const bool pass = s.value <= ub + 1e-6 && a.feasible && a.slack <= 2.0 / n && ratio_ok && chained >= -1e-8;
      ok = ok && pass;
      detail += fmt(" n=%d: value %.5f, slack %.4f%s;", n, s.value, a.slack,
                    std::isnan(prev_slack) ? "" : fmt(" (ratio %.3f)", a.slack / prev_slack).c_str());
      prev_slack = a.slack;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) {
        ok = false;
        detail += fmt(" n=%d: error %s;", n, e.what());
        continue;
      }
      detail += fmt(" n=%d: infeasible (value -inf, no averages);", n);
    }
  }
  return {ok, fmt("UB %.5f;", ub) + detail + " tol: value <= UB+1e-6, slack <= 2/n, ratio <= 0.75, chained LMI >= -1e-8"};
}

Outcome monte_carlo() {
  const cli::RunConfig cfg = cli::load_config(source_path("configs/scalar_p2.json"));
  const BudgetedProblem pr{cfg.system, cfg.cost, *cfg.budget.value};
  const ProblemConstants pc = problem_constants(pr.model, pr.weights);
  const LBSolution lb = evaluate_policy(pc.estimator, pr.weights, pc.control, extract_policy(solve_ub(pr), pc.control));
  SimConfig sc = cfg.sim;
  sc.jobs = jobs();
  const auto t0 = Clock::now();
  const SimReport r = simulate(pr.model, pr.weights, lb.policy, sc);
  const double t = seconds_since(t0);
  sc.jobs = 1;
  const SimReport again = simulate(pr.model, pr.weights, lb.policy, sc);
  const double z = std::abs(r.empirical_cost - lb.achieved_budget) / r.cost_se;
  const double psi_rel = std::abs(r.empirical_PsiY(0, 0) - lb.riccati.Psi_Y(0, 0)) / lb.riccati.Psi_Y(0, 0);
  const bool same = r.empirical_cost == again.empirical_cost && r.cost_se == again.cost_se &&
                    r.empirical_PsiY == again.empirical_PsiY && r.empirical_SigmaHat == again.empirical_SigmaHat &&
                    r.empirical_rate == again.empirical_rate && r.innovation_whiteness == again.innovation_whiteness;
  const bool ok = sc.trajectories == 200 && sc.horizon == 2000 && sc.effective_burn_in() == 200 && z <= 3.0 &&
                  psi_rel <= 0.03 && r.innovation_whiteness <= r.whiteness_bound && same && t < 60.0;
  return {ok, fmt("N=%d n=%d burn-in %d: cost z %.2f (tol 3), Psi_Y rel %.2e (tol 0.03), lag-1 %.2e <= %.2e, "
                  "repeat bit-identical %s; %.2f s (limit 60 s)",
                  sc.trajectories, sc.horizon, sc.effective_burn_in(), z, psi_rel, r.innovation_whiteness,
                  r.whiteness_bound, same ? "yes" : "no", t)};
}

Outcome kkt() {
  const BudgetedProblem pr = s1_problem(2.0);
  const KKTReport k = verify_scalar_kkt(pr, solve_scalar(pr));
  double slack = 0.0, stat = 0.0;
  for (double s : k.slackness) slack = std::max(slack, s);
  for (double s : k.stationarity) stat = std::max(stat, std::abs(s));
  const bool ok = std::abs(k.g3_value) <= 1e-6 && slack <= 1e-6 && stat <= 1e-5;
  return {ok, fmt("|g3| %.2e (tol 1e-6), max slackness %.2e (tol 1e-6), max stationarity %.2e (tol 1e-5)",
                  std::abs(k.g3_value), slack, stat)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Riccati residuals", riccati_residuals},
      {"scalar tightness", scalar_tightness},
      {"S1 sweep shape", s1_curve_shape},
      {"G sweep regimes", g_sweep_regimes},
      {"S2 bounds coincide", s2_bounds_coincide},
      {"special cases", special_cases},
      {"oracle equivalence", oracle_equivalence},
      {"SCOP sanity", scop_sanity},
      {"Monte Carlo", monte_carlo},
      {"KKT diagnostics", kkt},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.passed;
    std::printf("criterion %zu %s: %s | %s\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
