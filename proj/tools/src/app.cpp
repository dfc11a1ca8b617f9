#include "lqgcap/cli/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "lqgcap/capacity_lb.hpp"
#include "lqgcap/cli/config.hpp"
#include "lqgcap/cli/csv.hpp"
#include "lqgcap/cli/sweep.hpp"
#include "lqgcap/error.hpp"
#include "lqgcap/riccati.hpp"
#include "lqgcap/scop.hpp"
#include "lqgcap/simulator.hpp"

namespace lqgcap::cli {

namespace {

double single_budget(const RunConfig& cfg, const std::string& command) {
  if (!cfg.budget.value) {
    throw Error(ErrorCode::ConfigError, "'" + command + "' needs a scalar budget in the config");
  }
  return *cfg.budget.value;
}

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

int cmd_check(const RunConfig& cfg, const CliOptions& o) {
  CsvTable t;
  t.header = {"item", "status", "value", "detail"};
  const ValidationReport rep = validate_model(cfg.system, cfg.cost);
  std::vector<std::string> sym;
  for (const SymmetryDelta& d : rep.symmetry) {
    if (d.delta > 0.0) sym.push_back(d.field + " asymmetry " + format_cell(d.delta));
  }
  t.rows.push_back({std::string("validation"), std::string(rep.ok() ? "pass" : "fail"), 0.0, joined(sym)});
  const SystemModel sm = symmetrized(cfg.system);
  const CostWeights sw = symmetrized(cfg.cost);
  const FilterConstants fc = solve_filter_riccati(sm);
  t.rows.push_back({std::string("filter_regularity"), std::string(fc.warnings.empty() ? "pass" : "warn"),
                    fc.residual, joined(fc.warnings)});
  const ControlConstants cc = solve_control_riccati(sm, sw);
  t.rows.push_back({std::string("control_regularity"), std::string(cc.warnings.empty() ? "pass" : "warn"),
                    cc.residual, joined(cc.warnings)});
  const ProblemConstants pc = problem_constants(cfg.system, cfg.cost);
  t.rows.push_back({std::string("J_star"), std::string("pass"), pc.J_star, std::string()});
  write_csv(t, o.output);
  spdlog::info("J* = {:.12g}", pc.J_star);
  return kExitOk;
}

int cmd_ub(const RunConfig& cfg, const CliOptions& o, RateUnits units) {
  const double p = single_budget(cfg, "ub");
  const UBSolution s = solve_ub({cfg.system, cfg.cost, p}, cfg.solver);
  CsvTable t;
  t.header = {"budget", "ub_rate", "cost", "duality_gap", "riccati_lmi_slack", "M_norm", "iterations"};
  t.rows.push_back({p, to_units(s.rate, units), s.cost, s.duality_gap, s.riccati_lmi_slack,
                    information_noise_norm(s.decision), static_cast<long long>(s.iterations)});
  write_csv(t, o.output);
  return kExitOk;
}

int cmd_lb(const RunConfig& cfg, const CliOptions& o, RateUnits units) {
  const double p = single_budget(cfg, "lb");
  const PointSolution s = solve_point(cfg.system, cfg.cost, p, cfg.solver);
  CsvTable t;
  t.header = {"budget", "ub_rate", "lb_rate", "rate_gap", "achieved_budget", "riccati_residual",
              "sigma_match", "M_norm", "verdict", "route", "reasons"};
  t.rows.push_back({p, to_units(s.ub.rate, units), to_units(s.lb.rate, units),
                    to_units(s.certificate.rate_gap, units), s.lb.achieved_budget, s.certificate.riccati_residual,
                    s.certificate.sigma_match, information_noise_norm(s.ub.decision),
                    std::string(s.certificate.tight ? "CertifiedTight" : "NotCertified"),
                    to_string(s.certificate.route), joined(s.certificate.reasons)});
  write_csv(t, o.output);
  return kExitOk;
}

int cmd_capacity(const RunConfig& cfg, const CliOptions& o, RateUnits units) {
  const double p = single_budget(cfg, "capacity");
  const BudgetedProblem prob{cfg.system, cfg.cost, p};
  const UBSolution s = solve_scalar(prob, cfg.solver);
  CsvTable t;
  t.header = {"budget", "capacity", "Pi", "Gamma", "SigmaHat", "g3", "lambda2", "lambda3", "lambda4",
              "lambda5", "max_stationarity", "max_slackness", "kkt"};
  std::vector<CsvCell> row{p, to_units(s.rate, units), s.decision.Pi(0, 0), s.decision.Gamma(0, 0),
                           s.decision.SigmaHat(0, 0)};
  try {
    const KKTReport k = verify_scalar_kkt(prob, s);
    double stat = 0.0, slack = 0.0;
    for (double v : k.stationarity) stat = std::max(stat, std::abs(v));
    for (double v : k.slackness) slack = std::max(slack, v);
    row.insert(row.end(), {k.g3_value, k.multipliers[0], k.multipliers[1], k.multipliers[2], k.multipliers[3], stat,
                           slack, std::string("ok")});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSolution) throw;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.insert(row.end(), {nan, nan, nan, nan, nan, nan, nan, std::string("degenerate")});
  }
  t.rows.push_back(std::move(row));
  write_csv(t, o.output);
  return kExitOk;
}

int sweep_status(const std::vector<SweepRow>& rows) {
  const bool all_infeasible =
      !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.infeasible(); });
  if (all_infeasible) return kExitInfeasible;
  const bool failed = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.verdict == "Failed"; });
  return failed ? kExitError : kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const CliOptions& o, RateUnits units, int jobs) {
  const std::vector<double> budgets = cfg.budget.values();
  if (budgets.empty()) throw Error(ErrorCode::ConfigError, "'sweep' needs a budget");
  const std::vector<SweepRow> rows = budget_sweep(cfg.system, cfg.cost, budgets, cfg.solver, jobs);
  write_csv(sweep_table(rows, units), o.output);
  return sweep_status(rows);
}

int cmd_sweep_param(const RunConfig& cfg, const CliOptions& o, RateUnits units, int jobs) {
  const double p = single_budget(cfg, "sweep-param");
  const std::vector<ParamRow> rows = parameter_sweep(cfg, p, jobs);
  write_csv(parameter_table(rows, cfg.sweep_param->entry, units), o.output);
  std::vector<SweepRow> plain;
  for (const ParamRow& r : rows) plain.push_back(r.row);
  return sweep_status(plain);
}

int cmd_scop(const RunConfig& cfg, const CliOptions& o, RateUnits units, int jobs) {
  const double p = single_budget(cfg, "scop");
  const BudgetedProblem prob{cfg.system, cfg.cost, p};
  const UBSolution ub = solve_ub(prob, cfg.solver);
  const std::vector<int>& hs = cfg.scop.horizons;
  struct Row {
    bool infeasible = false;
    SCOPSolution sol;
    AveragedVariables avg;
    double chain = 0.0;
  };
  std::vector<Row> rows(hs.size());
  parallel_for(static_cast<int>(hs.size()), jobs, [&](int i) {
    try {
      rows[i].sol = solve_scop(prob, hs[i], cfg.solver, cfg.scop.schedule);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      rows[i].infeasible = true;
      spdlog::info("horizon {}: {}", hs[i], e.what());
      return;
    }
    rows[i].avg = average_variables(rows[i].sol);
    const std::vector<double> ch = chained_lmi_slacks(rows[i].sol);
    rows[i].chain = *std::min_element(ch.begin(), ch.end());
  });
  CsvTable t;
  t.header = {"horizon", "value", "ub_rate", "value_minus_ub", "slack_E_n", "cost", "avg_slack",
              "avg_feasible", "chained_min_eig", "iterations", "status"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool any_feasible = false;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const Row& r = rows[i];
    if (r.infeasible) {
      t.rows.push_back({static_cast<long long>(hs[i]), nan, to_units(ub.rate, units), nan, nan, nan, nan,
                        std::string(), nan, 0LL, std::string("Infeasible")});
      continue;
    }
    any_feasible = true;
    t.rows.push_back({static_cast<long long>(hs[i]), to_units(r.sol.value, units), to_units(ub.rate, units),
                      to_units(r.sol.value - ub.rate, units), r.sol.slack_E_n, r.sol.cost, r.avg.slack,
                      std::string(r.avg.feasible ? "yes" : "no"), r.chain, static_cast<long long>(r.sol.iterations),
                      std::string("Solved")});
  }
  write_csv(t, o.output);
  return any_feasible ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const RunConfig& cfg, const CliOptions& o, int jobs) {
  const double p = single_budget(cfg, "simulate");
  const PointSolution s = solve_point(cfg.system, cfg.cost, p, cfg.solver);
  SimConfig sc = cfg.sim;
  sc.jobs = jobs;
  const SimReport rep = simulate(cfg.system, cfg.cost, s.lb.policy, sc);
  const ComparisonVerdict v = compare_to_theory(rep, s.lb);
  CsvTable t;
  t.header = {"statistic", "empirical", "theory", "error", "tolerance", "passed"};
  for (const ComparisonItem& i : v.items) {
    t.rows.push_back({i.name, i.empirical, i.theory, i.error, i.tolerance, std::string(i.passed ? "yes" : "no")});
  }
  t.rows.push_back({std::string("cost_se"), rep.cost_se, 0.0, 0.0, 0.0, std::string("")});
  t.rows.push_back({std::string("max_abs_dither"), rep.max_abs_dither, 0.0, 0.0, 0.0, std::string("")});
  t.rows.push_back({std::string("samples"), static_cast<double>(rep.samples), 0.0, 0.0, 0.0, std::string("")});
  write_csv(t, o.output);
  spdlog::info("simulation {} ({} trajectories x {} steps)", v.passed ? "matches theory" : "disagrees with theory",
               sc.trajectories, sc.horizon);
  return kExitOk;
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::stderr_logger_mt("lqgcap");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("LQGCAP_LOG")) {
    const std::string s = env;
    level = spdlog::level::from_str(s);
    if (level == spdlog::level::off && s != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

int run(const CliOptions& o) {
  try {
    RunConfig cfg = load_config(o.config, o.lax);
    if (o.tol) cfg.solver.tol = *o.tol;
    if (o.max_iter) cfg.solver.max_iter = *o.max_iter;
    if (o.seed) cfg.sim.seed = *o.seed;
    const RateUnits units = o.units.value_or(cfg.units);
    const int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::string& c = o.command;
    if (c == "check") return cmd_check(cfg, o);
    if (c == "ub") return cmd_ub(cfg, o, units);
    if (c == "lb") return cmd_lb(cfg, o, units);
    if (c == "capacity") return cmd_capacity(cfg, o, units);
    if (c == "sweep") return cmd_sweep(cfg, o, units, jobs);
    if (c == "sweep-param") return cmd_sweep_param(cfg, o, units, jobs);
    if (c == "scop") return cmd_scop(cfg, o, units, jobs);
    if (c == "simulate") return cmd_simulate(cfg, o, jobs);
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + c + "'");
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return e.code() == ErrorCode::Infeasible ? kExitInfeasible : kExitError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
}

int main_entry(int argc, char** argv) {
  configure_logging();
  CLI::App app{"LQG system capacity: bounds, certificates, SCOP and Monte Carlo checks"};
  CliOptions o;
  std::string units;
  double tol = 0.0;
  int max_iter = 0;
  std::uint64_t seed = 0;
  app.add_option("command", o.command, "check | ub | lb | capacity | sweep | sweep-param | scop | simulate")
      ->required()
      ->check(CLI::IsMember({"check", "ub", "lb", "capacity", "sweep", "sweep-param", "scop", "simulate"}));
  app.add_option("--config", o.config, "JSON run configuration")->required();
  app.add_option("--output", o.output, "CSV destination (default stdout)");
  auto* units_opt = app.add_option("--units", units, "rate units")->check(CLI::IsMember({"bits", "nats"}));
  auto* tol_opt = app.add_option("--tol", tol, "barrier gap tolerance")->check(CLI::PositiveNumber);
  auto* iter_opt = app.add_option("--max-iter", max_iter, "Newton step budget")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "simulation seed");
  app.add_option("--jobs", o.jobs, "worker threads (default: logical cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--lax", o.lax, "ignore unknown config keys");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }
  if (*units_opt) o.units = units == "bits" ? RateUnits::Bits : RateUnits::Nats;
  if (*tol_opt) o.tol = tol;
  if (*iter_opt) o.max_iter = max_iter;
  if (*seed_opt) o.seed = seed;
  return run(o);
}

}  // namespace lqgcap::cli
