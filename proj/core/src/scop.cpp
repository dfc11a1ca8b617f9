#include "lqgcap/scop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lqgcap/barrier.hpp"
#include "packing.hpp"

namespace lqgcap {

namespace {

int horizon_cap(Eigen::Index k) { return k == 1 ? 64 : 16; }

// Σ̂_i = U_i S_i U_iᵀ with U_1 empty and U_{i+1} = range([(F − K_pH)U_i, G − K_pJ]).
// Γ_i = Γr_i U_iᵀ, so Γ_1 = 0.
struct Layout {
  int n = 0;
  Eigen::Index m = 0, k = 0;
  std::vector<MatrixXd> U;  // U[i], i = 1..n+1; U[0] unused
  std::vector<int> pi, gamma, sigma;
  int num_vars = 0;

  Eigen::Index r(int i) const { return U[i].cols(); }
};

Layout make_layout(const EstimatorModel& e, int n) {
  Layout l;
  l.n = n;
  l.m = e.G.cols();
  l.k = e.F.rows();
  l.U.assign(n + 2, MatrixXd(l.k, 0));
  const MatrixXd a = e.F - e.K_p * e.H;
  const MatrixXd b = e.G - e.K_p * e.J;
  for (int i = 1; i <= n; ++i) {
    MatrixXd stacked(l.k, l.r(i) + b.cols());
    stacked << a * l.U[i], b;
    l.U[i + 1] = range_basis(stacked);
  }
  l.pi.assign(n + 2, 0);
  l.gamma.assign(n + 2, 0);
  l.sigma.assign(n + 2, 0);
  int t = 0;
  for (int i = 1; i <= n; ++i) {
    l.pi[i] = t;
    t += detail::sym_count(l.m);
    l.gamma[i] = t;
    t += static_cast<int>(l.m * l.r(i));
    l.sigma[i + 1] = t;
    t += detail::sym_count(l.r(i + 1));
  }
  l.num_vars = t;
  return l;
}

MatrixXd reduced_sigma(const Layout& l, const VectorXd& x, int i) {
  if (i == 1) return MatrixXd(0, 0);
  return detail::unpack_sym(x, l.sigma[i], l.r(i));
}

MatrixXd full_sigma(const Layout& l, const VectorXd& x, int i) {
  if (l.r(i) == 0) return MatrixXd::Zero(l.k, l.k);
  return l.U[i] * reduced_sigma(l, x, i) * l.U[i].transpose();
}

UBDecision decode_step(const Layout& l, const VectorXd& x, int i) {
  UBDecision d;
  d.Pi = detail::unpack_sym(x, l.pi[i], l.m);
  d.Gamma = l.r(i) == 0 ? MatrixXd::Zero(l.m, l.k)
                        : MatrixXd(detail::unpack_dense(x, l.gamma[i], l.m, l.r(i)) * l.U[i].transpose());
  d.SigmaHat = full_sigma(l, x, i);
  return d;
}

// Indices that step i's blocks depend on.
std::vector<int> step_indices(const Layout& l, int i) {
  std::vector<int> idx;
  const int pi_end = l.gamma[i];
  const int gamma_end = l.gamma[i] + static_cast<int>(l.m * l.r(i));
  for (int t = l.pi[i]; t < pi_end; ++t) idx.push_back(t);
  for (int t = l.gamma[i]; t < gamma_end; ++t) idx.push_back(t);
  if (i > 1) {
    for (int t = 0; t < detail::sym_count(l.r(i)); ++t) idx.push_back(l.sigma[i] + t);
  }
  for (int t = 0; t < detail::sym_count(l.r(i + 1)); ++t) idx.push_back(l.sigma[i + 1] + t);
  return idx;
}

template <class F>
AffineMatrix probe_subset(int num_vars, const std::vector<int>& idx, F&& f) {
  AffineMatrix a;
  VectorXd x = VectorXd::Zero(num_vars);
  a.constant = f(x);
  for (int i : idx) {
    x(i) = 1.0;
    MatrixXd c = f(x) - a.constant;
    x(i) = 0.0;
    if (c.cwiseAbs().maxCoeff() > 0.0) a.terms.emplace_back(i, std::move(c));
  }
  return a;
}

MatrixXd step_lmi1(const Layout& l, const VectorXd& x, int i) {
  const Eigen::Index m = l.m, r = l.r(i);
  MatrixXd out(m + r, m + r);
  const MatrixXd pi = detail::unpack_sym(x, l.pi[i], m);
  if (r == 0) return pi;
  const MatrixXd gr = detail::unpack_dense(x, l.gamma[i], m, r);
  out << pi, gr, gr.transpose(), reduced_sigma(l, x, i);
  return out;
}

struct StepBlocks {
  MatrixXd Psi_Y, lmi2;
  double cost = 0.0;  // per-time trace terms, before the 1/n weight
};

StepBlocks step_blocks(const ProblemConstants& pc, const ControlSchedule& cs, const Layout& l, const VectorXd& x,
                       int i) {
  const UBDecision d = decode_step(l, x, i);
  const UBBlocks b = ub_blocks(pc.estimator, d);
  StepBlocks s;
  s.Psi_Y = b.Psi_Y;
  const Eigen::Index r1 = l.r(i + 1), p = b.Psi_Y.rows();
  if (r1 > 0) {
    const MatrixXd& u = l.U[i + 1];
    const MatrixXd ric = b.riccati + d.SigmaHat - full_sigma(l, x, i + 1);
    const MatrixXd ut_cross = u.transpose() * b.cross;
    s.lmi2.resize(r1 + p, r1 + p);
    s.lmi2 << u.transpose() * ric * u, ut_cross, ut_cross.transpose(), b.Psi_Y;
    s.lmi2 = symmetrize(s.lmi2);
  }
  const MatrixXd& k = cs.K[i - 1];
  const MatrixXd& psi_l = cs.Psi[i - 1];
  s.cost = (d.SigmaHat * k.transpose() * psi_l * k).trace() + (d.Pi * psi_l).trace() +
           2.0 * (d.Gamma * k.transpose() * psi_l).trace();
  return s;
}

double fixed_cost(const ProblemConstants& pc, const ControlSchedule& cs, const MatrixXd& q, double* e_n) {
  const EstimatorModel& e = pc.estimator;
  const int n = static_cast<int>(cs.K.size());
  const MatrixXd kpk = e.K_p * e.Psi * e.K_p.transpose();
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) sum += (kpk * cs.E[i]).trace();
  // Σ̂_1 = 0 and cov(ŝ̂_1) = 0; the Σ̂_{n+1} part of ℰ_n is a decision term.
  const double tr_sq = (e.Sigma * q).trace();
  if (e_n) *e_n = tr_sq / n;
  return sum / n + tr_sq + tr_sq / n;
}

// Tr(Σ̂_{n+1}(Q − E_{n+1}))/n; zero for the time-varying schedule.
double terminal_cost(const ControlSchedule& cs, const MatrixXd& q, const MatrixXd& sigma_next) {
  const int n = static_cast<int>(cs.K.size());
  return (sigma_next * (q - cs.E[n])).trace() / n;
}

MaxDetProgram build_program(const ProblemConstants& pc, const ControlSchedule& cs, const MatrixXd& q, const Layout& l,
                            double budget) {
  MaxDetProgram prog;
  prog.num_vars = l.num_vars;
  const int n = l.n;
  LinearInequality lin;
  double c0 = fixed_cost(pc, cs, q, nullptr);
  for (int i = 1; i <= n; ++i) {
    const std::vector<int> idx = step_indices(l, i);
    prog.objective.emplace_back(0.5 / n, probe_subset(l.num_vars, idx, [&](const VectorXd& x) {
                                  return step_blocks(pc, cs, l, x, i).Psi_Y;
                                }));
    prog.lmis.push_back(probe_subset(l.num_vars, idx, [&](const VectorXd& x) { return step_lmi1(l, x, i); }));
    if (l.r(i + 1) > 0) {
      prog.lmis.push_back(
          probe_subset(l.num_vars, idx, [&](const VectorXd& x) { return step_blocks(pc, cs, l, x, i).lmi2; }));
    }
    const AffineMatrix c = probe_subset(l.num_vars, idx, [&](const VectorXd& x) {
      MatrixXd v(1, 1);
      v(0, 0) = step_blocks(pc, cs, l, x, i).cost / n;
      return v;
    });
    c0 += c.constant(0, 0);
    for (const auto& [j, v] : c.terms) lin.coeffs.emplace_back(j, v(0, 0));
  }
  if (l.r(n + 1) > 0) {
    std::vector<int> idx;
    for (int t = 0; t < detail::sym_count(l.r(n + 1)); ++t) idx.push_back(l.sigma[n + 1] + t);
    prog.lmis.push_back(
        probe_subset(l.num_vars, idx, [&](const VectorXd& x) { return reduced_sigma(l, x, n + 1); }));
    const AffineMatrix t = probe_subset(l.num_vars, idx, [&](const VectorXd& x) {
      MatrixXd v(1, 1);
      v(0, 0) = terminal_cost(cs, q, full_sigma(l, x, n + 1));
      return v;
    });
    for (const auto& [j, v] : t.terms) lin.coeffs.emplace_back(j, v(0, 0));
  }
  lin.rhs = budget - c0;
  prog.linear.push_back(std::move(lin));
  return prog;
}

// Policy (Γ̄ = 0, M = εI) run from Σ̂_1 = 0, with every Σ̂_{i+1} pulled back
// along P_{i+1} = A_i P_i A_iᵀ + I so each chained Riccati LMI is strict.
VectorXd strict_start(const ProblemConstants& pc, const Layout& l, const MaxDetProgram& prog, double room) {
  const EstimatorModel& e = pc.estimator;
  const int n = l.n;
  const Eigen::Index m = l.m, k = l.k;
  double eps = 0.5 * room / (1.0 + pc.control.Psi_LQR.trace());
  for (int attempt = 0; attempt < 200; ++attempt, eps *= 0.5) {
    const MatrixXd mm = eps * MatrixXd::Identity(m, m);
    std::vector<MatrixXd> rec(n + 2), red(n + 2), pr(n + 2);
    rec[1] = MatrixXd::Zero(k, k);
    pr[1] = MatrixXd(0, 0);
    double delta = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int i = 1; i <= n; ++i) {
      const PolicyStep ps = policy_step(e, MatrixXd::Zero(m, k), mm, rec[i]);
      rec[i + 1] = ps.next;
      const MatrixXd a = l.U[i + 1].transpose() * (e.F - ps.K_Y * e.H) * l.U[i];
      pr[i + 1] = a * pr[i] * a.transpose() + MatrixXd::Identity(l.r(i + 1), l.r(i + 1));
      if (l.r(i + 1) == 0) continue;
      red[i + 1] = symmetrize(l.U[i + 1].transpose() * rec[i + 1] * l.U[i + 1]);
      const double lo = min_eigenvalue(red[i + 1]);
      if (!(lo > 0.0)) {
        ok = false;
        break;
      }
      delta = std::min(delta, 0.5 * lo / sym_eigenvalues(pr[i + 1]).maxCoeff());
    }
    if (!ok) continue;
    if (!std::isfinite(delta)) delta = 0.0;
    for (int shrink = 0; shrink < 60; ++shrink, delta *= 0.5) {
      VectorXd x = VectorXd::Zero(l.num_vars);
      for (int i = 1; i <= n; ++i) {
        detail::pack_sym(mm, x, l.pi[i]);
        if (l.r(i + 1) > 0) detail::pack_sym(red[i + 1] - delta * pr[i + 1], x, l.sigma[i + 1]);
      }
      if (prog.strictly_feasible(x)) return x;
    }
  }
  throw Error(ErrorCode::SolverNonConvergence, "no strictly feasible point found for the SCOP");
}

}  // namespace

MatrixXd SCOPSolution::sigma_hat(int i) const {
  if (i < 1 || i > horizon + 1) throw Error(ErrorCode::InvalidArgument, "time index out of range");
  if (i == 1) {
    const Eigen::Index k = constants.estimator.F.rows();
    return MatrixXd::Zero(k, k);
  }
  return per_time[i - 2].SigmaHatNext;
}

double scop_fixed_cost(const ProblemConstants& pc, const ControlSchedule& cs, const MatrixXd& q) {
  return fixed_cost(pc, cs, q, nullptr);
}

ControlSchedule steady_schedule(const ControlConstants& c, int horizon) {
  ControlSchedule cs;
  cs.E.assign(horizon + 1, c.E);
  cs.K.assign(horizon, c.K_LQR);
  cs.Psi.assign(horizon, c.Psi_LQR);
  return cs;
}

SCOPSolution solve_scop(const BudgetedProblem& problem, int horizon, const SolverOptions& opts,
                        LqrSchedule schedule) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  const Eigen::Index k = problem.model.k();
  if (horizon > horizon_cap(k)) {
    std::ostringstream os;
    os << "horizon " << horizon << " exceeds the cap " << horizon_cap(k) << " for k = " << k;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (!std::isfinite(problem.budget)) throw Error(ErrorCode::InvalidArgument, "budget must be finite");

  SCOPSolution sol;
  sol.horizon = horizon;
  sol.budget = problem.budget;
  sol.constants = problem_constants(problem.model, problem.weights);
  sol.Q = symmetrized(problem.weights).Q;
  sol.schedule = schedule == LqrSchedule::TimeVarying
                     ? control_schedule(symmetrized(problem.model), symmetrized(problem.weights), horizon)
                     : steady_schedule(sol.constants.control, horizon);
  const ProblemConstants& pc = sol.constants;
  const EstimatorModel& e = pc.estimator;
  const double c0 = fixed_cost(pc, sol.schedule, sol.Q, &sol.slack_E_n);
  const double p = problem.budget;
  if (p < c0 - 1e-9) {
    std::ostringstream os;
    os << "budget " << p << " is below the horizon-" << horizon << " fixed cost " << c0;
    throw Error(ErrorCode::Infeasible, os.str());
  }

  const Layout l = make_layout(e, horizon);
  VectorXd x = VectorXd::Zero(l.num_vars);
  if (p <= c0 + 1e-9) {
    sol.boundary = true;
  } else {
    const MaxDetProgram prog = build_program(pc, sol.schedule, sol.Q, l, p);
    BarrierOptions bo;
    bo.tol = opts.tol;
    bo.max_iter = opts.max_iter;
    const BarrierResult br = solve_maxdet(prog, strict_start(pc, l, prog, p - c0), bo);
    x = br.x;
    sol.duality_gap = br.gap_bound;
    sol.iterations = br.newton_iterations;
  }

  sol.cost = c0 + terminal_cost(sol.schedule, sol.Q, full_sigma(l, x, horizon + 1));
  sol.slack_E_n += terminal_cost(sol.schedule, sol.Q, full_sigma(l, x, horizon + 1));
  const double logdet_psi = logdet_pd(e.Psi);
  for (int i = 1; i <= horizon; ++i) {
    const UBDecision d = decode_step(l, x, i);
    const StepBlocks b = step_blocks(pc, sol.schedule, l, x, i);
    sol.per_time.push_back({d.Pi, d.Gamma, full_sigma(l, x, i + 1), b.Psi_Y});
    sol.value += 0.5 * (logdet_pd(b.Psi_Y) - logdet_psi) / horizon;
    sol.cost += b.cost / horizon;
  }
  return sol;
}

AveragedVariables average_variables(const SCOPSolution& sol) {
  const int n = sol.horizon;
  if (n < 1 || static_cast<int>(sol.per_time.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "average_variables needs a solved SCOP");
  }
  AveragedVariables av;
  UBDecision& d = av.decision;
  d.Pi = MatrixXd::Zero(sol.per_time[0].Pi.rows(), sol.per_time[0].Pi.cols());
  d.Gamma = MatrixXd::Zero(sol.per_time[0].Gamma.rows(), sol.per_time[0].Gamma.cols());
  d.SigmaHat = MatrixXd::Zero(sol.per_time[0].SigmaHatNext.rows(), sol.per_time[0].SigmaHatNext.cols());
  for (int i = 1; i <= n; ++i) {
    d.Pi += sol.per_time[i - 1].Pi / n;
    d.Gamma += sol.per_time[i - 1].Gamma / n;
    d.SigmaHat += sol.sigma_hat(i) / n;
  }
  const UBBlocks b = ub_blocks(sol.constants, d);
  av.lmi1_min_eig = min_eigenvalue(symmetrize(b.lmi1));
  av.riccati_min_eig = min_eigenvalue(riccati_schur(b));
  av.riccati_correction = (sol.sigma_hat(n + 1) - sol.sigma_hat(1)).norm() / n;
  av.cost = b.cost;
  av.cost_gap = sol.cost - b.cost;
  const double tol = 1e-8 * (1.0 + std::abs(sol.budget));
  av.violation = std::max({0.0, -av.lmi1_min_eig, -av.riccati_min_eig, av.cost - sol.budget});
  av.slack = std::max({av.violation, av.riccati_correction, std::abs(av.cost_gap)});
  av.feasible = av.lmi1_min_eig >= -tol && av.riccati_min_eig >= -tol &&
                av.cost <= sol.budget + std::max(0.0, -av.cost_gap) + tol;
  return av;
}

std::vector<double> chained_lmi_slacks(const SCOPSolution& sol) {
  std::vector<double> out;
  const EstimatorModel& e = sol.constants.estimator;
  for (int i = 1; i <= sol.horizon; ++i) {
    const SCOPStep& s = sol.per_time[i - 1];
    const UBBlocks b = ub_blocks(e, {s.Pi, s.Gamma, sol.sigma_hat(i)});
    const Eigen::Index k = b.riccati.rows(), p = b.Psi_Y.rows();
    MatrixXd lmi(k + p, k + p);
    lmi << b.riccati + sol.sigma_hat(i) - s.SigmaHatNext, b.cross, b.cross.transpose(), b.Psi_Y;
    out.push_back(min_eigenvalue(symmetrize(lmi)));
  }
  return out;
}

}  // namespace lqgcap
