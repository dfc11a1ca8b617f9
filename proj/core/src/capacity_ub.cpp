#include "lqgcap/capacity_ub.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "lqgcap/barrier.hpp"
#include "packing.hpp"

namespace lqgcap {

ProblemConstants problem_constants(const SystemModel& model, const CostWeights& weights) {
  validate_model(model, weights).raise_if_invalid();
  const SystemModel sm = symmetrized(model);
  const CostWeights sw = symmetrized(weights);
  ProblemConstants pc;
  pc.estimator = reduce_to_estimator(sm);
  pc.control = solve_control_riccati(sm, sw);
  const EstimatorModel& e = pc.estimator;
  pc.J_star = (e.K_p * e.Psi * e.K_p.transpose() * pc.control.E).trace() + (e.Sigma * sw.Q).trace();
  return pc;
}

UBBlocks ub_blocks(const EstimatorModel& e, const UBDecision& d) {
  const MatrixXd& pi = d.Pi;
  const MatrixXd& g = d.Gamma;
  const MatrixXd& s = d.SigmaHat;
  UBBlocks b;
  b.Psi_Y = symmetrize(e.J * pi * e.J.transpose() + e.H * s * e.H.transpose() + e.H * g.transpose() * e.J.transpose() +
                       e.J * g * e.H.transpose() + e.Psi);
  b.cross = e.F * g.transpose() * e.J.transpose() + e.F * s * e.H.transpose() + e.G * pi * e.J.transpose() +
            e.G * g * e.H.transpose() + e.K_p * e.Psi;
  b.riccati = symmetrize(e.F * s * e.F.transpose() + e.F * g.transpose() * e.G.transpose() +
                         e.G * g * e.F.transpose() + e.G * pi * e.G.transpose() +
                         e.K_p * e.Psi * e.K_p.transpose() - s);
  const Eigen::Index m = pi.rows(), k = s.rows(), p = b.Psi_Y.rows();
  b.lmi1.resize(m + k, m + k);
  b.lmi1 << pi, g, g.transpose(), s;
  b.lmi2.resize(k + p, k + p);
  b.lmi2 << b.riccati, b.cross, b.cross.transpose(), b.Psi_Y;
  return b;
}

UBBlocks ub_blocks(const ProblemConstants& pc, const UBDecision& d) {
  UBBlocks b = ub_blocks(pc.estimator, d);
  const MatrixXd& pi = d.Pi;
  const MatrixXd& g = d.Gamma;
  const MatrixXd& s = d.SigmaHat;
  const ControlConstants& c = pc.control;
  const MatrixXd kpk = c.K_LQR.transpose() * c.Psi_LQR * c.K_LQR;
  b.cost = (s * kpk).trace() + (pi * c.Psi_LQR).trace() + 2.0 * (g * c.K_LQR.transpose() * c.Psi_LQR).trace() +
           pc.J_star;
  return b;
}

MatrixXd riccati_schur(const UBBlocks& b) {
  return symmetrize(b.riccati - b.cross * right_solve_pd(b.cross, b.Psi_Y).transpose());
}

double to_units(double nats, RateUnits units) {
  return units == RateUnits::Bits ? nats / std::log(2.0) : nats;
}

double rate_from_psi(const MatrixXd& Psi_Y, const MatrixXd& Psi, RateUnits units) {
  return to_units(0.5 * (logdet_pd(symmetrize(Psi_Y)) - logdet_pd(symmetrize(Psi))), units);
}

namespace {

// Σ̂ lives in range(U), the controllable subspace of (F − K_pH, G − K_pJ);
// Γ = Γ_r Uᵀ. Outside that subspace every feasible Σ̂ vanishes.
struct Layout {
  Eigen::Index m = 0, k = 0, r = 0;
  MatrixXd U;
  int gamma = 0, sigma = 0, n = 0;
};

Layout make_layout(const ProblemConstants& pc) {
  const EstimatorModel& e = pc.estimator;
  Layout l;
  l.m = e.G.cols();
  l.k = e.F.rows();
  l.U = detail::controllable_subspace(e.F - e.K_p * e.H, e.G - e.K_p * e.J);
  l.r = l.U.cols();
  l.gamma = detail::sym_count(l.m);
  l.sigma = l.gamma + static_cast<int>(l.m * l.r);
  l.n = l.sigma + detail::sym_count(l.r);
  return l;
}

UBDecision decode(const Layout& l, const VectorXd& x) {
  UBDecision d;
  d.Pi = detail::unpack_sym(x, 0, l.m);
  const MatrixXd gr = detail::unpack_dense(x, l.gamma, l.m, l.r);
  const MatrixXd s = detail::unpack_sym(x, l.sigma, l.r);
  d.Gamma = gr * l.U.transpose();
  d.SigmaHat = l.U * s * l.U.transpose();
  if (l.r == 0) {
    d.Gamma = MatrixXd::Zero(l.m, l.k);
    d.SigmaHat = MatrixXd::Zero(l.k, l.k);
  }
  return d;
}

VectorXd encode(const Layout& l, const UBDecision& d) {
  VectorXd x = VectorXd::Zero(l.n);
  detail::pack_sym(d.Pi, x, 0);
  if (l.r > 0) {
    detail::pack_dense(d.Gamma * l.U, x, l.gamma);
    detail::pack_sym(l.U.transpose() * d.SigmaHat * l.U, x, l.sigma);
  }
  return x;
}

MatrixXd reduced_lmi2(const Layout& l, const UBBlocks& b) {
  const Eigen::Index p = b.Psi_Y.rows();
  MatrixXd out(l.r + p, l.r + p);
  const MatrixXd ut_cross = l.U.transpose() * b.cross;
  out << l.U.transpose() * b.riccati * l.U, ut_cross, ut_cross.transpose(), b.Psi_Y;
  return symmetrize(out);
}

MatrixXd reduced_lmi1(const Layout& l, const VectorXd& x) {
  MatrixXd out(l.m + l.r, l.m + l.r);
  out << detail::unpack_sym(x, 0, l.m), detail::unpack_dense(x, l.gamma, l.m, l.r),
      detail::unpack_dense(x, l.gamma, l.m, l.r).transpose(), detail::unpack_sym(x, l.sigma, l.r);
  return out;
}

MaxDetProgram build_program(const ProblemConstants& pc, const Layout& l, double budget) {
  MaxDetProgram prog;
  prog.num_vars = l.n;
  auto blocks = [&](const VectorXd& x) { return ub_blocks(pc, decode(l, x)); };
  prog.objective.emplace_back(0.5, probe_affine(l.n, [&](const VectorXd& x) { return blocks(x).Psi_Y; }));
  prog.lmis.push_back(probe_affine(l.n, [&](const VectorXd& x) { return reduced_lmi1(l, x); }));
  if (l.r > 0) {
    prog.lmis.push_back(probe_affine(l.n, [&](const VectorXd& x) { return reduced_lmi2(l, blocks(x)); }));
  }
  const AffineMatrix cost = probe_affine(l.n, [&](const VectorXd& x) {
    MatrixXd c(1, 1);
    c(0, 0) = blocks(x).cost;
    return c;
  });
  LinearInequality lin;
  lin.rhs = budget - cost.constant(0, 0);
  for (const auto& [i, c] : cost.terms) lin.coeffs.emplace_back(i, c(0, 0));
  prog.linear.push_back(std::move(lin));
  return prog;
}

bool strict_in_program(const ProblemConstants& pc, const Layout& l, const UBDecision& d, double budget) {
  const VectorXd x = encode(l, d);
  const UBBlocks b = ub_blocks(pc, decode(l, x));
  if (!(b.cost < budget)) return false;
  if (!is_pd(reduced_lmi1(l, x))) return false;
  if (!is_pd(b.Psi_Y)) return false;
  return l.r == 0 || is_pd(reduced_lmi2(l, b));
}

Feasibility feasibility_impl(const BudgetedProblem& problem, const ProblemConstants& pc, const Layout& l) {
  Feasibility f;
  f.J_star = pc.J_star;
  const double p = problem.budget;
  if (!std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "budget must be finite");
  if (p < pc.J_star - 1e-9) {
    f.status = FeasibilityStatus::Infeasible;
    return f;
  }
  if (p <= pc.J_star + 1e-9) {
    f.status = FeasibilityStatus::Boundary;
    return f;
  }
  const EstimatorModel& e = pc.estimator;
  const Eigen::Index m = l.m, k = l.k;
  double eps = 0.5 * (p - pc.J_star) / (1.0 + pc.control.Psi_LQR.trace());
  for (int attempt = 0; attempt < 200; ++attempt, eps *= 0.5) {
    Policy pol{MatrixXd::Zero(m, k), eps * MatrixXd::Identity(m, m), pc.control.K_LQR};
    const PolicyRiccatiSolution prs = solve_policy_riccati(e, pol);
    UBDecision d{pol.M, MatrixXd::Zero(m, k), MatrixXd::Zero(k, k)};
    if (l.r == 0) {
      if (strict_in_program(pc, l, d, p)) {
        f.status = FeasibilityStatus::Strict;
        f.strict_point = d;
        return f;
      }
      continue;
    }
    // Back off along the Stein solution so the Riccati LMI becomes strict.
    const MatrixXd a_cl = e.F - prs.K_Y * e.H;
    const MatrixXd ar = l.U.transpose() * a_cl * l.U;
    const MatrixXd pr = solve_stein(ar, MatrixXd::Identity(l.r, l.r));
    const MatrixXd sr = l.U.transpose() * prs.SigmaHat * l.U;
    const double lo = min_eigenvalue(sr);
    if (!(lo > 0.0)) continue;
    double delta = 0.5 * lo / sym_eigenvalues(pr).maxCoeff();
    for (int shrink = 0; shrink < 60; ++shrink, delta *= 0.5) {
      d.SigmaHat = l.U * (sr - delta * pr) * l.U.transpose();
      if (strict_in_program(pc, l, d, p)) {
        f.status = FeasibilityStatus::Strict;
        f.strict_point = d;
        return f;
      }
    }
  }
  std::ostringstream os;
  os << "no strictly feasible point found for budget " << p << " (J* = " << pc.J_star << ")";
  throw Error(ErrorCode::SolverNonConvergence, os.str());
}

UBSolution zero_solution(const ProblemConstants& pc) {
  const EstimatorModel& e = pc.estimator;
  const Eigen::Index m = e.G.cols(), k = e.F.rows();
  UBSolution s;
  s.decision = {MatrixXd::Zero(m, m), MatrixXd::Zero(m, k), MatrixXd::Zero(k, k)};
  s.Psi_Y = e.Psi;
  s.K_Y = e.K_p;
  s.cost = pc.J_star;
  s.boundary = true;
  return s;
}

UBSolution finish(const ProblemConstants& pc, const UBDecision& d) {
  UBSolution s;
  s.decision = d;
  const UBBlocks b = ub_blocks(pc, d);
  s.Psi_Y = b.Psi_Y;
  s.K_Y = right_solve_pd(b.cross, b.Psi_Y);
  s.rate = rate_from_psi(b.Psi_Y, pc.estimator.Psi);
  s.cost = b.cost;
  s.riccati_lmi_slack = min_eigenvalue(riccati_schur(b));
  return s;
}

void throw_infeasible(const BudgetedProblem& problem, double j_star) {
  std::ostringstream os;
  os << "budget " << problem.budget << " is below the minimal LQG cost J* = " << j_star;
  throw Error(ErrorCode::Infeasible, os.str());
}

}  // namespace

Feasibility feasibility(const BudgetedProblem& problem) {
  const ProblemConstants pc = problem_constants(problem.model, problem.weights);
  return feasibility_impl(problem, pc, make_layout(pc));
}

UBSolution solve_ub(const BudgetedProblem& problem, const SolverOptions& opts) {
  const ProblemConstants pc = problem_constants(problem.model, problem.weights);
  const Layout l = make_layout(pc);
  const Feasibility f = feasibility_impl(problem, pc, l);
  if (f.status == FeasibilityStatus::Infeasible) throw_infeasible(problem, pc.J_star);
  if (f.status == FeasibilityStatus::Boundary) {
    UBSolution s = zero_solution(pc);
    s.state_feedback = l.r == 0;
    return s;
  }
  const MaxDetProgram prog = build_program(pc, l, problem.budget);
  BarrierOptions bo;
  bo.tol = opts.tol;
  bo.max_iter = opts.max_iter;
  const BarrierResult br = solve_maxdet(prog, encode(l, f.strict_point), bo);
  UBSolution s = finish(pc, decode(l, br.x));
  s.duality_gap = br.gap_bound;
  s.iterations = br.newton_iterations;
  s.state_feedback = l.r == 0;
  return s;
}

UBSolution solve_scalar(const BudgetedProblem& problem, const SolverOptions& opts) {
  const SystemModel& m = problem.model;
  if (m.k() != 1 || m.m() != 1 || m.p() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "the scalar path needs k = m = p = 1");
  }
  const ProblemConstants pc = problem_constants(problem.model, problem.weights);
  const double g = m.G(0, 0), h = m.H(0, 0), j = m.J(0, 0);
  const double k_lqr = pc.control.K_LQR(0, 0), k_p = pc.estimator.K_p(0, 0);
  const double scale_h = std::max({1.0, std::abs(h), std::abs(k_lqr * j)});
  if (std::abs(h - k_lqr * j) <= 1e-10 * scale_h) {
    throw Error(ErrorCode::AssumptionViolated, "H = K_LQR J: the scalar capacity formula does not apply");
  }
  const double scale_g = std::max({1.0, std::abs(g), std::abs(k_p * j)});
  if (std::abs(g - k_p * j) <= 1e-10 * scale_g) {
    // State feedback: Σ̂ = Γ = 0 and the budget buys input variance only.
    const double p = problem.budget;
    if (p < pc.J_star - 1e-9) throw_infeasible(problem, pc.J_star);
    UBDecision d{MatrixXd::Constant(1, 1, std::max(0.0, p - pc.J_star) / pc.control.Psi_LQR(0, 0)),
                 MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)};
    UBSolution s = finish(pc, d);
    s.boundary = p <= pc.J_star + 1e-9;
    s.state_feedback = true;
    s.exact = true;
    return s;
  }
  UBSolution s = solve_ub(problem, opts);
  s.exact = true;
  return s;
}

KKTReport verify_scalar_kkt(const BudgetedProblem& problem, const UBSolution& sol) {
  if (sol.decision.SigmaHat.size() != 1) throw Error(ErrorCode::DimensionMismatch, "KKT check is scalar only");
  const double sh = sol.decision.SigmaHat(0, 0);
  if (sol.boundary || sol.state_feedback || !(sh > 1e-12)) {
    throw Error(ErrorCode::DegenerateSolution, "Sigma-hat is zero; the KKT system of the scalar program is degenerate");
  }
  const ProblemConstants pc = problem_constants(problem.model, problem.weights);
  const EstimatorModel& e = pc.estimator;
  const double f = e.F(0, 0), g = e.G(0, 0), h = e.H(0, 0), j = e.J(0, 0);
  const double k_l = pc.control.K_LQR(0, 0), psi_l = pc.control.Psi_LQR(0, 0);
  const double pi = sol.decision.Pi(0, 0), gam = sol.decision.Gamma(0, 0);

  const UBBlocks b = ub_blocks(pc, sol.decision);
  const double psi_y = b.Psi_Y(0, 0);
  const double k_y = b.cross(0, 0) / psi_y;

  KKTReport r;
  r.constraints[0] = problem.budget - b.cost;
  r.constraints[1] = riccati_schur(b)(0, 0);
  r.constraints[2] = sh;
  r.constraints[3] = pi - gam * gam / sh;
  r.g3_value = r.constraints[1];

  // Columns: ∇g2, ∇g3, ∇g5 in (Π, Γ, Σ̂); g4 = Σ̂ > 0 is inactive, so λ4 = 0.
  Eigen::Vector3d obj(j * j, 2.0 * h * j, h * h);
  Eigen::Matrix3d a;
  a.col(0) << -psi_l, -2.0 * k_l * psi_l, -k_l * k_l * psi_l;
  a.col(1) << (g - k_y * j) * (g - k_y * j), 2.0 * (g - k_y * j) * (f - k_y * h), (f - k_y * h) * (f - k_y * h) - 1.0;
  a.col(2) << 1.0, -2.0 * gam / sh, gam * gam / (sh * sh);

  // Nonnegative least squares for a·λ = −obj by enumerating active sets.
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  double best_res = obj.norm();
  for (int mask = 1; mask < 8; ++mask) {
    std::vector<int> cols;
    for (int c = 0; c < 3; ++c) {
      if (mask & (1 << c)) cols.push_back(c);
    }
    MatrixXd sub(3, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(c) = a.col(cols[c]);
    const VectorXd lam = sub.colPivHouseholderQr().solve(-obj);
    if ((lam.array() < 0.0).any()) continue;
    const double res = (sub * lam + obj).norm();
    if (res < best_res) {
      best_res = res;
      best.setZero();
      for (std::size_t c = 0; c < cols.size(); ++c) best(cols[c]) = lam(c);
    }
  }
  r.multipliers = {best(0), best(1), 0.0, best(2)};
  const Eigen::Vector3d stat = obj + a * best;
  r.stationarity = {stat(0), stat(1), stat(2)};
  for (int i = 0; i < 4; ++i) r.slackness[i] = std::abs(r.constraints[i] * r.multipliers[i]);
  return r;
}

}  // namespace lqgcap
