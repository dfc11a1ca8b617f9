#ifndef LQGCAP_BARRIER_HPP
#define LQGCAP_BARRIER_HPP

#include <utility>
#include <vector>

#include "lqgcap/linalg.hpp"

namespace lqgcap {

/// A(x) = C0 + Σ x_i C_i over a sparse set of variables.
struct AffineMatrix {
  MatrixXd constant;
  std::vector<std::pair<int, MatrixXd>> terms;

  MatrixXd eval(const VectorXd& x) const;
};

/// aᵀx ≤ rhs.
struct LinearInequality {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;

  double slack(const VectorXd& x) const;
};

/// maximize Σ w_j logdet O_j(x)  s.t.  L_b(x) ⪰ 0,  aᵀx ≤ b.
struct MaxDetProgram {
  int num_vars = 0;
  std::vector<std::pair<double, AffineMatrix>> objective;
  std::vector<AffineMatrix> lmis;
  std::vector<LinearInequality> linear;

  double objective_value(const VectorXd& x) const;
  /// Smallest eigenvalue over all constraint blocks and linear slacks.
  double min_slack(const VectorXd& x) const;
  bool strictly_feasible(const VectorXd& x) const;
};

struct BarrierOptions {
  double tol = 1e-12;       // stop when μ·ν ≤ tol
  int max_iter = 5000;      // total Newton steps
  double mu0 = 1.0;
  double mu_factor = 0.2;
  double backtrack = 0.5;
  double armijo = 0.01;
  double newton_tol = 1e-9; // on λ² of the scaled centering objective
};

struct BarrierResult {
  VectorXd x;
  double objective = 0.0;
  double gap_bound = 0.0;  // μ·ν at exit
  int newton_iterations = 0;
  int outer_iterations = 0;
};

/// Primal barrier path following from a strictly feasible x0. Throws
/// SolverNonConvergence when the Newton budget is exhausted.
BarrierResult solve_maxdet(const MaxDetProgram& prog, const VectorXd& x0, const BarrierOptions& opts = {});

/// Builds affine maps by probing a function that is affine in x.
template <class F>
AffineMatrix probe_affine(int num_vars, F&& f, double drop_tol = 0.0) {
  AffineMatrix a;
  VectorXd x = VectorXd::Zero(num_vars);
  a.constant = f(x);
  for (int i = 0; i < num_vars; ++i) {
    x(i) = 1.0;
    MatrixXd c = f(x) - a.constant;
    x(i) = 0.0;
    if (c.cwiseAbs().maxCoeff() > drop_tol) a.terms.emplace_back(i, std::move(c));
  }
  return a;
}

}  // namespace lqgcap

#endif  // LQGCAP_BARRIER_HPP
