#ifndef LQGCAP_SCOP_HPP
#define LQGCAP_SCOP_HPP

#include <vector>

#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/riccati.hpp"

namespace lqgcap {

/// Decision at time i: (Π_i, Γ_i, Σ̂_{i+1}) plus the induced Ψ_{Y,i}.
struct SCOPStep {
  MatrixXd Pi, Gamma, SigmaHatNext, Psi_Y;
};

/// Which LQR constants enter the per-time cost: the backward recursion with
/// E_{n+1} = Q, or the steady-state triple at every step (E_{n+1} = E).
enum class LqrSchedule { TimeVarying, SteadyState };

struct SCOPSolution {
  int horizon = 0;
  std::vector<SCOPStep> per_time;
  double value = 0.0;      // nats per step
  double slack_E_n = 0.0;  // the terminal correction term inside the cost
  double cost = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  bool boundary = false;  // budget equals the fixed cost; all variables zero
  ProblemConstants constants;
  ControlSchedule schedule;
  MatrixXd Q;
  double budget = 0.0;

  /// Σ̂_i for i = 1..n+1 (Σ̂_1 = 0).
  MatrixXd sigma_hat(int i) const;
};

/// Cost of the all-zero decision; budgets below it are reported infeasible.
double scop_fixed_cost(const ProblemConstants& pc, const ControlSchedule& cs, const MatrixXd& q);

ControlSchedule steady_schedule(const ControlConstants& c, int horizon);

SCOPSolution solve_scop(const BudgetedProblem& problem, int horizon, const SolverOptions& opts = {},
                        LqrSchedule schedule = LqrSchedule::TimeVarying);

/// Time averages of the SCOP variables and how well they satisfy the
/// single-letter constraints.
struct AveragedVariables {
  UBDecision decision;
  double lmi1_min_eig = 0.0;
  double riccati_min_eig = 0.0;     // single-letter Schur form at the averages
  double riccati_correction = 0.0;  // ‖Σ̂_{n+1} − Σ̂_1‖_F / n
  double cost = 0.0;                // single-letter cost at the averages
  double cost_gap = 0.0;            // SCOP cost − single-letter cost
  double violation = 0.0;           // largest single-letter constraint violation
  double slack = 0.0;               // max of violation, riccati_correction and |cost_gap|
  bool feasible = false;            // LMIs hold and the cost exceeds p by at most −cost_gap
};

AveragedVariables average_variables(const SCOPSolution& sol);

/// Per-time LMI slacks: min eigenvalue of each (Σ̂_i, Σ̂_{i+1}) Riccati block.
std::vector<double> chained_lmi_slacks(const SCOPSolution& sol);

}  // namespace lqgcap

#endif  // LQGCAP_SCOP_HPP
