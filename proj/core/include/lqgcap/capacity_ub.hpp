#ifndef LQGCAP_CAPACITY_UB_HPP
#define LQGCAP_CAPACITY_UB_HPP

#include <array>

#include "lqgcap/linalg.hpp"
#include "lqgcap/model.hpp"
#include "lqgcap/riccati.hpp"

namespace lqgcap {

enum class RateUnits { Nats, Bits };

struct UBDecision {
  MatrixXd Pi;        // m×m
  MatrixXd Gamma;     // m×k
  MatrixXd SigmaHat;  // k×k
};

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 5000;
};

/// Steady-state data shared by every program built on one model.
struct ProblemConstants {
  EstimatorModel estimator;
  ControlConstants control;
  double J_star = 0.0;
};

ProblemConstants problem_constants(const SystemModel& model, const CostWeights& weights);

/// Affine blocks of the upper-bound program at a decision.
struct UBBlocks {
  MatrixXd lmi1;      // [[Π, Γ], [Γᵀ, Σ̂]]
  MatrixXd riccati;   // FΣ̂Fᵀ + FΓᵀGᵀ + GΓFᵀ + GΠGᵀ + K_pΨK_pᵀ − Σ̂
  MatrixXd cross;     // K_Y Ψ_Y
  MatrixXd Psi_Y;
  MatrixXd lmi2;      // [[riccati, cross], [crossᵀ, Ψ_Y]]
  double cost = 0.0;  // five-term trace cost
};

/// Matrix blocks only; cost is left at zero.
UBBlocks ub_blocks(const EstimatorModel& est, const UBDecision& d);
UBBlocks ub_blocks(const ProblemConstants& pc, const UBDecision& d);

/// Schur residual of the Riccati block: riccati − cross Ψ_Y⁻¹ crossᵀ.
MatrixXd riccati_schur(const UBBlocks& b);

struct UBSolution {
  UBDecision decision;
  MatrixXd Psi_Y, K_Y;
  double rate = 0.0;  // nats per step
  double cost = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double riccati_lmi_slack = 0.0;
  bool boundary = false;        // zero solution at p within 1e-9 of J*
  bool exact = false;           // scalar path: the rate is the capacity
  bool state_feedback = false;  // Σ̂ structurally zero
};

enum class FeasibilityStatus { Infeasible, Boundary, Strict };

struct Feasibility {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  UBDecision strict_point;
  double J_star = 0.0;
};

Feasibility feasibility(const BudgetedProblem& problem);

UBSolution solve_ub(const BudgetedProblem& problem, const SolverOptions& opts = {});

double rate_from_psi(const MatrixXd& Psi_Y, const MatrixXd& Psi, RateUnits units = RateUnits::Nats);

double to_units(double nats, RateUnits units);

UBSolution solve_scalar(const BudgetedProblem& problem, const SolverOptions& opts = {});

/// Multipliers of the scalar program written as: maximize Ψ_Y subject to
/// g2 (budget) ≥ 0, g3 (Riccati) ≥ 0, g4 = Σ̂ ≥ 0, g5 = Π − Γ²/Σ̂ ≥ 0.
struct KKTReport {
  std::array<double, 4> multipliers{};   // λ2..λ5
  std::array<double, 4> constraints{};   // g2..g5
  std::array<double, 3> stationarity{};  // ∂Π, ∂Γ, ∂Σ̂
  std::array<double, 4> slackness{};     // |g_i λ_i|
  double g3_value = 0.0;
};

KKTReport verify_scalar_kkt(const BudgetedProblem& problem, const UBSolution& sol);

}  // namespace lqgcap

#endif  // LQGCAP_CAPACITY_UB_HPP
