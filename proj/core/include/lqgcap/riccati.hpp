#ifndef LQGCAP_RICCATI_HPP
#define LQGCAP_RICCATI_HPP

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "lqgcap/linalg.hpp"
#include "lqgcap/model.hpp"

namespace lqgcap {

struct IterationOptions {
  int max_iter = 100000;
  double tol = 1e-11;
  int plateau_window = 500;
};

struct FilterConstants {
  MatrixXd Sigma, K_p, Psi;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

struct ControlConstants {
  MatrixXd E, K_LQR, Psi_LQR;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

/// x = −K_LQR ŝ̂ + Γ̄ (ŝ − ŝ̂) + m,  m ~ N(0, M).
struct Policy {
  MatrixXd GammaBar, M, K_LQR;
};

struct PolicyRiccatiSolution {
  MatrixXd SigmaHat, K_Y, Psi_Y;
  int iterations = 0;
  double residual = 0.0;
  bool bootstrapped = false;
  /// ρ((F + GΓ̄) − K_Y (H + JΓ̄)).
  double closed_loop_radius = 0.0;
};

/// Time-varying LQR data from the backward recursion with E_{n+1} = Q.
/// E has n+1 entries (E[i] = E_{i+1}); K and Psi have n entries.
struct ControlSchedule {
  std::vector<MatrixXd> E, K, Psi;
};

FilterConstants solve_filter_riccati(const SystemModel& model, const IterationOptions& opts = {});

ControlConstants solve_control_riccati(const SystemModel& model, const CostWeights& weights,
                                       const IterationOptions& opts = {});

PolicyRiccatiSolution solve_policy_riccati(const EstimatorModel& est, const Policy& policy,
                                           const IterationOptions& opts = {});

ControlSchedule control_schedule(const SystemModel& model, const CostWeights& weights, int horizon);

struct PolicyStep {
  MatrixXd next;  // Σ̂_{i+1}
  MatrixXd K_Y, Psi_Y;
};

/// One step of the policy-induced error recursion from Σ̂_i.
PolicyStep policy_step(const EstimatorModel& est, const MatrixXd& gamma_bar, const MatrixXd& M,
                       const MatrixXd& sigma_hat);

struct FilterRecursion {
  SystemModel model;
  MatrixXd initial;  // Σ_1; empty means zero
};

struct ControlRecursion {
  SystemModel model;
  CostWeights weights;
};

struct PolicyRecursion {
  EstimatorModel estimator;
  Policy policy;
  MatrixXd initial;  // Σ̂_1; empty means zero
};

using RecursionData = std::variant<FilterRecursion, ControlRecursion, PolicyRecursion>;

/// Returns steps+1 matrices starting from the initial condition. The control
/// kind runs backward: element j is E_{n+1-j} with E_{n+1} = Q.
std::vector<MatrixXd> riccati_recursion(const RecursionData& data, int steps);

enum class PbhMode { Detectable, Stabilizable, UnitCircleControllable };

struct PbhResult {
  bool passed = true;
  std::complex<double> eigenvalue{0.0, 0.0};
  Eigen::VectorXcd witness;
  double ratio = 0.0;  // smallest ‖xᴴB‖/‖x‖ over the tested eigenvalues

  explicit operator bool() const { return passed; }
};

/// Detectable mode tests (A, B) as a state/output pair through its dual.
PbhResult pbh_test(const MatrixXd& a, const MatrixXd& b, PbhMode mode, double tol = 1e-8);

}  // namespace lqgcap

#endif  // LQGCAP_RICCATI_HPP
