#ifndef LQGCAP_MODEL_HPP
#define LQGCAP_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "lqgcap/error.hpp"
#include "lqgcap/linalg.hpp"

namespace lqgcap {

/// s_{i+1} = F s_i + G x_i + w_i,  y_i = H s_i + J x_i + v_i,
/// with cov([w; v]) = [[W, L], [Lᵀ, V]] and s_1 ~ N(0, Σ₁).
struct SystemModel {
  MatrixXd F, G, H, J;
  MatrixXd W, V, L;
  std::optional<MatrixXd> Sigma1;

  Eigen::Index k() const { return F.rows(); }
  Eigen::Index m() const { return G.cols(); }
  Eigen::Index p() const { return H.rows(); }

  /// Σ₁, defaulting to W.
  MatrixXd initial_covariance() const { return Sigma1 ? *Sigma1 : W; }
};

struct CostWeights {
  MatrixXd Q, R;
};

/// Controller-side Kalman filter model: ŝ_{i+1} = F ŝ_i + G x_i + K_p e_i,
/// y_i = H ŝ_i + J x_i + e_i with e_i ~ N(0, Ψ).
struct EstimatorModel {
  MatrixXd F, G, H, J;
  MatrixXd K_p, Psi;
  MatrixXd Sigma;
};

struct BudgetedProblem {
  SystemModel model;
  CostWeights weights;
  double budget = 0.0;
};

struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

struct SymmetryDelta {
  std::string field;
  double delta;  // ‖A − Aᵀ‖_F
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<SymmetryDelta> symmetry;

  bool ok() const { return violations.empty(); }
  /// Throws the first violation, if any.
  void raise_if_invalid() const;
};

ValidationReport validate_model(const SystemModel& model, const CostWeights& weights);

/// Copies with every symmetric field replaced by (A + Aᵀ)/2.
SystemModel symmetrized(const SystemModel& model);
CostWeights symmetrized(const CostWeights& weights);

EstimatorModel reduce_to_estimator(const SystemModel& model);

/// J* = Tr(K_p Ψ K_pᵀ E) + Tr(Σ Q).
double minimal_lqg_cost(const SystemModel& model, const CostWeights& weights);

}  // namespace lqgcap

#endif  // LQGCAP_MODEL_HPP
