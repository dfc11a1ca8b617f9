#ifndef LQGCAP_CAPACITY_LB_HPP
#define LQGCAP_CAPACITY_LB_HPP

#include <string>
#include <vector>

#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/riccati.hpp"

namespace lqgcap {

struct LBSolution {
  Policy policy;
  PolicyRiccatiSolution riccati;
  double rate = 0.0;             // nats per step
  double achieved_budget = 0.0;  // p*
};

enum class CertificateRoute { None, Stabilizability, Recursion };

struct TightnessCertificate {
  double riccati_residual = 0.0;
  bool detectable = false;
  bool stabilizable = false;
  double sigma_match = 0.0;
  double rate_gap = 0.0;
  bool tight = false;
  CertificateRoute route = CertificateRoute::None;
  std::vector<std::string> reasons;
};

/// Γ̄ = Γ Σ̂†, M = Π − Γ Σ̂† Γᵀ clipped to PSD. clipped receives the clipped magnitude.
Policy extract_policy(const UBSolution& ub, const ControlConstants& control, double* clipped = nullptr,
                      double pinv_tol = 1e-10);

LBSolution evaluate_policy(const EstimatorModel& est, const CostWeights& weights, const ControlConstants& control,
                           const Policy& policy);

TightnessCertificate tightness_certificate(const UBSolution& ub, const LBSolution& lb, const EstimatorModel& est);

/// ‖Π − Γ Σ̂† Γᵀ‖_F at a decision.
double information_noise_norm(const UBDecision& d);

std::string to_string(CertificateRoute route);

}  // namespace lqgcap

#endif  // LQGCAP_CAPACITY_LB_HPP
