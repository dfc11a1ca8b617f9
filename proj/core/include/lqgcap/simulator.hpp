#ifndef LQGCAP_SIMULATOR_HPP
#define LQGCAP_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lqgcap/capacity_lb.hpp"
#include "lqgcap/model.hpp"
#include "lqgcap/riccati.hpp"

namespace lqgcap {

/// SplitMix64 stream with Marsaglia polar normals. Streams are keyed by
/// (seed, index), so trajectory t draws the same numbers on any thread.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on (−1, 1).
  double next_symmetric();
  double next_normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimConfig {
  int horizon = 2000;
  int trajectories = 200;
  std::uint64_t seed = 1;
  int burn_in = -1;  // negative means horizon / 10
  int jobs = 1;

  int effective_burn_in() const { return burn_in < 0 ? horizon / 10 : burn_in; }
};

struct SimReport {
  double empirical_cost = 0.0;
  double cost_se = 0.0;
  MatrixXd empirical_SigmaHat;  // k×k, covariance of ŝ − ŝ̂
  MatrixXd empirical_PsiY;      // p×p, covariance of ψ
  double empirical_rate = 0.0;  // nats per step
  double innovation_whiteness = 0.0;  // ‖Ψ̂^{-1/2} C₁ Ψ̂^{-1/2}‖₂
  double whiteness_bound = 0.0;       // 4/√(N·n)
  double orthogonality_z = 0.0;       // max |cov(s − ŝ, ŝ)| in standard errors
  double observer_orthogonality_z = 0.0;  // max |cov(ŝ_i − ŝ̂_i, ψ_{i−1})| in standard errors
  double max_abs_dither = 0.0;
  long long samples = 0;  // steps used per statistic, summed over trajectories
};

/// Closed-loop run of plant, controller Kalman filter and observer filter
/// under the policy, with steady-state gains from the first step.
SimReport simulate(const SystemModel& model, const CostWeights& weights, const Policy& policy,
                   const SimConfig& cfg);

struct SimTolerances {
  double cost_se = 3.0;
  double psi_rel = 0.03;
  double sigma_rel = 0.05;
  double rate_rel = 0.03;
  double rate_abs = 2e-3;  // nats; floor for rates near zero
  double orthogonality_z = 5.0;
};

struct ComparisonItem {
  std::string name;
  double empirical = 0.0;
  double theory = 0.0;
  double error = 0.0;  // same units as tolerance
  double tolerance = 0.0;
  bool passed = false;
};

struct ComparisonVerdict {
  std::vector<ComparisonItem> items;
  bool passed = false;
};

ComparisonVerdict compare_to_theory(const SimReport& report, const LBSolution& lb, const SimTolerances& tol = {});

}  // namespace lqgcap

#endif  // LQGCAP_SIMULATOR_HPP
