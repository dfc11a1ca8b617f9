#include "lqgcap/model.hpp"

#include <sstream>

#include "lqgcap/riccati.hpp"

namespace lqgcap {
namespace {

std::string dims(const MatrixXd& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

class Checker {
 public:
  explicit Checker(ValidationReport& r) : r_(r) {}

  void shape(const char* field, const MatrixXd& a, Eigen::Index rows, Eigen::Index cols) {
    if (a.rows() != rows || a.cols() != cols) {
      std::ostringstream os;
      os << field << " is " << dims(a) << ", expected " << rows << "x" << cols;
      r_.violations.push_back({ErrorCode::DimensionMismatch, field, os.str()});
    }
  }

  // Returns false when the field is too asymmetric to use.
  bool symmetric(const char* field, const MatrixXd& a) {
    if (a.rows() != a.cols()) return false;
    const double delta = (a - a.transpose()).norm();
    r_.symmetry.push_back({field, delta});
    if (delta > 1e-8 * a.norm()) {
      std::ostringstream os;
      os << field << " is not symmetric (||A - A'||_F = " << delta << ")";
      r_.violations.push_back({ErrorCode::NotSymmetric, field, os.str()});
      return false;
    }
    return true;
  }

  void psd(const char* field, const MatrixXd& a) {
    if (!is_psd(symmetrize(a))) {
      r_.violations.push_back({ErrorCode::NotPositiveDefinite, field, std::string(field) + " is not positive semidefinite"});
    }
  }

  void pd(const char* field, const MatrixXd& a) {
    if (!is_pd(symmetrize(a))) {
      r_.violations.push_back({ErrorCode::NotPositiveDefinite, field, std::string(field) + " is not positive definite"});
    }
  }

 private:
  ValidationReport& r_;
};

}  // namespace

void ValidationReport::raise_if_invalid() const {
  if (!violations.empty()) throw Error(violations.front().code, violations.front().message);
}

ValidationReport validate_model(const SystemModel& model, const CostWeights& weights) {
  ValidationReport r;
  Checker c(r);
  const Eigen::Index k = model.F.rows(), m = model.G.cols(), p = model.H.rows();
  if (k == 0 || m == 0 || p == 0) {
    r.violations.push_back({ErrorCode::DimensionMismatch, "F", "state, input and output dimensions must be positive"});
    return r;
  }
  const std::size_t before = r.violations.size();
  c.shape("F", model.F, k, k);
  c.shape("G", model.G, k, m);
  c.shape("H", model.H, p, k);
  c.shape("J", model.J, p, m);
  c.shape("W", model.W, k, k);
  c.shape("V", model.V, p, p);
  c.shape("L", model.L, k, p);
  if (model.Sigma1) c.shape("Sigma1", *model.Sigma1, k, k);
  c.shape("Q", weights.Q, k, k);
  c.shape("R", weights.R, m, m);
  if (r.violations.size() != before) return r;

  const bool w_ok = c.symmetric("W", model.W);
  const bool v_ok = c.symmetric("V", model.V);
  const bool q_ok = c.symmetric("Q", weights.Q);
  const bool r_ok = c.symmetric("R", weights.R);
  bool s_ok = true;
  if (model.Sigma1) s_ok = c.symmetric("Sigma1", *model.Sigma1);

  if (v_ok) c.pd("V", model.V);
  if (r_ok) c.pd("R", weights.R);
  if (w_ok) c.psd("W", model.W);
  if (q_ok) c.psd("Q", weights.Q);
  if (s_ok && model.Sigma1) c.psd("Sigma1", *model.Sigma1);
  if (w_ok && v_ok) {
    MatrixXd joint(k + p, k + p);
    joint << symmetrize(model.W), model.L, model.L.transpose(), symmetrize(model.V);
    if (!is_psd(joint)) {
      r.violations.push_back({ErrorCode::JointNoiseNotPSD, "L", "joint noise covariance [[W, L], [L', V]] is not positive semidefinite"});
    }
  }
  if (!model.F.allFinite() || !model.G.allFinite() || !model.H.allFinite() || !model.J.allFinite() ||
      !model.W.allFinite() || !model.V.allFinite() || !model.L.allFinite() || !weights.Q.allFinite() ||
      !weights.R.allFinite()) {
    r.violations.push_back({ErrorCode::InvalidArgument, "model", "non-finite matrix entry"});
  }
  return r;
}

SystemModel symmetrized(const SystemModel& model) {
  SystemModel out = model;
  out.W = symmetrize(model.W);
  out.V = symmetrize(model.V);
  if (model.Sigma1) out.Sigma1 = symmetrize(*model.Sigma1);
  return out;
}

CostWeights symmetrized(const CostWeights& weights) {
  return {symmetrize(weights.Q), symmetrize(weights.R)};
}

EstimatorModel reduce_to_estimator(const SystemModel& model) {
  const FilterConstants fc = solve_filter_riccati(model);
  return {model.F, model.G, model.H, model.J, fc.K_p, fc.Psi, fc.Sigma};
}

double minimal_lqg_cost(const SystemModel& model, const CostWeights& weights) {
  const FilterConstants fc = solve_filter_riccati(model);
  const ControlConstants cc = solve_control_riccati(model, weights);
  return (fc.K_p * fc.Psi * fc.K_p.transpose() * cc.E).trace() + (fc.Sigma * weights.Q).trace();
}

}  // namespace lqgcap
