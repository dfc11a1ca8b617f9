#include "lqgcap/capacity_lb.hpp"

#include <sstream>

namespace lqgcap {

Policy extract_policy(const UBSolution& ub, const ControlConstants& control, double* clipped, double pinv_tol) {
  const UBDecision& d = ub.decision;
  Policy pol;
  pol.GammaBar = d.Gamma * pinv(d.SigmaHat, pinv_tol);
  pol.M = clip_psd(symmetrize(d.Pi - pol.GammaBar * d.Gamma.transpose()), clipped);
  pol.K_LQR = control.K_LQR;
  return pol;
}

double information_noise_norm(const UBDecision& d) {
  return symmetrize(d.Pi - d.Gamma * pinv(d.SigmaHat) * d.Gamma.transpose()).norm();
}

LBSolution evaluate_policy(const EstimatorModel& est, const CostWeights& weights, const ControlConstants& control,
                           const Policy& policy) {
  LBSolution lb;
  lb.policy = policy;
  lb.riccati = solve_policy_riccati(est, policy);
  lb.rate = rate_from_psi(lb.riccati.Psi_Y, est.Psi);
  const MatrixXd& s = lb.riccati.SigmaHat;
  const MatrixXd gamma = policy.GammaBar * s;
  const MatrixXd pi = gamma * policy.GammaBar.transpose() + policy.M;
  const MatrixXd kpk = control.K_LQR.transpose() * control.Psi_LQR * control.K_LQR;
  lb.achieved_budget = (s * kpk).trace() + (pi * control.Psi_LQR).trace() +
                       (est.K_p * est.Psi * est.K_p.transpose() * control.E).trace() +
                       2.0 * (gamma * control.K_LQR.transpose() * control.Psi_LQR).trace() +
                       (est.Sigma * weights.Q).trace();
  return lb;
}

TightnessCertificate tightness_certificate(const UBSolution& ub, const LBSolution& lb, const EstimatorModel& est) {
  TightnessCertificate c;
  const UBDecision& d = ub.decision;
  const MatrixXd& gb = lb.policy.GammaBar;
  const MatrixXd& m = lb.policy.M;

  const UBBlocks b = ub_blocks(est, d);
  c.riccati_residual = riccati_schur(b).norm();

  c.detectable = static_cast<bool>(pbh_test(est.F + est.G * gb, est.H + est.J * gb, PbhMode::Detectable));

  const Eigen::Index mm = m.rows(), p = est.Psi.rows();
  const MatrixXd jmj = symmetrize(est.J * m * est.J.transpose() + est.Psi);
  const MatrixXd f_s = est.F + est.G * gb -
                       (est.G * m * est.J.transpose() + est.K_p * est.Psi) * Eigen::LLT<MatrixXd>(jmj).solve(est.H + est.J * gb);
  MatrixXd left(mm + p, p);
  left << m * est.J.transpose(), est.Psi;
  MatrixXd w_s = MatrixXd::Zero(mm + p, mm + p);
  w_s.topLeftCorner(mm, mm) = m;
  w_s.bottomRightCorner(p, p) = est.Psi;
  w_s = symmetrize(w_s - left * Eigen::LLT<MatrixXd>(jmj).solve(left.transpose()));
  MatrixXd g_s(est.F.rows(), mm + p);
  g_s << est.G, est.K_p;
  c.stabilizable = static_cast<bool>(pbh_test(f_s, g_s * w_s, PbhMode::Stabilizable));

  c.sigma_match = (lb.riccati.SigmaHat - d.SigmaHat).norm();
  c.rate_gap = ub.rate - lb.rate;

  const double scale = 1.0 + d.SigmaHat.norm();
  std::ostringstream os;
  if (c.riccati_residual > 1e-6 * scale) {
    os << "Riccati residual " << c.riccati_residual << " exceeds " << 1e-6 * scale;
    c.reasons.push_back(os.str());
    os.str("");
  }
  if (!c.detectable) c.reasons.push_back("(F + G GammaBar, H + J GammaBar) not detectable");
  if (c.stabilizable) {
    c.route = CertificateRoute::Stabilizability;
  } else if (c.sigma_match <= 1e-6 * scale) {
    c.route = CertificateRoute::Recursion;
  } else {
    os << "(F^s, G^s W^s) not stabilizable and the policy recursion misses Sigma-hat by " << c.sigma_match;
    c.reasons.push_back(os.str());
    os.str("");
  }
  if (c.rate_gap > 1e-6) {
    os << "rate gap " << c.rate_gap << " exceeds 1e-6";
    c.reasons.push_back(os.str());
    os.str("");
  }
  if (c.rate_gap < -1e-8) {
    os << "lower bound exceeds upper bound by " << -c.rate_gap;
    c.reasons.push_back(os.str());
  }
  c.tight = c.reasons.empty();
  if (!c.tight) c.route = CertificateRoute::None;
  return c;
}

std::string to_string(CertificateRoute route) {
  switch (route) {
    case CertificateRoute::Stabilizability: return "stabilizability";
    case CertificateRoute::Recursion: return "recursion";
    case CertificateRoute::None: break;
  }
  return "none";
}

}  // namespace lqgcap
