#include "lqgcap/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <type_traits>

namespace lqgcap {
namespace {

enum class FixedPointStatus { Converged, MaxIterations, Plateau, Overflow };

struct FixedPoint {
  MatrixXd x;
  int iterations = 0;
  double residual = 0.0;
  FixedPointStatus status = FixedPointStatus::Converged;
  std::vector<double> history;  // last residuals
};

template <class Step>
FixedPoint iterate(MatrixXd x, Step step, const IterationOptions& opts) {
  FixedPoint fp;
  std::deque<double> window;
  for (int it = 1; it <= opts.max_iter; ++it) {
    MatrixXd next = step(x);
    if (!next.allFinite()) {
      fp.status = FixedPointStatus::Overflow;
      fp.x = x;
      fp.iterations = it;
      return fp;
    }
    const double res = (next - x).norm() / (1.0 + x.norm());
    x = std::move(next);
    window.push_back(res);
    if (static_cast<int>(window.size()) > opts.plateau_window) window.pop_front();
    if (res <= opts.tol) {
      fp.x = x;
      fp.iterations = it;
      fp.residual = res;
      fp.status = FixedPointStatus::Converged;
      fp.history.assign(window.begin(), window.end());
      return fp;
    }
    if (static_cast<int>(window.size()) == opts.plateau_window) {
      const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
      if (*hi <= 1.001 * *lo) {
        fp.x = x;
        fp.iterations = it;
        fp.residual = res;
        fp.status = FixedPointStatus::Plateau;
        fp.history.assign(window.begin(), window.end());
        return fp;
      }
    }
  }
  fp.x = x;
  fp.iterations = opts.max_iter;
  fp.residual = window.empty() ? 0.0 : window.back();
  fp.status = FixedPointStatus::MaxIterations;
  fp.history.assign(window.begin(), window.end());
  return fp;
}

std::string describe(const FixedPoint& fp) {
  std::ostringstream os;
  os << "after " << fp.iterations << " iterations, residual " << fp.residual;
  if (!fp.history.empty()) {
    os << " (window min " << *std::min_element(fp.history.begin(), fp.history.end()) << ", max "
       << *std::max_element(fp.history.begin(), fp.history.end()) << ")";
  }
  return os.str();
}

MatrixXd filter_step(const SystemModel& m, const MatrixXd& sigma) {
  const MatrixXd psi = m.H * sigma * m.H.transpose() + m.V;
  const MatrixXd n = m.F * sigma * m.H.transpose() + m.L;
  const MatrixXd k = right_solve_pd(n, psi);
  return symmetrize(m.F * sigma * m.F.transpose() + m.W - k * n.transpose());
}

struct ControlStep {
  MatrixXd prev, K, Psi;
};

ControlStep control_step(const SystemModel& m, const CostWeights& w, const MatrixXd& e) {
  ControlStep s;
  s.Psi = symmetrize(w.R + m.G.transpose() * e * m.G);
  const MatrixXd gef = m.G.transpose() * e * m.F;
  Eigen::LLT<MatrixXd> llt(s.Psi);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "R + GᵀEG is not positive definite");
  }
  s.K = llt.solve(gef);
  s.prev = symmetrize(m.F.transpose() * e * m.F + w.Q - gef.transpose() * s.K);
  return s;
}

std::string pair_name(const char* a, const char* b) { return std::string("(") + a + ", " + b + ")"; }

void throw_fixed_point(const FixedPoint& fp, const std::string& what, bool regularity_ok,
                       const std::vector<std::string>& failed) {
  if (!regularity_ok) {
    std::string names;
    for (const auto& f : failed) names += (names.empty() ? "" : "; ") + f;
    throw Error(ErrorCode::RegularityViolation, what + ": " + names + "; iteration " + describe(fp));
  }
  if (fp.status == FixedPointStatus::Overflow) {
    throw Error(ErrorCode::NumericalOverflow, what + " diverged " + describe(fp));
  }
  if (fp.status == FixedPointStatus::Plateau) {
    throw Error(ErrorCode::NonConvergence, what + " stagnated " + describe(fp));
  }
  throw Error(ErrorCode::MaxIterations, what + " did not converge " + describe(fp));
}

bool effectively_singular(const MatrixXd& m) {
  if (m.size() == 0) return true;
  const VectorXd ev = sym_eigenvalues(m);
  return ev.minCoeff() <= 1e-10 * std::max(1.0, ev.maxCoeff());
}

}  // namespace

FilterConstants solve_filter_riccati(const SystemModel& model, const IterationOptions& opts) {
  const Eigen::Index k = model.k();
  const MatrixXd v_inv_h = model.V.llt().solve(model.H);
  const MatrixXd v_inv_lt = model.V.llt().solve(model.L.transpose());
  const MatrixXd f_s = model.F - model.L * v_inv_h;
  const MatrixXd w_s = symmetrize(model.W - model.L * v_inv_lt);

  std::vector<std::string> failed;
  std::vector<std::string> warnings;
  if (!pbh_test(model.F, model.H, PbhMode::Detectable)) failed.push_back(pair_name("F", "H") + " not detectable");
  if (!pbh_test(f_s, w_s, PbhMode::UnitCircleControllable)) {
    failed.push_back(pair_name("F-LV^-1H", "W-LV^-1L'") + " not controllable on the unit circle");
  }
  if (!pbh_test(f_s, w_s, PbhMode::Stabilizable)) {
    warnings.push_back(pair_name("F-LV^-1H", "W-LV^-1L'") +
                       " not stabilizable; convergence from zero is not guaranteed");
  }

  FixedPoint fp = iterate(MatrixXd::Zero(k, k), [&](const MatrixXd& s) { return filter_step(model, s); }, opts);
  FilterConstants out;
  if (fp.status != FixedPointStatus::Converged) throw_fixed_point(fp, "filter Riccati", failed.empty(), failed);

  out.Sigma = fp.x;
  out.Psi = symmetrize(model.H * out.Sigma * model.H.transpose() + model.V);
  out.K_p = right_solve_pd(model.F * out.Sigma * model.H.transpose() + model.L, out.Psi);
  out.iterations = fp.iterations;
  out.residual = (filter_step(model, out.Sigma) - out.Sigma).norm() / (1.0 + out.Sigma.norm());
  if (spectral_radius(model.F - out.K_p * model.H) >= 1.0) {
    throw Error(ErrorCode::RegularityViolation,
                "filter Riccati: limit is not stabilizing (rho(F - K_p H) >= 1)");
  }
  for (const auto& f : failed) warnings.push_back(f + " (iteration converged regardless)");
  out.warnings = std::move(warnings);
  return out;
}

ControlConstants solve_control_riccati(const SystemModel& model, const CostWeights& weights,
                                       const IterationOptions& opts) {
  std::vector<std::string> failed;
  if (!pbh_test(model.F, model.G, PbhMode::Stabilizable)) failed.push_back(pair_name("F", "G") + " not stabilizable");
  if (!pbh_test(model.F.transpose(), weights.Q, PbhMode::Stabilizable)) {
    failed.push_back(pair_name("F'", "Q") + " not stabilizable");
  }

  FixedPoint fp = iterate(
      weights.Q, [&](const MatrixXd& e) { return control_step(model, weights, e).prev; }, opts);
  if (fp.status != FixedPointStatus::Converged) throw_fixed_point(fp, "control Riccati", failed.empty(), failed);

  ControlConstants out;
  out.E = fp.x;
  const ControlStep s = control_step(model, weights, out.E);
  out.K_LQR = s.K;
  out.Psi_LQR = s.Psi;
  out.iterations = fp.iterations;
  out.residual = (s.prev - out.E).norm() / (1.0 + out.E.norm());
  if (spectral_radius(model.F - model.G * out.K_LQR) >= 1.0) {
    throw Error(ErrorCode::RegularityViolation,
                "control Riccati: limit is not stabilizing (rho(F - G K_LQR) >= 1)");
  }
  for (const auto& f : failed) out.warnings.push_back(f + " (iteration converged regardless)");
  return out;
}

PolicyStep policy_step(const EstimatorModel& est, const MatrixXd& gamma_bar, const MatrixXd& M,
                       const MatrixXd& sigma_hat) {
  const MatrixXd a = est.F + est.G * gamma_bar;
  const MatrixXd c = est.H + est.J * gamma_bar;
  PolicyStep s;
  s.Psi_Y = symmetrize(c * sigma_hat * c.transpose() + est.J * M * est.J.transpose() + est.Psi);
  const MatrixXd n = a * sigma_hat * c.transpose() + est.G * M * est.J.transpose() + est.K_p * est.Psi;
  s.K_Y = right_solve_pd(n, s.Psi_Y);
  s.next = symmetrize(a * sigma_hat * a.transpose() + est.G * M * est.G.transpose() +
                      est.K_p * est.Psi * est.K_p.transpose() - s.K_Y * n.transpose());
  return s;
}

PolicyRiccatiSolution solve_policy_riccati(const EstimatorModel& est, const Policy& policy,
                                           const IterationOptions& opts) {
  const Eigen::Index k = est.F.rows();
  const MatrixXd a = est.F + est.G * policy.GammaBar;
  const MatrixXd c = est.H + est.J * policy.GammaBar;
  const PbhResult det = pbh_test(a, c, PbhMode::Detectable);
  if (!det) {
    std::ostringstream os;
    os << "(F + G GammaBar, H + J GammaBar) is not detectable (eigenvalue " << det.eigenvalue << ")";
    throw Error(ErrorCode::DetectabilityFailure, os.str());
  }

  auto step = [&](const MatrixXd& s) { return policy_step(est, policy.GammaBar, policy.M, s).next; };
  auto closed_loop = [&](const MatrixXd& s) {
    const PolicyStep ps = policy_step(est, policy.GammaBar, policy.M, s);
    return spectral_radius(a - ps.K_Y * c);
  };

  FixedPoint fp = iterate(MatrixXd::Zero(k, k), step, opts);
  bool bootstrapped = false;
  if (fp.status == FixedPointStatus::Converged && closed_loop(fp.x) >= 1.0 && effectively_singular(policy.M)) {
    const double p = static_cast<double>(est.Psi.rows());
    const double eps = 1e-6 * est.Psi.trace() / p;
    const MatrixXd m1 = eps * MatrixXd::Identity(policy.M.rows(), policy.M.cols());
    const MatrixXd s2 = policy_step(est, policy.GammaBar, m1, MatrixXd::Zero(k, k)).next;
    fp = iterate(s2, step, opts);
    bootstrapped = true;
  }
  if (fp.status != FixedPointStatus::Converged) throw_fixed_point(fp, "policy Riccati", true, {});

  PolicyRiccatiSolution out;
  out.SigmaHat = fp.x;
  const PolicyStep ps = policy_step(est, policy.GammaBar, policy.M, out.SigmaHat);
  out.K_Y = ps.K_Y;
  out.Psi_Y = ps.Psi_Y;
  out.iterations = fp.iterations;
  out.residual = (ps.next - out.SigmaHat).norm() / (1.0 + out.SigmaHat.norm());
  out.bootstrapped = bootstrapped;
  out.closed_loop_radius = spectral_radius(a - ps.K_Y * c);
  return out;
}

ControlSchedule control_schedule(const SystemModel& model, const CostWeights& weights, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  ControlSchedule cs;
  cs.E.assign(horizon + 1, MatrixXd());
  cs.K.assign(horizon, MatrixXd());
  cs.Psi.assign(horizon, MatrixXd());
  cs.E[horizon] = weights.Q;
  for (int i = horizon - 1; i >= 0; --i) {
    const ControlStep s = control_step(model, weights, cs.E[i + 1]);
    cs.K[i] = s.K;
    cs.Psi[i] = s.Psi;
    cs.E[i] = s.prev;
  }
  return cs;
}

namespace {

void require_dims(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

std::vector<MatrixXd> riccati_recursion(const RecursionData& data, int steps) {
  if (steps < 0) throw Error(ErrorCode::InvalidArgument, "negative step count");
  std::vector<MatrixXd> trace;
  trace.reserve(steps + 1);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FilterRecursion>) {
          const Eigen::Index k = d.model.k();
          MatrixXd s = d.initial.size() ? d.initial : MatrixXd::Zero(k, k);
          require_dims(s.rows() == k && s.cols() == k, "initial covariance must be k x k");
          trace.push_back(s);
          for (int i = 0; i < steps; ++i) trace.push_back(s = filter_step(d.model, s));
        } else if constexpr (std::is_same_v<T, ControlRecursion>) {
          require_dims(d.weights.Q.rows() == d.model.k() && d.weights.R.rows() == d.model.m(),
                       "weights do not match the model");
          MatrixXd e = d.weights.Q;
          trace.push_back(e);
          for (int i = 0; i < steps; ++i) trace.push_back(e = control_step(d.model, d.weights, e).prev);
        } else {
          const Eigen::Index k = d.estimator.F.rows();
          require_dims(d.policy.GammaBar.rows() == d.estimator.G.cols() && d.policy.GammaBar.cols() == k,
                       "GammaBar must be m x k");
          MatrixXd s = d.initial.size() ? d.initial : MatrixXd::Zero(k, k);
          require_dims(s.rows() == k && s.cols() == k, "initial covariance must be k x k");
          trace.push_back(s);
          for (int i = 0; i < steps; ++i) {
            trace.push_back(s = policy_step(d.estimator, d.policy.GammaBar, d.policy.M, s).next);
          }
        }
      },
      data);
  return trace;
}

namespace {

PbhResult pbh_stabilizable(const MatrixXd& a, const MatrixXd& b, bool unit_circle_only, double tol) {
  using Eigen::MatrixXcd;
  PbhResult out;
  out.ratio = std::numeric_limits<double>::infinity();
  const Eigen::Index n = a.rows();
  if (n == 0) return out;
  Eigen::ComplexEigenSolver<MatrixXcd> es(a.cast<std::complex<double>>(), false);
  const Eigen::VectorXcd lambdas = es.eigenvalues();
  const double scale = std::max(1.0, a.norm());
  const MatrixXcd bc = b.cast<std::complex<double>>();
  for (Eigen::Index e = 0; e < lambdas.size(); ++e) {
    const std::complex<double> lam = lambdas(e);
    const double mod = std::abs(lam);
    const bool tested = unit_circle_only ? std::abs(mod - 1.0) <= 1e-8 : mod >= 1.0 - 1e-10;
    if (!tested) continue;
    // Left null space of A − λI.
    const MatrixXcd shifted = a.cast<std::complex<double>>() - lam * MatrixXcd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXcd> svd(shifted, Eigen::ComputeFullU);
    const VectorXd& s = svd.singularValues();
    Eigen::Index d = 0;
    for (Eigen::Index j = n - 1; j >= 0 && s(j) <= 1e-7 * scale; --j) ++d;
    d = std::max<Eigen::Index>(d, 1);
    const MatrixXcd x = svd.matrixU().rightCols(d);
    double ratio = 0.0;
    Eigen::VectorXcd w = x.col(0);
    if (b.cols() > 0) {
      const MatrixXcd xb = x.adjoint() * bc;
      Eigen::JacobiSVD<MatrixXcd> svd2(xb, Eigen::ComputeFullU);
      const VectorXd& s2 = svd2.singularValues();
      ratio = d > b.cols() ? 0.0 : s2(s2.size() - 1);
      w = x * svd2.matrixU().col(d - 1);
    }
    if (ratio < out.ratio) out.ratio = ratio;
    if (ratio <= tol && out.passed) {
      out.passed = false;
      out.eigenvalue = lam;
      out.witness = w;
    }
  }
  return out;
}

}  // namespace

PbhResult pbh_test(const MatrixXd& a, const MatrixXd& b, PbhMode mode, double tol) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "PBH test needs a square matrix");
  switch (mode) {
    case PbhMode::Detectable:
      if (b.cols() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "output map has wrong column count");
      return pbh_stabilizable(a.transpose(), b.transpose(), false, tol);
    case PbhMode::Stabilizable:
      if (b.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "input map has wrong row count");
      return pbh_stabilizable(a, b, false, tol);
    case PbhMode::UnitCircleControllable:
      if (b.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "input map has wrong row count");
      return pbh_stabilizable(a, b, true, tol);
  }
  return {};
}

}  // namespace lqgcap
