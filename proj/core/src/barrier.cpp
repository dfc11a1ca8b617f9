#include "lqgcap/barrier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lqgcap/error.hpp"

namespace lqgcap {

MatrixXd AffineMatrix::eval(const VectorXd& x) const {
  MatrixXd a = constant;
  for (const auto& [i, c] : terms) a.noalias() += x(i) * c;
  return a;
}

double LinearInequality::slack(const VectorXd& x) const {
  double s = rhs;
  for (const auto& [i, a] : coeffs) s -= a * x(i);
  return s;
}

double MaxDetProgram::objective_value(const VectorXd& x) const {
  double v = 0.0;
  for (const auto& [w, o] : objective) v += w * logdet_pd(symmetrize(o.eval(x)));
  return v;
}

double MaxDetProgram::min_slack(const VectorXd& x) const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& l : lmis) {
    if (l.constant.size()) s = std::min(s, min_eigenvalue(l.eval(x)));
  }
  for (const auto& l : linear) s = std::min(s, l.slack(x));
  return s;
}

bool MaxDetProgram::strictly_feasible(const VectorXd& x) const {
  for (const auto& l : lmis) {
    if (!is_pd(symmetrize(l.eval(x)))) return false;
  }
  for (const auto& l : linear) {
    if (!(l.slack(x) > 0.0)) return false;
  }
  for (const auto& [w, o] : objective) {
    if (!is_pd(symmetrize(o.eval(x)))) return false;
  }
  return true;
}

namespace {

class Centering {
 public:
  Centering(const MaxDetProgram& prog) : prog_(prog), n_(prog.num_vars) {}

  // F(x) = −Σ w logdet O(x) + μ(−Σ logdet L(x) − Σ log s(x)); +inf outside the domain.
  double value(const VectorXd& x, double mu) const {
    double v = 0.0;
    for (const auto& [w, o] : prog_.objective) {
      const double ld = logdet(o, x);
      if (!std::isfinite(ld)) return inf();
      v -= w * ld;
    }
    for (const auto& l : prog_.lmis) {
      const double ld = logdet(l, x);
      if (!std::isfinite(ld)) return inf();
      v -= mu * ld;
    }
    for (const auto& l : prog_.linear) {
      const double s = l.slack(x);
      if (!(s > 0.0)) return inf();
      v -= mu * std::log(s);
    }
    return v;
  }

  void derivatives(const VectorXd& x, double mu, VectorXd& g, MatrixXd& h) const {
    g = VectorXd::Zero(n_);
    h = MatrixXd::Zero(n_, n_);
    for (const auto& [w, o] : prog_.objective) add_logdet(o, x, w, g, h);
    for (const auto& l : prog_.lmis) add_logdet(l, x, mu, g, h);
    for (const auto& l : prog_.linear) {
      const double s = l.slack(x);
      for (const auto& [i, a] : l.coeffs) {
        g(i) += mu * a / s;
        for (const auto& [j, b] : l.coeffs) h(i, j) += mu * a * b / (s * s);
      }
    }
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  static double logdet(const AffineMatrix& a, const VectorXd& x) {
    if (a.constant.size() == 0) return 0.0;
    Eigen::LLT<MatrixXd> llt(symmetrize(a.eval(x)));
    if (llt.info() != Eigen::Success) return -inf();
    const VectorXd d = llt.matrixLLT().diagonal();
    if ((d.array() <= 0.0).any()) return -inf();
    return 2.0 * d.array().log().sum();
  }

  // Adds the derivatives of −w·logdet A(x).
  static void add_logdet(const AffineMatrix& a, const VectorXd& x, double w, VectorXd& g, MatrixXd& h) {
    if (a.constant.size() == 0) return;
    const MatrixXd m = symmetrize(a.eval(x));
    Eigen::LLT<MatrixXd> llt(m);
    const MatrixXd inv = llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
    std::vector<MatrixXd> p;
    p.reserve(a.terms.size());
    for (const auto& [i, c] : a.terms) {
      p.push_back(inv * c);
      g(i) -= w * p.back().trace();
    }
    for (std::size_t s = 0; s < a.terms.size(); ++s) {
      for (std::size_t t = s; t < a.terms.size(); ++t) {
        const double v = w * p[s].cwiseProduct(p[t].transpose()).sum();
        h(a.terms[s].first, a.terms[t].first) += v;
        if (s != t) h(a.terms[t].first, a.terms[s].first) += v;
      }
    }
  }

  const MaxDetProgram& prog_;
  int n_;
};

VectorXd newton_direction(const MatrixXd& h, const VectorXd& g) {
  const Eigen::Index n = h.rows();
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = h(i, i) > 0.0 ? 1.0 / std::sqrt(h(i, i)) : 1.0;
  MatrixXd hs = d.asDiagonal() * h * d.asDiagonal();
  hs = symmetrize(hs);
  Eigen::LLT<MatrixXd> llt(hs);
  double ridge = 1e-14;
  while (llt.info() != Eigen::Success && ridge < 1.0) {
    llt.compute(hs + ridge * MatrixXd::Identity(n, n));
    ridge *= 100.0;
  }
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SolverNonConvergence, "barrier Hessian is not positive definite");
  }
  return -(d.asDiagonal() * llt.solve(d.asDiagonal() * g));
}

}  // namespace

BarrierResult solve_maxdet(const MaxDetProgram& prog, const VectorXd& x0, const BarrierOptions& opts) {
  if (x0.size() != prog.num_vars) throw Error(ErrorCode::DimensionMismatch, "start point has the wrong length");
  if (!prog.strictly_feasible(x0)) throw Error(ErrorCode::InvalidArgument, "start point is not strictly feasible");

  double nu = static_cast<double>(prog.linear.size());
  for (const auto& l : prog.lmis) nu += static_cast<double>(l.constant.rows());

  Centering c(prog);
  BarrierResult r;
  VectorXd x = x0;
  double mu = opts.mu0;
  VectorXd g;
  MatrixXd h;
  while (true) {
    while (true) {
      if (r.newton_iterations >= opts.max_iter) {
        std::ostringstream os;
        os << "barrier method exhausted " << opts.max_iter << " Newton steps at mu = " << mu
           << " (gap bound " << mu * nu << ")";
        throw Error(ErrorCode::SolverNonConvergence, os.str());
      }
      c.derivatives(x, mu, g, h);
      const VectorXd dx = newton_direction(h, g);
      const double slope = g.dot(dx);
      const double lambda2 = -slope / mu;
      if (!(lambda2 >= 0.0) || lambda2 * 0.5 <= opts.newton_tol) break;
      const double f0 = c.value(x, mu);
      // Predicted decrease below round-off of F: nothing left to gain.
      if (-slope <= 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0))) break;
      ++r.newton_iterations;
      double t = 1.0;
      bool accepted = false;
      bool progress = false;
      for (int ls = 0; ls < 80; ++ls, t *= opts.backtrack) {
        const VectorXd xn = x + t * dx;
        const double fn = c.value(xn, mu);
        if (fn <= f0 + opts.armijo * t * slope) {
          progress = fn < f0;
          x = xn;
          accepted = true;
          break;
        }
      }
      if (accepted && !progress) break;
      if (!accepted) {
        // Round-off floor: the decrement is already negligible on the objective scale.
        if (lambda2 < 1e-6) break;
        std::ostringstream os;
        os << "line search failed at mu = " << mu << " (Newton decrement^2 " << lambda2 << ")";
        throw Error(ErrorCode::SolverNonConvergence, os.str());
      }
    }
    ++r.outer_iterations;
    if (mu * nu <= opts.tol) break;
    mu *= opts.mu_factor;
  }
  r.x = x;
  r.objective = prog.objective_value(x);
  r.gap_bound = mu * nu;
  return r;
}

}  // namespace lqgcap
