#include "lqgcap/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "lqgcap/error.hpp"

namespace lqgcap {

MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

VectorXd sym_eigenvalues(const MatrixXd& a) {
  if (a.size() == 0) return VectorXd();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return sym_eigenvalues(a).minCoeff();
}

bool is_psd(const MatrixXd& a, double rel_tol) {
  if (a.size() == 0) return true;
  const VectorXd ev = sym_eigenvalues(a);
  const double scale = std::max(1.0, ev.maxCoeff());
  return ev.minCoeff() >= -rel_tol * scale;
}

bool is_pd(const MatrixXd& a) {
  if (a.size() == 0) return true;
  Eigen::LLT<MatrixXd> llt(a);
  return llt.info() == Eigen::Success;
}

double logdet_pd(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "logdet of a matrix that is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

MatrixXd pinv(const MatrixXd& a, double rel_tol) {
  if (a.size() == 0) return MatrixXd::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cut = rel_tol * s(0);
  VectorXd inv = VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_radius(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd psd_sqrt(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  const VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd clip_psd(const MatrixXd& a, double* clipped) {
  if (a.size() == 0) {
    if (clipped) *clipped = 0.0;
    return a;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  const VectorXd ev = es.eigenvalues();
  if (clipped) *clipped = std::max(0.0, -ev.minCoeff());
  const VectorXd d = ev.cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

MatrixXd right_solve_pd(const MatrixXd& b, const MatrixXd& a) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "solve against a matrix that is not positive definite");
  }
  return llt.solve(b.transpose()).transpose();
}

MatrixXd range_basis(const MatrixXd& a, double rel_tol) {
  if (a.rows() == 0) return MatrixXd(0, 0);
  if (a.cols() == 0) return MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU);
  const VectorXd& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s(0));
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

MatrixXd solve_stein(const MatrixXd& a, const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  // vec(P) − (A ⊗ A) vec(P) = vec(Q)
  MatrixXd lhs = MatrixXd::Identity(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      lhs.block(i * n, j * n, n, n) -= a(i, j) * a;
    }
  }
  const VectorXd vq = Eigen::Map<const VectorXd>(q.data(), n * n);
  const VectorXd vp = lhs.partialPivLu().solve(vq);
  return symmetrize(Eigen::Map<const MatrixXd>(vp.data(), n, n));
}

}  // namespace lqgcap
