#ifndef LQGCAP_LINALG_HPP
#define LQGCAP_LINALG_HPP

#include <Eigen/Dense>

namespace lqgcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// (A + Aᵀ)/2.
MatrixXd symmetrize(const MatrixXd& a);

/// Eigenvalues of a symmetric matrix, ascending.
VectorXd sym_eigenvalues(const MatrixXd& a);

double min_eigenvalue(const MatrixXd& a);

/// All eigenvalues ≥ −rel_tol·max(1, λmax).
bool is_psd(const MatrixXd& a, double rel_tol = 1e-10);

/// Cholesky succeeds.
bool is_pd(const MatrixXd& a);

/// Throws NotPositiveDefinite when a is not PD.
double logdet_pd(const MatrixXd& a);

/// Singular values below rel_tol·σmax are treated as zero.
MatrixXd pinv(const MatrixXd& a, double rel_tol = 1e-10);

double spectral_radius(const MatrixXd& a);

/// Symmetric square root with negative eigenvalues clipped to zero.
MatrixXd psd_sqrt(const MatrixXd& a);

/// Symmetric matrix with negative eigenvalues replaced by zero.
MatrixXd clip_psd(const MatrixXd& a, double* clipped = nullptr);

/// Solves X·A = B for symmetric positive definite A.
MatrixXd right_solve_pd(const MatrixXd& b, const MatrixXd& a);

/// Orthonormal basis of range([a]) with singular values above rel_tol·max(1, σmax).
MatrixXd range_basis(const MatrixXd& a, double rel_tol = 1e-9);

/// Solves P = A P Aᵀ + Q for stable A.
MatrixXd solve_stein(const MatrixXd& a, const MatrixXd& q);

}  // namespace lqgcap

#endif  // LQGCAP_LINALG_HPP
