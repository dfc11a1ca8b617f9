#ifndef LQGCAP_SRC_PACKING_HPP
#define LQGCAP_SRC_PACKING_HPP

#include "lqgcap/linalg.hpp"

namespace lqgcap::detail {

inline int sym_count(Eigen::Index n) { return static_cast<int>(n * (n + 1) / 2); }

inline MatrixXd unpack_sym(const VectorXd& x, int offset, Eigen::Index n) {
  MatrixXd a(n, n);
  int t = offset;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i, ++t) a(i, j) = a(j, i) = x(t);
  }
  return a;
}

inline void pack_sym(const MatrixXd& a, VectorXd& x, int offset) {
  int t = offset;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i, ++t) x(t) = 0.5 * (a(i, j) + a(j, i));
  }
}

inline MatrixXd unpack_dense(const VectorXd& x, int offset, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const MatrixXd>(x.data() + offset, rows, cols);
}

inline void pack_dense(const MatrixXd& a, VectorXd& x, int offset) {
  Eigen::Map<MatrixXd>(x.data() + offset, a.rows(), a.cols()) = a;
}

/// Orthonormal basis of the smallest A-invariant subspace containing range(B).
inline MatrixXd controllable_subspace(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd u = range_basis(b);
  for (Eigen::Index it = 0; it < a.rows(); ++it) {
    MatrixXd stacked(a.rows(), b.cols() + u.cols());
    stacked << b, a * u;
    MatrixXd next = range_basis(stacked);
    if (next.cols() == u.cols()) return next;
    u = std::move(next);
  }
  return u;
}

}  // namespace lqgcap::detail

#endif  // LQGCAP_SRC_PACKING_HPP
