#include <doctest.h>

#include "lqgcap/error.hpp"
#include "lqgcap/linalg.hpp"

using namespace lqgcap;

TEST_SUITE("linalg") {
  TEST_CASE("eigenvalues and definiteness") {
    MatrixXd a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    const VectorXd ev = sym_eigenvalues(a);
    CHECK(ev(0) == doctest::Approx(1.0));
    CHECK(ev(1) == doctest::Approx(3.0));
    CHECK(is_pd(a));
    CHECK(is_psd(a));
    a(0, 0) = -1.0;
    CHECK_FALSE(is_psd(a));
    CHECK_THROWS_AS(logdet_pd(a), Error);
  }

  TEST_CASE("psd square root and clipping") {
    MatrixXd a(2, 2);
    a << 4.0, 0.0, 0.0, -1.0;
    double clipped = 0.0;
    const MatrixXd c = clip_psd(a, &clipped);
    CHECK(c(1, 1) == doctest::Approx(0.0));
    CHECK(clipped == doctest::Approx(1.0));
    const MatrixXd r = psd_sqrt(c);
    CHECK((r * r - c).norm() < 1e-12);
  }

  TEST_CASE("pseudo-inverse of a rank-one matrix") {
    MatrixXd a(2, 2);
    a << 1.0, 1.0, 1.0, 1.0;
    const MatrixXd p = pinv(a);
    CHECK((a * p * a - a).norm() < 1e-12);
  }

  TEST_CASE("stein equation") {
    MatrixXd a(2, 2);
    a << 0.5, 0.1, 0.0, 0.3;
    const MatrixXd q = MatrixXd::Identity(2, 2);
    const MatrixXd p = solve_stein(a, q);
    CHECK((a * p * a.transpose() + q - p).norm() < 1e-12);
  }

  TEST_CASE("range basis") {
    MatrixXd a(3, 2);
    a << 1.0, 2.0, 0.0, 0.0, 1.0, 2.0;
    const MatrixXd u = range_basis(a);
    CHECK(u.cols() == 1);
    CHECK((u.transpose() * u - MatrixXd::Identity(1, 1)).norm() < 1e-12);
  }
}
