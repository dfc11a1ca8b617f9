#include <doctest.h>

#include "lqgcap/riccati.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

namespace {

double rel(const MatrixXd& r, const MatrixXd& x) { return r.norm() / std::max(1.0, x.norm()); }

}  // namespace

TEST_SUITE("riccati") {
  TEST_CASE("filter and control residuals") {
    for (const auto& [m, w] : {std::pair{s1_model(), s1_weights()}, std::pair{s2_model(), s2_weights()}}) {
      const FilterConstants f = solve_filter_riccati(m);
      const MatrixXd fs = m.F * f.Sigma * m.F.transpose() + m.W -
                          (m.F * f.Sigma * m.H.transpose() + m.L) * f.K_p.transpose() - f.Sigma;
      CHECK(rel(fs, f.Sigma) < 1e-9);
      CHECK((f.Psi - (m.H * f.Sigma * m.H.transpose() + m.V)).norm() < 1e-9);

      const ControlConstants c = solve_control_riccati(m, w);
      const MatrixXd ce = m.F.transpose() * c.E * m.F + w.Q -
                          c.K_LQR.transpose() * c.Psi_LQR * c.K_LQR - c.E;
      CHECK(rel(ce, c.E) < 1e-9);
      CHECK(spectral_radius(m.F - m.G * c.K_LQR) < 1.0);
    }
  }

  TEST_CASE("S1 filter and control solutions coincide") {
    const FilterConstants f = solve_filter_riccati(s1_model());
    const ControlConstants c = solve_control_riccati(s1_model(), s1_weights());
    CHECK(std::abs(f.Sigma(0, 0) - kS1Sigma) < 1e-9);
    CHECK(std::abs(c.E(0, 0) - kS1Sigma) < 1e-9);
  }

  TEST_CASE("zero policy gives a zero error covariance") {
    const EstimatorModel e = reduce_to_estimator(s1_model());
    const ControlConstants c = solve_control_riccati(s1_model(), s1_weights());
    const Policy pol{scalar(0.0), scalar(0.0), c.K_LQR};
    const PolicyRiccatiSolution s = solve_policy_riccati(e, pol);
    CHECK(s.SigmaHat.norm() < 1e-12);
    CHECK((s.Psi_Y - e.Psi).norm() < 1e-12);
  }

  TEST_CASE("policy step is a fixed point at the steady state") {
    const EstimatorModel e = reduce_to_estimator(s2_model());
    const Policy pol{MatrixXd::Zero(1, 3), scalar(0.3), MatrixXd::Zero(1, 3)};
    const PolicyRiccatiSolution s = solve_policy_riccati(e, pol);
    const PolicyStep step = policy_step(e, pol.GammaBar, pol.M, s.SigmaHat);
    CHECK((step.next - s.SigmaHat).norm() < 1e-8 * (1.0 + s.SigmaHat.norm()));
    CHECK(s.closed_loop_radius < 1.0);
  }

  TEST_CASE("recursions converge to the steady state") {
    const auto f = riccati_recursion(FilterRecursion{s1_model(), {}}, 200);
    CHECK(f.size() == 201);
    CHECK(f.front().norm() == 0.0);
    CHECK(std::abs(f.back()(0, 0) - kS1Sigma) < 1e-10);

    const auto c = riccati_recursion(ControlRecursion{s1_model(), s1_weights()}, 200);
    CHECK(c.front()(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(c.back()(0, 0) - kS1Sigma) < 1e-10);

    const ControlSchedule cs = control_schedule(s1_model(), s1_weights(), 5);
    CHECK(cs.E.size() == 6);
    CHECK(cs.K.size() == 5);
    CHECK(cs.E.back()(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("PBH tests") {
    MatrixXd a(2, 2);
    a << 1.5, 0.0, 0.0, 0.5;
    MatrixXd b(2, 1);
    b << 0.0, 1.0;
    CHECK_FALSE(pbh_test(a, b, PbhMode::Stabilizable));
    b << 1.0, 0.0;
    CHECK(pbh_test(a, b, PbhMode::Stabilizable));
    const MatrixXd c = b.transpose();
    CHECK(pbh_test(a, c, PbhMode::Detectable));
    MatrixXd u(2, 2);
    u << 1.0, 0.0, 0.0, 0.5;
    MatrixXd bu(2, 1);
    bu << 0.0, 1.0;
    CHECK_FALSE(pbh_test(u, bu, PbhMode::UnitCircleControllable));
  }

  TEST_CASE("undetectable unstable mode is a regularity violation") {
    SystemModel m = s1_model();
    m.F = scalar(1.5);
    m.H = scalar(0.0);
    CHECK_THROWS_AS(solve_filter_riccati(m), Error);
  }
}
