#include <doctest.h>

#include <cmath>

#include "lqgcap/scop.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

TEST_SUITE("scop") {
  TEST_CASE("horizon one has a closed form") {
    const BudgetedProblem pr = s1_problem(4.0);
    const ProblemConstants pc = problem_constants(pr.model, pr.weights);
    const ControlSchedule cs = control_schedule(pr.model, pr.weights, 1);
    const double c0 = scop_fixed_cost(pc, cs, pr.weights.Q);
    const double pi = (4.0 - c0) / cs.Psi[0](0, 0);
    const double psi = pc.estimator.Psi(0, 0);
    const SCOPSolution s = solve_scop(pr, 1);
    CHECK(s.value == doctest::Approx(0.5 * std::log((pi + psi) / psi)).epsilon(1e-7));
    CHECK(s.per_time.front().Pi(0, 0) == doctest::Approx(pi).epsilon(1e-6));
    CHECK(s.sigma_hat(1).norm() == 0.0);
  }

  TEST_CASE("budget below the fixed cost is infeasible") {
    try {
      solve_scop(s1_problem(2.0), 1);
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
    }
  }

  TEST_CASE("horizon cap") {
    try {
      solve_scop(s1_problem(2.0), 65);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    CHECK_THROWS_AS(solve_scop(s2_problem(150.0), 17), Error);
  }

  TEST_CASE("values stay below the single-letter bound and grow with the horizon") {
    const BudgetedProblem pr = s1_problem(2.0);
    const double ub = solve_ub(pr).rate;
    double prev = 0.0;
    for (int n : {2, 4, 8}) {
      const SCOPSolution s = solve_scop(pr, n);
      CHECK(s.value <= ub + 1e-6);
      CHECK(s.value >= prev);
      CHECK(s.cost <= 2.0 + 1e-8);
      for (double e : chained_lmi_slacks(s)) CHECK(e >= -1e-8);
      prev = s.value;
    }
  }

  TEST_CASE("averaged variables") {
    const SCOPSolution s = solve_scop(s1_problem(2.0), 8);
    const AveragedVariables a = average_variables(s);
    CHECK(a.feasible);
    CHECK(a.lmi1_min_eig >= -1e-8);
    CHECK(a.slack <= 2.0 / 8);
    CHECK(a.slack >= a.riccati_correction);
  }

  TEST_CASE("steady-state schedule on S2") {
    const BudgetedProblem pr = s2_problem(150.0);
    const double ub = solve_ub(pr).rate;
    const SCOPSolution s = solve_scop(pr, 2, {}, LqrSchedule::SteadyState);
    CHECK(s.value <= ub + 1e-6);
    CHECK(s.value > 0.0);
  }
}
