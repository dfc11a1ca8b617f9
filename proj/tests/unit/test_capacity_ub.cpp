#include <doctest.h>

#include <cmath>
#include <vector>

#include "lqgcap/capacity_ub.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

TEST_SUITE("capacity_ub") {
  TEST_CASE("feasibility classification") {
    CHECK(feasibility(s1_problem(1.0)).status == FeasibilityStatus::Infeasible);
    CHECK(feasibility(s1_problem(kS1JStar)).status == FeasibilityStatus::Boundary);
    const Feasibility f = feasibility(s1_problem(2.0));
    CHECK(f.status == FeasibilityStatus::Strict);
    CHECK(f.J_star == doctest::Approx(kS1JStar).epsilon(1e-12));
  }

  TEST_CASE("below the minimal cost is infeasible") {
    try {
      solve_ub(s1_problem(1.2));
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
    }
  }

  TEST_CASE("boundary budget gives the zero solution") {
    const UBSolution s = solve_ub(s1_problem(kS1JStar));
    CHECK(s.boundary);
    CHECK(std::abs(s.rate) < 1e-12);
  }

  TEST_CASE("general and scalar paths agree on S1") {
    for (double p : {1.5, 2.0, 3.5}) {
      const UBSolution g = solve_ub(s1_problem(p));
      const UBSolution s = solve_scalar(s1_problem(p));
      CHECK(std::abs(g.rate - s.rate) < 1e-7);
      CHECK(s.exact);
      CHECK(g.cost <= p + 1e-8);
      CHECK(g.riccati_lmi_slack >= -1e-8);
    }
  }

  TEST_CASE("upper bound is nondecreasing and midpoint concave") {
    std::vector<double> r;
    for (int i = 0; i < 9; ++i) r.push_back(solve_ub(s1_problem(1.4 + 0.3 * i)).rate);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] >= r[i - 1] - 1e-9);
    for (std::size_t i = 1; i + 1 < r.size(); ++i) CHECK(r[i] >= 0.5 * (r[i - 1] + r[i + 1]) - 1e-7);
  }

  TEST_CASE("S2 solution satisfies its constraints") {
    const BudgetedProblem pr = s2_problem(150.0);
    const UBSolution s = solve_ub(pr);
    const ProblemConstants pc = problem_constants(pr.model, pr.weights);
    const UBBlocks b = ub_blocks(pc, s.decision);
    CHECK(min_eigenvalue(b.lmi1) >= -1e-8);
    CHECK(min_eigenvalue(b.lmi2) >= -1e-6 * (1.0 + b.lmi2.norm()));
    CHECK(b.cost <= 150.0 + 1e-6);
    CHECK(s.rate > 0.0);
    CHECK(s.rate == doctest::Approx(rate_from_psi(s.Psi_Y, pc.estimator.Psi)).epsilon(1e-10));
  }

  TEST_CASE("units") {
    CHECK(to_units(std::log(2.0), RateUnits::Bits) == doctest::Approx(1.0));
    CHECK(to_units(0.3, RateUnits::Nats) == 0.3);
  }

  TEST_CASE("scalar path rejects vector systems") {
    try {
      solve_scalar(s2_problem(150.0));
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }

  TEST_CASE("KKT multipliers are dual feasible") {
    const BudgetedProblem pr = s1_problem(2.5);
    const KKTReport k = verify_scalar_kkt(pr, solve_scalar(pr));
    for (double l : k.multipliers) CHECK(l >= -1e-9);
    for (double s : k.slackness) CHECK(s <= 1e-6);
    for (double s : k.stationarity) CHECK(std::abs(s) <= 1e-5);
    CHECK(std::abs(k.g3_value) <= 1e-6);
  }
}
