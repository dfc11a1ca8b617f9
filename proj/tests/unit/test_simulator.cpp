#include <doctest.h>

#include <cmath>

#include "lqgcap/simulator.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

namespace {

LBSolution s1_lb(double p) {
  const BudgetedProblem pr = s1_problem(p);
  const ProblemConstants pc = problem_constants(pr.model, pr.weights);
  const UBSolution ub = solve_ub(pr);
  return evaluate_policy(pc.estimator, pr.weights, pc.control, extract_policy(ub, pc.control));
}

SimConfig small_config() {
  SimConfig c;
  c.horizon = 1000;
  c.trajectories = 40;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("normal stream is deterministic with unit moments") {
    NormalStream a(3, 5), b(3, 5), c(3, 6);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    NormalStream s(11, 0);
    double m1 = 0.0, m2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = s.next_normal();
      m1 += z;
      m2 += z * z;
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.02);
    for (int i = 0; i < 1000; ++i) {
      const double u = s.next_symmetric();
      CHECK((u > -1.0 && u < 1.0));
    }
  }

  TEST_CASE("zero dither policy draws no dither") {
    const ProblemConstants pc = problem_constants(s1_model(), s1_weights());
    const Policy pol{scalar(0.0), scalar(0.0), pc.control.K_LQR};
    const SimReport r = simulate(s1_model(), s1_weights(), pol, small_config());
    CHECK(r.max_abs_dither == 0.0);
    CHECK(std::abs(r.empirical_cost - kS1JStar) <= 4.0 * r.cost_se);
  }

  TEST_CASE("reports are reproducible and independent of threading") {
    const LBSolution lb = s1_lb(2.0);
    SimConfig c = small_config();
    const SimReport a = simulate(s1_model(), s1_weights(), lb.policy, c);
    const SimReport b = simulate(s1_model(), s1_weights(), lb.policy, c);
    c.jobs = 4;
    const SimReport d = simulate(s1_model(), s1_weights(), lb.policy, c);
    for (const SimReport* o : {&b, &d}) {
      CHECK(o->empirical_cost == a.empirical_cost);
      CHECK(o->cost_se == a.cost_se);
      CHECK(o->empirical_rate == a.empirical_rate);
      CHECK(o->empirical_PsiY == a.empirical_PsiY);
      CHECK(o->empirical_SigmaHat == a.empirical_SigmaHat);
      CHECK(o->innovation_whiteness == a.innovation_whiteness);
    }
    c.seed = 8;
    CHECK(simulate(s1_model(), s1_weights(), lb.policy, c).empirical_cost != a.empirical_cost);
  }

  TEST_CASE("matching theory passes and a different budget is flagged") {
    const LBSolution lb = s1_lb(2.0);
    const SimReport r = simulate(s1_model(), s1_weights(), lb.policy, small_config());
    CHECK(compare_to_theory(r, lb).passed);
    const ComparisonVerdict v = compare_to_theory(r, s1_lb(3.0));
    CHECK_FALSE(v.passed);
    bool cost_flagged = false;
    for (const auto& it : v.items)
      if (it.name == "cost") cost_flagged = !it.passed;
    CHECK(cost_flagged);
  }

  TEST_CASE("destabilizing gain overflows") {
    const Policy pol{scalar(0.0), scalar(0.0), scalar(-10.0)};
    try {
      simulate(s1_model(), s1_weights(), pol, small_config());
      FAIL("expected NumericalOverflow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NumericalOverflow);
    }
  }

  TEST_CASE("configuration checks") {
    SimConfig c = small_config();
    c.trajectories = 0;
    const Policy pol{scalar(0.0), scalar(0.0), scalar(0.0)};
    CHECK_THROWS_AS(simulate(s1_model(), s1_weights(), pol, c), Error);
    c = small_config();
    c.burn_in = c.horizon;
    CHECK_THROWS_AS(simulate(s1_model(), s1_weights(), pol, c), Error);
  }
}
