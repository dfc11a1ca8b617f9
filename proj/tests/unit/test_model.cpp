#include <doctest.h>

#include "lqgcap/model.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::testing;

TEST_SUITE("model") {
  TEST_CASE("reference systems validate") {
    CHECK(validate_model(s1_model(), s1_weights()).ok());
    CHECK(validate_model(s2_model(), s2_weights()).ok());
  }

  TEST_CASE("violations carry codes and fields") {
    SystemModel m = s1_model();
    m.V = scalar(0.0);
    auto rep = validate_model(m, s1_weights());
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().code == ErrorCode::NotPositiveDefinite);
    CHECK(rep.violations.front().field == "V");

    m = s1_model();
    m.L = scalar(2.0);
    rep = validate_model(m, s1_weights());
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().code == ErrorCode::JointNoiseNotPSD);

    m = s1_model();
    m.G = MatrixXd::Ones(2, 1);
    rep = validate_model(m, s1_weights());
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().code == ErrorCode::DimensionMismatch);
    CHECK_THROWS_AS(rep.raise_if_invalid(), Error);
  }

  TEST_CASE("asymmetry is reported and symmetrized") {
    SystemModel m = s2_model();
    m.W(0, 1) = 0.1;
    const auto rep = validate_model(m, s2_weights());
    CHECK_FALSE(rep.ok());
    const SystemModel s = symmetrized(m);
    CHECK(s.W(0, 1) == doctest::Approx(0.05));
    CHECK(s.W(1, 0) == doctest::Approx(0.05));
  }

  TEST_CASE("estimator reduction on S1") {
    const EstimatorModel e = reduce_to_estimator(s1_model());
    CHECK(e.Sigma(0, 0) == doctest::Approx(kS1Sigma).epsilon(1e-12));
    CHECK(e.Psi(0, 0) == doctest::Approx(kS1Sigma + 1.0).epsilon(1e-12));
    CHECK(e.K_p(0, 0) == doctest::Approx(0.5 * kS1Sigma / (kS1Sigma + 1.0)).epsilon(1e-12));
  }

  TEST_CASE("minimal LQG cost") {
    CHECK(minimal_lqg_cost(s1_model(), s1_weights()) == doctest::Approx(kS1JStar).epsilon(1e-12));
    CostWeights w = s1_weights();
    w.Q = scalar(0.0);
    CHECK(minimal_lqg_cost(s1_model(), w) == doctest::Approx(0.0));
  }
}
