#include <doctest.h>

#include <string>

#include "lqgcap/cli/config.hpp"
#include "support/systems.hpp"

using namespace lqgcap;
using namespace lqgcap::cli;
using namespace lqgcap::testing;

namespace {

std::string error_of(const std::string& text, bool lax = false) {
  try {
    parse_config(text, lax, "cfg");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  return {};
}

const char* kMinimal = R"({
  "system": {"F": [[0.5]], "G": [[1]], "H": [[1]], "J": [[1]], "W": [[1]], "V": [[1]], "L": [[0]]},
  "cost": {"Q": [[1]], "R": [[1]]},
  "budget": 2.0
})";

}  // namespace

TEST_SUITE("cli_config") {
  TEST_CASE("bundled scalar config is S1") {
    const RunConfig c = load_config(source_path("configs/scalar.json"));
    const SystemModel s = s1_model();
    CHECK(c.system.F == s.F);
    CHECK(c.system.G == s.G);
    CHECK(c.system.V == s.V);
    CHECK(c.cost.Q == s1_weights().Q);
    const auto b = c.budget.values();
    REQUIRE(b.size() == 28);
    CHECK(b.front() == doctest::Approx(1.31));
    CHECK(b.back() == doctest::Approx(4.0));
    CHECK(c.units == RateUnits::Bits);
  }

  TEST_CASE("bundled vector config is S2") {
    const RunConfig c = load_config(source_path("configs/vector3.json"));
    const SystemModel s = s2_model();
    CHECK(c.system.F == s.F);
    CHECK(c.system.G == s.G);
    CHECK(c.system.H == s.H);
    CHECK(c.system.W == s.W);
    CHECK(c.cost.Q == s2_weights().Q);
    CHECK(c.budget.values().size() == 20);
  }

  TEST_CASE("every bundled config loads") {
    for (const char* f : {"configs/scalar_p2.json", "configs/scalar_gsweep.json", "configs/vector3_p150.json"})
      CHECK_NOTHROW(load_config(source_path(f)));
  }

  TEST_CASE("ragged rows name the field") {
    const std::string msg = error_of(R"({
      "system": {"F": [[0.5, 1], [1]], "G": [[1]], "H": [[1]], "J": [[1]], "W": [[1]], "V": [[1]], "L": [[0]]},
      "cost": {"Q": [[1]], "R": [[1]]}, "budget": 2.0})");
    CHECK(msg.find("system.F") != std::string::npos);
  }

  TEST_CASE("unknown keys are rejected unless lax") {
    std::string text = kMinimal;
    text.insert(text.rfind('}'), ", \"extra\": 1");
    CHECK(error_of(text).find("extra") != std::string::npos);
    CHECK(error_of(text, true).empty());
  }

  TEST_CASE("syntax errors report the line") {
    const std::string msg = error_of("{\n  \"system\": [\n");
    CHECK(msg.find("line") != std::string::npos);
  }

  TEST_CASE("negative sweep minimum is rejected") {
    std::string text = kMinimal;
    text.replace(text.find("2.0"), 3, R"({"min": -1, "max": 2, "points": 3})");
    CHECK_FALSE(error_of(text).empty());
  }

  TEST_CASE("grids") {
    Grid g{1.0, 100.0, 3, GridScale::Log};
    const auto v = g.values();
    REQUIRE(v.size() == 3);
    CHECK(v[1] == doctest::Approx(10.0));
    Grid one{2.0, 2.0, 1, GridScale::Linear};
    CHECK(one.values() == std::vector<double>{2.0});
  }

  TEST_CASE("set_entry mirrors symmetric matrices") {
    SystemModel m = s2_model();
    CostWeights w = s2_weights();
    set_entry(m, w, "W", 0, 2, 0.3);
    CHECK(m.W(2, 0) == 0.3);
    set_entry(m, w, "G", 1, 0, 5.0);
    CHECK(m.G(1, 0) == 5.0);
    CHECK_THROWS_AS(set_entry(m, w, "X", 0, 0, 1.0), Error);
    CHECK_THROWS_AS(set_entry(m, w, "F", 3, 0, 1.0), Error);
  }
}
