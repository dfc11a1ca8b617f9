#ifndef LQGCAP_CLI_CONFIG_HPP
#define LQGCAP_CLI_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "lqgcap/capacity_ub.hpp"
#include "lqgcap/model.hpp"
#include "lqgcap/scop.hpp"
#include "lqgcap/simulator.hpp"

namespace lqgcap::cli {

enum class GridScale { Linear, Log };

struct Grid {
  double min = 0.0;
  double max = 0.0;
  int points = 1;
  GridScale scale = GridScale::Linear;

  std::vector<double> values() const;
};

/// A scalar budget or a grid of budgets.
struct BudgetSpec {
  std::optional<double> value;
  std::optional<Grid> grid;

  std::vector<double> values() const;
};

/// One system or cost entry varied by `sweep-param`.
struct ParamSweep {
  std::string entry = "G";
  int row = 0;
  int col = 0;
  Grid grid;
};

struct ScopSpec {
  std::vector<int> horizons{1, 2, 4, 8, 16};
  LqrSchedule schedule = LqrSchedule::TimeVarying;
};

struct RunConfig {
  SystemModel system;
  CostWeights cost;
  BudgetSpec budget;
  SolverOptions solver;
  SimConfig sim;
  RateUnits units = RateUnits::Bits;
  std::optional<ParamSweep> sweep_param;
  ScopSpec scop;
};

/// Parses a JSON document. Unknown keys are errors unless lax is set.
/// Errors carry ErrorCode::ConfigError and name the line or field.
RunConfig parse_config(const std::string& text, bool lax = false, const std::string& source = "<config>");

RunConfig load_config(const std::string& path, bool lax = false);

/// Writes entry (row, col) of a named system or cost matrix; symmetric
/// entries (W, V, Q, R, Sigma1) are mirrored.
void set_entry(SystemModel& model, CostWeights& weights, const std::string& entry, int row, int col, double value);

}  // namespace lqgcap::cli

#endif  // LQGCAP_CLI_CONFIG_HPP
