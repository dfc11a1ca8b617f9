#include "lqgcap/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lqgcap/error.hpp"

namespace lqgcap::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, source + ": " + field + ": " + what);
}

class Reader {
 public:
  Reader(std::string source, bool lax) : source_(std::move(source)), lax_(lax) {}

  void require_object(const json& j, const std::string& field) const {
    if (!j.is_object()) fail(source_, field, "expected an object");
  }

  void check_keys(const json& j, const std::string& field, const std::set<std::string>& allowed) const {
    if (lax_) return;
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) fail(source_, field.empty() ? key : field + "." + key, "unknown key");
    }
  }

  double number(const json& j, const std::string& field) const {
    if (!j.is_number()) fail(source_, field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(source_, field, "must be finite");
    return v;
  }

  int integer(const json& j, const std::string& field) const {
    if (!j.is_number_integer()) fail(source_, field, "expected an integer");
    return j.get<int>();
  }

  std::uint64_t unsigned64(const json& j, const std::string& field) const {
    if (!j.is_number_unsigned()) fail(source_, field, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  std::string string(const json& j, const std::string& field) const {
    if (!j.is_string()) fail(source_, field, "expected a string");
    return j.get<std::string>();
  }

  MatrixXd matrix(const json& j, const std::string& field) const {
    if (!j.is_array() || j.empty()) fail(source_, field, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string rf = field + "[" + std::to_string(r) + "]";
      if (!j[r].is_array()) fail(source_, rf, "expected an array of numbers");
      if (r == 0) {
        cols = j[r].size();
        if (cols == 0) fail(source_, rf, "empty row");
      } else if (j[r].size() != cols) {
        std::ostringstream os;
        os << "ragged row: " << j[r].size() << " entries, expected " << cols;
        fail(source_, rf, os.str());
      }
    }
    MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        m(r, c) = number(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    }
    return m;
  }

  Grid grid(const json& j, const std::string& field, const std::set<std::string>& extra = {}) const {
    require_object(j, field);
    std::set<std::string> keys{"min", "max", "points", "scale"};
    keys.insert(extra.begin(), extra.end());
    check_keys(j, field, keys);
    for (const char* k : {"min", "max", "points"}) {
      if (!j.contains(k)) fail(source_, field + "." + k, "missing");
    }
    Grid g;
    g.min = number(j["min"], field + ".min");
    g.max = number(j["max"], field + ".max");
    g.points = integer(j["points"], field + ".points");
    if (j.contains("scale")) {
      const std::string s = string(j["scale"], field + ".scale");
      if (s == "linear") {
        g.scale = GridScale::Linear;
      } else if (s == "log") {
        g.scale = GridScale::Log;
      } else {
        fail(source_, field + ".scale", "expected \"linear\" or \"log\"");
      }
    }
    if (g.points < 1) fail(source_, field + ".points", "must be at least 1");
    if (g.max < g.min) fail(source_, field + ".max", "must not be below min");
    if (g.scale == GridScale::Log && !(g.min > 0.0)) fail(source_, field + ".min", "log grids need min > 0");
    return g;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  bool lax_;
};

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::vector<double> Grid::values() const {
  std::vector<double> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    if (scale == GridScale::Linear) {
      out.push_back(i == points - 1 && points > 1 ? max : min + t * (max - min));
    } else {
      out.push_back(i == points - 1 && points > 1 ? max : std::exp(std::log(min) + t * (std::log(max) - std::log(min))));
    }
  }
  return out;
}

std::vector<double> BudgetSpec::values() const {
  if (grid) return grid->values();
  if (value) return {*value};
  return {};
}

RunConfig parse_config(const std::string& text, bool lax, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, source + ": " + line_context(text, e.byte) + ": malformed JSON");
  }
  const Reader rd(source, lax);
  rd.require_object(root, "<root>");
  rd.check_keys(root, "", {"system", "cost", "budget", "solver", "sim", "units", "sweep_param", "scop"});

  RunConfig cfg;
  if (!root.contains("system")) fail(source, "system", "missing");
  if (!root.contains("cost")) fail(source, "cost", "missing");

  const json& sys = root["system"];
  rd.require_object(sys, "system");
  rd.check_keys(sys, "system", {"F", "G", "H", "J", "W", "V", "L", "Sigma1"});
  for (const char* k : {"F", "G", "H", "J", "W", "V", "L"}) {
    if (!sys.contains(k)) fail(source, std::string("system.") + k, "missing");
  }
  SystemModel& m = cfg.system;
  m.F = rd.matrix(sys["F"], "system.F");
  m.G = rd.matrix(sys["G"], "system.G");
  m.H = rd.matrix(sys["H"], "system.H");
  m.J = rd.matrix(sys["J"], "system.J");
  m.W = rd.matrix(sys["W"], "system.W");
  m.V = rd.matrix(sys["V"], "system.V");
  m.L = rd.matrix(sys["L"], "system.L");
  if (sys.contains("Sigma1")) m.Sigma1 = rd.matrix(sys["Sigma1"], "system.Sigma1");

  const json& cost = root["cost"];
  rd.require_object(cost, "cost");
  rd.check_keys(cost, "cost", {"Q", "R"});
  for (const char* k : {"Q", "R"}) {
    if (!cost.contains(k)) fail(source, std::string("cost.") + k, "missing");
  }
  cfg.cost.Q = rd.matrix(cost["Q"], "cost.Q");
  cfg.cost.R = rd.matrix(cost["R"], "cost.R");

  if (root.contains("budget")) {
    const json& b = root["budget"];
    if (b.is_number()) {
      cfg.budget.value = rd.number(b, "budget");
      if (*cfg.budget.value < 0.0) fail(source, "budget", "must be non-negative");
    } else {
      cfg.budget.grid = rd.grid(b, "budget");
      if (cfg.budget.grid->min < 0.0) fail(source, "budget.min", "must be non-negative");
    }
  }

  if (root.contains("solver")) {
    const json& s = root["solver"];
    rd.require_object(s, "solver");
    rd.check_keys(s, "solver", {"tol", "max_iter"});
    if (s.contains("tol")) cfg.solver.tol = rd.number(s["tol"], "solver.tol");
    if (s.contains("max_iter")) cfg.solver.max_iter = rd.integer(s["max_iter"], "solver.max_iter");
    if (!(cfg.solver.tol > 0.0)) fail(source, "solver.tol", "must be positive");
    if (cfg.solver.max_iter < 1) fail(source, "solver.max_iter", "must be positive");
  }

  if (root.contains("sim")) {
    const json& s = root["sim"];
    rd.require_object(s, "sim");
    rd.check_keys(s, "sim", {"seed", "trajectories", "horizon", "burn_in"});
    if (s.contains("seed")) cfg.sim.seed = rd.unsigned64(s["seed"], "sim.seed");
    if (s.contains("trajectories")) cfg.sim.trajectories = rd.integer(s["trajectories"], "sim.trajectories");
    if (s.contains("horizon")) cfg.sim.horizon = rd.integer(s["horizon"], "sim.horizon");
    if (s.contains("burn_in")) cfg.sim.burn_in = rd.integer(s["burn_in"], "sim.burn_in");
    if (cfg.sim.trajectories < 1) fail(source, "sim.trajectories", "must be at least 1");
    if (s.contains("burn_in") && cfg.sim.burn_in < 0) fail(source, "sim.burn_in", "must be non-negative");
    if (cfg.sim.horizon <= cfg.sim.effective_burn_in() + 1) fail(source, "sim.horizon", "must exceed burn_in + 1");
  }

  if (root.contains("units")) {
    const std::string u = rd.string(root["units"], "units");
    if (u == "bits") {
      cfg.units = RateUnits::Bits;
    } else if (u == "nats") {
      cfg.units = RateUnits::Nats;
    } else {
      fail(source, "units", "expected \"bits\" or \"nats\"");
    }
  }

  if (root.contains("sweep_param")) {
    const json& s = root["sweep_param"];
    ParamSweep ps;
    ps.grid = rd.grid(s, "sweep_param", {"entry", "row", "col"});
    if (!s.contains("entry")) fail(source, "sweep_param.entry", "missing");
    ps.entry = rd.string(s["entry"], "sweep_param.entry");
    if (s.contains("row")) ps.row = rd.integer(s["row"], "sweep_param.row");
    if (s.contains("col")) ps.col = rd.integer(s["col"], "sweep_param.col");
    SystemModel probe = cfg.system;
    CostWeights probe_w = cfg.cost;
    try {
      set_entry(probe, probe_w, ps.entry, ps.row, ps.col, 0.0);
    } catch (const Error& e) {
      fail(source, "sweep_param.entry", e.what());
    }
    cfg.sweep_param = ps;
  }

  if (root.contains("scop")) {
    const json& s = root["scop"];
    rd.require_object(s, "scop");
    rd.check_keys(s, "scop", {"horizons", "schedule"});
    if (s.contains("horizons")) {
      const json& h = s["horizons"];
      if (!h.is_array() || h.empty()) fail(source, "scop.horizons", "expected a non-empty array of integers");
      cfg.scop.horizons.clear();
      for (std::size_t i = 0; i < h.size(); ++i) {
        const int v = rd.integer(h[i], "scop.horizons[" + std::to_string(i) + "]");
        if (v < 1) fail(source, "scop.horizons[" + std::to_string(i) + "]", "must be at least 1");
        cfg.scop.horizons.push_back(v);
      }
    }
    if (s.contains("schedule")) {
      const std::string v = rd.string(s["schedule"], "scop.schedule");
      if (v == "time-varying") {
        cfg.scop.schedule = LqrSchedule::TimeVarying;
      } else if (v == "steady-state") {
        cfg.scop.schedule = LqrSchedule::SteadyState;
      } else {
        fail(source, "scop.schedule", "expected \"time-varying\" or \"steady-state\"");
      }
    }
  }

  const ValidationReport rep = validate_model(cfg.system, cfg.cost);
  if (!rep.ok()) {
    try {
      rep.raise_if_invalid();
    } catch (const Error& e) {
      throw Error(e.code(), source + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, bool lax) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), lax, path);
}

void set_entry(SystemModel& model, CostWeights& weights, const std::string& entry, int row, int col, double value) {
  MatrixXd* target = nullptr;
  bool symmetric = false;
  if (entry == "F") target = &model.F;
  if (entry == "G") target = &model.G;
  if (entry == "H") target = &model.H;
  if (entry == "J") target = &model.J;
  if (entry == "L") target = &model.L;
  if (entry == "W") target = &model.W, symmetric = true;
  if (entry == "V") target = &model.V, symmetric = true;
  if (entry == "Q") target = &weights.Q, symmetric = true;
  if (entry == "R") target = &weights.R, symmetric = true;
  if (entry == "Sigma1") {
    if (!model.Sigma1) model.Sigma1 = model.W;
    target = &*model.Sigma1;
    symmetric = true;
  }
  if (!target) throw Error(ErrorCode::InvalidArgument, "unknown entry '" + entry + "'");
  if (row < 0 || col < 0 || row >= target->rows() || col >= target->cols()) {
    std::ostringstream os;
    os << "index (" << row << ", " << col << ") is outside " << entry << " (" << target->rows() << "x"
       << target->cols() << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  (*target)(row, col) = value;
  if (symmetric) (*target)(col, row) = value;
}

}  // namespace lqgcap::cli
