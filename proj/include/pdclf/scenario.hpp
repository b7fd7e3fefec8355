#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdclf/npv.hpp"

namespace pdclf {

/// Admissible parameter trajectory shapes for simulation.
struct ThetaTrajectory {
  enum class Kind { kConstant, kSinusoid, kLinearRamp, kPiecewise };
  Kind kind = Kind::kConstant;
  double value = 0.0;      // constant
  double offset = 0.0;     // sinusoid / ramp base value
  double amplitude = 0.0;  // sinusoid: offset + amplitude * cos(frequency t)
  double frequency = 0.0;
  double slope = 0.0;      // ramp: offset + slope * t
  std::vector<std::pair<double, double>> knots;  // piecewise linear (t, value)

  double theta_at(double t) const {
    switch (kind) {
      case Kind::kConstant: return value;
      case Kind::kSinusoid: return offset + amplitude * std::cos(frequency * t);
      case Kind::kLinearRamp: return offset + slope * t;
      case Kind::kPiecewise: {
        if (t <= knots.front().first) return knots.front().second;
        for (size_t i = 1; i < knots.size(); ++i)
          if (t <= knots[i].first) {
            double w = (t - knots[i - 1].first) /
                       (knots[i].first - knots[i - 1].first);
            return knots[i - 1].second +
                   w * (knots[i].second - knots[i - 1].second);
          }
        return knots.back().second;
      }
    }
    return 0.0;
  }

  double rate_at(double t) const {
    switch (kind) {
      case Kind::kConstant: return 0.0;
      case Kind::kSinusoid:
        return -amplitude * frequency * std::sin(frequency * t);
      case Kind::kLinearRamp: return slope;
      case Kind::kPiecewise: {
        if (t <= knots.front().first || t >= knots.back().first) return 0.0;
        for (size_t i = 1; i < knots.size(); ++i)
          if (t <= knots[i].first)
            return (knots[i].second - knots[i - 1].second) /
                   (knots[i].first - knots[i - 1].first);
        return 0.0;
      }
    }
    return 0.0;
  }
};

struct SynthesisConfig {
  int deg_X = 2;
  int deg_Y = 2;
  int deg_mult = 2;
  double eps1 = 1e-3;
  double eps3 = 1e-3;
  double eps2_pin = 0.0;  // > 0 pins the epsilon2 decision variable
  std::string mode = "pd";  // "pd" | "robust"
  std::vector<int> X_states;    // state columns X may depend on; empty = all of J
  std::vector<double> scale;    // per-state normalization; empty = all ones
  bool border_x_localizers = false;
  bool trace_objective = false;
  bool prune = true;
};

struct SimulationConfig {
  ThetaTrajectory trajectory;                 // first parameter (convenience)
  std::vector<ThetaTrajectory> trajectories;  // one per parameter
  std::vector<std::vector<double>> initial_states;
  double T = 10.0;
  double dt = 1e-3;
  double lambda = 1.0;
  std::string controller = "minnorm";  // "explicit" | "minnorm"
  std::string alpha_mode = "tight";    // "tight" | "relaxed"
  bool per_stage_controller = false;
  std::vector<std::vector<std::string>> H;  // m x m entries in theta; empty = I
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv"};
};

struct Scenario {
  std::string name;
  NpvSystem system;
  SynthesisConfig synthesis;
  SimulationConfig simulation;
  OutputConfig output;
  std::string system_hash;  // 64-bit content digest of the system block, hex
  bool has_simulation = false;
};

namespace detail {

using Json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

[[noreturn]] inline void scenario_fail(const std::string& path,
                                       const std::string& msg) {
  throw ScenarioError(path + ": " + msg);
}

inline const Json& need(const Json& obj, const std::string& path,
                        const std::string& key) {
  if (!obj.is_object()) scenario_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    scenario_fail(join_path(path, key), "missing required key");
  return *it;
}

inline void reject_unknown_keys(const Json& obj, const std::string& path,
                                const std::set<std::string>& allowed) {
  if (!obj.is_object()) scenario_fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (allowed.count(it.key()) == 0)
      scenario_fail(join_path(path, it.key()), "unknown key");
}

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) scenario_fail(path, "expected a number");
  return v.get<double>();
}

inline double as_positive(const Json& v, const std::string& path) {
  double d = as_number(v, path);
  if (!(d > 0.0)) scenario_fail(path, "expected a positive number");
  return d;
}

inline int as_nonneg_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<int>() < 0)
    scenario_fail(path, "expected a nonnegative integer");
  return v.get<int>();
}

inline int as_positive_int(const Json& v, const std::string& path) {
  int i = as_nonneg_int(v, path);
  if (i == 0) scenario_fail(path, "expected a positive integer");
  return i;
}

inline std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) scenario_fail(path, "expected a string");
  return v.get<std::string>();
}

inline bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) scenario_fail(path, "expected a boolean");
  return v.get<bool>();
}

inline Poly parse_poly_at(const std::string& text, const VarSpacePtr& space,
                          const std::string& path) {
  try {
    return parse_poly(text, space);
  } catch (const Error& e) {
    scenario_fail(path, std::string("bad polynomial: ") + e.what());
  }
}

/// Polynomial restricted to variables of the given classes.
inline Poly parse_poly_restricted(const std::string& text,
                                  const VarSpacePtr& space,
                                  const std::string& path,
                                  const std::set<VarClass>& allowed) {
  Poly p = parse_poly_at(text, space, path);
  for (int v : p.vars_appearing())
    if (allowed.count(space->var_class(v)) == 0)
      scenario_fail(path, "variable " + space->name(v) +
                              " is not allowed in this polynomial");
  return p;
}

inline uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return std::string(buf);
}

inline ThetaTrajectory parse_trajectory(const Json& j,
                                        const std::string& path) {
  ThetaTrajectory traj;
  std::string kind = as_string(need(j, path, "kind"), join_path(path, "kind"));
  if (kind == "constant") {
    reject_unknown_keys(j, path, {"kind", "value"});
    traj.kind = ThetaTrajectory::Kind::kConstant;
    traj.value = as_number(need(j, path, "value"), join_path(path, "value"));
  } else if (kind == "sinusoid") {
    reject_unknown_keys(j, path, {"kind", "offset", "amplitude", "frequency"});
    traj.kind = ThetaTrajectory::Kind::kSinusoid;
    traj.offset = as_number(need(j, path, "offset"), join_path(path, "offset"));
    traj.amplitude =
        as_number(need(j, path, "amplitude"), join_path(path, "amplitude"));
    traj.frequency =
        as_number(need(j, path, "frequency"), join_path(path, "frequency"));
  } else if (kind == "linear-ramp") {
    reject_unknown_keys(j, path, {"kind", "offset", "slope"});
    traj.kind = ThetaTrajectory::Kind::kLinearRamp;
    traj.offset = as_number(need(j, path, "offset"), join_path(path, "offset"));
    traj.slope = as_number(need(j, path, "slope"), join_path(path, "slope"));
  } else if (kind == "piecewise") {
    reject_unknown_keys(j, path, {"kind", "knots"});
    traj.kind = ThetaTrajectory::Kind::kPiecewise;
    const Json& knots = need(j, path, "knots");
    if (!knots.is_array() || knots.size() < 2)
      scenario_fail(join_path(path, "knots"), "expected >= 2 [t, value] pairs");
    double prev_t = -1e300;
    for (size_t i = 0; i < knots.size(); ++i) {
      std::string kp = join_path(path, "knots[" + std::to_string(i) + "]");
      const Json& pair = knots[i];
      if (!pair.is_array() || pair.size() != 2)
        scenario_fail(kp, "expected a [t, value] pair");
      double t = as_number(pair[0], kp);
      double v = as_number(pair[1], kp);
      if (t <= prev_t) scenario_fail(kp, "knot times must increase");
      prev_t = t;
      traj.knots.emplace_back(t, v);
    }
  } else {
    scenario_fail(join_path(path, "kind"),
                  "expected constant | sinusoid | linear-ramp | piecewise");
  }
  return traj;
}

inline PolyMat parse_poly_matrix(const Json& j, const std::string& path,
                                 const VarSpacePtr& space, int rows, int cols,
                                 const std::set<VarClass>& allowed) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    scenario_fail(path, "expected " + std::to_string(rows) + " rows");
  PolyMat M(space, rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<size_t>(i)];
    std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      scenario_fail(rp, "expected " + std::to_string(cols) + " entries");
    for (int k = 0; k < cols; ++k) {
      std::string ep = rp + "[" + std::to_string(k) + "]";
      M(i, k) = parse_poly_restricted(
          as_string(row[static_cast<size_t>(k)], ep), space, ep, allowed);
    }
  }
  return M;
}

}  // namespace detail

inline Scenario load_scenario_text(const std::string& text,
                                   const std::string& origin) {
  using detail::Json;
  using detail::join_path;
  using detail::need;
  using detail::scenario_fail;

  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(origin + ": JSON parse error: " + e.what());
  }
  detail::reject_unknown_keys(
      root, "", {"name", "system", "synthesis", "simulation", "output"});

  Scenario sc;
  if (root.contains("name")) sc.name = detail::as_string(root["name"], "name");

  // ---- system block -------------------------------------------------
  const Json& jsys = need(root, "", "system");
  detail::reject_unknown_keys(jsys, "system",
                              {"dimensions", "A", "B", "f", "rocket",
                               "theta_set", "rate_box", "X_set"});
  const Json& jdim = need(jsys, "system", "dimensions");
  detail::reject_unknown_keys(jdim, "system.dimensions", {"n", "m", "n_theta"});
  NpvSystem& sys = sc.system;
  sys.n = detail::as_positive_int(need(jdim, "system.dimensions", "n"),
                                  "system.dimensions.n");
  sys.m = detail::as_positive_int(need(jdim, "system.dimensions", "m"),
                                  "system.dimensions.m");
  sys.n_theta = detail::as_positive_int(
      need(jdim, "system.dimensions", "n_theta"), "system.dimensions.n_theta");

  bool rocket = jsys.contains("rocket");
  if (rocket) {
    if (jsys.contains("A") || jsys.contains("B") || jsys.contains("f"))
      scenario_fail("system.rocket",
                    "the rocket builder supplies A and B; remove A/B/f");
    if (sys.n != 6 || sys.m != 2 || sys.n_theta != 1)
      scenario_fail("system.dimensions",
                    "the rocket model is fixed at n=6, m=2, n_theta=1");
    const Json& jr = jsys["rocket"];
    detail::reject_unknown_keys(
        jr, "system.rocket",
        {"m", "l", "J", "g", "taylor_sin_deg", "taylor_cos_deg"});
    RocketParams rp;
    if (jr.contains("m")) rp.m = detail::as_positive(jr["m"], "system.rocket.m");
    if (jr.contains("l")) rp.l = detail::as_positive(jr["l"], "system.rocket.l");
    if (jr.contains("J")) rp.J = detail::as_positive(jr["J"], "system.rocket.J");
    if (jr.contains("g")) rp.g = detail::as_positive(jr["g"], "system.rocket.g");
    if (jr.contains("taylor_sin_deg"))
      rp.taylor_sin_deg = detail::as_positive_int(jr["taylor_sin_deg"],
                                                  "system.rocket.taylor_sin_deg");
    if (jr.contains("taylor_cos_deg"))
      rp.taylor_cos_deg = detail::as_nonneg_int(jr["taylor_cos_deg"],
                                                "system.rocket.taylor_cos_deg");
    sc.system = gravity_offset_transform(rp);
  } else {
    sys.space = detail::make_system_space(sys.n, sys.n_theta);
    for (int i = 0; i < sys.space->size(); ++i) {
      switch (sys.space->var_class(i)) {
        case VarClass::kState: sys.state_vars.push_back(i); break;
        case VarClass::kParameter: sys.param_vars.push_back(i); break;
        case VarClass::kParameterRate: sys.rate_vars.push_back(i); break;
        default: break;
      }
    }
    std::set<VarClass> xt = {VarClass::kState, VarClass::kParameter};
    if (jsys.contains("A"))
      sys.A = detail::parse_poly_matrix(jsys["A"], "system.A", sys.space,
                                        sys.n, sys.n, xt);
    if (!jsys.contains("A") && !jsys.contains("f"))
      scenario_fail("system.A", "missing required key (give A, f, or both)");
    sys.B = detail::parse_poly_matrix(need(jsys, "system", "B"), "system.B",
                                      sys.space, sys.n, sys.m, xt);
    if (jsys.contains("f")) {
      const Json& jf = jsys["f"];
      if (!jf.is_array() || static_cast<int>(jf.size()) != sys.n)
        scenario_fail("system.f", "expected " + std::to_string(sys.n) + " rows");
      for (int i = 0; i < sys.n; ++i) {
        std::string fp = "system.f[" + std::to_string(i) + "]";
        sys.f.push_back(detail::parse_poly_restricted(
            detail::as_string(jf[static_cast<size_t>(i)], fp), sys.space, fp, xt));
      }
    }
  }
  NpvSystem& system = sc.system;

  {
    const Json& jh = need(jsys, "system", "theta_set");
    if (!jh.is_array()) scenario_fail("system.theta_set", "expected an array");
    for (size_t i = 0; i < jh.size(); ++i) {
      std::string hp = "system.theta_set[" + std::to_string(i) + "]";
      system.theta_set.push_back(detail::parse_poly_restricted(
          detail::as_string(jh[i], hp), system.space, hp,
          {VarClass::kParameter}));
    }
  }
  {
    const Json& jv = need(jsys, "system", "rate_box");
    if (!jv.is_array() || static_cast<int>(jv.size()) != system.n_theta)
      scenario_fail("system.rate_box",
                    "expected " + std::to_string(system.n_theta) + " pairs");
    for (size_t k = 0; k < jv.size(); ++k) {
      std::string vp = "system.rate_box[" + std::to_string(k) + "]";
      if (!jv[k].is_array() || jv[k].size() != 2)
        scenario_fail(vp, "expected a [lo, hi] pair");
      system.rate_box.emplace_back(detail::as_number(jv[k][0], vp),
                                   detail::as_number(jv[k][1], vp));
    }
  }
  {
    const Json& jx = need(jsys, "system", "X_set");
    if (!jx.is_array()) scenario_fail("system.X_set", "expected an array");
    for (size_t i = 0; i < jx.size(); ++i) {
      std::string xp = "system.X_set[" + std::to_string(i) + "]";
      const Json& entry = jx[i];
      if (!entry.is_array() || entry.empty())
        scenario_fail(xp, "expected a row (array of strings) or a matrix");
      // A single row is the scalar form of the constraint; an array of rows
      // generalizes to |C x|_2 <= 1 with C of several rows.
      detail::Json as_matrix = entry[0].is_string() ? Json::array({entry}) : entry;
      system.x_rows.push_back(detail::parse_poly_matrix(
          as_matrix, xp, system.space, static_cast<int>(as_matrix.size()),
          system.n, {VarClass::kState}));
    }
  }

  finalize_system(system);
  sc.system_hash = detail::hash_hex(jsys.dump());

  // ---- synthesis block ----------------------------------------------
  const Json& jsyn = need(root, "", "synthesis");
  detail::reject_unknown_keys(
      jsyn, "synthesis",
      {"degrees", "epsilons", "mode", "X_states", "scale",
       "border_x_localizers", "trace_objective", "prune"});
  SynthesisConfig& syn = sc.synthesis;
  {
    const Json& jd = need(jsyn, "synthesis", "degrees");
    detail::reject_unknown_keys(jd, "synthesis.degrees",
                                {"X", "Y", "multipliers"});
    syn.deg_X = detail::as_nonneg_int(need(jd, "synthesis.degrees", "X"),
                                      "synthesis.degrees.X");
    syn.deg_Y = detail::as_nonneg_int(need(jd, "synthesis.degrees", "Y"),
                                      "synthesis.degrees.Y");
    syn.deg_mult = detail::as_nonneg_int(
        need(jd, "synthesis.degrees", "multipliers"),
        "synthesis.degrees.multipliers");
  }
  if (jsyn.contains("epsilons")) {
    const Json& je = jsyn["epsilons"];
    detail::reject_unknown_keys(je, "synthesis.epsilons", {"e1", "e2", "e3"});
    if (je.contains("e1"))
      syn.eps1 = detail::as_positive(je["e1"], "synthesis.epsilons.e1");
    if (je.contains("e3"))
      syn.eps3 = detail::as_positive(je["e3"], "synthesis.epsilons.e3");
    if (je.contains("e2"))
      syn.eps2_pin = detail::as_positive(je["e2"], "synthesis.epsilons.e2");
  }
  if (jsyn.contains("mode")) {
    syn.mode = detail::as_string(jsyn["mode"], "synthesis.mode");
    if (syn.mode != "pd" && syn.mode != "robust")
      scenario_fail("synthesis.mode", "expected pd | robust");
  }
  if (jsyn.contains("X_states")) {
    const Json& jxs = jsyn["X_states"];
    if (!jxs.is_array()) scenario_fail("synthesis.X_states", "expected an array");
    for (size_t i = 0; i < jxs.size(); ++i) {
      std::string sp = "synthesis.X_states[" + std::to_string(i) + "]";
      std::string name = detail::as_string(jxs[i], sp);
      if (!system.space->contains(name) ||
          system.space->var_class(system.space->index(name)) != VarClass::kState)
        scenario_fail(sp, "unknown state " + name);
      int var = system.space->index(name);
      for (size_t j = 0; j < system.state_vars.size(); ++j)
        if (system.state_vars[j] == var)
          syn.X_states.push_back(static_cast<int>(j));
    }
  }
  if (jsyn.contains("scale")) {
    const Json& js = jsyn["scale"];
    if (!js.is_array() || static_cast<int>(js.size()) != system.n)
      scenario_fail("synthesis.scale",
                    "expected " + std::to_string(system.n) + " entries");
    for (size_t i = 0; i < js.size(); ++i)
      syn.scale.push_back(detail::as_positive(
          js[i], "synthesis.scale[" + std::to_string(i) + "]"));
  }
  if (jsyn.contains("border_x_localizers"))
    syn.border_x_localizers = detail::as_bool(jsyn["border_x_localizers"],
                                              "synthesis.border_x_localizers");
  if (jsyn.contains("trace_objective"))
    syn.trace_objective =
        detail::as_bool(jsyn["trace_objective"], "synthesis.trace_objective");
  if (jsyn.contains("prune"))
    syn.prune = detail::as_bool(jsyn["prune"], "synthesis.prune");

  // ---- simulation block ----------------------------------------------
  if (root.contains("simulation")) {
    sc.has_simulation = true;
    const Json& jsim = root["simulation"];
    detail::reject_unknown_keys(
        jsim, "simulation",
        {"theta_trajectory", "initial_states", "T", "dt", "lambda",
         "controller", "alpha_mode", "per_stage_controller", "H"});
    SimulationConfig& sim = sc.simulation;
    const Json& jt = need(jsim, "simulation", "theta_trajectory");
    if (jt.is_array()) {
      if (static_cast<int>(jt.size()) != system.n_theta)
        scenario_fail("simulation.theta_trajectory",
                      "expected " + std::to_string(system.n_theta) +
                          " trajectories");
      for (size_t k = 0; k < jt.size(); ++k)
        sim.trajectories.push_back(detail::parse_trajectory(
            jt[k],
            "simulation.theta_trajectory[" + std::to_string(k) + "]"));
    } else {
      if (system.n_theta != 1)
        scenario_fail("simulation.theta_trajectory",
                      "expected an array of " + std::to_string(system.n_theta) +
                          " trajectories");
      sim.trajectories.push_back(
          detail::parse_trajectory(jt, "simulation.theta_trajectory"));
    }
    sim.trajectory = sim.trajectories[0];
    const Json& jx0 = need(jsim, "simulation", "initial_states");
    if (!jx0.is_array())
      scenario_fail("simulation.initial_states", "expected an array");
    for (size_t i = 0; i < jx0.size(); ++i) {
      std::string ip = "simulation.initial_states[" + std::to_string(i) + "]";
      const Json& row = jx0[i];
      if (!row.is_array() || static_cast<int>(row.size()) != system.n)
        scenario_fail(ip, "expected " + std::to_string(system.n) + " numbers");
      std::vector<double> x0;
      for (size_t j = 0; j < row.size(); ++j)
        x0.push_back(detail::as_number(row[j], ip));
      sim.initial_states.push_back(std::move(x0));
    }
    if (jsim.contains("T")) sim.T = detail::as_positive(jsim["T"], "simulation.T");
    if (jsim.contains("dt"))
      sim.dt = detail::as_positive(jsim["dt"], "simulation.dt");
    if (jsim.contains("lambda"))
      sim.lambda = detail::as_positive(jsim["lambda"], "simulation.lambda");
    if (jsim.contains("controller")) {
      sim.controller =
          detail::as_string(jsim["controller"], "simulation.controller");
      if (sim.controller != "explicit" && sim.controller != "minnorm")
        scenario_fail("simulation.controller", "expected explicit | minnorm");
    }
    if (jsim.contains("alpha_mode")) {
      sim.alpha_mode =
          detail::as_string(jsim["alpha_mode"], "simulation.alpha_mode");
      if (sim.alpha_mode != "tight" && sim.alpha_mode != "relaxed")
        scenario_fail("simulation.alpha_mode", "expected tight | relaxed");
    }
    if (jsim.contains("per_stage_controller"))
      sim.per_stage_controller = detail::as_bool(
          jsim["per_stage_controller"], "simulation.per_stage_controller");
    if (jsim.contains("H")) {
      const Json& jH = jsim["H"];
      if (!jH.is_array() || static_cast<int>(jH.size()) != system.m)
        scenario_fail("simulation.H",
                      "expected an " + std::to_string(system.m) + "x" +
                          std::to_string(system.m) + " matrix");
      for (size_t i = 0; i < jH.size(); ++i) {
        std::string hp = "simulation.H[" + std::to_string(i) + "]";
        const Json& row = jH[i];
        if (!row.is_array() || static_cast<int>(row.size()) != system.m)
          scenario_fail(hp, "expected " + std::to_string(system.m) + " entries");
        std::vector<std::string> entries;
        for (size_t j = 0; j < row.size(); ++j) {
          std::string ep = hp + "[" + std::to_string(j) + "]";
          // Validate now so bad entries fail at load time.
          detail::parse_poly_restricted(detail::as_string(row[j], ep),
                                        system.space, ep,
                                        {VarClass::kParameter});
          entries.push_back(row[j].get<std::string>());
        }
        sim.H.push_back(std::move(entries));
      }
    }
  }

  // ---- output block ----------------------------------------------------
  if (root.contains("output")) {
    const Json& jout = root["output"];
    detail::reject_unknown_keys(jout, "output", {"directory", "formats"});
    if (jout.contains("directory"))
      sc.output.directory =
          detail::as_string(jout["directory"], "output.directory");
    if (jout.contains("formats")) {
      const Json& jf = jout["formats"];
      if (!jf.is_array()) scenario_fail("output.formats", "expected an array");
      sc.output.formats.clear();
      for (size_t i = 0; i < jf.size(); ++i) {
        std::string fp = "output.formats[" + std::to_string(i) + "]";
        std::string fmt = detail::as_string(jf[i], fp);
        if (fmt != "csv" && fmt != "svg")
          scenario_fail(fp, "expected csv | svg");
        sc.output.formats.push_back(fmt);
      }
    }
  }

  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str(), path);
}

}  // namespace pdclf
