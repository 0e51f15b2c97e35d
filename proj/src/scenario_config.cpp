#include "sdpclik/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdpclik/errors.hpp"

namespace sdpclik {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string join(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

/// Object accessor that records which keys were read so leftovers can be
/// rejected as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(join(path_, key), "missing required key");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "expected a finite number");
    return d;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  Eigen::VectorXd vector(const std::string& key) { return read_vector(at(key), path(key)); }

  static Eigen::VectorXd read_vector(const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(join(p, i), "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
      if (!std::isfinite(out[static_cast<Eigen::Index>(i)])) {
        throw ConfigError(join(p, i), "expected a finite number");
      }
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
}

ManipulatorModel parse_robot(const json& j) {
  ObjectReader r(j, "/robot");
  ManipulatorModel m;
  const std::string kind = r.string("kind");
  if (kind == "planar") {
    m.kind = ModelKind::Planar;
    const Eigen::VectorXd lengths = r.vector("link_lengths");
    if (lengths.size() == 0) throw ConfigError(r.path("link_lengths"), "needs at least one link");
    for (Eigen::Index i = 0; i < lengths.size(); ++i) {
      if (!(lengths[i] > 0.0)) {
        throw ConfigError(join(r.path("link_lengths"), static_cast<std::size_t>(i)),
                          "link length must be positive");
      }
    }
    m.link_lengths.assign(lengths.begin(), lengths.end());
  } else if (kind == "dh") {
    m.kind = ModelKind::DhChain;
    const json& rows = r.at("dh_rows");
    const std::string rows_path = r.path("dh_rows");
    if (!rows.is_array() || rows.empty()) {
      throw ConfigError(rows_path, "expected a non-empty array of DH rows");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ObjectReader row(rows[i], join(rows_path, i));
      DhRow d;
      d.a = row.number("a");
      d.alpha = row.number("alpha");
      d.d = row.number("d");
      d.theta_offset = row.number_or("theta_offset", 0.0);
      row.finish();
      m.dh_rows.push_back(d);
    }
  } else {
    throw ConfigError(r.path("kind"), "unknown robot kind '" + kind + "' (expected planar or dh)");
  }

  m.qd_upper = r.vector("qd_upper");
  m.qd_lower = r.vector("qd_lower");
  for (const char* key : {"qd_upper", "qd_lower"}) {
    const auto& v = std::string(key) == "qd_upper" ? m.qd_upper : m.qd_lower;
    if (v.size() != m.dof()) {
      std::ostringstream os;
      os << "expected " << m.dof() << " entries (one per joint), got " << v.size();
      throw ConfigError(r.path(key), os.str());
    }
  }
  for (int jnt = 0; jnt < m.dof(); ++jnt) {
    if (!(m.qd_upper[jnt] > 0.0)) {
      throw ConfigError(join(r.path("qd_upper"), static_cast<std::size_t>(jnt)), "must be > 0");
    }
    if (!(m.qd_lower[jnt] < 0.0)) {
      throw ConfigError(join(r.path("qd_lower"), static_cast<std::size_t>(jnt)), "must be < 0");
    }
  }
  r.finish();
  return m;
}

TaskKind parse_task_kind(const std::string& s, const std::string& path) {
  for (TaskKind k : {TaskKind::PlanarEEPosition, TaskKind::PlanarEEOrientation,
                     TaskKind::DhFramePosition, TaskKind::DhFrameCoordinate}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError(path, "unknown task kind '" + s + "'");
}

std::vector<TaskSpec> parse_tasks(const json& j, const ManipulatorModel& robot) {
  if (!j.is_array() || j.empty()) throw ConfigError("/tasks", "expected a non-empty array of tasks");
  std::vector<TaskSpec> tasks;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ObjectReader r(j[i], join("/tasks", i));
    TaskSpec t;
    t.kind = parse_task_kind(r.string("kind"), r.path("kind"));
    const bool dh_task = t.kind == TaskKind::DhFramePosition || t.kind == TaskKind::DhFrameCoordinate;
    if (dh_task != (robot.kind == ModelKind::DhChain)) {
      throw ConfigError(r.path("kind"), std::string("task kind ") + std::string(to_string(t.kind)) +
                                            " does not fit a " +
                                            (robot.kind == ModelKind::Planar ? "planar" : "dh") +
                                            " robot");
    }
    t.target = r.vector("target");
    if (t.target.size() != t.dim()) {
      std::ostringstream os;
      os << "expected " << t.dim() << " entries, got " << t.target.size();
      throw ConfigError(r.path("target"), os.str());
    }
    if (dh_task) {
      const long idx = r.integer("frame_index");
      if (idx < 1 || idx > robot.dof()) {
        std::ostringstream os;
        os << "must be within 1.." << robot.dof();
        throw ConfigError(r.path("frame_index"), os.str());
      }
      t.frame_index = static_cast<int>(idx);
    }
    if (t.kind == TaskKind::DhFrameCoordinate) {
      const std::string axis = r.string("coordinate");
      if (axis == "x") t.coordinate = Axis::X;
      else if (axis == "y") t.coordinate = Axis::Y;
      else if (axis == "z") t.coordinate = Axis::Z;
      else throw ConfigError(r.path("coordinate"), "expected x, y or z");
    }
    r.finish();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

void parse_controller(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "/controller");
  const std::string mode = r.string("mode");
  if (mode == "sdp") c.mode = ControlMode::SdpTuned;
  else if (mode == "fixed") c.mode = ControlMode::FixedGains;
  else throw ConfigError(r.path("mode"), "unknown mode '" + mode + "' (expected sdp or fixed)");

  if (r.has("fixed_gains")) {
    c.fixed_gains = r.vector("fixed_gains");
    for (Eigen::Index i = 0; i < c.fixed_gains->size(); ++i) {
      if (!((*c.fixed_gains)[i] > 0.0)) {
        throw ConfigError(join(r.path("fixed_gains"), static_cast<std::size_t>(i)), "must be > 0");
      }
    }
  } else if (c.mode == ControlMode::FixedGains) {
    r.at("fixed_gains");  // throws "missing required key"
  }

  c.gains.beta_tilde = r.number("beta_tilde");
  require_positive(c.gains.beta_tilde, r.path("beta_tilde"));
  c.gains.delta = r.number("delta");
  require_positive(c.gains.delta, r.path("delta"));
  c.gains.eps_beta = r.number_or("eps_beta", GainProblemParams{}.eps_beta);
  if (!(c.gains.eps_beta >= 0.0)) throw ConfigError(r.path("eps_beta"), "must be >= 0");

  if (r.has("solver")) {
    ObjectReader s(r.at("solver"), r.path("solver"));
    c.solver.feas_tol = s.number_or("feas_tol", SolverOptions{}.feas_tol);
    require_positive(c.solver.feas_tol, s.path("feas_tol"));
    c.solver.obj_tol = s.number_or("obj_tol", SolverOptions{}.obj_tol);
    require_positive(c.solver.obj_tol, s.path("obj_tol"));
    if (s.has("max_iterations")) {
      const long it = s.integer("max_iterations");
      if (it < 1 || it > 100000) throw ConfigError(s.path("max_iterations"), "must be within 1..100000");
      c.solver.max_iterations = static_cast<int>(it);
    }
    s.finish();
  }
  r.finish();
}

void parse_sim(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "/sim");
  c.dt = r.number("dt");
  require_positive(c.dt, r.path("dt"));
  c.duration = r.number("duration");
  if (!(c.duration >= 0.0)) throw ConfigError(r.path("duration"), "must be >= 0");

  const bool has_q0 = r.has("q0");
  const bool has_values = r.has("initial_task_values");
  if (has_q0 == has_values) {
    throw ConfigError("/sim", "exactly one of q0 or initial_task_values is required");
  }
  if (has_q0) {
    c.q0 = r.vector("q0");
    if (c.q0->size() != c.robot.dof()) {
      throw ConfigError(r.path("q0"), "expected one entry per joint");
    }
    if (r.has("ik_seed")) throw ConfigError(r.path("ik_seed"), "only valid with initial_task_values");
  } else {
    const json& vals = r.at("initial_task_values");
    const std::string p = r.path("initial_task_values");
    if (!vals.is_array() || vals.size() != c.tasks.size()) {
      throw ConfigError(p, "expected one array per task");
    }
    std::vector<Eigen::VectorXd> values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      values.push_back(ObjectReader::read_vector(vals[i], join(p, i)));
      if (values.back().size() != c.tasks[i].dim()) {
        throw ConfigError(join(p, i), "size does not match the task dimension");
      }
    }
    c.initial_task_values = std::move(values);
    if (r.has("ik_seed")) {
      c.ik_seed = r.vector("ik_seed");
      if (c.ik_seed->size() != c.robot.dof()) {
        throw ConfigError(r.path("ik_seed"), "expected one entry per joint");
      }
    }
  }
  r.finish();
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }

  ObjectReader r(root, "");
  ScenarioConfig c;
  if (r.has("name")) c.name = r.string("name");
  c.robot = parse_robot(r.at("robot"));
  c.tasks = parse_tasks(r.at("tasks"), c.robot);
  parse_controller(r.at("controller"), c);
  parse_sim(r.at("sim"), c);
  r.finish();

  int n = 0;
  for (const auto& t : c.tasks) n += t.dim();
  if (c.fixed_gains && c.fixed_gains->size() != n) {
    std::ostringstream os;
    os << "expected " << n << " gains (one per task row), got " << c.fixed_gains->size();
    throw ConfigError("/controller/fixed_gains", os.str());
  }
  if (n > c.robot.dof()) {
    throw ConfigError("/tasks", "task rows exceed the number of joints");
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.path(), std::string(e.what()) + " (in " + path.string() + ")");
  }
}

std::string dump_config(const ScenarioConfig& c) {
  json robot;
  if (c.robot.kind == ModelKind::Planar) {
    robot["kind"] = "planar";
    robot["link_lengths"] = c.robot.link_lengths;
  } else {
    robot["kind"] = "dh";
    json rows = json::array();
    for (const auto& d : c.robot.dh_rows) {
      rows.push_back({{"a", d.a}, {"alpha", d.alpha}, {"d", d.d}, {"theta_offset", d.theta_offset}});
    }
    robot["dh_rows"] = rows;
  }
  robot["qd_upper"] = to_array(c.robot.qd_upper);
  robot["qd_lower"] = to_array(c.robot.qd_lower);

  json tasks = json::array();
  for (const auto& t : c.tasks) {
    json jt;
    jt["kind"] = std::string(to_string(t.kind));
    jt["target"] = to_array(t.target);
    if (t.kind == TaskKind::DhFramePosition || t.kind == TaskKind::DhFrameCoordinate) {
      jt["frame_index"] = t.frame_index;
    }
    if (t.kind == TaskKind::DhFrameCoordinate) jt["coordinate"] = std::string(to_string(t.coordinate));
    tasks.push_back(jt);
  }

  json controller;
  controller["mode"] = std::string(to_string(c.mode));
  if (c.fixed_gains) controller["fixed_gains"] = to_array(*c.fixed_gains);
  controller["beta_tilde"] = c.gains.beta_tilde;
  controller["delta"] = c.gains.delta;
  controller["eps_beta"] = c.gains.eps_beta;
  controller["solver"] = {{"feas_tol", c.solver.feas_tol},
                          {"obj_tol", c.solver.obj_tol},
                          {"max_iterations", c.solver.max_iterations}};

  json sim;
  sim["dt"] = c.dt;
  sim["duration"] = c.duration;
  if (c.q0) sim["q0"] = to_array(*c.q0);
  if (c.initial_task_values) {
    json vals = json::array();
    for (const auto& v : *c.initial_task_values) vals.push_back(to_array(v));
    sim["initial_task_values"] = vals;
  }
  if (c.ik_seed) sim["ik_seed"] = to_array(*c.ik_seed);

  json root;
  root["name"] = c.name;
  root["robot"] = robot;
  root["tasks"] = tasks;
  root["controller"] = controller;
  root["sim"] = sim;
  return root.dump(2) + "\n";
}

Scenario to_scenario(const ScenarioConfig& c) {
  Scenario sc;
  sc.name = c.name;
  sc.model = c.robot;
  sc.stack.tasks = c.tasks;
  sc.mode = c.mode;
  if (c.fixed_gains) sc.fixed_gains = *c.fixed_gains;
  if (c.mode == ControlMode::FixedGains && !c.fixed_gains) {
    throw ConfigError("/controller/fixed_gains", "missing required key");
  }
  sc.gains = c.gains;
  sc.solver = c.solver;
  sc.dt = c.dt;
  sc.duration = c.duration;
  try {
    if (c.q0) {
      sc.q0 = *c.q0;
    } else if (c.initial_task_values) {
      const Eigen::VectorXd seed =
          c.ik_seed ? *c.ik_seed : Eigen::VectorXd::Zero(c.robot.dof()).eval();
      sc.q0 = solve_initial_configuration(sc.model, sc.stack, *c.initial_task_values, seed);
    } else {
      throw ConfigError("/sim", "exactly one of q0 or initial_task_values is required");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("/sim/initial_task_values", e.what());
  }
  try {
    sc.validate();
  } catch (const Error& e) {
    throw ConfigError("", e.what());
  }
  return sc;
}

ScenarioConfig config_from_scenario(const Scenario& sc) {
  ScenarioConfig c;
  c.name = sc.name;
  c.robot = sc.model;
  c.tasks = sc.stack.tasks;
  c.mode = sc.mode;
  if (sc.fixed_gains.size() > 0) c.fixed_gains = sc.fixed_gains;
  c.gains = sc.gains;
  c.solver = sc.solver;
  c.dt = sc.dt;
  c.duration = sc.duration;
  c.q0 = sc.q0;
  return c;
}

void set_velocity_limit(ManipulatorModel& model, double limit) {
  model.qd_upper = Eigen::VectorXd::Constant(model.dof(), limit);
  model.qd_lower = -model.qd_upper;
}

}  // namespace sdpclik
