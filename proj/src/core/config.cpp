#include "rssa/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rssa/errors.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kConfig, path + ": " + msg, "config");
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required field");
  return obj.at(key);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void allowed_keys(const json& obj, const std::string& path, const std::set<std::string>& keys) {
  require_object(obj, path);
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) fail(path + "." + item.key(), "unknown field");
  }
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int read_int(const json& j, const std::string& path, int lo, int hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > hi) {
    fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

std::uint64_t read_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

/// Entries may be null when null_is_inf; they then read as +infinity.
VectorXd read_vector(const json& j, const std::string& path, int size, bool null_is_inf = false) {
  if (!j.is_array()) fail(path, "expected an array");
  if (size >= 0 && static_cast<int>(j.size()) != size) {
    fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  }
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (null_is_inf && j[i].is_null()) {
      v(i) = std::numeric_limits<double>::infinity();
    } else {
      v(i) = read_number(j[i], p);
    }
  }
  return v;
}

MatrixXd read_matrix(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  if (rows >= 0 && static_cast<int>(j.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  }
  if (j.empty()) return MatrixXd(0, std::max(cols, 0));
  const int c = cols >= 0 ? cols : static_cast<int>(j[0].is_array() ? j[0].size() : 0);
  MatrixXd m(j.size(), c);
  for (std::size_t i = 0; i < j.size(); ++i) {
    m.row(i) = read_vector(j[i], path + "[" + std::to_string(i) + "]", c).transpose();
  }
  return m;
}

/// A matrix, {"diag": [...]} or {"scale": s} for s * I.
MatrixXd read_weight(const json& j, const std::string& path, int dim) {
  if (j.is_array()) return read_matrix(j, path, dim, dim);
  require_object(j, path);
  if (j.contains("diag")) {
    allowed_keys(j, path, {"diag"});
    return read_vector(j["diag"], path + ".diag", dim).asDiagonal();
  }
  if (j.contains("scale")) {
    allowed_keys(j, path, {"scale"});
    return read_number(j["scale"], path + ".scale") * MatrixXd::Identity(dim, dim);
  }
  fail(path, "expected a matrix, {\"diag\": [...]} or {\"scale\": s}");
}

void require_psd(const MatrixXd& Q, const std::string& path, bool strict) {
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    fail(path, "must be symmetric");
  }
  if (Q.size() == 0) return;
  const double lo = Eigen::SelfAdjointEigenSolver<MatrixXd>(Q).eigenvalues().minCoeff();
  if (strict && lo <= 0.0) fail(path, "must be positive definite");
  if (!strict && lo < -1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    fail(path, "must be positive semidefinite");
  }
}

HPolytope read_constraint_set(const json& j, const std::string& path, int dim) {
  require_object(j, path);
  if (j.contains("abs_max")) {
    allowed_keys(j, path, {"abs_max"});
    const VectorXd b = read_vector(j["abs_max"], path + ".abs_max", dim, true);
    if (dim > 0 && b.minCoeff() <= 0.0) fail(path + ".abs_max", "bounds must be positive");
    try {
      return HPolytope::abs_bounds(b);
    } catch (const Error& e) {
      fail(path + ".abs_max", e.what());
    }
  }
  allowed_keys(j, path, {"normals", "offsets"});
  const MatrixXd N = read_matrix(field(j, "normals", path), path + ".normals", -1, dim);
  const VectorXd h = read_vector(field(j, "offsets", path), path + ".offsets",
                                 static_cast<int>(N.rows()));
  try {
    return HPolytope::constraint_set(N, h);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::vector<int> read_indices(const json& j, const std::string& path, int n) {
  if (!j.is_array()) fail(path, "expected an array of indices");
  std::vector<int> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const int k = read_int(j[i], path + "[" + std::to_string(i) + "]", 0, n - 1);
    if (!seen.insert(k).second) fail(path, "repeated index " + std::to_string(k));
    out.push_back(k);
  }
  return out;
}

/// A scalar applies to every entry.
VectorXd read_bounds(const json& j, const std::string& path, int size) {
  if (j.is_number()) return VectorXd::Constant(size, read_number(j, path));
  return read_vector(j, path, size);
}

void fill(json& obj, const char* key, json value) {
  if (!obj.contains(key)) obj[key] = std::move(value);
}

json zeros(int n) { return json(std::vector<double>(n, 0.0)); }

json identity(int n) {
  json m = json::array();
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n, 0.0);
    row[i] = 1.0;
    m.push_back(row);
  }
  return m;
}

json zero_matrix(int rows, int cols) {
  json m = json::array();
  for (int i = 0; i < rows; ++i) m.push_back(std::vector<double>(cols, 0.0));
  return m;
}

json to_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) out.push_back(to_json(VectorXd(m.row(i).transpose())));
  return out;
}

}  // namespace

json normalize_config(const json& raw) {
  json c = raw;
  allowed_keys(c, "config",
               {"name", "plant", "state_constraints", "input_constraints", "disturbance", "weights",
                "horizon", "epsilon", "tube_gain", "rpi", "arena", "gamma_cap", "dare",
                "controller", "reference", "baseline_reference", "simulation", "protocol", "roa",
                "output_dir"});
  json& plant = c["plant"];
  if (plant.is_null()) fail("config.plant", "missing required field");
  allowed_keys(plant, "plant", {"A", "B", "C", "D"});
  const json& A = field(plant, "A", "plant");
  const json& B = field(plant, "B", "plant");
  if (!A.is_array() || A.empty()) fail("plant.A", "expected a non-empty array of rows");
  if (!B.is_array() || B.empty() || !B[0].is_array()) fail("plant.B", "expected an array of rows");
  const int n = static_cast<int>(A.size());
  const int p = static_cast<int>(B[0].size());
  fill(plant, "C", identity(n));
  fill(plant, "D", zero_matrix(plant["C"].is_array() ? plant["C"].size() : 0, p));

  fill(c, "name", "experiment");
  if (!c.contains("state_constraints")) fail("config.state_constraints", "missing required field");
  if (!c.contains("input_constraints")) fail("config.input_constraints", "missing required field");
  json& dist = c["disturbance"];
  if (dist.is_null()) dist = json::object();
  require_object(dist, "disturbance");
  fill(dist, "beta", 0.0);
  if (!dist.contains("active")) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    dist["active"] = all;
  }
  json& w = c["weights"];
  if (w.is_null()) fail("config.weights", "missing required field");
  require_object(w, "weights");
  fill(w, "Q_r", json{{"scale", 100.0}});
  fill(w, "Q_sx", json{{"scale", 0.0}});
  fill(w, "Q_su", json{{"scale", 0.0}});
  fill(c, "horizon", 10);
  fill(c, "epsilon", 0.01);
  fill(c, "tube_gain", "riccati");
  json& rpi = c["rpi"];
  if (rpi.is_null()) rpi = json::object();
  require_object(rpi, "rpi");
  fill(rpi, "alpha_target", 0.05);
  fill(rpi, "eta", nullptr);
  fill(rpi, "max_terms", 500);
  json& arena = c["arena"];
  if (arena.is_null()) arena = json::object();
  require_object(arena, "arena");
  fill(arena, "state_abs", 10.0);
  fill(arena, "theta_abs", 10.0);
  fill(c, "gamma_cap", 200);
  json& dare = c["dare"];
  if (dare.is_null()) dare = json::object();
  require_object(dare, "dare");
  fill(dare, "tol", 1e-12);
  fill(dare, "max_iter", 100000);
  fill(dare, "residual_tol", 1e-8);
  fill(c, "controller", "rssa");
  json& ref = c["reference"];
  if (ref.is_null()) fail("config.reference", "missing required field");
  require_object(ref, "reference");
  if (!ref.contains("r")) fail("reference.r", "missing required field");
  fill(ref, "x_des", zeros(n));
  fill(ref, "u_des", zeros(p));
  fill(c, "baseline_reference", ref["r"]);
  json& sim = c["simulation"];
  if (sim.is_null()) sim = json::object();
  require_object(sim, "simulation");
  fill(sim, "x0", zeros(n));
  fill(sim, "T", 150);
  fill(sim, "seed", 1);
  json& prot = c["protocol"];
  if (prot.is_null()) prot = json::object();
  require_object(prot, "protocol");
  fill(prot, "runs", 1000);
  fill(prot, "T", sim["T"]);
  fill(prot, "x0_lo", sim["x0"]);
  fill(prot, "x0_hi", prot["x0_lo"]);
  fill(prot, "sigma_indices", json::array());
  fill(prot, "master_seed", 1);
  fill(prot, "threads", 1);
  fill(prot, "beta", dist["beta"]);
  json& roa = c["roa"];
  if (roa.is_null()) roa = json::object();
  require_object(roa, "roa");
  fill(roa, "axis_x", 0);
  fill(roa, "axis_y", n > 1 ? 1 : 0);
  fill(roa, "x_range", json::array({-3.0, 3.0}));
  fill(roa, "nx", 61);
  fill(roa, "y_range", json::array({-2.5, 2.5}));
  fill(roa, "ny", 51);
  fill(roa, "base_state", zeros(n));
  fill(roa, "threads", 1);
  fill(c, "output_dir", ".");
  return c;
}

ExperimentConfig parse_config(const json& raw) {
  const json c = normalize_config(raw);
  if (!c["name"].is_string()) fail("name", "expected a string");

  const json& plant = c["plant"];
  LtiSystem sys;
  sys.A = read_matrix(plant["A"], "plant.A", -1, -1);
  const int n = static_cast<int>(sys.A.rows());
  if (sys.A.cols() != n) fail("plant.A", "must be square");
  sys.B = read_matrix(plant["B"], "plant.B", n, -1);
  const int p = static_cast<int>(sys.B.cols());
  if (p == 0) fail("plant.B", "must have at least one column");
  sys.C = read_matrix(plant["C"], "plant.C", -1, n);
  sys.D = read_matrix(plant["D"], "plant.D", static_cast<int>(sys.C.rows()), p);
  const int m = static_cast<int>(sys.C.rows());
  try {
    sys.validate();
  } catch (const Error& e) {
    fail("plant", e.what());
  }

  HPolytope X = read_constraint_set(c["state_constraints"], "state_constraints", n);
  HPolytope U = read_constraint_set(c["input_constraints"], "input_constraints", p);

  const json& dist = c["disturbance"];
  allowed_keys(dist, "disturbance", {"beta", "active"});
  const double beta = read_number(dist["beta"], "disturbance.beta");
  if (beta < 0.0) fail("disturbance.beta", "must be >= 0");
  const std::vector<int> active = read_indices(dist["active"], "disturbance.active", n);
  VectorXd hw = VectorXd::Zero(n);
  for (int i : active) hw(i) = beta;

  const json& w = c["weights"];
  allowed_keys(w, "weights", {"Q_x", "Q_u", "Q_r", "Q_sx", "Q_su"});
  Weights wt;
  wt.Q_x = read_weight(field(w, "Q_x", "weights"), "weights.Q_x", n);
  wt.Q_u = read_weight(field(w, "Q_u", "weights"), "weights.Q_u", p);
  wt.Q_r = read_weight(w["Q_r"], "weights.Q_r", m);
  wt.Q_sx = read_weight(w["Q_sx"], "weights.Q_sx", n);
  wt.Q_su = read_weight(w["Q_su"], "weights.Q_su", p);
  require_psd(wt.Q_x, "weights.Q_x", false);
  require_psd(wt.Q_u, "weights.Q_u", true);
  require_psd(wt.Q_r, "weights.Q_r", false);
  require_psd(wt.Q_sx, "weights.Q_sx", false);
  require_psd(wt.Q_su, "weights.Q_su", false);

  ExperimentConfig cfg{
      .name = c["name"].get<std::string>(),
      .problem = PlantProblem{sys, std::move(X), std::move(U), Box::centered(hw), std::move(wt)},
      .options = {},
      .beta = beta,
      .disturbance_active = active,
      .reference = {},
      .x0 = {},
      .protocol = {},
      .roa = {},
      .output_dir = {},
      .normalized = c,
  };

  PrecomputeOptions& o = cfg.options;
  o.N = read_int(c["horizon"], "horizon", 1, 1000);
  o.epsilon = read_number(c["epsilon"], "epsilon");
  if (!(o.epsilon > 0.0 && o.epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
  if (c["tube_gain"].is_string()) {
    if (c["tube_gain"] != "riccati") fail("tube_gain", "expected \"riccati\" or a p x n matrix");
  } else {
    o.K_tube = read_matrix(c["tube_gain"], "tube_gain", p, n);
  }
  const json& rpi = c["rpi"];
  allowed_keys(rpi, "rpi", {"alpha_target", "eta", "max_terms"});
  o.rpi.alpha_target = read_number(rpi["alpha_target"], "rpi.alpha_target");
  if (!(o.rpi.alpha_target > 0.0 && o.rpi.alpha_target < 1.0)) {
    fail("rpi.alpha_target", "must lie in (0, 1)");
  }
  if (!rpi["eta"].is_null()) {
    o.rpi.eta = read_number(rpi["eta"], "rpi.eta");
    if (*o.rpi.eta <= 0.0) fail("rpi.eta", "must be positive");
  }
  o.rpi.max_terms = read_int(rpi["max_terms"], "rpi.max_terms", 1, 1000000);

  const json& arena = c["arena"];
  allowed_keys(arena, "arena", {"state_abs", "theta_abs"});
  o.arena.state_abs = read_bounds(arena["state_abs"], "arena.state_abs", n);
  if (o.arena.state_abs.minCoeff() <= 0.0) fail("arena.state_abs", "bounds must be positive");
  // The parameter dimension is known only after the steady-state analysis; a
  // scalar is expanded later, an array is checked then.
  if (arena["theta_abs"].is_number()) {
    const double t = read_number(arena["theta_abs"], "arena.theta_abs");
    if (t <= 0.0) fail("arena.theta_abs", "bound must be positive");
    o.arena.theta_abs = VectorXd::Constant(1, t);
  } else {
    o.arena.theta_abs = read_vector(arena["theta_abs"], "arena.theta_abs", -1);
    if (o.arena.theta_abs.size() == 0 || o.arena.theta_abs.minCoeff() <= 0.0) {
      fail("arena.theta_abs", "bounds must be positive");
    }
  }
  o.gamma_cap = read_int(c["gamma_cap"], "gamma_cap", 0, 100000);
  const json& dare = c["dare"];
  allowed_keys(dare, "dare", {"tol", "max_iter", "residual_tol"});
  o.dare.tol = read_number(dare["tol"], "dare.tol");
  o.dare.max_iter = read_int(dare["max_iter"], "dare.max_iter", 1, 100000000);
  o.dare.residual_tol = read_number(dare["residual_tol"], "dare.residual_tol");
  if (!c["controller"].is_string()) fail("controller", "expected \"rssa\" or \"baseline\"");
  const std::string kind = c["controller"].get<std::string>();
  if (kind == "rssa") {
    o.kind = ControllerKind::kRssa;
  } else if (kind == "baseline") {
    o.kind = ControllerKind::kBaseline;
  } else {
    fail("controller", "expected \"rssa\" or \"baseline\", got \"" + kind + "\"");
  }

  const json& ref = c["reference"];
  allowed_keys(ref, "reference", {"r", "x_des", "u_des"});
  cfg.reference.r = read_vector(ref["r"], "reference.r", m);
  cfg.reference.x_des = read_vector(ref["x_des"], "reference.x_des", n);
  cfg.reference.u_des = read_vector(ref["u_des"], "reference.u_des", p);
  o.baseline_reference = read_vector(c["baseline_reference"], "baseline_reference", m);

  const json& sim = c["simulation"];
  allowed_keys(sim, "simulation", {"x0", "T", "seed"});
  cfg.x0 = read_vector(sim["x0"], "simulation.x0", n);
  read_int(sim["T"], "simulation.T", 0, 10000000);
  read_seed(sim["seed"], "simulation.seed");

  const json& prot = c["protocol"];
  allowed_keys(prot, "protocol",
               {"runs", "T", "x0_lo", "x0_hi", "sigma_indices", "master_seed", "threads", "beta"});
  MonteCarloProtocol& mc = cfg.protocol;
  mc.runs = read_int(prot["runs"], "protocol.runs", 1, 100000000);
  mc.T = read_int(prot["T"], "protocol.T", 0, 10000000);
  mc.x0_lo = read_vector(prot["x0_lo"], "protocol.x0_lo", n);
  mc.x0_hi = read_vector(prot["x0_hi"], "protocol.x0_hi", n);
  if ((mc.x0_hi - mc.x0_lo).minCoeff() < 0.0) fail("protocol.x0_hi", "must be >= x0_lo");
  mc.sigma_indices = read_indices(prot["sigma_indices"], "protocol.sigma_indices", n);
  mc.master_seed = read_seed(prot["master_seed"], "protocol.master_seed");
  mc.threads = read_int(prot["threads"], "protocol.threads", 1, 4096);
  mc.beta = read_number(prot["beta"], "protocol.beta");
  if (mc.beta < 0.0) fail("protocol.beta", "must be >= 0");
  mc.disturbance_active = cfg.disturbance_active;
  mc.ref = cfg.reference;

  const json& roa = c["roa"];
  allowed_keys(roa, "roa",
               {"axis_x", "axis_y", "x_range", "nx", "y_range", "ny", "base_state", "threads"});
  RoaGrid& g = cfg.roa;
  g.axis_x = read_int(roa["axis_x"], "roa.axis_x", 0, n - 1);
  g.axis_y = read_int(roa["axis_y"], "roa.axis_y", 0, n - 1);
  const VectorXd xr = read_vector(roa["x_range"], "roa.x_range", 2);
  const VectorXd yr = read_vector(roa["y_range"], "roa.y_range", 2);
  if (xr(1) < xr(0)) fail("roa.x_range", "must be increasing");
  if (yr(1) < yr(0)) fail("roa.y_range", "must be increasing");
  g.x_lo = xr(0);
  g.x_hi = xr(1);
  g.y_lo = yr(0);
  g.y_hi = yr(1);
  g.nx = read_int(roa["nx"], "roa.nx", 1, 100000);
  g.ny = read_int(roa["ny"], "roa.ny", 1, 100000);
  g.base_state = read_vector(roa["base_state"], "roa.base_state", n);
  g.threads = read_int(roa["threads"], "roa.threads", 1, 4096);

  if (!c["output_dir"].is_string()) fail("output_dir", "expected a string");
  cfg.output_dir = c["output_dir"].get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'", "config");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "config: " + path + " is not valid JSON: " + e.what(),
                "config");
  }
  return parse_config(raw);
}

std::string config_hash(const json& normalized) {
  const std::string text = normalized.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json drone_preset_json(double beta, ControllerKind kind) {
  MatrixXd A(6, 6);
  A << 1, 0.19895, 0, 0, 0, 0,
       0, 0.98952, 0, 0, 0, 0,
       0, 0, 1, 0.19963, 0, 0,
       0, 0, 0, 0.99627, 0, 0,
       0, 0, 0, 0, 1, 0.16816,
       0, 0, 0, 0, 0, 0.69946;
  MatrixXd B = MatrixXd::Zero(6, 3);
  B(0, 0) = -0.10917348;
  B(1, 0) = -1.08982035;
  B(2, 1) = -0.141040918;
  B(3, 1) = -1.409531141;
  B(4, 2) = -0.030967224;
  B(5, 2) = -0.292295416;
  const json r = {1.0, 0.0, 2.0, 0.0, 1.5, 0.0};
  json c;
  c["name"] = kind == ControllerKind::kRssa ? "drone" : "drone_baseline";
  c["plant"] = {{"A", to_json(A)}, {"B", to_json(B)}};
  c["state_constraints"] = {{"abs_max", {nullptr, nullptr, 1.8, nullptr, nullptr, nullptr}}};
  c["input_constraints"] = {{"abs_max", {0.05, 0.05, 0.6}}};
  c["disturbance"] = {{"beta", beta}, {"active", {1, 3, 5}}};
  c["weights"] = {{"Q_x", {{"scale", 5.0}}},
                  {"Q_u", {{"diag", {30.0, 20.0, 1.0}}}},
                  {"Q_r", {{"scale", 100.0}}},
                  {"Q_sx", {{"scale", 0.0}}},
                  {"Q_su", {{"scale", 1.0}}}};
  c["horizon"] = 10;
  c["epsilon"] = 0.01;
  c["arena"] = {{"state_abs", {10.0, 5.0, 10.0, 5.0, 10.0, 5.0}}, {"theta_abs", 10.0}};
  c["controller"] = to_string(kind);
  c["reference"] = {{"r", r}, {"x_des", r}, {"u_des", {0.0, 0.0, 0.0}}};
  c["simulation"] = {{"x0", {-1.0, 0.0, 0.0, 0.0, 0.5, 0.0}}, {"T", 150}, {"seed", 1}};
  c["protocol"] = {{"runs", 1000},
                   {"T", 150},
                   {"x0_lo", {-0.5, 0.0, 0.0, 0.0, 0.5, 0.0}},
                   {"x0_hi", {0.0, 0.0, 0.5, 0.0, 1.0, 0.0}},
                   {"sigma_indices", {0, 2, 4}},
                   {"master_seed", 1},
                   {"threads", 1}};
  c["roa"] = {{"axis_x", 0},
              {"axis_y", 2},
              {"x_range", {-3.0, 3.0}},
              {"nx", 61},
              {"y_range", {-2.5, 2.5}},
              {"ny", 51},
              {"base_state", {0.0, 0.0, 0.0, 0.0, 1.5, 0.0}}};
  return c;
}

json apply_overrides(json config, const json& patch) {
  config.merge_patch(patch);
  return config;
}

}  // namespace rssa
