#include "rssa/artifact_io.hpp"

#include <fstream>

#include "rssa/errors.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kIo, "artifact: " + what, "load");
}

const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) corrupt(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* what) {
  // Non-finite doubles are written as null by the JSON layer; none are stored.
  if (!j.is_number()) corrupt(std::string(what) + ": expected a number");
  return j.get<double>();
}

json vec_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vec_from(const json& j, const char* what) {
  if (!j.is_array()) corrupt(std::string(what) + ": expected an array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = num(j[i], what);
  return v;
}

/// Row-major with explicit shape so empty matrices keep their dimensions.
json mat_json(const MatrixXd& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (int i = 0; i < m.rows(); ++i) {
    for (int k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd mat_from(const json& j, const char* what) {
  const auto rows = at(j, "rows").get<long long>();
  const auto cols = at(j, "cols").get<long long>();
  const VectorXd data = vec_from(at(j, "data"), what);
  if (rows < 0 || cols < 0 || data.size() != rows * cols) {
    corrupt(std::string(what) + ": shape does not match data");
  }
  MatrixXd m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    for (long long k = 0; k < cols; ++k) m(i, k) = data(i * cols + k);
  }
  return m;
}

json poly_json(const HPolytope& p) {
  return {{"normals", mat_json(p.normals())}, {"offsets", vec_json(p.offsets())}};
}

HPolytope poly_from(const json& j, const char* what) {
  return HPolytope(mat_from(at(j, "normals"), what), vec_from(at(j, "offsets"), what));
}

json box_json(const Box& b) {
  return {{"center", vec_json(b.center)}, {"half_widths", vec_json(b.half_widths)}};
}

Box box_from(const json& j, const char* what) {
  return Box(vec_from(at(j, "center"), what), vec_from(at(j, "half_widths"), what));
}

}  // namespace

json artifact_to_json(const StoredArtifact& stored) {
  const ControllerArtifacts& a = stored.art;
  json j;
  j["format"] = kArtifactFormat;
  j["version"] = kArtifactVersion;
  j["config"] = stored.config;
  j["config_hash"] = stored.config_hash;
  j["kind"] = to_string(a.kind);
  j["system"] = {{"A", mat_json(a.sys.A)},
                 {"B", mat_json(a.sys.B)},
                 {"C", mat_json(a.sys.C)},
                 {"D", mat_json(a.sys.D)}};
  j["X"] = poly_json(a.X);
  j["U"] = poly_json(a.U);
  j["W"] = box_json(a.W);
  j["weights"] = {{"Q_x", mat_json(a.weights.Q_x)},   {"Q_u", mat_json(a.weights.Q_u)},
                  {"Q_N", mat_json(a.weights.Q_N)},   {"Q_r", mat_json(a.weights.Q_r)},
                  {"Q_sx", mat_json(a.weights.Q_sx)}, {"Q_su", mat_json(a.weights.Q_su)}};
  j["steady_state"] = {
      {"M1", mat_json(a.ssp.M1)}, {"M2", mat_json(a.ssp.M2)}, {"L", mat_json(a.ssp.L)}};
  j["N"] = a.N;
  j["epsilon"] = a.epsilon;
  j["K_tube"] = mat_json(a.K_tube);
  j["riccati"] = {{"Q_N", mat_json(a.riccati.Q_N)},
                  {"K_inf", mat_json(a.riccati.K_inf)},
                  {"residual", a.riccati.residual},
                  {"iterations", a.riccati.iterations}};
  j["rpi"] = {{"s", a.rpi.s},
              {"alpha", a.rpi.alpha},
              {"A_K", mat_json(a.rpi.A_K)},
              {"W", box_json(a.rpi.W)},
              {"W_sum", box_json(a.rpi.W_sum)}};
  j["F_facets"] = poly_json(a.F_facets);
  j["facets_exact"] = a.facets_exact;
  j["X_t"] = poly_json(a.X_t);
  j["U_t"] = poly_json(a.U_t);
  j["arena"] = {{"state_abs", vec_json(a.arena.state_abs)},
                {"theta_abs", vec_json(a.arena.theta_abs)}};
  j["terminal"] = poly_json(a.terminal);
  j["gamma_star"] = a.gamma_star;
  j["target"] = {{"theta", vec_json(a.theta_target)},
                 {"x", vec_json(a.x_target)},
                 {"u", vec_json(a.u_target)}};
  return j;
}

StoredArtifact artifact_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kArtifactFormat) {
    corrupt("not an artifact file (format tag missing)");
  }
  const int version = at(j, "version").get<int>();
  if (version != kArtifactVersion) {
    corrupt("unsupported version " + std::to_string(version) + " (expected " +
            std::to_string(kArtifactVersion) + ")");
  }
  const std::string kind = at(j, "kind").get<std::string>();
  if (kind != "rssa" && kind != "baseline") corrupt("unknown controller kind '" + kind + "'");

  const json& sys = at(j, "system");
  const json& w = at(j, "weights");
  const json& ssp = at(j, "steady_state");
  const json& ric = at(j, "riccati");
  const json& rpi = at(j, "rpi");
  const json& arena = at(j, "arena");
  const json& target = at(j, "target");

  const MatrixXd A_K = mat_from(at(rpi, "A_K"), "rpi.A_K");
  const Box W_sum = box_from(at(rpi, "W_sum"), "rpi.W_sum");
  const int s = at(rpi, "s").get<int>();
  const double alpha = num(at(rpi, "alpha"), "rpi.alpha");

  StoredArtifact out{
      .art =
          ControllerArtifacts{
              .kind = kind == "rssa" ? ControllerKind::kRssa : ControllerKind::kBaseline,
              .sys = LtiSystem{mat_from(at(sys, "A"), "A"), mat_from(at(sys, "B"), "B"),
                               mat_from(at(sys, "C"), "C"), mat_from(at(sys, "D"), "D")},
              .X = poly_from(at(j, "X"), "X"),
              .U = poly_from(at(j, "U"), "U"),
              .W = box_from(at(j, "W"), "W"),
              .weights = Weights{mat_from(at(w, "Q_x"), "Q_x"), mat_from(at(w, "Q_u"), "Q_u"),
                                 mat_from(at(w, "Q_N"), "Q_N"), mat_from(at(w, "Q_r"), "Q_r"),
                                 mat_from(at(w, "Q_sx"), "Q_sx"), mat_from(at(w, "Q_su"), "Q_su")},
              .ssp = SteadyStateParam{mat_from(at(ssp, "M1"), "M1"), mat_from(at(ssp, "M2"), "M2"),
                                      mat_from(at(ssp, "L"), "L")},
              .N = at(j, "N").get<int>(),
              .epsilon = num(at(j, "epsilon"), "epsilon"),
              .K_tube = mat_from(at(j, "K_tube"), "K_tube"),
              .riccati = RiccatiResult{mat_from(at(ric, "Q_N"), "riccati.Q_N"),
                                       mat_from(at(ric, "K_inf"), "riccati.K_inf"),
                                       num(at(ric, "residual"), "riccati.residual"),
                                       at(ric, "iterations").get<int>()},
              .rpi = RpiApprox{rpi_support_set(A_K, W_sum, s, alpha), s, alpha, A_K,
                               box_from(at(rpi, "W"), "rpi.W"), W_sum},
              .F_facets = poly_from(at(j, "F_facets"), "F_facets"),
              .facets_exact = at(j, "facets_exact").get<bool>(),
              .X_t = poly_from(at(j, "X_t"), "X_t"),
              .U_t = poly_from(at(j, "U_t"), "U_t"),
              .arena = ArenaBox{vec_from(at(arena, "state_abs"), "arena"),
                                vec_from(at(arena, "theta_abs"), "arena")},
              .terminal = poly_from(at(j, "terminal"), "terminal"),
              .gamma_star = at(j, "gamma_star").get<int>(),
              .theta_target = vec_from(at(target, "theta"), "target"),
              .x_target = vec_from(at(target, "x"), "target"),
              .u_target = vec_from(at(target, "u"), "target"),
              .model = {},
          },
      .config = at(j, "config"),
      .config_hash = at(j, "config_hash").get<std::string>(),
  };
  out.art.sys.validate();
  assemble_condensed(out.art);
  return out;
}

void save_artifact(const StoredArtifact& stored, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write artifact '" + path + "'", "save");
  f << artifact_to_json(stored).dump(1) << '\n';
  if (!f) throw Error(ErrorCode::kIo, "write failed for artifact '" + path + "'", "save");
}

StoredArtifact load_artifact(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open artifact '" + path + "'", "load");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, "artifact '" + path + "' is not valid JSON: " + e.what(), "load");
  }
  try {
    return artifact_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, "artifact '" + path + "': " + e.what(), "load");
  }
}

}  // namespace rssa
