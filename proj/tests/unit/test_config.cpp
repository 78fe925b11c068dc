#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rssa/config.hpp"
#include "rssa/errors.hpp"
#include "support/fixtures.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;
using test::vec;

/// Message of the kConfig error thrown while parsing `raw`.
std::string config_error(const json& raw) {
  try {
    parse_config(raw);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return {};
}

json minimal() {
  return json::parse(R"({
    "name": "scalar",
    "plant": {"A": [[0.5]], "B": [[1]]},
    "state_constraints": {"abs_max": [1]},
    "input_constraints": {"abs_max": [1]},
    "disturbance": {"beta": 0.1},
    "weights": {"Q_x": [[1]], "Q_u": [[1]]},
    "reference": {"r": [0.5]}
  })");
}

TEST(Preset, PublishedQuadrotorModel) {
  const ExperimentConfig cfg = test::drone_config();
  const MatrixXd A = (MatrixXd(6, 6) << 1, 0.19895, 0, 0, 0, 0,  //
                      0, 0.98952, 0, 0, 0, 0,                    //
                      0, 0, 1.000, 0.19963, 0, 0,                //
                      0, 0, 0, 0.99627, 0, 0,                    //
                      0, 0, 0, 0, 1.000, 0.16816,                //
                      0, 0, 0, 0, 0, 0.69946)
                         .finished();
  const MatrixXd B = (MatrixXd(6, 3) << -0.10917348, 0, 0,  //
                      -1.08982035, 0, 0,                    //
                      0, -0.141040918, 0,                   //
                      0, -1.409531141, 0,                   //
                      0, 0, -0.030967224,                   //
                      0, 0, -0.292295416)
                         .finished();
  EXPECT_EQ(cfg.problem.sys.A, A);
  EXPECT_EQ(cfg.problem.sys.B, B);
  EXPECT_EQ(cfg.problem.sys.C, MatrixXd::Identity(6, 6));
  EXPECT_EQ(cfg.problem.sys.D, MatrixXd::Zero(6, 3));
}

TEST(Preset, PublishedConstraintsWeightsAndReference) {
  const ExperimentConfig cfg = test::drone_config(0.035);
  const PlantProblem& p = cfg.problem;
  // |p_y| <= 1.8 only.
  EXPECT_TRUE(p.X.contains(vec({100, 100, 1.8, 100, 100, 100})));
  EXPECT_FALSE(p.X.contains(vec({0, 0, 1.81, 0, 0, 0})));
  EXPECT_EQ(p.X.rows(), 2);
  EXPECT_TRUE(p.U.contains(vec({0.05, -0.05, 0.6})));
  EXPECT_FALSE(p.U.contains(vec({0.051, 0, 0})));
  EXPECT_FALSE(p.U.contains(vec({0, 0, 0.61})));
  EXPECT_EQ(p.W.half_widths, vec({0, 0.035, 0, 0.035, 0, 0.035}));
  EXPECT_EQ(cfg.disturbance_active, (std::vector<int>{1, 3, 5}));
  EXPECT_EQ(p.weights.Q_x, 5.0 * MatrixXd::Identity(6, 6));
  EXPECT_EQ(p.weights.Q_u, VectorXd(vec({30, 20, 1})).asDiagonal().toDenseMatrix());
  EXPECT_EQ(p.weights.Q_sx, MatrixXd::Zero(6, 6));
  EXPECT_EQ(p.weights.Q_su, MatrixXd::Identity(3, 3));
  EXPECT_EQ(cfg.reference.r, vec({1, 0, 2, 0, 1.5, 0}));
  EXPECT_EQ(cfg.reference.x_des, cfg.reference.r);
  EXPECT_EQ(cfg.reference.u_des, VectorXd::Zero(3));
  EXPECT_EQ(cfg.options.N, 10);
  EXPECT_EQ(cfg.x0, vec({-1, 0, 0, 0, 0.5, 0}));
}

TEST(Preset, BaselineVariant) {
  const ExperimentConfig cfg = test::drone_config(0.02, ControllerKind::kBaseline);
  EXPECT_EQ(cfg.options.kind, ControllerKind::kBaseline);
  EXPECT_EQ(cfg.options.baseline_reference, cfg.reference.r);
}

TEST(Defaults, Filled) {
  const ExperimentConfig cfg = parse_config(minimal());
  EXPECT_EQ(cfg.options.N, 10);
  EXPECT_EQ(cfg.options.epsilon, 0.01);
  EXPECT_EQ(cfg.options.rpi.alpha_target, 0.05);
  EXPECT_EQ(cfg.options.rpi.max_terms, 500);
  EXPECT_EQ(cfg.options.gamma_cap, 200);
  EXPECT_EQ(cfg.options.kind, ControllerKind::kRssa);
  EXPECT_EQ(cfg.problem.weights.Q_r, 100.0 * MatrixXd::Identity(1, 1));
  EXPECT_EQ(cfg.problem.weights.Q_sx, MatrixXd::Zero(1, 1));
  EXPECT_EQ(cfg.reference.x_des, VectorXd::Zero(1));
  EXPECT_EQ(cfg.protocol.T, 150);
  EXPECT_EQ(cfg.protocol.runs, 1000);
  EXPECT_EQ(cfg.normalized["horizon"], 10);
  EXPECT_TRUE(cfg.normalized.contains("rpi"));
}

TEST(Errors, NameTheField) {
  json c = minimal();
  c["weights"].erase("Q_u");
  EXPECT_NE(config_error(c).find("weights.Q_u"), std::string::npos);

  c = minimal();
  c["horizon"] = 0;
  EXPECT_NE(config_error(c).find("horizon"), std::string::npos);

  c = minimal();
  c["weights"]["Q_x"] = json::array({json::array({-1})});
  EXPECT_NE(config_error(c).find("weights.Q_x"), std::string::npos);

  c = minimal();
  c["plant"]["B"] = json::array({json::array({1}), json::array({2})});
  EXPECT_NE(config_error(c).find("plant"), std::string::npos);

  c = minimal();
  c["typo_field"] = 1;
  EXPECT_NE(config_error(c).find("typo_field"), std::string::npos);

  c = minimal();
  c["state_constraints"]["abs_max"] = json::array({nullptr});
  EXPECT_NE(config_error(c).find("state_constraints"), std::string::npos);

  c = minimal();
  c["epsilon"] = 1.5;
  EXPECT_NE(config_error(c).find("epsilon"), std::string::npos);

  c = minimal();
  c["reference"]["r"] = json::array({"x"});
  EXPECT_NE(config_error(c).find("reference.r[0]"), std::string::npos);
}

TEST(Hash, StableAndSensitive) {
  const json a = normalize_config(minimal());
  EXPECT_EQ(config_hash(a), config_hash(normalize_config(minimal())));
  EXPECT_EQ(config_hash(a).size(), 16u);
  json b = minimal();
  b["horizon"] = 11;
  EXPECT_NE(config_hash(a), config_hash(normalize_config(b)));
  // Filling a default explicitly does not change the normalized form.
  json c = minimal();
  c["horizon"] = 10;
  EXPECT_EQ(config_hash(a), config_hash(normalize_config(c)));
}

TEST(Overrides, MergePatch) {
  const json base = drone_preset_json();
  const json patched = apply_overrides(base, {{"disturbance", {{"beta", 0.015}}}, {"horizon", 8}});
  const ExperimentConfig cfg = parse_config(patched);
  EXPECT_EQ(cfg.beta, 0.015);
  EXPECT_EQ(cfg.options.N, 8);
  EXPECT_EQ(cfg.disturbance_active, (std::vector<int>{1, 3, 5}));
  const json removed = apply_overrides(base, {{"simulation", nullptr}});
  EXPECT_FALSE(removed.contains("simulation"));
}

TEST(LoadConfig, ReadsFileAndReportsIo) {
  const auto path = std::filesystem::temp_directory_path() / "rssa_test_config.json";
  {
    std::ofstream f(path);
    f << minimal().dump();
  }
  EXPECT_EQ(load_config(path.string()).name, "scalar");
  std::filesystem::remove(path);
  try {
    load_config(path.string());
    FAIL() << "expected io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  try {
    load_config(path.string());
    FAIL() << "expected config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rssa
