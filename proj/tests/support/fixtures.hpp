#pragma once

#include <Eigen/Dense>

#include "rssa/config.hpp"
#include "rssa/mpc.hpp"

namespace rssa::test {

inline ExperimentConfig drone_config(double beta = 0.02,
                                     ControllerKind kind = ControllerKind::kRssa) {
  return parse_config(drone_preset_json(beta, kind));
}

inline ControllerArtifacts build(const ExperimentConfig& cfg) {
  return precompute(cfg.problem, cfg.options);
}

/// Drone artifacts at the default disturbance bound, built once per binary.
inline const ControllerArtifacts& drone() {
  static const ControllerArtifacts art = build(drone_config());
  return art;
}

inline const ControllerArtifacts& drone_baseline() {
  static const ControllerArtifacts art = build(drone_config(0.02, ControllerKind::kBaseline));
  return art;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Eigen::MatrixXd mat1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

/// Random symmetric positive definite matrix with eigenvalues >= floor.
template <typename Rng>
Eigen::MatrixXd random_pd(int d, Rng& rng, double floor = 0.1) {
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  }
  return M * M.transpose() + floor * Eigen::MatrixXd::Identity(d, d);
}

/// 1-D plant x+ = a x + b u + w with box constraints.
inline PlantProblem scalar_plant(double a, double b, double x_max, double u_max, double w_max) {
  Weights w{mat1(1.0), mat1(1.0), {}, mat1(100.0), mat1(0.0), mat1(0.0)};
  return PlantProblem{LtiSystem::full_state(mat1(a), mat1(b)),
                      HPolytope::abs_bounds(vec({x_max})), HPolytope::abs_bounds(vec({u_max})),
                      Box::centered(vec({w_max})), w};
}

inline PrecomputeOptions scalar_options(int N, ControllerKind kind = ControllerKind::kRssa) {
  PrecomputeOptions o;
  o.kind = kind;
  o.N = N;
  o.arena.state_abs = vec({10.0});
  o.arena.theta_abs = vec({10.0});
  o.baseline_reference = vec({0.0});
  return o;
}

}  // namespace rssa::test
