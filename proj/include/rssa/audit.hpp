#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rssa/mpc.hpp"
#include "rssa/polytope.hpp"
#include "rssa/sim.hpp"

namespace rssa {

/// Standard normal draw (Box-Muller on Rng, platform independent).
double normal_draw(Rng& rng);

/// Point of F = scale * sum map_i box_i. With `vertex` every box coordinate
/// is pushed to +-1; otherwise it is uniform on [-1, 1].
Eigen::VectorXd sample_support_set(const SupportSet& F, Rng& rng, bool vertex);

/// Uniform point of a box, or a uniformly chosen vertex.
Eigen::VectorXd sample_box(const Box& box, Rng& rng, bool vertex);

/// Chebyshev centre (radius capped at 1e3). std::nullopt when P is empty.
std::optional<Eigen::VectorXd> chebyshev_center(const HPolytope& p);

/// Hit-and-run walk in a bounded polytope started at an interior point,
/// keeping every `thin`-th point.
std::vector<Eigen::VectorXd> hit_and_run(const HPolytope& p, const Eigen::VectorXd& start,
                                         int count, Rng& rng, int thin = 5);

/// LP maximisers of `count` random directions (vertices of P).
std::vector<Eigen::VectorXd> extreme_points(const HPolytope& p, int count, Rng& rng);

struct AuditCheck {
  std::string name;
  bool passed = false;
  /// Measured quantity and the bound it was compared against.
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct AuditOptions {
  int rpi_samples = 20000;
  int terminal_samples = 2000;
  int terminal_extremes = 200;
  std::uint64_t seed = 1;
  /// Closed-loop replay at the largest disturbance the artifact allows.
  int closed_loop_steps = 40;
  Eigen::VectorXd x0;
  Reference ref;
};

/// Invariant audit of a loaded artifact: Riccati, steady-state, tightening,
/// facet, RPI and terminal invariance, Hessian and closed-loop checks.
AuditReport audit_artifact(const ControllerArtifacts& art, const AuditOptions& options);

}  // namespace rssa
