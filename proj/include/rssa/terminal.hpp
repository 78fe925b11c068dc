#pragma once

#include <Eigen/Dense>

#include "rssa/lti.hpp"
#include "rssa/polytope.hpp"

namespace rssa {

/// Closed loop under the terminal law kappa(x, theta) = M2 theta + K (x - M1 theta),
/// stacked with a constant theta:
///   [x; theta]+ = [[A + B K, B M2 - B K M1], [0, I]] [x; theta].
struct AugmentedDynamics {
  Eigen::MatrixXd A_aug;
  int n = 0;
  int n_theta = 0;

  static AugmentedDynamics build(const LtiSystem& sys, const SteadyStateParam& ssp,
                                 const Eigen::MatrixXd& K);
};

/// x-part of A_aug^gamma [x; theta].
Eigen::VectorXd predicted_state(const AugmentedDynamics& aug, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& theta, int gamma);

/// {(x, theta) : M1 theta in (1 - eps) X_t, M2 theta in (1 - eps) U_t}, with
/// zero x-coefficients. Rows whose theta-normal vanishes are dropped when
/// satisfied. Throws kEmptySet when the result is empty.
HPolytope build_o_eps(const SteadyStateParam& ssp, const HPolytope& X_t, const HPolytope& U_t,
                      double epsilon, int n);

struct GilbertTanResult {
  HPolytope set;
  int gamma_star = 0;
};

/// Maximal admissible set of z+ = A z within `base`: rows base.normals A^k are
/// appended for k = 1, 2, ... while some new row is not implied by the current
/// set. gamma_star is the last k that added a row (0 when the base is already
/// invariant). Throws kFiniteDetermination past gamma_cap.
GilbertTanResult gilbert_tan(const Eigen::MatrixXd& A, const HPolytope& base,
                             int gamma_cap = 200, double tol = kGeomTol);

/// Finite box bounding the region in which the terminal set is computed.
/// Infinite entries are not allowed.
struct ArenaBox {
  Eigen::VectorXd state_abs;
  Eigen::VectorXd theta_abs;
};

struct TerminalSet {
  HPolytope omega;
  int gamma_star = 0;
  double epsilon = 0.01;
};

/// Omega = O_eps intersected with the maximal admissible set of A_aug for the
/// tightened state rows, the input rows applied to kappa, and the arena.
/// O_eps is taken over X_t intersected with the arena state box.
TerminalSet build_terminal(const LtiSystem& sys, const SteadyStateParam& ssp,
                           const Eigen::MatrixXd& K_inf, const HPolytope& X_t,
                           const HPolytope& U_t, double epsilon, const ArenaBox& arena,
                           int gamma_cap = 200);

/// Terminal set for a fixed target (x_s, u_s): maximal admissible set of
/// x+ = (A + B K) x + B (u_s - K x_s) for the tightened state rows, the input
/// rows on u_s + K (x - x_s), and the arena state box.
GilbertTanResult build_fixed_target_terminal(const LtiSystem& sys, const Eigen::MatrixXd& K_inf,
                                             const HPolytope& X_t, const HPolytope& U_t,
                                             const Eigen::VectorXd& x_s,
                                             const Eigen::VectorXd& u_s,
                                             const ArenaBox& arena, int gamma_cap = 200);

}  // namespace rssa
