#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rssa/errors.hpp"
#include "rssa/lti.hpp"
#include "rssa/polytope.hpp"
#include "rssa/qp.hpp"
#include "rssa/rpi.hpp"
#include "rssa/terminal.hpp"

namespace rssa {

/// Cost weights. Q_N is overwritten by the Riccati solution at precompute.
struct Weights {
  Eigen::MatrixXd Q_x;
  Eigen::MatrixXd Q_u;
  Eigen::MatrixXd Q_N;
  Eigen::MatrixXd Q_r;
  Eigen::MatrixXd Q_sx;
  Eigen::MatrixXd Q_su;
};

/// lambda_min(L'Q_r L) - lambda_max(M1'Q_sx M1) - lambda_max(M2'Q_su M2).
/// Positive exactly when the convergence-bound diagnostic applies.
double weight_margin(const Weights& w, const SteadyStateParam& ssp);

enum class ControllerKind { kRssa, kBaseline };
const char* to_string(ControllerKind kind);

struct PlantProblem {
  LtiSystem sys;
  HPolytope X;
  HPolytope U;
  Box W;
  Weights weights;
};

struct PrecomputeOptions {
  ControllerKind kind = ControllerKind::kRssa;
  int N = 10;
  double epsilon = 0.01;
  /// Tube gain; the Riccati gain K_inf when unset.
  std::optional<Eigen::MatrixXd> K_tube;
  RpiOptions rpi;
  /// Empty bounds default to 10; a single theta bound applies to every
  /// parameter component.
  ArenaBox arena;
  int gamma_cap = 200;
  DareOptions dare;
  /// Baseline only: the fixed target is the steady state closest to this
  /// reference (in the Q_r norm) among the admissible ones.
  Eigen::VectorXd baseline_reference;
};

/// Condensed prediction and QP templates. The decision vector is
/// z = (theta, x0, u_0, ..., u_{N-1}) for the RSSA controller and
/// z = (x0, u_0, ..., u_{N-1}) for the fixed-target baseline; predicted
/// states are x_k = S[k] z. Only h depends on the measured state:
/// h = h0 + h_x x_t.
struct CondensedModel {
  int d = 0;
  int theta_offset = -1;
  int x0_offset = 0;
  int u_offset = 0;
  std::vector<Eigen::MatrixXd> S;
  Eigen::MatrixXd H;
  /// RSSA linear term f = f_r r + f_xdes x_des + f_udes u_des.
  Eigen::MatrixXd f_r;
  Eigen::MatrixXd f_xdes;
  Eigen::MatrixXd f_udes;
  /// Baseline linear term and cost constant.
  Eigen::VectorXd f_fixed;
  double const_fixed = 0.0;
  Eigen::MatrixXd G;
  Eigen::VectorXd h0;
  Eigen::MatrixXd h_x;
  int rows_tube = 0;
  int rows_state = 0;
  int rows_input = 0;
  int rows_terminal = 0;
};

struct ControllerArtifacts {
  ControllerKind kind = ControllerKind::kRssa;
  LtiSystem sys;
  HPolytope X;
  HPolytope U;
  Box W;
  Weights weights;
  SteadyStateParam ssp;
  int N = 10;
  double epsilon = 0.01;
  Eigen::MatrixXd K_tube;
  RiccatiResult riccati;
  RpiApprox rpi;
  /// Exact H-form of F when the block structure allows it, else its
  /// bounding box (facets_exact = false).
  HPolytope F_facets;
  bool facets_exact = true;
  HPolytope X_t;
  HPolytope U_t;
  ArenaBox arena;
  /// RSSA: Omega over (x, theta). Baseline: terminal set over x.
  HPolytope terminal;
  int gamma_star = 0;
  /// Baseline fixed target.
  Eigen::VectorXd theta_target;
  Eigen::VectorXd x_target;
  Eigen::VectorXd u_target;
  CondensedModel model;

  int n() const { return sys.n(); }
  int p() const { return sys.p(); }
  int n_theta() const { return ssp.n_theta(); }
};

/// Offline stage. Errors carry the failing stage in Error::stage().
ControllerArtifacts precompute(const PlantProblem& problem, const PrecomputeOptions& options);

/// Rebuilds art.model from the set-level fields (used after loading).
void assemble_condensed(ControllerArtifacts& art);

/// The QP for measured state x_t. r, x_des and u_des are ignored by the
/// baseline.
QuadProgram build_qp(const ControllerArtifacts& art, const Eigen::VectorXd& x_t,
                     const Eigen::VectorXd& r, const Eigen::VectorXd& x_des,
                     const Eigen::VectorXd& u_des);

/// Constant dropped from the QP objective; QP objective + constant is the
/// full tracking cost.
double cost_constant(const ControllerArtifacts& art, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& x_des, const Eigen::VectorXd& u_des);

/// Thrown when the online QP has no feasible point.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, Eigen::VectorXd certificate)
      : Error(ErrorCode::kInfeasible, what), certificate_(std::move(certificate)) {}
  const Eigen::VectorXd& certificate() const { return certificate_; }

 private:
  Eigen::VectorXd certificate_;
};

/// Per-run online state: QP solver (with its factorisation cache) and the
/// shifted previous solution used as warm start.
struct MpcSolver {
  explicit MpcSolver(QpSettings settings = {}) : qp(settings) {}

  void reset() { candidate.reset(); }

  ActiveSetQpSolver qp;
  std::optional<Eigen::VectorXd> candidate;
};

struct StepResult {
  Eigen::VectorXd u_applied;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd x0_star;
  std::vector<Eigen::VectorXd> u_seq_star;
  double cost_star = 0.0;
  QpSolution qp;
  /// Whether a shifted candidate from the previous step existed, and its
  /// largest constraint violation in the current problem.
  bool candidate_checked = false;
  double candidate_violation = 0.0;
  bool candidate_feasible = true;
  double solve_ms = 0.0;
};

/// Tolerance used when auditing the shifted candidate for feasibility.
inline constexpr double kCandidateTol = 1e-8;

StepResult control_step(const ControllerArtifacts& art, MpcSolver& solver,
                        const Eigen::VectorXd& x_t, const Eigen::VectorXd& r,
                        const Eigen::VectorXd& x_des, const Eigen::VectorXd& u_des);

StepResult baseline_control_step(const ControllerArtifacts& art, MpcSolver& solver,
                                 const Eigen::VectorXd& x_t);

/// Dispatches on art.kind.
StepResult any_control_step(const ControllerArtifacts& art, MpcSolver& solver,
                            const Eigen::VectorXd& x_t, const Eigen::VectorXd& r,
                            const Eigen::VectorXd& x_des, const Eigen::VectorXd& u_des);

/// Feasibility of the first QP at x_t (one LP, no optimisation).
bool first_step_feasible(const ControllerArtifacts& art, const Eigen::VectorXd& x_t);

struct ThetaDiamond {
  Eigen::VectorXd theta;
  /// Q_sx and Q_su leave some theta direction unpenalised; theta is then one
  /// feasible minimiser, not the unique one.
  bool degenerate = false;
};

/// Admissible steady state closest to (x_des, u_des) in the Q_sx / Q_su norms.
/// Throws kNoSteadyState when no theta satisfies the tightened constraints.
ThetaDiamond theta_diamond(const ControllerArtifacts& art, const Eigen::VectorXd& x_des,
                           const Eigen::VectorXd& u_des);

struct ConvergenceBound {
  double f_value = 0.0;
  double alpha = 0.0;
  double bound = 0.0;
};

/// Bound f(theta) / alpha on the distance between the limiting parameter
/// theta and theta_diamond, with
///   f(theta) = 2 |M1| |Q_sx| |M1 theta - x_des| + 2 |M2| |Q_su| |M2 theta - u_des|
/// in spectral norms and alpha = weight_margin(). Throws kConditionViolated when
/// alpha <= 0 (increase Q_r).
ConvergenceBound offset_bound(const Weights& weights, const SteadyStateParam& ssp,
                              const Eigen::VectorXd& theta_tilde, const Eigen::VectorXd& x_des,
                              const Eigen::VectorXd& u_des);

}  // namespace rssa
