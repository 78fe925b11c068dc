#pragma once

#include <Eigen/Dense>

namespace rssa {

enum class LpStatus { kOptimal, kUnbounded, kInfeasible };
enum class LpSense { kMaximize, kMinimize };

const char* to_string(LpStatus status);

struct LpOptions {
  /// Reduced-cost / feasibility tolerance relative to the (row-normalized)
  /// problem data.
  double tolerance = 1e-11;
  double pivot_tolerance = 1e-9;
  /// Consecutive degenerate pivots tolerated under Dantzig pricing before the
  /// solver switches to Bland's rule for the remainder of the solve.
  int bland_after_degenerate = 50;
  /// 0 selects 50 * (rows + cols) + 1000.
  int max_iterations = 0;
};

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  /// Optimal vertex (kOptimal only).
  Eigen::VectorXd x;
  /// Objective value in the caller's sense (kOptimal only).
  double value = 0.0;
  /// Farkas certificate for kInfeasible: y >= 0 with G^T y = 0 and h^T y < 0.
  Eigen::VectorXd farkas;
  int iterations = 0;
};

/// Solves  max/min c^T x  s.t.  G x <= h  with x free.
///
/// Internally runs a two-phase revised simplex on the dual standard form
/// min h^T y s.t. G^T y = c, y >= 0, whose basis is only dim(x) wide. The
/// simplex multipliers of the final dual basis are the primal optimum.
/// Pricing is Dantzig with a mandatory switch to Bland's rule on stalling, so
/// the method terminates on degenerate problems.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& h, LpSense sense = LpSense::kMaximize,
                  const LpOptions& options = {});

/// Convenience: feasibility of {x : G x <= h}.
LpResult find_feasible_point(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                             const LpOptions& options = {});

}  // namespace rssa
