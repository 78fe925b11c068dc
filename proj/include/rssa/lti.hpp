#pragma once

#include <Eigen/Dense>

namespace rssa {

/// x+ = A x + B u + w,  y = C x + D u.
struct LtiSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(B.cols()); }
  int m() const { return static_cast<int>(C.rows()); }

  /// Throws kInvalidArgument on inconsistent dimensions or non-finite data.
  void validate() const;

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& w) const {
    return A * x + B * u + w;
  }
  Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return C * x + D * u;
  }

  /// Full-state output (C = I, D = 0).
  static LtiSystem full_state(Eigen::MatrixXd A, Eigen::MatrixXd B);
};

struct DareOptions {
  /// Relative change ||P_{k+1} - P_k||_inf / max(1, ||P_{k+1}||_inf).
  double tol = 1e-12;
  int max_iter = 100000;
  /// Largest accepted Riccati residual at the returned fixed point.
  double residual_tol = 1e-8;
};

struct RiccatiResult {
  Eigen::MatrixXd Q_N;
  Eigen::MatrixXd K_inf;
  double residual = 0.0;
  int iterations = 0;
};

/// Stabilizing DARE solution by value iteration started at Q_x.
/// Throws kConvergenceFailure when the iteration does not settle, the
/// residual exceeds options.residual_tol, or A + B K_inf is not Schur.
RiccatiResult dare_solve(const LtiSystem& sys, const Eigen::MatrixXd& Q_x,
                         const Eigen::MatrixXd& Q_u, const DareOptions& options = {});

/// ||P - (A'PA - A'PB (Q_u + B'PB)^-1 B'PA + Q_x)||_inf (max absolute row sum).
double riccati_residual(const LtiSystem& sys, const Eigen::MatrixXd& Q_x,
                        const Eigen::MatrixXd& Q_u, const Eigen::MatrixXd& P);

double spectral_radius(const Eigen::MatrixXd& M);

/// rho(M) < 1 - margin.
bool is_schur(const Eigen::MatrixXd& M, double margin = 1e-9);

/// Orthonormal basis of the steady-state manifold: columns of [M1; M2] span
/// ker [A - I, B]; L = C M1 + D M2.
struct SteadyStateParam {
  Eigen::MatrixXd M1;
  Eigen::MatrixXd M2;
  Eigen::MatrixXd L;

  int n_theta() const { return static_cast<int>(M1.cols()); }
};

/// The basis is made canonical (independent of the SVD's sign and rotation
/// choices) by reducing it to row echelon form before orthonormalising.
/// Throws kNoSteadyState when the kernel is trivial.
SteadyStateParam steady_state_param(const LtiSystem& sys);

/// Least-squares theta with L theta = r.
Eigen::VectorXd theta_for_reference(const SteadyStateParam& ssp, const Eigen::VectorXd& r);

}  // namespace rssa
