#include "rssa/lti.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rssa/errors.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void LtiSystem::validate() const {
  RSSA_REQUIRE(A.rows() == A.cols() && A.rows() >= 1, ErrorCode::kInvalidArgument,
               "plant: A must be square and nonempty");
  RSSA_REQUIRE(B.rows() == A.rows(), ErrorCode::kInvalidArgument,
               "plant: B must have as many rows as A");
  RSSA_REQUIRE(C.cols() == A.cols(), ErrorCode::kInvalidArgument,
               "plant: C must have as many columns as A");
  RSSA_REQUIRE(D.rows() == C.rows() && D.cols() == B.cols(),
               ErrorCode::kInvalidArgument, "plant: D must be m x p");
  RSSA_REQUIRE(A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite(),
               ErrorCode::kInvalidArgument, "plant: non-finite matrix entry");
}

LtiSystem LtiSystem::full_state(MatrixXd A, MatrixXd B) {
  const auto n = A.rows();
  const auto p = B.cols();
  return LtiSystem{std::move(A), std::move(B), MatrixXd::Identity(n, n), MatrixXd::Zero(n, p)};
}

namespace {

double inf_norm(const MatrixXd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().rowwise().sum().maxCoeff();
}

MatrixXd riccati_map(const LtiSystem& sys, const MatrixXd& Q_x, const MatrixXd& Q_u,
                     const MatrixXd& P) {
  const MatrixXd& A = sys.A;
  const MatrixXd& B = sys.B;
  const MatrixXd bpa = B.transpose() * P * A;
  const MatrixXd s = Q_u + B.transpose() * P * B;
  MatrixXd next = A.transpose() * P * A - bpa.transpose() * s.llt().solve(bpa) + Q_x;
  return 0.5 * (next + next.transpose());
}

void check_weights(const LtiSystem& sys, const MatrixXd& Q_x, const MatrixXd& Q_u) {
  RSSA_REQUIRE(Q_x.rows() == sys.n() && Q_x.cols() == sys.n(),
               ErrorCode::kInvalidArgument, "dare: Q_x must be n x n");
  RSSA_REQUIRE(Q_u.rows() == sys.p() && Q_u.cols() == sys.p(),
               ErrorCode::kInvalidArgument, "dare: Q_u must be p x p");
  RSSA_REQUIRE((Q_x - Q_x.transpose()).cwiseAbs().maxCoeff() <= 1e-10 &&
                   (Q_u.size() == 0 || (Q_u - Q_u.transpose()).cwiseAbs().maxCoeff() <= 1e-10),
               ErrorCode::kInvalidArgument, "dare: weights must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> ex(Q_x);
  RSSA_REQUIRE(ex.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, inf_norm(Q_x)),
               ErrorCode::kInvalidArgument, "dare: Q_x must be positive semidefinite");
  if (Q_u.size() > 0) {
    Eigen::LLT<MatrixXd> lu(Q_u);
    RSSA_REQUIRE(lu.info() == Eigen::Success, ErrorCode::kInvalidArgument,
                 "dare: Q_u must be positive definite");
  }
}

}  // namespace

double riccati_residual(const LtiSystem& sys, const MatrixXd& Q_x, const MatrixXd& Q_u,
                        const MatrixXd& P) {
  return inf_norm(P - riccati_map(sys, Q_x, Q_u, P));
}

RiccatiResult dare_solve(const LtiSystem& sys, const MatrixXd& Q_x, const MatrixXd& Q_u,
                         const DareOptions& options) {
  sys.validate();
  check_weights(sys, Q_x, Q_u);

  MatrixXd P = 0.5 * (Q_x + Q_x.transpose());
  int iter = 0;
  bool settled = false;
  while (iter < options.max_iter) {
    ++iter;
    MatrixXd next = riccati_map(sys, Q_x, Q_u, P);
    if (!next.allFinite()) {
      throw Error(ErrorCode::kConvergenceFailure,
                  "dare: iteration diverged (is (A, B) stabilizable?)");
    }
    const double change = inf_norm(next - P) / std::max(1.0, inf_norm(next));
    P = std::move(next);
    if (change <= options.tol) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw Error(ErrorCode::kConvergenceFailure,
                "dare: no convergence within " + std::to_string(options.max_iter) +
                    " iterations (is (A, B) stabilizable?)");
  }

  RiccatiResult res;
  res.Q_N = P;
  res.iterations = iter;
  const MatrixXd s = Q_u + sys.B.transpose() * P * sys.B;
  res.K_inf = -s.llt().solve(sys.B.transpose() * P * sys.A);
  res.residual = riccati_residual(sys, Q_x, Q_u, P);
  if (res.residual > options.residual_tol) {
    throw Error(ErrorCode::kConvergenceFailure,
                "dare: residual " + std::to_string(res.residual) + " above tolerance");
  }
  if (!is_schur(sys.A + sys.B * res.K_inf)) {
    throw Error(ErrorCode::kConvergenceFailure,
                "dare: A + B K_inf is not Schur (pair not stabilizable)");
  }
  return res;
}

double spectral_radius(const MatrixXd& M) {
  RSSA_REQUIRE(M.rows() == M.cols(), ErrorCode::kInvalidArgument,
               "spectral_radius: matrix must be square");
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
  RSSA_REQUIRE(es.info() == Eigen::Success, ErrorCode::kConvergenceFailure,
               "spectral_radius: eigenvalue iteration failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur(const MatrixXd& M, double margin) {
  return spectral_radius(M) < 1.0 - margin;
}

namespace {

// Reduced row echelon form with partial pivoting; entries below tol are zeroed.
MatrixXd rref(MatrixXd R, double tol) {
  Eigen::Index lead = 0;
  for (Eigen::Index col = 0; col < R.cols() && lead < R.rows(); ++col) {
    Eigen::Index piv;
    const double big = R.col(col).segment(lead, R.rows() - lead).cwiseAbs().maxCoeff(&piv);
    piv += lead;
    if (big <= tol) {
      R.col(col).segment(lead, R.rows() - lead).setZero();
      continue;
    }
    R.row(lead).swap(R.row(piv));
    R.row(lead) /= R(lead, col);
    for (Eigen::Index r = 0; r < R.rows(); ++r) {
      if (r != lead) R.row(r) -= R(r, col) * R.row(lead);
    }
    ++lead;
  }
  return R;
}

}  // namespace

SteadyStateParam steady_state_param(const LtiSystem& sys) {
  sys.validate();
  const int n = sys.n();
  const int p = sys.p();
  MatrixXd E(n, n + p);
  E << sys.A - MatrixXd::Identity(n, n), sys.B;

  Eigen::JacobiSVD<MatrixXd> svd(E, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0) * (n + p);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  const int n_theta = n + p - rank;
  if (n_theta == 0) {
    throw Error(ErrorCode::kNoSteadyState,
                "steady_state_param: [A - I, B] has a trivial kernel; no steady states");
  }
  const MatrixXd kernel = svd.matrixV().rightCols(n_theta);

  // Canonical spanning set: rows of rref(kernel') span the same space.
  const MatrixXd canon = rref(kernel.transpose(), 1e-12).transpose();
  MatrixXd basis = canon.leftCols(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    for (int k = 0; k < j; ++k) basis.col(j) -= basis.col(k).dot(basis.col(j)) * basis.col(k);
    basis.col(j).normalize();
  }
  // Flush round-off so structurally zero entries (e.g. velocities) are exact.
  basis = basis.unaryExpr([](double v) { return std::abs(v) <= 1e-15 ? 0.0 : v; });

  SteadyStateParam ssp;
  ssp.M1 = basis.topRows(n);
  ssp.M2 = basis.bottomRows(p);
  ssp.L = sys.C * ssp.M1 + sys.D * ssp.M2;
  return ssp;
}

VectorXd theta_for_reference(const SteadyStateParam& ssp, const VectorXd& r) {
  RSSA_REQUIRE(r.size() == ssp.L.rows(), ErrorCode::kInvalidArgument,
               "theta_for_reference: reference dimension mismatch");
  return ssp.L.completeOrthogonalDecomposition().solve(r);
}

}  // namespace rssa
