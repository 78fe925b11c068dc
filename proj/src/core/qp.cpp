#include "rssa/qp.hpp"

#include <algorithm>
#include <cmath>

#include "rssa/errors.hpp"
#include "rssa/lp.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

KktReport check_kkt(const QuadProgram& qp, const VectorXd& z, const VectorXd& lambda) {
  KktReport r;
  const VectorXd grad = qp.H * z + qp.f + qp.G.transpose() * lambda;
  r.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (qp.rows() > 0) {
    const VectorXd slack = qp.h - qp.G * z;
    r.primal_violation = std::max(0.0, -slack.minCoeff());
    r.dual_violation = std::max(0.0, -lambda.minCoeff());
    r.complementarity = lambda.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
  return r;
}

void ActiveSetQpSolver::factorize(const MatrixXd& H) {
  if (cached_h_.rows() == H.rows() && cached_h_.cols() == H.cols() &&
      cached_h_ == H && llt_.info() == Eigen::Success) {
    return;
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  RSSA_REQUIRE((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
               ErrorCode::kInvalidArgument, "solve_qp: H is not symmetric");
  shift_ = 0.0;
  llt_.compute(H);
  bool ok = llt_.info() == Eigen::Success;
  if (ok && H.rows() > 0) {
    // Reject factorizations whose pivots only survive through round-off.
    const double min_pivot = llt_.matrixLLT().diagonal().cwiseAbs().minCoeff();
    ok = min_pivot * min_pivot > 1e-13 * scale;
  }
  if (!ok) {
    shift_ = settings_.regularization * scale;
    llt_.compute(H + shift_ * MatrixXd::Identity(H.rows(), H.cols()));
    RSSA_REQUIRE(llt_.info() == Eigen::Success, ErrorCode::kInvalidArgument,
                 "solve_qp: H is not positive semidefinite");
  }
  cached_h_ = H;
}

namespace {

// Relative residual below which a row counts as dependent on the working rows.
constexpr double kDependentTol = 1e-8;

// Greedy selection of linearly independent active rows (modified Gram-Schmidt).
std::vector<int> independent_active_rows(const MatrixXd& G, const VectorXd& slack,
                                         double tol) {
  std::vector<int> rows;
  std::vector<VectorXd> basis;
  const int d = static_cast<int>(G.cols());
  for (int i = 0; i < G.rows() && static_cast<int>(rows.size()) < d; ++i) {
    const double norm = G.row(i).norm();
    if (norm == 0.0 || std::abs(slack(i)) > tol * std::max(1.0, norm)) continue;
    VectorXd v = G.row(i).transpose() / norm;
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double rest = v.norm();
    if (rest > kDependentTol) {
      basis.push_back(v / rest);
      rows.push_back(i);
    }
  }
  return rows;
}

// QR factors of M = L^-1 G_w' kept current under column append and removal
// with Givens rotations. Q is d x d orthogonal, R is upper triangular w x w.
class WorkingQr {
 public:
  explicit WorkingQr(int d) : Q_(MatrixXd::Identity(d, d)), R_(d, d) {}

  int cols() const { return w_; }
  auto basis() const { return Q_.leftCols(w_); }

  void reset(const MatrixXd& m) {
    const int d = static_cast<int>(Q_.rows());
    w_ = static_cast<int>(m.cols());
    Eigen::HouseholderQR<MatrixXd> qr(m);
    Q_ = qr.householderQ() * MatrixXd::Identity(d, d);
    R_.topLeftCorner(w_, w_) = qr.matrixQR().topLeftCorner(w_, w_).triangularView<Eigen::Upper>();
    updates_ = 0;
  }

  void append(const VectorXd& col) {
    VectorXd v = Q_.transpose() * col;
    for (int i = static_cast<int>(v.size()) - 1; i > w_; --i) {
      Eigen::JacobiRotation<double> rot;
      rot.makeGivens(v(i - 1), v(i), &v(i - 1));
      v(i) = 0.0;
      Q_.applyOnTheRight(i - 1, i, rot);
    }
    R_.col(w_).head(w_ + 1) = v.head(w_ + 1);
    ++w_;
    ++updates_;
  }

  void remove(int k) {
    for (int j = k; j + 1 < w_; ++j) R_.col(j).head(j + 2) = R_.col(j + 1).head(j + 2);
    --w_;
    for (int j = k; j < w_; ++j) {
      Eigen::JacobiRotation<double> rot;
      rot.makeGivens(R_(j, j), R_(j + 1, j), &R_(j, j));
      R_(j + 1, j) = 0.0;
      if (j + 1 < w_) R_.block(j, j + 1, 2, w_ - j - 1).applyOnTheLeft(0, 1, rot.adjoint());
      Q_.applyOnTheRight(j, j + 1, rot);
    }
    ++updates_;
  }

  /// Solves R lambda = rhs.
  VectorXd solve_r(const VectorXd& rhs) const {
    return R_.topLeftCorner(w_, w_).triangularView<Eigen::Upper>().solve(rhs);
  }

  int updates() const { return updates_; }

 private:
  MatrixXd Q_;
  MatrixXd R_;
  int w_ = 0;
  int updates_ = 0;
};

}  // namespace

QpSolution ActiveSetQpSolver::solve(const QuadProgram& qp, const VectorXd* warm_start) {
  const int d = qp.dim();
  const int q = qp.rows();
  RSSA_REQUIRE(qp.H.rows() == d && qp.H.cols() == d, ErrorCode::kInvalidArgument,
               "solve_qp: H dimension mismatch");
  RSSA_REQUIRE(qp.G.rows() == q && (q == 0 || qp.G.cols() == d),
               ErrorCode::kInvalidArgument, "solve_qp: G dimension mismatch");
  RSSA_REQUIRE(qp.H.allFinite() && qp.f.allFinite() && qp.G.allFinite() &&
                   qp.h.allFinite(),
               ErrorCode::kInvalidArgument, "solve_qp: non-finite input");
  factorize(qp.H);

  const MatrixXd& G = qp.G;
  const VectorXd& h = qp.h;
  const int max_iter = settings_.max_iter > 0 ? settings_.max_iter : 10 * (d + q) + 100;

  QpSolution sol;
  sol.regularization_applied = shift_;

  VectorXd z;
  std::vector<int> working;
  if (warm_start != nullptr && warm_start->size() == d && warm_start->allFinite()) {
    const double viol = q > 0 ? (G * *warm_start - h).maxCoeff() : 0.0;
    if (viol <= settings_.eps_feas) {
      z = *warm_start;
      sol.warm_started = true;
      if (q > 0) working = independent_active_rows(G, h - G * z, 1e-9);
    }
  }
  if (!sol.warm_started) {
    if (q == 0) {
      z = VectorXd::Zero(d);
    } else {
      const LpResult phase_one = find_feasible_point(G, h);
      if (phase_one.status == LpStatus::kInfeasible) {
        sol.status = QpStatus::kInfeasible;
        sol.farkas = phase_one.farkas;
        sol.iterations = phase_one.iterations;
        sol.z_star = VectorXd::Zero(d);
        sol.lambda = VectorXd::Zero(q);
        return sol;
      }
      z = phase_one.x;
    }
  }

  std::vector<char> in_working(q, 0);
  for (int i : working) in_working[i] = 1;
  VectorXd slack = q > 0 ? VectorXd(h - G * z) : VectorXd();
  VectorXd lambda_w;
  bool converged = false;
  // Set after an unblocked step: z is then the minimiser on the current
  // working subspace and only the multiplier test remains.
  bool at_subspace_min = false;
  int iter = 0;
  int degenerate_run = 0;  // consecutive zero-length blocked steps
  const auto L = llt_.matrixL();
  const auto LT = llt_.matrixU();
  WorkingQr qr(d);
  // Rebuilt from scratch periodically to bound drift in the updated factors.
  constexpr int kRefactorEvery = 64;
  auto refactor = [&] {
    MatrixXd m(d, working.size());
    for (std::size_t k = 0; k < working.size(); ++k) m.col(k) = G.row(working[k]).transpose();
    L.solveInPlace(m);
    qr.reset(m);
  };
  refactor();

  while (iter < max_iter) {
    ++iter;
    const int w = static_cast<int>(working.size());
    if (qr.updates() >= kRefactorEvery) refactor();
    const VectorXd g = qp.H * z + qp.f;
    const VectorXd lg = L.solve(g);
    const auto q1 = qr.basis();
    const VectorXd c = q1.transpose() * lg;
    const VectorXd y = q1 * c - lg;
    lambda_w = qr.solve_r(-c);
    const VectorXd p = LT.solve(y);

    const double step_tol = 1e-11 * (1.0 + z.cwiseAbs().maxCoeff());
    if (at_subspace_min || p.cwiseAbs().maxCoeff() <= step_tol) {
      at_subspace_min = false;
      if (w == 0) {
        converged = true;
        break;
      }
      Eigen::Index k_min = 0;
      const double lam_min = lambda_w.minCoeff(&k_min);
      const double lam_tol = 1e-12 * (1.0 + lambda_w.cwiseAbs().maxCoeff());
      if (lam_min >= -lam_tol) {
        converged = true;
        break;
      }
      if (degenerate_run > 0) {
        // Bland's rule after zero-length steps: lowest constraint index with a
        // negative multiplier. Prevents cycling at degenerate vertices.
        for (int k = 0; k < w; ++k) {
          if (lambda_w(k) < -lam_tol && working[k] < working[k_min]) k_min = k;
        }
      }
      in_working[working[k_min]] = 0;
      working.erase(working.begin() + k_min);
      qr.remove(static_cast<int>(k_min));
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    if (q > 0) {
      const VectorXd gp = G * p;
      const double p_norm = p.norm();
      std::vector<char> skip;
      while (true) {
        alpha = 1.0;
        blocking = -1;
        for (int i = 0; i < q; ++i) {
          if (in_working[i] || (!skip.empty() && skip[i])) continue;
          if (gp(i) <= 1e-12 * p_norm * G.row(i).norm()) continue;
          const double t = std::max(slack(i), 0.0) / gp(i);
          if (t < alpha) {
            alpha = t;
            blocking = i;
          }
        }
        if (blocking < 0 || w == 0) break;
        // A row in the span of the working rows cannot block in exact
        // arithmetic; such rows only appear through round-off.
        VectorXd mrow = G.row(blocking).transpose();
        L.solveInPlace(mrow);
        const double full = mrow.norm();
        mrow -= q1 * (q1.transpose() * mrow);
        if (mrow.norm() > kDependentTol * full) break;
        if (skip.empty()) skip.assign(q, 0);
        skip[blocking] = 1;
      }
      z += alpha * p;
      if (iter % 25 == 0) {
        slack = h - G * z;
      } else {
        slack -= alpha * gp;
      }
    } else {
      z += p;
    }
    degenerate_run = blocking >= 0 && alpha == 0.0 ? degenerate_run + 1 : 0;
    if (blocking >= 0) {
      VectorXd col = G.row(blocking).transpose();
      L.solveInPlace(col);
      qr.append(col);
      working.push_back(blocking);
      in_working[blocking] = 1;
    } else {
      at_subspace_min = true;
    }
  }

  sol.z_star = z;
  sol.iterations = iter;
  sol.lambda = VectorXd::Zero(q);
  for (std::size_t k = 0; k < working.size() && static_cast<int>(k) < lambda_w.size(); ++k) {
    sol.lambda(working[k]) = lambda_w(static_cast<Eigen::Index>(k));
  }
  sol.working_set = working;
  const KktReport kkt = check_kkt(qp, z, sol.lambda);
  sol.primal_residual = kkt.primal_violation;
  sol.dual_residual = kkt.stationarity;
  sol.duality_gap_estimate = q > 0 ? std::abs(sol.lambda.dot(h - G * z)) : 0.0;
  sol.objective = qp.objective(z);
  if (!converged) {
    sol.status = QpStatus::kMaxIter;
  } else if (sol.primal_residual <= settings_.eps_feas &&
             sol.dual_residual <= settings_.eps_opt) {
    sol.status = QpStatus::kOptimal;
  } else {
    // Converged working set but residuals above tolerance: report as a
    // degraded solve rather than claiming optimality.
    sol.status = QpStatus::kMaxIter;
  }
  return sol;
}

QpSolution solve_qp(const QuadProgram& qp, const QpSettings& settings) {
  ActiveSetQpSolver solver(settings);
  return solver.solve(qp);
}

}  // namespace rssa
