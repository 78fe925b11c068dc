#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rssa {

/// min 1/2 z'Hz + f'z  s.t.  G z <= h. Equalities are eliminated by the caller.
struct QuadProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  int dim() const { return static_cast<int>(f.size()); }
  int rows() const { return static_cast<int>(h.size()); }
  double objective(const Eigen::VectorXd& z) const {
    return 0.5 * z.dot(H * z) + f.dot(z);
  }
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIter };
const char* to_string(QpStatus status);

struct QpSettings {
  double eps_feas = 1e-8;
  double eps_opt = 1e-8;
  /// 0 selects 10 * (dim + rows) + 100.
  int max_iter = 0;
  /// Relative diagonal shift tried when H fails a plain Cholesky.
  double regularization = 1e-12;
};

struct QpSolution {
  Eigen::VectorXd z_star;
  /// Multipliers for G z <= h (zero off the final working set).
  Eigen::VectorXd lambda;
  QpStatus status = QpStatus::kMaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap_estimate = 0.0;
  double objective = 0.0;
  int iterations = 0;
  /// Diagonal shift actually added to H (0 when H was positive definite).
  double regularization_applied = 0.0;
  bool warm_started = false;
  /// Farkas certificate when status == kInfeasible.
  Eigen::VectorXd farkas;
  std::vector<int> working_set;
};

/// Stationarity, feasibility, sign and complementarity residuals evaluated
/// directly from the problem data. Shares no code with the solver.
struct KktReport {
  double stationarity = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;
  double complementarity = 0.0;

  bool passes(double eps_feas = 1e-8, double eps_opt = 1e-8,
              double comp_tol = 1e-6) const {
    return stationarity <= eps_opt && primal_violation <= eps_feas &&
           dual_violation <= eps_opt && complementarity <= comp_tol;
  }
};

KktReport check_kkt(const QuadProgram& qp, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& lambda);

/// Primal active-set solver for convex QPs.
///
/// The instance keeps the Cholesky factor of the last Hessian it saw, so a
/// sequence of MPC problems that share H pays for the factorisation once.
/// A feasible warm start skips phase one; otherwise a feasible vertex is
/// obtained from the LP solver. Not safe for concurrent use.
class ActiveSetQpSolver {
 public:
  explicit ActiveSetQpSolver(QpSettings settings = {}) : settings_(settings) {}

  QpSolution solve(const QuadProgram& qp,
                   const Eigen::VectorXd* warm_start = nullptr);

  const QpSettings& settings() const { return settings_; }

 private:
  void factorize(const Eigen::MatrixXd& H);

  QpSettings settings_;
  Eigen::MatrixXd cached_h_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double shift_ = 0.0;
};

/// Stateless convenience wrapper.
QpSolution solve_qp(const QuadProgram& qp, const QpSettings& settings = {});

}  // namespace rssa
