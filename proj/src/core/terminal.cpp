#include "rssa/terminal.hpp"

#include <cmath>
#include <vector>

#include "rssa/errors.hpp"
#include "rssa/lp.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AugmentedDynamics AugmentedDynamics::build(const LtiSystem& sys, const SteadyStateParam& ssp,
                                           const MatrixXd& K) {
  const int n = sys.n();
  const int nt = ssp.n_theta();
  RSSA_REQUIRE(K.rows() == sys.p() && K.cols() == n, ErrorCode::kInvalidArgument,
               "augmented dynamics: K must be p x n");
  AugmentedDynamics aug;
  aug.n = n;
  aug.n_theta = nt;
  aug.A_aug = MatrixXd::Zero(n + nt, n + nt);
  aug.A_aug.topLeftCorner(n, n) = sys.A + sys.B * K;
  aug.A_aug.topRightCorner(n, nt) = sys.B * ssp.M2 - sys.B * K * ssp.M1;
  aug.A_aug.bottomRightCorner(nt, nt) = MatrixXd::Identity(nt, nt);
  return aug;
}

VectorXd predicted_state(const AugmentedDynamics& aug, const VectorXd& x, const VectorXd& theta,
                         int gamma) {
  RSSA_REQUIRE(gamma >= 0, ErrorCode::kInvalidArgument, "predicted_state: gamma must be >= 0");
  RSSA_REQUIRE(x.size() == aug.n && theta.size() == aug.n_theta, ErrorCode::kInvalidArgument,
               "predicted_state: dimension mismatch");
  VectorXd z(aug.n + aug.n_theta);
  z << x, theta;
  for (int k = 0; k < gamma; ++k) z = aug.A_aug * z;
  return z.head(aug.n);
}

namespace {

class RowCollector {
 public:
  explicit RowCollector(int dim) : dim_(dim) {}

  // Zero normals are dropped when satisfied and make the set empty otherwise.
  void add(const VectorXd& a, double b, const char* what) {
    if (a.cwiseAbs().maxCoeff() <= 1e-14) {
      if (b < 0.0) {
        throw Error(ErrorCode::kEmptySet, std::string(what) + ": constraint 0 <= " +
                                              std::to_string(b) + " cannot hold");
      }
      return;
    }
    normals_.push_back(a);
    offsets_.push_back(b);
  }

  bool empty() const { return normals_.empty(); }

  HPolytope build() const {
    MatrixXd N(normals_.size(), dim_);
    VectorXd h(offsets_.size());
    for (std::size_t i = 0; i < normals_.size(); ++i) {
      N.row(i) = normals_[i].transpose();
      h(i) = offsets_[i];
    }
    return HPolytope(std::move(N), std::move(h));
  }

 private:
  int dim_;
  std::vector<VectorXd> normals_;
  std::vector<double> offsets_;
};

}  // namespace

HPolytope build_o_eps(const SteadyStateParam& ssp, const HPolytope& X_t, const HPolytope& U_t,
                      double epsilon, int n) {
  RSSA_REQUIRE(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidArgument,
               "O_eps: epsilon must lie in (0, 1)");
  RSSA_REQUIRE(X_t.dim() == ssp.M1.rows() && U_t.dim() == ssp.M2.rows() && n == ssp.M1.rows(),
               ErrorCode::kInvalidArgument, "O_eps: dimension mismatch");
  const int nt = ssp.n_theta();
  RowCollector rows(n + nt);
  VectorXd a(n + nt);
  for (int i = 0; i < X_t.rows(); ++i) {
    a << VectorXd::Zero(n), ssp.M1.transpose() * X_t.normals().row(i).transpose();
    rows.add(a, (1.0 - epsilon) * X_t.offsets()(i), "O_eps");
  }
  for (int i = 0; i < U_t.rows(); ++i) {
    a << VectorXd::Zero(n), ssp.M2.transpose() * U_t.normals().row(i).transpose();
    rows.add(a, (1.0 - epsilon) * U_t.offsets()(i), "O_eps");
  }
  RSSA_REQUIRE(!rows.empty(), ErrorCode::kInvalidArgument,
               "O_eps: no constraint restricts the steady-state parameter");
  HPolytope out = rows.build();
  if (out.is_empty()) {
    throw Error(ErrorCode::kEmptySet, "O_eps: no admissible steady state remains after tightening");
  }
  return out;
}

GilbertTanResult gilbert_tan(const MatrixXd& A, const HPolytope& base, int gamma_cap, double tol) {
  const int d = base.dim();
  RSSA_REQUIRE(A.rows() == d && A.cols() == d, ErrorCode::kInvalidArgument,
               "gilbert_tan: dynamics and constraint dimensions differ");
  RSSA_REQUIRE(!base.is_empty(), ErrorCode::kEmptySet, "gilbert_tan: base set is empty");

  const HPolytope start = base.without_duplicates();
  std::vector<VectorXd> unit;     // unit normals of the current rows
  std::vector<double> unit_off;
  MatrixXd N = start.normals();
  VectorXd h = start.offsets();
  for (int i = 0; i < N.rows(); ++i) {
    const double s = N.row(i).norm();
    unit.push_back(N.row(i).transpose() / s);
    unit_off.push_back(h(i) / s);
  }
  auto duplicate = [&](const VectorXd& u, double off) {
    for (std::size_t j = 0; j < unit.size(); ++j) {
      if ((u - unit[j]).cwiseAbs().maxCoeff() <= 1e-12 &&
          std::abs(off - unit_off[j]) <= 1e-12 * (1.0 + std::abs(off))) {
        return true;
      }
    }
    return false;
  };

  MatrixXd power = A;
  for (int gamma = 0;; ++gamma) {
    const MatrixXd candidates = start.normals() * power;
    int added = 0;
    for (int i = 0; i < candidates.rows(); ++i) {
      const VectorXd a = candidates.row(i).transpose();
      const double b = start.offsets()(i);
      const double norm = a.norm();
      if (norm <= 1e-14 * std::max(1.0, start.normals().row(i).norm())) {
        if (b < 0.0) throw Error(ErrorCode::kEmptySet, "gilbert_tan: admissible set is empty");
        continue;
      }
      const VectorXd u = a / norm;
      if (duplicate(u, b / norm)) continue;
      const LpResult lp = solve_lp(u, N, h, LpSense::kMaximize);
      if (lp.status == LpStatus::kInfeasible) {
        throw Error(ErrorCode::kEmptySet, "gilbert_tan: admissible set is empty");
      }
      if (lp.status == LpStatus::kOptimal && lp.value <= b / norm + tol) continue;
      if (gamma + 1 > gamma_cap) {
        throw Error(ErrorCode::kFiniteDetermination,
                    "gilbert_tan: not finitely determined within " + std::to_string(gamma_cap) +
                        " steps (base row " + std::to_string(i) + " still active)");
      }
      N.conservativeResize(N.rows() + 1, Eigen::NoChange);
      h.conservativeResize(h.size() + 1);
      N.row(N.rows() - 1) = u.transpose();
      h(h.size() - 1) = b / norm;
      unit.push_back(u);
      unit_off.push_back(b / norm);
      ++added;
    }
    if (added == 0) return {HPolytope(std::move(N), std::move(h)), gamma};
    power = A * power;
  }
}

namespace {

void require_finite_arena(const ArenaBox& arena, int n, int nt) {
  RSSA_REQUIRE(arena.state_abs.size() == n && arena.theta_abs.size() == nt,
               ErrorCode::kInvalidArgument, "arena: bound dimensions do not match the system");
  RSSA_REQUIRE(arena.state_abs.allFinite() && arena.theta_abs.allFinite() &&
                   (n == 0 || arena.state_abs.minCoeff() > 0.0) &&
                   (nt == 0 || arena.theta_abs.minCoeff() > 0.0),
               ErrorCode::kInvalidArgument, "arena: bounds must be finite and positive");
}

}  // namespace

TerminalSet build_terminal(const LtiSystem& sys, const SteadyStateParam& ssp,
                           const MatrixXd& K_inf, const HPolytope& X_t, const HPolytope& U_t,
                           double epsilon, const ArenaBox& arena, int gamma_cap) {
  const int n = sys.n();
  const int nt = ssp.n_theta();
  require_finite_arena(arena, n, nt);
  const AugmentedDynamics aug = AugmentedDynamics::build(sys, ssp, K_inf);
  const HPolytope state_box = X_t.intersect(HPolytope::abs_bounds(arena.state_abs));
  const HPolytope o_eps = build_o_eps(ssp, state_box, U_t, epsilon, n);

  RowCollector rows(n + nt);
  VectorXd a(n + nt);
  for (int i = 0; i < state_box.rows(); ++i) {
    a << state_box.normals().row(i).transpose(), VectorXd::Zero(nt);
    rows.add(a, state_box.offsets()(i), "terminal");
  }
  const MatrixXd theta_gain = ssp.M2 - K_inf * ssp.M1;
  for (int i = 0; i < U_t.rows(); ++i) {
    const VectorXd g = U_t.normals().row(i).transpose();
    a << K_inf.transpose() * g, theta_gain.transpose() * g;
    rows.add(a, U_t.offsets()(i), "terminal");
  }
  for (int i = 0; i < nt; ++i) {
    a.setZero();
    a(n + i) = 1.0;
    rows.add(a, arena.theta_abs(i), "terminal");
    a(n + i) = -1.0;
    rows.add(a, arena.theta_abs(i), "terminal");
  }
  for (int i = 0; i < o_eps.rows(); ++i) {
    rows.add(o_eps.normals().row(i).transpose(), o_eps.offsets()(i), "terminal");
  }
  GilbertTanResult gt = gilbert_tan(aug.A_aug, rows.build(), gamma_cap);
  return TerminalSet{std::move(gt.set), gt.gamma_star, epsilon};
}

GilbertTanResult build_fixed_target_terminal(const LtiSystem& sys, const MatrixXd& K_inf,
                                             const HPolytope& X_t, const HPolytope& U_t,
                                             const VectorXd& x_s, const VectorXd& u_s,
                                             const ArenaBox& arena, int gamma_cap) {
  const int n = sys.n();
  RSSA_REQUIRE(x_s.size() == n && u_s.size() == sys.p(), ErrorCode::kInvalidArgument,
               "fixed-target terminal: target dimension mismatch");
  RSSA_REQUIRE(arena.state_abs.size() == n && arena.state_abs.allFinite(),
               ErrorCode::kInvalidArgument, "arena: state bounds must be finite");
  RSSA_REQUIRE((sys.A * x_s + sys.B * u_s - x_s).cwiseAbs().maxCoeff() <= 1e-9,
               ErrorCode::kInvalidArgument, "fixed-target terminal: target is not a steady state");
  const HPolytope state_box = X_t.intersect(HPolytope::abs_bounds(arena.state_abs));

  // Deviation coordinates d = x - x_s, d+ = (A + B K) d.
  RowCollector rows(n);
  for (int i = 0; i < state_box.rows(); ++i) {
    const VectorXd g = state_box.normals().row(i).transpose();
    rows.add(g, state_box.offsets()(i) - g.dot(x_s), "fixed-target terminal");
  }
  for (int i = 0; i < U_t.rows(); ++i) {
    const VectorXd g = U_t.normals().row(i).transpose();
    rows.add(K_inf.transpose() * g, U_t.offsets()(i) - g.dot(u_s), "fixed-target terminal");
  }
  GilbertTanResult gt = gilbert_tan(sys.A + sys.B * K_inf, rows.build(), gamma_cap);
  const VectorXd shifted = gt.set.offsets() + gt.set.normals() * x_s;
  return {HPolytope(gt.set.normals(), shifted), gt.gamma_star};
}

}  // namespace rssa
