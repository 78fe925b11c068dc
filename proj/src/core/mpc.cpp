#include "rssa/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rssa/lp.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(ControllerKind kind) {
  return kind == ControllerKind::kRssa ? "rssa" : "baseline";
}

namespace {

double lambda_min(const MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose()),
                                                 Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double lambda_max(const MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose()),
                                                 Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(M).singularValues()(0);
}

void require_square(const MatrixXd& M, int n, const char* name) {
  RSSA_REQUIRE(M.rows() == n && M.cols() == n, ErrorCode::kInvalidArgument,
               std::string("weights: ") + name + " has the wrong size");
  RSSA_REQUIRE(M.allFinite(), ErrorCode::kInvalidArgument,
               std::string("weights: ") + name + " has non-finite entries");
  RSSA_REQUIRE(M.size() == 0 || (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
               ErrorCode::kInvalidArgument, std::string("weights: ") + name + " is not symmetric");
}

void require_psd(const MatrixXd& M, const char* name) {
  RSSA_REQUIRE(M.size() == 0 || lambda_min(M) >= -1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()),
               ErrorCode::kInvalidArgument,
               std::string("weights: ") + name + " is not positive semidefinite");
}

template <typename F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

// Rows n'M z <= b for a polytope applied to the affine image M z. Rows with a
// vanishing image are dropped when satisfied; otherwise the set is empty and
// `empty` is set.
void append_rows(const HPolytope& P, const MatrixXd& M, std::vector<VectorXd>& rows,
                 std::vector<double>& rhs, bool& empty) {
  for (int i = 0; i < P.rows(); ++i) {
    VectorXd a = M.transpose() * P.normals().row(i).transpose();
    if (a.cwiseAbs().maxCoeff() <= 1e-14) {
      if (P.offsets()(i) < 0.0) empty = true;
      continue;
    }
    rows.push_back(std::move(a));
    rhs.push_back(P.offsets()(i));
  }
}

QuadProgram small_qp(MatrixXd H, VectorXd f, const std::vector<VectorXd>& rows,
                     const std::vector<double>& rhs) {
  QuadProgram qp;
  qp.H = std::move(H);
  qp.f = std::move(f);
  qp.G.resize(rows.size(), qp.f.size());
  qp.h.resize(rhs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    qp.G.row(i) = rows[i].transpose();
    qp.h(i) = rhs[i];
  }
  return qp;
}

}  // namespace

double weight_margin(const Weights& w, const SteadyStateParam& ssp) {
  return lambda_min(ssp.L.transpose() * w.Q_r * ssp.L) -
         lambda_max(ssp.M1.transpose() * w.Q_sx * ssp.M1) -
         lambda_max(ssp.M2.transpose() * w.Q_su * ssp.M2);
}

ControllerArtifacts precompute(const PlantProblem& problem, const PrecomputeOptions& options) {
  const LtiSystem& sys = problem.sys;
  staged("validate", [&] {
    sys.validate();
    const int n = sys.n();
    const int p = sys.p();
    const int m = sys.m();
    RSSA_REQUIRE(problem.X.dim() == n, ErrorCode::kInvalidArgument,
                 "state constraint set has the wrong dimension");
    RSSA_REQUIRE(problem.U.dim() == p, ErrorCode::kInvalidArgument,
                 "input constraint set has the wrong dimension");
    RSSA_REQUIRE(problem.W.dim() == n, ErrorCode::kInvalidArgument,
                 "disturbance box has the wrong dimension");
    RSSA_REQUIRE(problem.X.contains_origin() && problem.U.contains_origin(),
                 ErrorCode::kInvalidArgument, "constraint sets must contain the origin");
    RSSA_REQUIRE(options.N >= 1, ErrorCode::kInvalidArgument, "horizon N must be >= 1");
    RSSA_REQUIRE(options.epsilon > 0.0 && options.epsilon < 1.0, ErrorCode::kInvalidArgument,
                 "epsilon must lie in (0, 1)");
    const Weights& w = problem.weights;
    require_square(w.Q_x, n, "Q_x");
    require_square(w.Q_u, p, "Q_u");
    require_square(w.Q_r, m, "Q_r");
    require_square(w.Q_sx, n, "Q_sx");
    require_square(w.Q_su, p, "Q_su");
    require_psd(w.Q_x, "Q_x");
    require_psd(w.Q_sx, "Q_sx");
    require_psd(w.Q_su, "Q_su");
    RSSA_REQUIRE(lambda_min(w.Q_u) > 0.0, ErrorCode::kInvalidArgument,
                 "weights: Q_u must be positive definite");
    RSSA_REQUIRE(lambda_min(w.Q_r) > 0.0, ErrorCode::kInvalidArgument,
                 "weights: Q_r must be positive definite");
    return 0;
  });
  const int n = sys.n();
  const int p = sys.p();

  const RiccatiResult riccati =
      staged("dare", [&] { return dare_solve(sys, problem.weights.Q_x, problem.weights.Q_u, options.dare); });
  Weights weights = problem.weights;
  weights.Q_N = riccati.Q_N;

  const SteadyStateParam ssp = staged("steady_state", [&] { return steady_state_param(sys); });
  const int nt = ssp.n_theta();

  const MatrixXd K_tube = options.K_tube.value_or(riccati.K_inf);
  RpiApprox rpi = staged("rpi", [&] {
    RSSA_REQUIRE(K_tube.rows() == p && K_tube.cols() == n, ErrorCode::kInvalidArgument,
                 "tube gain must be p x n");
    return rakovic_approx(sys.A + sys.B * K_tube, problem.W, options.rpi);
  });

  HPolytope X_t = staged("tightening", [&] {
    try {
      return pontryagin_diff(problem.X, rpi.F);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptySet) throw;
      throw Error(ErrorCode::kEmptySet,
                  "disturbance too large: state constraints minus the tube section are empty");
    }
  });
  HPolytope U_t = staged("tightening", [&] {
    try {
      return pontryagin_diff(problem.U, image_set(K_tube, rpi.F));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptySet) throw;
      throw Error(ErrorCode::kEmptySet,
                  "disturbance too large: input constraints minus the tube feedback range are empty");
    }
  });

  bool facets_exact = true;
  HPolytope F_facets = staged("facets", [&] {
    try {
      return block_facets(rpi.F, decoupled_blocks(rpi.F));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kStructure) throw;
      facets_exact = false;
      return bounding_box_facets(rpi.F);
    }
  });

  ArenaBox arena = options.arena;
  if (arena.state_abs.size() == 0) arena.state_abs = VectorXd::Constant(n, 10.0);
  if (arena.theta_abs.size() == 0) arena.theta_abs = VectorXd::Constant(nt, 10.0);
  if (arena.theta_abs.size() == 1 && nt != 1) {
    arena.theta_abs = VectorXd::Constant(nt, arena.theta_abs(0));
  }

  VectorXd theta_target, x_target, u_target;
  int gamma_star = 0;
  HPolytope terminal = staged("terminal", [&]() -> HPolytope {
    if (options.kind == ControllerKind::kRssa) {
      TerminalSet ts = build_terminal(sys, ssp, riccati.K_inf, X_t, U_t, options.epsilon, arena,
                                      options.gamma_cap);
      gamma_star = ts.gamma_star;
      return std::move(ts.omega);
    }
    // Fixed target: the admissible steady state closest to the reference.
    const VectorXd& r = options.baseline_reference;
    RSSA_REQUIRE(r.size() == sys.m(), ErrorCode::kInvalidArgument,
                 "baseline: reference has the wrong dimension");
    const HPolytope state_box = X_t.intersect(HPolytope::abs_bounds(arena.state_abs));
    const HPolytope o_eps = build_o_eps(ssp, state_box, U_t, options.epsilon, n);
    std::vector<VectorXd> rows;
    std::vector<double> rhs;
    bool empty = false;
    MatrixXd lift = MatrixXd::Zero(n + nt, nt);
    lift.bottomRows(nt) = MatrixXd::Identity(nt, nt);
    append_rows(o_eps, lift, rows, rhs, empty);
    append_rows(HPolytope::abs_bounds(arena.theta_abs), MatrixXd::Identity(nt, nt), rows, rhs,
                empty);
    const QuadProgram qp = small_qp(2.0 * ssp.L.transpose() * weights.Q_r * ssp.L,
                                    -2.0 * ssp.L.transpose() * weights.Q_r * r, rows, rhs);
    const QpSolution sol = solve_qp(qp);
    if (empty || sol.status == QpStatus::kInfeasible) {
      throw Error(ErrorCode::kNoSteadyState, "baseline: no admissible steady state");
    }
    RSSA_REQUIRE(sol.status == QpStatus::kOptimal, ErrorCode::kMaxIter,
                 "baseline: target selection did not converge");
    theta_target = sol.z_star;
    x_target = ssp.M1 * theta_target;
    u_target = ssp.M2 * theta_target;
    GilbertTanResult gt = build_fixed_target_terminal(sys, riccati.K_inf, X_t, U_t, x_target,
                                                      u_target, arena, options.gamma_cap);
    gamma_star = gt.gamma_star;
    return std::move(gt.set);
  });

  ControllerArtifacts art{
      .kind = options.kind,
      .sys = sys,
      .X = problem.X,
      .U = problem.U,
      .W = problem.W,
      .weights = std::move(weights),
      .ssp = ssp,
      .N = options.N,
      .epsilon = options.epsilon,
      .K_tube = K_tube,
      .riccati = riccati,
      .rpi = std::move(rpi),
      .F_facets = std::move(F_facets),
      .facets_exact = facets_exact,
      .X_t = std::move(X_t),
      .U_t = std::move(U_t),
      .arena = std::move(arena),
      .terminal = std::move(terminal),
      .gamma_star = gamma_star,
      .theta_target = std::move(theta_target),
      .x_target = std::move(x_target),
      .u_target = std::move(u_target),
      .model = {},
  };
  staged("condense", [&] {
    assemble_condensed(art);
    return 0;
  });
  return art;
}

void assemble_condensed(ControllerArtifacts& art) {
  const int n = art.n();
  const int p = art.p();
  const int N = art.N;
  const bool rssa = art.kind == ControllerKind::kRssa;
  const int nt = rssa ? art.n_theta() : 0;
  const MatrixXd& A = art.sys.A;
  const MatrixXd& B = art.sys.B;
  const Weights& w = art.weights;

  CondensedModel m;
  m.d = nt + n + N * p;
  m.theta_offset = rssa ? 0 : -1;
  m.x0_offset = nt;
  m.u_offset = nt + n;
  const int d = m.d;

  auto input_sel = [&](int k) {
    MatrixXd E = MatrixXd::Zero(p, d);
    E.middleCols(m.u_offset + k * p, p).setIdentity();
    return E;
  };
  MatrixXd E_theta = MatrixXd::Zero(nt, d);
  if (rssa) E_theta.leftCols(nt).setIdentity();

  m.S.resize(N + 1);
  m.S[0] = MatrixXd::Zero(n, d);
  m.S[0].middleCols(m.x0_offset, n).setIdentity();
  for (int k = 0; k < N; ++k) m.S[k + 1] = A * m.S[k] + B * input_sel(k);

  MatrixXd H = MatrixXd::Zero(d, d);
  if (rssa) {
    const MatrixXd xs = art.ssp.M1 * E_theta;
    const MatrixXd us = art.ssp.M2 * E_theta;
    for (int k = 0; k < N; ++k) {
      const MatrixXd dx = m.S[k] - xs;
      const MatrixXd du = input_sel(k) - us;
      H += dx.transpose() * w.Q_x * dx + du.transpose() * w.Q_u * du;
    }
    const MatrixXd dN = m.S[N] - xs;
    H += dN.transpose() * w.Q_N * dN;
    const MatrixXd& M1 = art.ssp.M1;
    const MatrixXd& M2 = art.ssp.M2;
    const MatrixXd& L = art.ssp.L;
    H += E_theta.transpose() *
         (L.transpose() * w.Q_r * L + M1.transpose() * w.Q_sx * M1 + M2.transpose() * w.Q_su * M2) *
         E_theta;
    m.f_r = -2.0 * E_theta.transpose() * L.transpose() * w.Q_r;
    m.f_xdes = -2.0 * E_theta.transpose() * M1.transpose() * w.Q_sx;
    m.f_udes = -2.0 * E_theta.transpose() * M2.transpose() * w.Q_su;
  } else {
    const VectorXd& xs = art.x_target;
    const VectorXd& us = art.u_target;
    m.f_fixed = VectorXd::Zero(d);
    for (int k = 0; k < N; ++k) {
      const MatrixXd Eu = input_sel(k);
      H += m.S[k].transpose() * w.Q_x * m.S[k] + Eu.transpose() * w.Q_u * Eu;
      m.f_fixed -= 2.0 * (m.S[k].transpose() * w.Q_x * xs + Eu.transpose() * w.Q_u * us);
    }
    H += m.S[N].transpose() * w.Q_N * m.S[N];
    m.f_fixed -= 2.0 * m.S[N].transpose() * w.Q_N * xs;
    m.const_fixed = N * xs.dot(w.Q_x * xs) + N * us.dot(w.Q_u * us) + xs.dot(w.Q_N * xs);
  }
  H *= 2.0;
  m.H = 0.5 * (H + H.transpose());

  const HPolytope& F = art.F_facets;
  const HPolytope& Xt = art.X_t;
  const HPolytope& Ut = art.U_t;
  const HPolytope& T = art.terminal;
  m.rows_tube = F.rows();
  m.rows_state = N * Xt.rows();
  m.rows_input = N * Ut.rows();
  m.rows_terminal = T.rows();
  const int q = m.rows_tube + m.rows_state + m.rows_input + m.rows_terminal;
  m.G = MatrixXd::Zero(q, d);
  m.h0 = VectorXd::Zero(q);
  m.h_x = MatrixXd::Zero(q, n);
  int row = 0;
  // x0 - x_t in F.
  for (int i = 0; i < F.rows(); ++i, ++row) {
    m.G.row(row).segment(m.x0_offset, n) = F.normals().row(i);
    m.h0(row) = F.offsets()(i);
    m.h_x.row(row) = F.normals().row(i);
  }
  for (int k = 0; k < N; ++k) {
    const MatrixXd GS = Xt.normals() * m.S[k];
    m.G.middleRows(row, Xt.rows()) = GS;
    m.h0.segment(row, Xt.rows()) = Xt.offsets();
    row += Xt.rows();
  }
  for (int k = 0; k < N; ++k) {
    m.G.block(row, m.u_offset + k * p, Ut.rows(), p) = Ut.normals();
    m.h0.segment(row, Ut.rows()) = Ut.offsets();
    row += Ut.rows();
  }
  if (rssa) {
    RSSA_REQUIRE(T.dim() == n + nt, ErrorCode::kInvalidArgument,
                 "terminal set must live in (x, theta) space");
    m.G.middleRows(row, T.rows()) =
        T.normals().leftCols(n) * m.S[N] + T.normals().rightCols(nt) * E_theta;
  } else {
    RSSA_REQUIRE(T.dim() == n, ErrorCode::kInvalidArgument,
                 "baseline terminal set must live in state space");
    m.G.middleRows(row, T.rows()) = T.normals() * m.S[N];
  }
  m.h0.segment(row, T.rows()) = T.offsets();
  art.model = std::move(m);
}

QuadProgram build_qp(const ControllerArtifacts& art, const VectorXd& x_t, const VectorXd& r,
                     const VectorXd& x_des, const VectorXd& u_des) {
  const CondensedModel& m = art.model;
  RSSA_REQUIRE(x_t.size() == art.n(), ErrorCode::kInvalidArgument, "build_qp: state dimension");
  QuadProgram qp;
  qp.H = m.H;
  if (art.kind == ControllerKind::kRssa) {
    RSSA_REQUIRE(r.size() == art.sys.m() && x_des.size() == art.n() && u_des.size() == art.p(),
                 ErrorCode::kInvalidArgument, "build_qp: reference dimension");
    qp.f = m.f_r * r + m.f_xdes * x_des + m.f_udes * u_des;
  } else {
    qp.f = m.f_fixed;
  }
  qp.G = m.G;
  qp.h = m.h0 + m.h_x * x_t;
  return qp;
}

double cost_constant(const ControllerArtifacts& art, const VectorXd& r, const VectorXd& x_des,
                     const VectorXd& u_des) {
  if (art.kind == ControllerKind::kBaseline) return art.model.const_fixed;
  const Weights& w = art.weights;
  return r.dot(w.Q_r * r) + x_des.dot(w.Q_sx * x_des) + u_des.dot(w.Q_su * u_des);
}

namespace {

// Previous optimum advanced one step with the terminal law appended.
VectorXd shifted_candidate(const ControllerArtifacts& art, const VectorXd& z) {
  const CondensedModel& m = art.model;
  const int n = art.n();
  const int p = art.p();
  const int N = art.N;
  const MatrixXd& K = art.riccati.K_inf;
  VectorXd next = z;
  const VectorXd x0 = z.segment(m.x0_offset, n);
  const VectorXd u0 = z.segment(m.u_offset, p);
  next.segment(m.x0_offset, n) = art.sys.A * x0 + art.sys.B * u0;
  for (int k = 0; k + 1 < N; ++k) {
    next.segment(m.u_offset + k * p, p) = z.segment(m.u_offset + (k + 1) * p, p);
  }
  const VectorXd xN = m.S[N] * z;
  VectorXd kappa;
  if (art.kind == ControllerKind::kRssa) {
    const VectorXd theta = z.segment(m.theta_offset, art.n_theta());
    kappa = art.ssp.M2 * theta + K * (xN - art.ssp.M1 * theta);
  } else {
    kappa = art.u_target + K * (xN - art.x_target);
  }
  next.segment(m.u_offset + (N - 1) * p, p) = kappa;
  return next;
}

StepResult solve_step(const ControllerArtifacts& art, MpcSolver& solver, const VectorXd& x_t,
                      const QuadProgram& qp, double constant) {
  StepResult res;
  if (solver.candidate.has_value()) {
    res.candidate_checked = true;
    res.candidate_violation =
        std::max(0.0, (qp.G * *solver.candidate - qp.h).maxCoeff());
    res.candidate_feasible = res.candidate_violation <= kCandidateTol;
  }
  const auto start = std::chrono::steady_clock::now();
  res.qp = solver.qp.solve(qp, solver.candidate ? &*solver.candidate : nullptr);
  res.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (res.qp.status == QpStatus::kInfeasible) {
    solver.candidate.reset();
    throw InfeasibleError("MPC problem is infeasible at the measured state", res.qp.farkas);
  }
  if (res.qp.status != QpStatus::kOptimal) {
    solver.candidate.reset();
    throw Error(ErrorCode::kMaxIter,
                "QP solve degraded (status " + std::string(to_string(res.qp.status)) +
                    ", primal residual " + std::to_string(res.qp.primal_residual) +
                    ", dual residual " + std::to_string(res.qp.dual_residual) + ")");
  }
  const CondensedModel& m = art.model;
  const VectorXd& z = res.qp.z_star;
  const int p = art.p();
  if (m.theta_offset >= 0) {
    res.theta_star = z.segment(m.theta_offset, art.n_theta());
  } else {
    res.theta_star = art.theta_target;
  }
  res.x0_star = z.segment(m.x0_offset, art.n());
  res.u_seq_star.reserve(art.N);
  for (int k = 0; k < art.N; ++k) res.u_seq_star.push_back(z.segment(m.u_offset + k * p, p));
  res.u_applied = res.u_seq_star.front() + art.K_tube * (x_t - res.x0_star);
  res.cost_star = res.qp.objective + constant;
  solver.candidate = shifted_candidate(art, z);
  return res;
}

}  // namespace

StepResult control_step(const ControllerArtifacts& art, MpcSolver& solver, const VectorXd& x_t,
                        const VectorXd& r, const VectorXd& x_des, const VectorXd& u_des) {
  RSSA_REQUIRE(art.kind == ControllerKind::kRssa, ErrorCode::kInvalidArgument,
               "control_step needs RSSA artifacts");
  const QuadProgram qp = build_qp(art, x_t, r, x_des, u_des);
  return solve_step(art, solver, x_t, qp, cost_constant(art, r, x_des, u_des));
}

StepResult baseline_control_step(const ControllerArtifacts& art, MpcSolver& solver,
                                 const VectorXd& x_t) {
  RSSA_REQUIRE(art.kind == ControllerKind::kBaseline, ErrorCode::kInvalidArgument,
               "baseline_control_step needs baseline artifacts");
  const VectorXd none;
  const QuadProgram qp = build_qp(art, x_t, none, none, none);
  return solve_step(art, solver, x_t, qp, art.model.const_fixed);
}

StepResult any_control_step(const ControllerArtifacts& art, MpcSolver& solver, const VectorXd& x_t,
                            const VectorXd& r, const VectorXd& x_des, const VectorXd& u_des) {
  if (art.kind == ControllerKind::kRssa) return control_step(art, solver, x_t, r, x_des, u_des);
  return baseline_control_step(art, solver, x_t);
}

bool first_step_feasible(const ControllerArtifacts& art, const VectorXd& x_t) {
  RSSA_REQUIRE(x_t.size() == art.n(), ErrorCode::kInvalidArgument,
               "first_step_feasible: state dimension");
  const VectorXd h = art.model.h0 + art.model.h_x * x_t;
  return find_feasible_point(art.model.G, h).status != LpStatus::kInfeasible;
}

ThetaDiamond theta_diamond(const ControllerArtifacts& art, const VectorXd& x_des,
                           const VectorXd& u_des) {
  RSSA_REQUIRE(x_des.size() == art.n() && u_des.size() == art.p(), ErrorCode::kInvalidArgument,
               "theta_diamond: target dimension");
  const SteadyStateParam& ssp = art.ssp;
  const Weights& w = art.weights;
  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  bool empty = false;
  append_rows(art.X_t, ssp.M1, rows, rhs, empty);
  append_rows(art.U_t, ssp.M2, rows, rhs, empty);
  if (empty) throw Error(ErrorCode::kNoSteadyState, "theta_diamond: no admissible steady state");

  const MatrixXd H = 2.0 * (ssp.M1.transpose() * w.Q_sx * ssp.M1 +
                            ssp.M2.transpose() * w.Q_su * ssp.M2);
  const VectorXd f = -2.0 * (ssp.M1.transpose() * w.Q_sx * x_des +
                             ssp.M2.transpose() * w.Q_su * u_des);
  ThetaDiamond out;
  out.degenerate = lambda_min(H) <= 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff());
  if (rows.empty()) {
    RSSA_REQUIRE(!out.degenerate, ErrorCode::kNoSteadyState,
                 "theta_diamond: unconstrained and degenerate");
    out.theta = H.ldlt().solve(-f);
    return out;
  }
  const QpSolution sol = solve_qp(small_qp(H, f, rows, rhs));
  if (sol.status == QpStatus::kInfeasible) {
    throw Error(ErrorCode::kNoSteadyState, "theta_diamond: no admissible steady state");
  }
  RSSA_REQUIRE(sol.status == QpStatus::kOptimal, ErrorCode::kMaxIter,
               "theta_diamond: QP did not converge");
  out.theta = sol.z_star;
  return out;
}

ConvergenceBound offset_bound(const Weights& weights, const SteadyStateParam& ssp,
                              const VectorXd& theta_tilde, const VectorXd& x_des,
                              const VectorXd& u_des) {
  RSSA_REQUIRE(theta_tilde.size() == ssp.n_theta() && x_des.size() == ssp.M1.rows() &&
                   u_des.size() == ssp.M2.rows(),
               ErrorCode::kInvalidArgument, "offset_bound: dimension mismatch");
  ConvergenceBound b;
  b.alpha = weight_margin(weights, ssp);
  if (!(b.alpha > 0.0)) {
    throw Error(ErrorCode::kConditionViolated,
                "offset_bound: weight margin " + std::to_string(b.alpha) +
                    " is not positive; increase Q_r");
  }
  b.f_value = 2.0 * spectral_norm(ssp.M1) * spectral_norm(weights.Q_sx) *
                  (ssp.M1 * theta_tilde - x_des).norm() +
              2.0 * spectral_norm(ssp.M2) * spectral_norm(weights.Q_su) *
                  (ssp.M2 * theta_tilde - u_des).norm();
  b.bound = b.f_value / b.alpha;
  return b;
}

}  // namespace rssa
