#include "rssa/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rssa/errors.hpp"
#include "rssa/lp.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

double normal_draw(Rng& rng) {
  // 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

double unit_draw(Rng& rng, bool vertex) {
  if (vertex) return rng.uniform01() < 0.5 ? -1.0 : 1.0;
  return rng.uniform(-1.0, 1.0);
}

VectorXd random_direction(int d, Rng& rng) {
  VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal_draw(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

VectorXd sample_support_set(const SupportSet& F, Rng& rng, bool vertex) {
  VectorXd e = VectorXd::Zero(F.dim());
  for (const auto& t : F.terms()) {
    VectorXd u(t.box.dim());
    for (int k = 0; k < t.box.dim(); ++k) {
      u(k) = t.box.center(k) + t.box.half_widths(k) * unit_draw(rng, vertex);
    }
    e += t.map * u;
  }
  return F.scale() * e;
}

VectorXd sample_box(const Box& box, Rng& rng, bool vertex) {
  VectorXd x(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    x(i) = box.center(i) + box.half_widths(i) * unit_draw(rng, vertex);
  }
  return x;
}

std::optional<VectorXd> chebyshev_center(const HPolytope& p) {
  const int d = p.dim();
  MatrixXd G(p.rows() + 1, d + 1);
  VectorXd h(p.rows() + 1);
  G.topLeftCorner(p.rows(), d) = p.normals();
  G.block(0, d, p.rows(), 1) = p.normals().rowwise().norm();
  h.head(p.rows()) = p.offsets();
  G.row(p.rows()).setZero();
  G(p.rows(), d) = 1.0;
  h(p.rows()) = 1e3;
  VectorXd c = VectorXd::Zero(d + 1);
  c(d) = 1.0;
  const LpResult lp = solve_lp(c, G, h, LpSense::kMaximize);
  if (lp.status != LpStatus::kOptimal || lp.x(d) < 0.0) return std::nullopt;
  return VectorXd(lp.x.head(d));
}

std::vector<VectorXd> hit_and_run(const HPolytope& p, const VectorXd& start, int count, Rng& rng,
                                  int thin) {
  RSSA_REQUIRE(start.size() == p.dim() && thin >= 1 && count >= 0, ErrorCode::kInvalidArgument,
               "hit_and_run: invalid arguments");
  std::vector<VectorXd> out;
  out.reserve(count);
  VectorXd x = start;
  const double inf = std::numeric_limits<double>::infinity();
  for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
    const VectorXd dir = random_direction(p.dim(), rng);
    const VectorXd ad = p.normals() * dir;
    const VectorXd slack = p.offsets() - p.normals() * x;
    double lo = -inf;
    double hi = inf;
    for (int i = 0; i < p.rows(); ++i) {
      const double s = std::max(0.0, slack(i));
      if (ad(i) > 1e-14) hi = std::min(hi, s / ad(i));
      if (ad(i) < -1e-14) lo = std::max(lo, s / ad(i));
    }
    RSSA_REQUIRE(std::isfinite(lo) && std::isfinite(hi), ErrorCode::kInvalidArgument,
                 "hit_and_run: polytope is unbounded");
    x += rng.uniform(lo, hi) * dir;
    if ((k + 1) % thin == 0) out.push_back(x);
  }
  return out;
}

std::vector<VectorXd> extreme_points(const HPolytope& p, int count, Rng& rng) {
  std::vector<VectorXd> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const LpResult lp = solve_lp(random_direction(p.dim(), rng), p.normals(), p.offsets());
    if (lp.status == LpStatus::kOptimal) out.push_back(lp.x);
  }
  return out;
}

bool AuditReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

json AuditReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  }
  return {{"passed", all_passed()}, {"checks", arr}};
}

namespace {

/// Relative violation of x against P: max_i (a_i x - b_i) / max(1, |b_i|).
double scaled_violation(const HPolytope& p, const VectorXd& x) {
  const VectorXd v = p.normals() * x - p.offsets();
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i) {
    worst = std::max(worst, v(i) / std::max(1.0, std::abs(p.offsets()(i))));
  }
  return worst;
}

class Recorder {
 public:
  explicit Recorder(AuditReport& report) : report_(report) {}

  /// Passes when value <= tolerance.
  void at_most(const std::string& name, double value, double tolerance, std::string detail = {}) {
    report_.checks.push_back({name, value <= tolerance, value, tolerance, std::move(detail)});
  }

  void flag(const std::string& name, bool ok, std::string detail = {}) {
    report_.checks.push_back({name, ok, ok ? 1.0 : 0.0, 1.0, std::move(detail)});
  }

  template <typename Fn>
  void guarded(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      flag(name, false, std::string("raised: ") + e.what());
    }
  }

 private:
  AuditReport& report_;
};

}  // namespace

AuditReport audit_artifact(const ControllerArtifacts& art, const AuditOptions& options) {
  AuditReport report;
  Recorder rec(report);
  const LtiSystem& sys = art.sys;
  const int n = art.n();
  const int p = art.p();
  Rng rng(options.seed);

  rec.guarded("dare.residual", [&] {
    const double res = riccati_residual(sys, art.weights.Q_x, art.weights.Q_u, art.riccati.Q_N);
    rec.at_most("dare.residual", res, 1e-8);
  });
  rec.guarded("dare.schur", [&] {
    const double rho = spectral_radius(sys.A + sys.B * art.riccati.K_inf);
    rec.at_most("dare.schur", rho, 1.0 - 1e-9, "spectral radius of A + B K_inf");
  });
  rec.guarded("tube_gain.schur", [&] {
    const double rho = spectral_radius(sys.A + sys.B * art.K_tube);
    rec.at_most("tube_gain.schur", rho, 1.0 - 1e-9, "spectral radius of A + B K_tube");
    const double diff = (art.rpi.A_K - (sys.A + sys.B * art.K_tube)).cwiseAbs().maxCoeff();
    rec.at_most("tube_gain.error_dynamics", diff, 1e-12, "A_K equals A + B K_tube");
  });

  rec.guarded("steady_state", [&] {
    const MatrixXd kernel =
        (sys.A - MatrixXd::Identity(n, n)) * art.ssp.M1 + sys.B * art.ssp.M2;
    rec.at_most("steady_state.kernel", kernel.cwiseAbs().maxCoeff(), 1e-10,
                "(A - I) M1 + B M2 = 0");
    const MatrixXd out = art.ssp.L - sys.C * art.ssp.M1 - sys.D * art.ssp.M2;
    rec.at_most("steady_state.output_map", out.cwiseAbs().maxCoeff(), 1e-12,
                "L = C M1 + D M2");
    MatrixXd stacked(n + p, art.n_theta());
    stacked << art.ssp.M1, art.ssp.M2;
    const MatrixXd gram = stacked.transpose() * stacked;
    rec.at_most("steady_state.orthonormal",
                (gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(),
                1e-10);
  });

  rec.guarded("rpi.contraction", [&] {
    MatrixXd power = MatrixXd::Identity(n, n);
    for (int i = 0; i < art.rpi.s; ++i) power = art.rpi.A_K * power;
    const VectorXd& hw = art.rpi.W_sum.half_widths;
    double alpha = 0.0;
    for (int j = 0; j < n; ++j) {
      if (hw(j) > 0.0) alpha = std::max(alpha, hw.dot(power.row(j).transpose().cwiseAbs()) / hw(j));
    }
    rec.at_most("rpi.contraction", std::abs(alpha - art.rpi.alpha), 1e-12,
                "A_K^s W_sum within alpha W_sum, alpha = " + std::to_string(art.rpi.alpha));
  });

  rec.guarded("tightening", [&] {
    double worst_x = 0.0;
    for (int i = 0; i < art.X.rows(); ++i) {
      const double expect =
          art.X.offsets()(i) - support(art.rpi.F, art.X.normals().row(i).transpose());
      worst_x = std::max(worst_x, std::abs(expect - art.X_t.offsets()(i)) /
                                      std::max(1.0, std::abs(expect)));
    }
    rec.at_most("tightening.state", worst_x, 1e-12, "X_t = X minus F, row by row");
    const SupportSet KF = image_set(art.K_tube, art.rpi.F);
    double worst_u = 0.0;
    for (int i = 0; i < art.U.rows(); ++i) {
      const double expect = art.U.offsets()(i) - support(KF, art.U.normals().row(i).transpose());
      worst_u = std::max(worst_u, std::abs(expect - art.U_t.offsets()(i)) /
                                      std::max(1.0, std::abs(expect)));
    }
    rec.at_most("tightening.input", worst_u, 1e-12, "U_t = U minus K F, row by row");
  });

  rec.guarded("facets.supporting", [&] {
    double worst = 0.0;
    for (int i = 0; i < art.F_facets.rows(); ++i) {
      const VectorXd a = art.F_facets.normals().row(i).transpose();
      const double b = art.F_facets.offsets()(i);
      const double h = a.isZero(0.0) ? 0.0 : support(art.rpi.F, a);
      const double gap = art.facets_exact ? std::abs(h - b) : std::max(0.0, h - b);
      worst = std::max(worst, gap / std::max(1.0, std::abs(b)));
    }
    rec.at_most("facets.supporting", worst, 1e-9,
                art.facets_exact ? "every facet touches F" : "bounding box contains F");
  });

  rec.guarded("rpi.invariance", [&] {
    const auto extremes = extreme_points(art.F_facets, 200, rng);
    double worst = -std::numeric_limits<double>::infinity();
    int failures = 0;
    for (int k = 0; k < options.rpi_samples; ++k) {
      VectorXd e;
      if (k < static_cast<int>(extremes.size())) {
        e = extremes[k];
      } else {
        e = sample_support_set(art.rpi.F, rng, k % 2 == 0);
      }
      const VectorXd w = sample_box(art.W, rng, k % 3 != 0);
      const double v = scaled_violation(art.F_facets, art.rpi.A_K * e + w);
      worst = std::max(worst, v);
      if (v > 1e-9) ++failures;
    }
    rec.at_most("rpi.invariance", worst, 1e-9,
                std::to_string(options.rpi_samples) + " samples, " + std::to_string(failures) +
                    " outside F");
  });

  rec.guarded("terminal.invariance", [&] {
    MatrixXd A_next;
    VectorXd shift;
    if (art.kind == ControllerKind::kRssa) {
      A_next = AugmentedDynamics::build(sys, art.ssp, art.riccati.K_inf).A_aug;
      shift = VectorXd::Zero(A_next.rows());
    } else {
      A_next = sys.A + sys.B * art.riccati.K_inf;
      shift = art.x_target - A_next * art.x_target;
    }
    const auto center = chebyshev_center(art.terminal);
    if (!center) {
      rec.flag("terminal.invariance", false, "terminal set is empty");
      return;
    }
    std::vector<VectorXd> pts = hit_and_run(art.terminal, *center, options.terminal_samples, rng);
    const auto ext = extreme_points(art.terminal, options.terminal_extremes, rng);
    pts.insert(pts.end(), ext.begin(), ext.end());
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& z : pts) worst = std::max(worst, scaled_violation(art.terminal, A_next * z + shift));
    rec.at_most("terminal.invariance", worst, 1e-9,
                std::to_string(pts.size()) + " points, gamma* = " + std::to_string(art.gamma_star));
  });

  rec.guarded("terminal.admissible", [&] {
    // Omega must lie in the tightened state set and drive admissible inputs.
    const int d = art.terminal.dim();
    double worst = -std::numeric_limits<double>::infinity();
    auto probe = [&](const VectorXd& a, double b) {
      const auto h = support(art.terminal, a);
      const double v = h ? (*h - b) / std::max(1.0, std::abs(b))
                         : std::numeric_limits<double>::infinity();
      worst = std::max(worst, v);
    };
    for (int i = 0; i < art.X_t.rows(); ++i) {
      VectorXd a = VectorXd::Zero(d);
      a.head(n) = art.X_t.normals().row(i).transpose();
      probe(a, art.X_t.offsets()(i));
    }
    for (int i = 0; i < art.U_t.rows(); ++i) {
      const VectorXd g = art.U_t.normals().row(i).transpose();
      VectorXd a = VectorXd::Zero(d);
      a.head(n) = art.riccati.K_inf.transpose() * g;
      double b = art.U_t.offsets()(i);
      if (art.kind == ControllerKind::kRssa) {
        a.tail(art.n_theta()) = (art.ssp.M2 - art.riccati.K_inf * art.ssp.M1).transpose() * g;
      } else {
        b -= g.dot(art.u_target - art.riccati.K_inf * art.x_target);
      }
      probe(a, b);
    }
    rec.at_most("terminal.admissible", worst, 1e-9, "terminal set inside X_t and U_t");
  });

  rec.guarded("qp.hessian", [&] {
    const MatrixXd& H = art.model.H;
    const double lo = Eigen::SelfAdjointEigenSolver<MatrixXd>(H).eigenvalues().minCoeff();
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    rec.at_most("qp.hessian_psd", -lo / scale, 1e-9, "smallest Hessian eigenvalue");
  });

  rec.guarded("closed_loop", [&] {
    RSSA_REQUIRE(options.x0.size() == n, ErrorCode::kInvalidArgument,
                 "audit: initial state dimension");
    DisturbanceSpec dist;
    dist.seed = options.seed;
    dist.beta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (art.W.half_widths(i) > 0.0) {
        dist.active.push_back(i);
        dist.beta = std::min(dist.beta, art.W.half_widths(i));
      }
    }
    if (dist.active.empty()) dist.beta = 0.0;
    // Replay from the configured start when the controller covers it; the
    // baseline's feasible region is small, so fall back to its target.
    VectorXd x0 = options.x0;
    std::string start = "from configured x0";
    if (!first_step_feasible(art, x0)) {
      x0 = art.kind == ControllerKind::kBaseline ? art.x_target : VectorXd(VectorXd::Zero(n));
      start = art.kind == ControllerKind::kBaseline ? "from the fixed target (x0 infeasible)"
                                                    : "from the origin (x0 infeasible)";
    }
    const SimTrace trace = simulate(art, x0, options.ref, options.closed_loop_steps, dist);
    int cand_fail = 0;
    int tube_fail = 0;
    double viol = -std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps) {
      if (!s.feasible) continue;
      if (s.candidate_checked && !s.candidate_feasible) ++cand_fail;
      if (!art.F_facets.contains(s.x - s.x0_star, kGeomTol)) ++tube_fail;
      viol = std::max({viol, art.X.max_violation(s.x), art.U.max_violation(s.u)});
    }
    rec.flag("closed_loop.recursive_feasibility", !trace.truncated && cand_fail == 0,
             trace.truncated ? trace.failure
                             : std::to_string(cand_fail) + " shifted candidates infeasible, " +
                                   start);
    rec.at_most("closed_loop.tube", tube_fail, 0.0, "steps with x - x0* outside F");
    rec.at_most("closed_loop.constraints", viol, 1e-8, "largest X / U violation");
  });

  return report;
}

}  // namespace rssa
