#include "rssa/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "rssa/errors.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

VectorXd DisturbanceSpec::sample(Rng& rng, int n) const {
  VectorXd w = VectorXd::Zero(n);
  for (int i : active) w(i) = rng.uniform(-beta, beta);
  return w;
}

namespace {

void check_disturbance(const ControllerArtifacts& art, double beta, const std::vector<int>& active) {
  RSSA_REQUIRE(beta >= 0.0 && std::isfinite(beta), ErrorCode::kInvalidArgument,
               "disturbance: beta must be finite and >= 0");
  for (int i : active) {
    RSSA_REQUIRE(i >= 0 && i < art.n(), ErrorCode::kInvalidArgument,
                 "disturbance: active coordinate out of range");
    // The tube was sized for W; a larger realized disturbance voids the
    // feasibility guarantee.
    RSSA_REQUIRE(beta <= art.W.half_widths(i) * (1.0 + 1e-12), ErrorCode::kInvalidArgument,
                 "disturbance: beta exceeds the disturbance bound the artifact was built for");
  }
}

// Runs the closed loop, invoking `on_step` after each recorded step.
template <typename OnStep>
SimTrace run_loop(const ControllerArtifacts& art, const VectorXd& x0, const Reference& ref, int T,
                  const DisturbanceSpec& dist, Rng& rng, const QpSettings& qp_settings,
                  OnStep&& on_step) {
  const int n = art.n();
  SimTrace trace;
  trace.steps.reserve(T + 1);
  MpcSolver solver(qp_settings);
  VectorXd x = x0;
  for (int t = 0; t <= T; ++t) {
    StepResult st;
    try {
      st = any_control_step(art, solver, x, ref.r, ref.x_des, ref.u_des);
    } catch (const Error& e) {
      if (t == 0) throw;
      trace.truncated = true;
      trace.failure = "step " + std::to_string(t) + ": " + e.what();
      SimStep bad;
      bad.x = x;
      bad.feasible = false;
      trace.steps.push_back(std::move(bad));
      on_step(trace.steps.back());
      return trace;
    }
    SimStep s;
    s.x = x;
    s.x0_star = st.x0_star;
    s.theta_star = st.theta_star;
    s.u = st.u_applied;
    s.w = t < T ? dist.sample(rng, n) : VectorXd(VectorXd::Zero(n));
    s.cost = st.cost_star;
    s.iterations = st.qp.iterations;
    s.solve_ms = st.solve_ms;
    s.candidate_checked = st.candidate_checked;
    s.candidate_feasible = st.candidate_feasible;
    s.candidate_violation = st.candidate_violation;
    if (t < T) x = art.sys.A * x + art.sys.B * s.u + s.w;
    trace.steps.push_back(std::move(s));
    on_step(trace.steps.back());
  }
  return trace;
}

}  // namespace

SimTrace simulate(const ControllerArtifacts& art, const VectorXd& x0, const Reference& ref, int T,
                  const DisturbanceSpec& dist, const QpSettings& qp_settings) {
  RSSA_REQUIRE(T >= 0, ErrorCode::kInvalidArgument, "simulate: T must be >= 0");
  RSSA_REQUIRE(x0.size() == art.n(), ErrorCode::kInvalidArgument, "simulate: x0 dimension");
  check_disturbance(art, dist.beta, dist.active);
  Rng rng(dist.seed);
  return run_loop(art, x0, ref, T, dist, rng, qp_settings, [](const SimStep&) {});
}

double performance_index(const SimTrace& trace, const VectorXd& x_ref) {
  RSSA_REQUIRE(!trace.steps.empty(), ErrorCode::kInvalidArgument,
               "performance_index: empty trace");
  double sum = 0.0;
  for (const auto& s : trace.steps) sum += (s.x - x_ref).squaredNorm();
  return sum / std::max(1, trace.horizon());
}

VectorXd reference_state(const SteadyStateParam& ssp, const VectorXd& r) {
  return ssp.M1 * theta_for_reference(ssp, r);
}

namespace {

template <typename Work>
void parallel_for(int count, int threads, Work&& work) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  pool.reserve(threads);
  for (int k = 0; k < threads; ++k) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          work(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

MonteCarloSummary monte_carlo(const ControllerArtifacts& art, const MonteCarloProtocol& protocol) {
  const int n = art.n();
  RSSA_REQUIRE(protocol.runs >= 1, ErrorCode::kInvalidArgument, "monte_carlo: runs must be >= 1");
  RSSA_REQUIRE(protocol.T >= 0, ErrorCode::kInvalidArgument, "monte_carlo: T must be >= 0");
  RSSA_REQUIRE(protocol.x0_lo.size() == n && protocol.x0_hi.size() == n,
               ErrorCode::kInvalidArgument, "monte_carlo: initial-state bounds dimension");
  RSSA_REQUIRE((protocol.x0_hi - protocol.x0_lo).minCoeff() >= 0.0, ErrorCode::kInvalidArgument,
               "monte_carlo: initial-state bounds are inverted");
  check_disturbance(art, protocol.beta, protocol.disturbance_active);
  const VectorXd x_ref = reference_state(art.ssp, protocol.ref.r);
  const int T = protocol.T;

  std::vector<MonteCarloRun> runs(protocol.runs);
  std::vector<MatrixXd> trajectories(protocol.runs);

  parallel_for(protocol.runs, protocol.threads, [&](int i) {
    MonteCarloRun& run = runs[i];
    run.run_id = i;
    run.seed = derive_seed(protocol.master_seed, static_cast<std::uint64_t>(i));
    // Separate streams: the disturbance stream is exactly the one simulate()
    // draws for run.seed.
    Rng init_rng(derive_seed(run.seed, 0));
    Rng rng(run.seed);
    run.x0 = VectorXd(n);
    for (int j = 0; j < n; ++j) {
      const double lo = protocol.x0_lo(j);
      const double hi = protocol.x0_hi(j);
      run.x0(j) = lo == hi ? lo : init_rng.uniform(lo, hi);
    }
    DisturbanceSpec dist{protocol.beta, protocol.disturbance_active, run.seed};
    double total_ms = 0.0;
    MatrixXd traj(T + 1, n);
    int row = 0;
    auto on_step = [&](const SimStep& s) {
      if (!s.feasible) return;
      traj.row(row++) = s.x.transpose();
      run.max_violation = std::max(
          {run.max_violation, art.X.max_violation(s.x), art.U.max_violation(s.u)});
      if (s.candidate_checked && !s.candidate_feasible) ++run.candidate_failures;
      run.max_candidate_violation = std::max(run.max_candidate_violation, s.candidate_violation);
      if (!art.F_facets.contains(s.x - s.x0_star, kGeomTol)) ++run.tube_failures;
      total_ms += s.solve_ms;
      run.max_solve_ms = std::max(run.max_solve_ms, s.solve_ms);
    };
    run.max_violation = -std::numeric_limits<double>::infinity();
    try {
      const SimTrace trace = run_loop(art, run.x0, protocol.ref, T, dist, rng, {}, on_step);
      run.steps_completed = row;
      run.mid_run_infeasible = trace.truncated;
      run.failure = trace.failure;
      run.pi = performance_index(trace, x_ref);
      run.x_final = trace.steps.back().x;
      if (row > 0) run.mean_solve_ms = total_ms / row;
    } catch (const InfeasibleError& e) {
      run.initial_infeasible = true;
      run.failure = e.what();
      run.max_violation = 0.0;
      run.x_final = run.x0;
    } catch (const Error& e) {
      // First solve failed for a reason other than infeasibility.
      run.mid_run_infeasible = true;
      run.failure = std::string("step 0: ") + e.what();
      run.max_violation = 0.0;
      run.x_final = run.x0;
    }
    traj.conservativeResize(row, Eigen::NoChange);
    trajectories[i] = std::move(traj);
  });

  MonteCarloSummary summary;
  summary.max_violation = -std::numeric_limits<double>::infinity();
  summary.state_mean = MatrixXd::Zero(T + 1, n);
  summary.state_std = MatrixXd::Zero(T + 1, n);
  std::vector<double> pis;
  for (int i = 0; i < protocol.runs; ++i) {
    const MonteCarloRun& run = runs[i];
    summary.initial_infeasible += run.initial_infeasible;
    summary.mid_run_infeasible += run.mid_run_infeasible;
    summary.candidate_failures += run.candidate_failures;
    summary.tube_failures += run.tube_failures;
    if (run.initial_infeasible) continue;
    summary.max_violation = std::max(summary.max_violation, run.max_violation);
    if (run.mid_run_infeasible) continue;
    pis.push_back(run.pi);
    summary.state_mean += trajectories[i];
    ++summary.completed_runs;
  }
  if (summary.completed_runs > 0) {
    summary.state_mean /= summary.completed_runs;
    for (int i = 0; i < protocol.runs; ++i) {
      if (runs[i].initial_infeasible || runs[i].mid_run_infeasible) continue;
      summary.state_std += (trajectories[i] - summary.state_mean).cwiseAbs2();
    }
    summary.state_std =
        (summary.state_std / std::max(1, summary.completed_runs - 1)).cwiseSqrt();
    double mean = 0.0;
    for (double v : pis) mean += v;
    mean /= static_cast<double>(pis.size());
    double var = 0.0;
    for (double v : pis) var += (v - mean) * (v - mean);
    summary.pi_mean = mean;
    summary.pi_std = pis.size() > 1 ? std::sqrt(var / static_cast<double>(pis.size() - 1)) : 0.0;
  }
  summary.runs = std::move(runs);
  return summary;
}

std::vector<RoaPoint> roa_scan(const ControllerArtifacts& art_rssa,
                               const ControllerArtifacts& art_base, const RoaGrid& grid) {
  const int n = art_rssa.n();
  RSSA_REQUIRE(art_base.n() == n, ErrorCode::kInvalidArgument,
               "roa_scan: artifacts have different state dimensions");
  RSSA_REQUIRE(grid.nx >= 1 && grid.ny >= 1, ErrorCode::kInvalidArgument,
               "roa_scan: grid must have at least one point per axis");
  RSSA_REQUIRE(grid.axis_x >= 0 && grid.axis_x < n && grid.axis_y >= 0 && grid.axis_y < n &&
                   grid.axis_x != grid.axis_y,
               ErrorCode::kInvalidArgument, "roa_scan: invalid slice axes");
  const VectorXd base = grid.base_state.size() == n ? grid.base_state : VectorXd(VectorXd::Zero(n));
  auto coord = [](double lo, double hi, int count, int k) {
    return count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
  };
  std::vector<RoaPoint> points(static_cast<std::size_t>(grid.nx) * grid.ny);
  parallel_for(static_cast<int>(points.size()), grid.threads, [&](int idx) {
    const int iy = idx / grid.nx;
    const int ix = idx % grid.nx;
    RoaPoint& pt = points[idx];
    pt.x = coord(grid.x_lo, grid.x_hi, grid.nx, ix);
    pt.y = coord(grid.y_lo, grid.y_hi, grid.ny, iy);
    VectorXd x = base;
    x(grid.axis_x) = pt.x;
    x(grid.axis_y) = pt.y;
    pt.feasible_rssa = first_step_feasible(art_rssa, x);
    pt.feasible_base = first_step_feasible(art_base, x);
  });
  return points;
}

}  // namespace rssa
