#include <gtest/gtest.h>

#include <cmath>

#include "rssa/errors.hpp"
#include "rssa/sim.hpp"
#include "support/fixtures.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using test::vec;

const VectorXd kR = vec({1, 0, 2, 0, 1.5, 0});
const VectorXd kX0 = vec({-1, 0, 0, 0, 0.5, 0});

Reference drone_ref() { return {kR, kR, VectorXd::Zero(3)}; }

SimTrace constant_trace(const VectorXd& x, int T) {
  SimTrace tr;
  for (int t = 0; t <= T; ++t) {
    SimStep s;
    s.x = x;
    tr.steps.push_back(s);
  }
  return tr;
}

MonteCarloProtocol drone_protocol(int runs, double beta, int T = 40) {
  MonteCarloProtocol p;
  p.runs = runs;
  p.beta = beta;
  p.disturbance_active = {1, 3, 5};
  p.x0_lo = vec({-0.5, 0, 0, 0, 0.5, 0});
  p.x0_hi = vec({0, 0, 0.5, 0, 1, 0});
  p.sigma_indices = {0, 2, 4};
  p.T = T;
  p.master_seed = 42;
  p.ref = drone_ref();
  return p;
}

TEST(PerformanceIndex, Examples) {
  const VectorXd xr = vec({1, 2});
  EXPECT_EQ(performance_index(constant_trace(xr, 10), xr), 0.0);
  SimTrace tr = constant_trace(xr, 10);
  tr.steps[4].x = xr + vec({0.6, 0.8});
  EXPECT_NEAR(performance_index(tr, xr), 0.1, 1e-15);
}

TEST(PerformanceIndex, MatchesResummation) {
  Rng rng(10);
  SimTrace tr;
  const int T = 37;
  for (int t = 0; t <= T; ++t) {
    SimStep s;
    s.x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    tr.steps.push_back(s);
  }
  const VectorXd xr = vec({0.1, -0.2, 0.3});
  double sum = 0.0;
  for (int t = T; t >= 0; --t) {
    const VectorXd d = tr.steps[t].x - xr;
    sum += d(0) * d(0) + d(1) * d(1) + d(2) * d(2);
  }
  EXPECT_NEAR(performance_index(tr, xr), sum / T, 1e-13);
}

TEST(ReferenceState, LeastSquaresSteadyState) {
  const auto& art = test::drone();
  EXPECT_LE((reference_state(art.ssp, kR) - kR).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DeriveSeed, DistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, FixedMapping) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    EXPECT_EQ(u, b.uniform01());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Simulate, EquilibriumWithoutDisturbanceIsConstant) {
  const auto& art = test::drone();
  const VectorXd r = vec({1, 0, 1.5, 0, 1.5, 0});
  const SimTrace tr = simulate(art, r, {r, r, VectorXd::Zero(3)}, 20, DisturbanceSpec{0, {1, 3, 5}, 3});
  for (const auto& s : tr.steps) EXPECT_LE((s.x - r).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(performance_index(tr, r), 1e-15);
}

TEST(Simulate, FixedSeedIsBitwiseReproducible) {
  const auto& art = test::drone();
  const DisturbanceSpec d{0.02, {1, 3, 5}, 99};
  const SimTrace a = simulate(art, kX0, drone_ref(), 30, d);
  const SimTrace b = simulate(art, kX0, drone_ref(), 30, d);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].x, b.steps[t].x);
    EXPECT_EQ(a.steps[t].u, b.steps[t].u);
    EXPECT_EQ(a.steps[t].w, b.steps[t].w);
  }
}

TEST(Simulate, TraceObeysDynamics) {
  const auto& art = test::drone();
  const SimTrace tr = simulate(art, kX0, drone_ref(), 25, DisturbanceSpec{0.02, {1, 3, 5}, 4});
  for (std::size_t t = 0; t + 1 < tr.steps.size(); ++t) {
    const auto& s = tr.steps[t];
    EXPECT_EQ(s.w(0), 0.0);
    EXPECT_LE(s.w.cwiseAbs().maxCoeff(), 0.02);
    EXPECT_LE((art.sys.step(s.x, s.u, s.w) - tr.steps[t + 1].x).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_TRUE(tr.steps.back().w.isZero());
}

TEST(Simulate, DisturbanceAboveArtifactBoundRejected) {
  const auto& art = test::drone();
  EXPECT_THROW(simulate(art, kX0, drone_ref(), 5, DisturbanceSpec{0.03, {1, 3, 5}, 1}), Error);
}

TEST(Simulate, InfeasibleStartThrows) {
  const auto& art = test::drone();
  EXPECT_THROW(simulate(art, vec({0, 0, 2.5, 0, 1, 0}), drone_ref(), 5, DisturbanceSpec{}),
               InfeasibleError);
}

TEST(Simulate, DegenerateWarmStartDoesNotCycle) {
  // This seed once reached a warm start whose working set held a nearly
  // dependent row, and the active-set loop cycled until max_iter.
  const ExperimentConfig cfg = test::drone_config(0.035);
  const ControllerArtifacts art = test::build(cfg);
  const SimTrace tr = simulate(art, kX0, drone_ref(), 10,
                               DisturbanceSpec{0.035, {1, 3, 5}, 7463203629961937405ull});
  EXPECT_FALSE(tr.truncated) << tr.failure;
  for (const auto& s : tr.steps) EXPECT_LT(s.iterations, 2000);
}

TEST(MonteCarlo, SingleRunMatchesSimulate) {
  const auto& art = test::drone();
  const MonteCarloProtocol p = drone_protocol(1, 0.02);
  const MonteCarloSummary s = monte_carlo(art, p);
  ASSERT_EQ(s.runs.size(), 1u);
  const MonteCarloRun& run = s.runs[0];
  const SimTrace tr = simulate(art, run.x0, p.ref, p.T, DisturbanceSpec{p.beta, p.disturbance_active, run.seed});
  EXPECT_EQ(run.x_final, tr.steps.back().x);
  EXPECT_EQ(run.pi, performance_index(tr, reference_state(art.ssp, kR)));
  for (int t = 0; t <= p.T; ++t) EXPECT_EQ(VectorXd(s.state_mean.row(t).transpose()), tr.steps[t].x);
}

TEST(MonteCarlo, NoDisturbanceFixedStartHasZeroSpread) {
  const auto& art = test::drone();
  MonteCarloProtocol p = drone_protocol(4, 0.0);
  p.x0_lo = kX0;
  p.x0_hi = kX0;
  const MonteCarloSummary s = monte_carlo(art, p);
  EXPECT_EQ(s.pi_std, 0.0);
  EXPECT_EQ(s.state_std.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const auto& art = test::drone();
  MonteCarloProtocol p = drone_protocol(6, 0.02, 20);
  const MonteCarloSummary one = monte_carlo(art, p);
  p.threads = 3;
  const MonteCarloSummary three = monte_carlo(art, p);
  ASSERT_EQ(one.runs.size(), three.runs.size());
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    EXPECT_EQ(one.runs[i].seed, three.runs[i].seed);
    EXPECT_EQ(one.runs[i].x_final, three.runs[i].x_final);
    EXPECT_EQ(one.runs[i].pi, three.runs[i].pi);
  }
  EXPECT_EQ(one.state_mean, three.state_mean);
  EXPECT_EQ(one.state_std, three.state_std);
}

TEST(MonteCarlo, RobustRunsStayFeasible) {
  const auto& art = test::drone();
  const MonteCarloSummary s = monte_carlo(art, drone_protocol(10, 0.02));
  EXPECT_EQ(s.initial_infeasible, 0);
  EXPECT_EQ(s.mid_run_infeasible, 0);
  EXPECT_EQ(s.candidate_failures, 0);
  EXPECT_EQ(s.tube_failures, 0);
  EXPECT_LE(s.max_violation, 1e-8);
}

TEST(MonteCarlo, BetaAboveBoundRejected) {
  EXPECT_THROW(monte_carlo(test::drone(), drone_protocol(2, 0.05)), Error);
}

TEST(Roa, TrivialPoints) {
  const auto& rssa = test::drone();
  const auto& base = test::drone_baseline();
  EXPECT_TRUE(first_step_feasible(rssa, vec({0, 0, 0, 0, 1.5, 0})));
  EXPECT_TRUE(first_step_feasible(base, base.x_target));
  EXPECT_FALSE(first_step_feasible(rssa, vec({0, 0, 1.9, 0, 1.5, 0})));
  EXPECT_FALSE(first_step_feasible(base, vec({0, 0, 1.9, 0, 1.5, 0})));
}

TEST(Roa, SmallGridContainment) {
  RoaGrid g;
  g.nx = 9;
  g.ny = 7;
  g.base_state = vec({0, 0, 0, 0, 1.5, 0});
  const auto pts = roa_scan(test::drone(), test::drone_baseline(), g);
  ASSERT_EQ(pts.size(), 63u);
  EXPECT_EQ(pts.front().x, -3.0);
  EXPECT_EQ(pts.back().y, 2.5);
  int rssa = 0, base = 0;
  for (const auto& p : pts) {
    rssa += p.feasible_rssa;
    base += p.feasible_base;
    if (p.feasible_base) EXPECT_TRUE(p.feasible_rssa) << p.x << "," << p.y;
  }
  EXPECT_GT(rssa, base);
}

}  // namespace
}  // namespace rssa
