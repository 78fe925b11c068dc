#include <gtest/gtest.h>

#include <cmath>

#include "rssa/audit.hpp"
#include "rssa/errors.hpp"
#include "rssa/terminal.hpp"
#include "support/fixtures.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using test::mat1;
using test::vec;

struct DoubleIntegrator {
  LtiSystem sys = LtiSystem::full_state((MatrixXd(2, 2) << 1, 1, 0, 1).finished(),
                                        (MatrixXd(2, 1) << 0.5, 1).finished());
  MatrixXd K = (MatrixXd(1, 2) << -0.4, -1.0).finished();
};

TEST(PredictedState, Examples) {
  const auto& art = test::drone();
  const AugmentedDynamics aug = AugmentedDynamics::build(art.sys, art.ssp, art.riccati.K_inf);
  const VectorXd x = vec({0.3, -0.1, 0.5, 0.2, -0.4, 0.1});
  const VectorXd th = vec({0.7, -0.2, 1.1});
  EXPECT_EQ(predicted_state(aug, x, th, 0), x);
  const MatrixXd A_K = art.sys.A + art.sys.B * art.riccati.K_inf;
  VectorXd y = x;
  for (int g = 0; g < 7; ++g) y = A_K * y;
  EXPECT_LE((predicted_state(aug, x, VectorXd::Zero(3), 7) - y).cwiseAbs().maxCoeff(), 1e-13);
  for (int g : {1, 5, 40}) {
    EXPECT_LE((predicted_state(aug, art.ssp.M1 * th, th, g) - art.ssp.M1 * th).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(OEps, ScalarBound) {
  const SteadyStateParam ssp{mat1(1), mat1(0), mat1(1)};
  const HPolytope X_t = HPolytope::abs_bounds(vec({1}));
  const HPolytope U_t = HPolytope::abs_bounds(vec({1}));
  const HPolytope O = build_o_eps(ssp, X_t, U_t, 0.01, 1);
  ASSERT_EQ(O.dim(), 2);
  ASSERT_EQ(O.rows(), 2);  // the M2 = 0 rows are dropped
  EXPECT_TRUE(O.contains(vec({5, 0.99}), 1e-12));
  EXPECT_FALSE(O.contains(vec({0, 0.991}), 1e-9));
  EXPECT_LE(O.normals().col(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(OEps, ZeroEpsilonReproducesSteadyConstraints) {
  const SteadyStateParam ssp{mat1(1), mat1(0.5), mat1(1)};
  const HPolytope O = build_o_eps(ssp, HPolytope::abs_bounds(vec({1})),
                                  HPolytope::abs_bounds(vec({0.4})), 1e-12, 1);
  EXPECT_TRUE(O.contains(vec({0, 0.8}), 1e-12));
  EXPECT_FALSE(O.contains(vec({0, 0.81}), 1e-9));
}

TEST(OEps, DroneDropsInputRows) {
  const auto& art = test::drone();
  const HPolytope O = build_o_eps(art.ssp, art.X_t, art.U_t, 0.01, art.n());
  EXPECT_EQ(O.rows(), art.X_t.rows());
}

TEST(GilbertTan, ContractionIsImmediate) {
  const GilbertTanResult r = gilbert_tan(mat1(0.5), HPolytope::abs_bounds(vec({1})));
  EXPECT_EQ(r.gamma_star, 0);
  EXPECT_TRUE(r.set.contains(vec({1}), 1e-12));
  EXPECT_FALSE(r.set.contains(vec({1.001}), 1e-9));
}

TEST(GilbertTan, IdentityIsInvariant) {
  const GilbertTanResult r = gilbert_tan(mat1(1.0), HPolytope::abs_bounds(vec({1})));
  EXPECT_EQ(r.gamma_star, 0);
  EXPECT_TRUE(r.set.contains(vec({-1}), 1e-12));
}

TEST(GilbertTan, DoubleIntegratorMatchesForwardSimulation) {
  DoubleIntegrator di;
  const MatrixXd A_K = di.sys.A + di.sys.B * di.K;
  const HPolytope base = HPolytope::abs_bounds(vec({1, 1}));
  const GilbertTanResult r = gilbert_tan(A_K, base);
  EXPECT_GT(r.gamma_star, 0);
  int compared = 0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      VectorXd x = vec({-1 + 2.0 * i / 49, -1 + 2.0 * j / 49});
      const VectorXd x0 = x;
      double margin = -INFINITY;
      for (int t = 0; t <= 100; ++t) {
        margin = std::max(margin, base.max_violation(x));
        x = A_K * x;
      }
      if (std::abs(margin) < 1e-9) continue;
      ++compared;
      EXPECT_EQ(r.set.contains(x0, 0.0), margin < 0) << x0.transpose();
    }
  }
  EXPECT_GT(compared, 2000);
}

TEST(GilbertTan, CapExceeded) {
  const double c = std::cos(0.05), s = std::sin(0.05);
  const MatrixXd A = 0.999 * (MatrixXd(2, 2) << c, -s, s, c).finished();
  try {
    gilbert_tan(A, HPolytope::abs_bounds(vec({1, 0.2})), 3);
    FAIL() << "expected finite-determination failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFiniteDetermination);
  }
}

TEST(GilbertTan, MonotoneInBase) {
  DoubleIntegrator di;
  const MatrixXd A_K = di.sys.A + di.sys.B * di.K;
  const GilbertTanResult small = gilbert_tan(A_K, HPolytope::abs_bounds(vec({0.5, 0.5})));
  const GilbertTanResult big = gilbert_tan(A_K, HPolytope::abs_bounds(vec({1, 1})));
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const VectorXd x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    if (small.set.contains(x)) {
      EXPECT_TRUE(big.set.contains(x));
    }
  }
}

TEST(Terminal, DroneSetIsInvariantAndAdmissible) {
  const auto& art = test::drone();
  EXPECT_LE(art.gamma_star, 200);
  const AugmentedDynamics aug = AugmentedDynamics::build(art.sys, art.ssp, art.K_tube);
  const auto center = chebyshev_center(art.terminal);
  ASSERT_TRUE(center.has_value());
  Rng rng(5);
  const auto pts = hit_and_run(art.terminal, *center, 10000, rng);
  const int n = art.n();
  for (const auto& z : pts) {
    const VectorXd next = aug.A_aug * z;
    EXPECT_TRUE(art.terminal.contains(next, 1e-9));
    const VectorXd x = z.head(n), th = z.tail(art.n_theta());
    EXPECT_TRUE(art.X_t.contains(x, 1e-9));
    const VectorXd u = art.ssp.M2 * th + art.K_tube * (x - art.ssp.M1 * th);
    EXPECT_TRUE(art.U_t.contains(u, 1e-9));
  }
}

TEST(Terminal, AdmissibleSteadyStatesInside) {
  const auto& art = test::drone();
  for (const auto& r : {vec({1, 0, 1.5, 0, 1.5, 0}), vec({-2, 0, -1.7, 0, 3, 0}),
                        vec({0, 0, 0, 0, 0, 0})}) {
    const VectorXd th = theta_for_reference(art.ssp, r);
    VectorXd z(9);
    z << art.ssp.M1 * th, th;
    EXPECT_TRUE(art.terminal.contains(z, 1e-9)) << r.transpose();
  }
}

TEST(Terminal, OutOfBoundsReferenceNotInside) {
  // p_y = 2 exceeds |p_y| <= 1.8.
  const auto& art = test::drone();
  const VectorXd th = theta_for_reference(art.ssp, vec({1, 0, 2, 0, 1.5, 0}));
  VectorXd z(9);
  z << art.ssp.M1 * th, th;
  EXPECT_FALSE(art.terminal.contains(z, 1e-9));
}

TEST(Terminal, EmptyTightenedSetFails) {
  const auto& art = test::drone();
  const HPolytope empty((MatrixXd(2, 6) << 1, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0).finished(),
                        vec({-1, -1}));
  EXPECT_THROW(build_terminal(art.sys, art.ssp, art.riccati.K_inf, empty, art.U_t, 0.01,
                              art.arena),
               Error);
}

}  // namespace
}  // namespace rssa
