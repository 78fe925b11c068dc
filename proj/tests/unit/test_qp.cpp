#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rssa/qp.hpp"
#include "rssa/sim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using test::vec;

QuadProgram random_qp(Rng& rng, int d, int q, bool feasible = true) {
  QuadProgram qp;
  qp.H = test::random_pd(d, rng, 0.05);
  qp.f = VectorXd(d);
  for (int j = 0; j < d; ++j) qp.f(j) = rng.uniform(-3, 3);
  qp.G = MatrixXd(q, d);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < d; ++j) qp.G(i, j) = rng.uniform(-1, 1);
  }
  VectorXd z0(d);
  for (int j = 0; j < d; ++j) z0(j) = rng.uniform(-1, 1);
  qp.h = qp.G * z0;
  for (int i = 0; i < q; ++i) qp.h(i) += feasible ? rng.uniform(0, 1) : 0.0;
  return qp;
}

TEST(Qp, ProjectionOntoHalfLine) {
  QuadProgram qp{test::mat1(2.0), vec({0}), test::mat1(-1.0), vec({-1})};
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.z_star(0), 1.0, 1e-12);
}

TEST(Qp, ActiveUpperBound) {
  QuadProgram qp{test::mat1(2.0), vec({-4}), test::mat1(1.0), vec({1})};
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.z_star(0), 1.0, 1e-12);
  EXPECT_GT(s.lambda(0), 0.0);
  ASSERT_EQ(s.working_set.size(), 1u);
}

TEST(Qp, RandomInstancesMatchExhaustiveOracle) {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform01() * 8);
    const int q = 1 + static_cast<int>(rng.uniform01() * 12);
    const QuadProgram qp = random_qp(rng, d, q);
    const QpSolution s = solve_qp(qp);
    ASSERT_EQ(s.status, QpStatus::kOptimal) << "trial " << trial;
    const auto o = oracle::brute_force_qp(qp.H, qp.f, qp.G, qp.h);
    ASSERT_TRUE(o.feasible) << "trial " << trial;
    EXPECT_LE((s.z_star - o.z).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
    EXPECT_TRUE(check_kkt(qp, s.z_star, s.lambda).passes()) << "trial " << trial;
  }
}

TEST(Qp, InfeasibleCarriesCertificate) {
  QuadProgram qp{MatrixXd::Identity(2, 2), vec({0, 0}),
                 (MatrixXd(2, 2) << 1, 1, -1, -1).finished(), vec({-1, -1})};
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kInfeasible);
  EXPECT_GE(s.farkas.minCoeff(), -1e-12);
  EXPECT_LE((qp.G.transpose() * s.farkas).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(qp.h.dot(s.farkas), 0.0);
}

TEST(Qp, WarmStartReachesSameOptimum) {
  Rng rng(8);
  ActiveSetQpSolver solver;
  for (int trial = 0; trial < 100; ++trial) {
    const QuadProgram qp = random_qp(rng, 6, 10);
    const QpSolution cold = solver.solve(qp);
    ASSERT_EQ(cold.status, QpStatus::kOptimal);
    const VectorXd start = cold.z_star;
    const QpSolution warm = solver.solve(qp, &start);
    ASSERT_EQ(warm.status, QpStatus::kOptimal);
    EXPECT_TRUE(warm.warm_started);
    EXPECT_LE((warm.z_star - cold.z_star).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(warm.iterations, cold.iterations + 1);
  }
}

TEST(Qp, NonFiniteDataRejected) {
  QuadProgram qp{test::mat1(1.0), vec({std::numeric_limits<double>::quiet_NaN()}), test::mat1(1.0), vec({1})};
  EXPECT_THROW(solve_qp(qp), Error);
  qp.f(0) = 0;
  qp.h(0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_qp(qp), Error);
}

TEST(Qp, SemidefiniteHessianIsRegularised) {
  // Only z0 is penalised; z1 is pinned by constraints.
  QuadProgram qp{(MatrixXd(2, 2) << 2, 0, 0, 0).finished(), vec({-2, -1}),
                 (MatrixXd(2, 2) << 0, 1, 0, -1).finished(), vec({3, 3})};
  const QpSolution s = solve_qp(qp);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_GT(s.regularization_applied, 0.0);
  EXPECT_NEAR(s.z_star(0), 1.0, 1e-6);
  EXPECT_NEAR(s.z_star(1), 3.0, 1e-6);
}

TEST(Qp, Deterministic) {
  Rng rng(99);
  const QuadProgram qp = random_qp(rng, 8, 12);
  const QpSolution a = solve_qp(qp);
  const QpSolution b = solve_qp(qp);
  EXPECT_EQ(a.z_star, b.z_star);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Qp, KktReportDetectsWrongPoint) {
  QuadProgram qp{test::mat1(2.0), vec({-4}), test::mat1(1.0), vec({1})};
  EXPECT_FALSE(check_kkt(qp, vec({0.5}), vec({0})).passes());
  EXPECT_TRUE(check_kkt(qp, vec({1}), vec({2})).passes());
}

}  // namespace
}  // namespace rssa
