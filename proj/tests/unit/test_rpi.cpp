#include <gtest/gtest.h>

#include <cmath>

#include "rssa/errors.hpp"
#include "rssa/rpi.hpp"
#include "rssa/sim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;
using test::mat1;
using test::vec;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an rssa::Error";
  return ErrorCode::kInvalidArgument;
}

/// Uniform point of scale * sum map_i box_i.
VectorXd draw(const SupportSet& F, Rng& rng) {
  VectorXd x = VectorXd::Zero(F.dim());
  for (const auto& t : F.terms()) {
    VectorXd s(t.box.dim());
    for (int k = 0; k < s.size(); ++k) {
      s(k) = t.box.center(k) + t.box.half_widths(k) * rng.uniform(-1, 1);
    }
    x += t.map * s;
  }
  return F.scale() * x;
}

/// Exact membership for a centred planar zonotope: its facet normals are the
/// perpendiculars of its generators.
double zonotope_margin(const SupportSet& F, const std::vector<int>& block, const VectorXd& x) {
  double worst = -INFINITY;
  const int n = F.dim();
  for (const auto& t : F.terms()) {
    for (int k = 0; k < t.map.cols(); ++k) {
      const Vector2d g(t.map(block[0], k), t.map(block[1], k));
      if (g.norm() == 0.0 || t.box.half_widths(k) == 0.0) continue;
      VectorXd a = VectorXd::Zero(n);
      a(block[0]) = -g.y() / g.norm();
      a(block[1]) = g.x() / g.norm();
      for (double sgn : {1.0, -1.0}) {
        worst = std::max(worst, sgn * a.dot(x) - F.support(sgn * a));
      }
    }
  }
  return worst;
}

TEST(Rakovic, ZeroClosedLoopGivesW) {
  const Box W = Box::centered(vec({0.3, 0.1}));
  const RpiApprox r = rakovic_approx(MatrixXd::Zero(2, 2), W);
  EXPECT_EQ(r.s, 1);
  EXPECT_EQ(r.alpha, 0.0);
  for (const auto& a : {vec({1, 0}), vec({0.3, -2}), vec({-1, 1})}) {
    EXPECT_DOUBLE_EQ(support(r.F, a), W.support(a));
  }
}

TEST(Rakovic, ScalarBracketsTrueMrpi) {
  const RpiApprox r = rakovic_approx(mat1(0.5), Box::centered(vec({1})), RpiOptions{0.05, {}, 500});
  for (double sgn : {1.0, -1.0}) {
    const double h = support(r.F, vec({sgn}));
    EXPECT_GE(h, 2.0 - 1e-12);
    EXPECT_LE(h, 2.0 / (1 - 0.05) + 1e-12);
  }
  EXPECT_LE(r.alpha, 0.05);
}

TEST(Rakovic, DroneWithinFactorOfTruncatedSum) {
  const auto& art = test::drone();
  const MatrixXd& A_K = art.rpi.A_K;
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    VectorXd a(6);
    for (int j = 0; j < 6; ++j) a(j) = rng.uniform(-1, 1);
    const double truth = oracle::truncated_rpi_support(A_K, art.W.half_widths, a, 10000);
    const double h = support(art.rpi.F, a);
    EXPECT_GE(h, truth * (1 - 1e-12));
    EXPECT_LE(h, 1.06 * truth);
  }
}

TEST(Rakovic, AlphaConditionHolds) {
  const auto& art = test::drone();
  const RpiApprox& r = art.rpi;
  MatrixXd P = MatrixXd::Identity(6, 6);
  for (int i = 0; i < r.s; ++i) P = r.A_K * P;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    VectorXd a(6);
    for (int j = 0; j < 6; ++j) a(j) = rng.uniform(-1, 1);
    EXPECT_LE(r.W_sum.support(P.transpose() * a), r.alpha * r.W_sum.support(a) + 1e-15);
  }
}

TEST(Rakovic, Errors) {
  EXPECT_EQ(code_of([] { rakovic_approx(mat1(1.0), Box::centered(vec({1}))); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { rakovic_approx(mat1(0.5), Box(vec({0.1}), vec({1}))); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] {
              rakovic_approx(mat1(0.999), Box::centered(vec({1})), RpiOptions{0.05, {}, 20});
            }),
            ErrorCode::kConvergenceFailure);
}

TEST(Rakovic, ZeroDisturbanceGivesPoint) {
  const auto& art = test::drone();
  const RpiApprox r = rakovic_approx(art.rpi.A_K, Box::centered(VectorXd::Zero(6)));
  for (int j = 0; j < 6; ++j) {
    VectorXd e = VectorXd::Zero(6);
    e(j) = 1;
    EXPECT_EQ(support(r.F, e), 0.0);
  }
}

TEST(Rakovic, MonotoneInDisturbance) {
  const auto& art = test::drone();
  const RpiApprox small = rakovic_approx(art.rpi.A_K, Box::centered(art.W.half_widths * 0.5));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    VectorXd a(6);
    for (int j = 0; j < 6; ++j) a(j) = rng.uniform(-1, 1);
    EXPECT_LE(support(small.F, a), support(art.rpi.F, a) + 1e-15);
  }
}

TEST(Rakovic, SymmetricAboutOrigin) {
  const auto& art = test::drone();
  EXPECT_TRUE(art.rpi.F.is_centered());
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    VectorXd a(6);
    for (int j = 0; j < 6; ++j) a(j) = rng.uniform(-1, 1);
    EXPECT_NEAR(support(art.rpi.F, a), support(art.rpi.F, -a), 1e-14);
  }
}

TEST(ImageSet, Examples) {
  const auto& art = test::drone();
  const SupportSet zero = image_set(MatrixXd::Zero(3, 6), art.rpi.F);
  EXPECT_EQ(support(zero, vec({1, 2, 3})), 0.0);
  const SupportSet same = image_set(MatrixXd::Identity(6, 6), art.rpi.F);
  const SupportSet KF = image_set(art.K_tube, art.rpi.F);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    VectorXd a(6), b(3);
    for (int j = 0; j < 6; ++j) a(j) = rng.uniform(-1, 1);
    for (int j = 0; j < 3; ++j) b(j) = rng.uniform(-1, 1);
    EXPECT_NEAR(support(same, a), support(art.rpi.F, a), 1e-14);
    EXPECT_NEAR(support(KF, b), support(art.rpi.F, art.K_tube.transpose() * b), 1e-14);
  }
}

TEST(BlockFacets, SingleGeneratorBox) {
  const SupportSet F = SupportSet::from_box(Box::centered(vec({0.5, 0.2})));
  const HPolytope h = block_facets(F, {{0, 1}});
  EXPECT_EQ(h.rows(), 4);
  EXPECT_TRUE(h.contains(vec({0.5, 0.2}), 1e-12));
  EXPECT_FALSE(h.contains(vec({0.5, 0.21}), 1e-9));
}

TEST(BlockFacets, DroneBlocksAgreeWithSupportOracle) {
  const auto& art = test::drone();
  const auto blocks = decoupled_blocks(art.rpi.F);
  ASSERT_EQ(blocks, (std::vector<std::vector<int>>{{0, 1}, {2, 3}, {4, 5}}));
  EXPECT_TRUE(art.facets_exact);
  const HPolytope H = block_facets(art.rpi.F, blocks);
  const VectorXd hw = art.rpi.F.bounding_half_widths();
  Rng rng(44);
  int inside = 0, compared = 0;
  for (int i = 0; i < 10000; ++i) {
    VectorXd x(6);
    for (int j = 0; j < 6; ++j) x(j) = hw(j) * rng.uniform(-1.05, 1.05);
    double margin = -INFINITY;
    for (const auto& b : blocks) margin = std::max(margin, zonotope_margin(art.rpi.F, b, x));
    if (std::abs(margin) < 1e-10) continue;
    ++compared;
    const bool truth = margin < 0;
    inside += truth;
    EXPECT_EQ(H.contains(x, 0.0), truth) << "margin " << margin;
  }
  EXPECT_GT(compared, 9900);
  EXPECT_GT(inside, 0);
}

TEST(BlockFacets, PointSetGivesZeroOffsets) {
  const SupportSet F = SupportSet::point(VectorXd::Zero(3));
  const HPolytope H = block_facets(F, decoupled_blocks(F));
  EXPECT_EQ(H.rows(), 6);
  EXPECT_EQ(H.offsets(), VectorXd::Zero(6));
}

TEST(BlockFacets, CoupledSetIsStructureError) {
  const SupportSet F({SupportTerm{(MatrixXd(3, 1) << 1, 1, 1).finished(),
                                  Box::centered(vec({1}))}});
  const auto blocks = decoupled_blocks(F);
  EXPECT_EQ(blocks.size(), 1u);
  EXPECT_EQ(code_of([&] { block_facets(F, blocks); }), ErrorCode::kStructure);
  EXPECT_EQ(code_of([&] { block_facets(F, {{0, 1}, {2}}); }), ErrorCode::kStructure);
}

TEST(BlockFacets, BoundingBoxIsOuter) {
  const auto& art = test::drone();
  const HPolytope B = bounding_box_facets(art.rpi.F);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(B.contains(draw(art.rpi.F, rng), 1e-12));
}

TEST(Invariance, DroneErrorDynamicsStayInF) {
  const auto& art = test::drone();
  const HPolytope& H = art.F_facets;
  Rng rng(101);
  int failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const VectorXd e = draw(art.rpi.F, rng);
    VectorXd w(6);
    for (int j = 0; j < 6; ++j) w(j) = art.W.half_widths(j) * rng.uniform(-1, 1);
    failures += !H.contains(art.rpi.A_K * e + w, 1e-9);
  }
  EXPECT_EQ(failures, 0);
}

}  // namespace
}  // namespace rssa
