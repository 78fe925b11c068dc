#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "rssa/errors.hpp"
#include "rssa/polytope.hpp"
#include "rssa/sim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace rssa {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;
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

SupportSet zonotope(const std::vector<Vector2d>& gens) {
  MatrixXd G(2, static_cast<int>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) G.col(static_cast<int>(j)) = gens[j];
  return SupportSet({SupportTerm{G, Box::centered(VectorXd::Ones(G.cols()))}});
}

TEST(Support, BoxSumOfWeightedAbs) {
  const Box b = Box::centered(vec({1, 1}));
  EXPECT_DOUBLE_EQ(b.support(vec({1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(support(SupportSet::from_box(b), vec({1, 1})), 2.0);
}

TEST(Support, NegativeDirectionOneDimensional) {
  EXPECT_NEAR(support(SupportSet::from_box(Box::centered(vec({0.02}))), vec({-3})), 0.06, 1e-15);
}

TEST(Support, IdentityMapMatchesBox) {
  Rng rng(3);
  const Box b(vec({0.1, -0.2, 0.3}), vec({0.5, 1.5, 0.25}));
  const SupportSet s({SupportTerm{MatrixXd::Identity(3, 3), b}});
  for (int i = 0; i < 100; ++i) {
    const VectorXd a = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    EXPECT_NEAR(support(s, a), b.support(a), 1e-14);
  }
}

TEST(Support, ZeroDirectionRejected) {
  const SupportSet s = SupportSet::from_box(Box::centered(vec({1, 1})));
  EXPECT_EQ(code_of([&] { support(s, VectorXd::Zero(2)); }), ErrorCode::kInvalidArgument);
}

TEST(Support, HPolytopeBoxAndUnbounded) {
  const HPolytope box = HPolytope::abs_bounds(vec({1, 2}));
  EXPECT_NEAR(*support(box, vec({1, 1})), 3.0, 1e-12);
  const HPolytope slab = HPolytope::abs_bounds(vec({INFINITY, 1.8}));
  EXPECT_FALSE(support(slab, vec({1, 0})).has_value());
  EXPECT_NEAR(*support(slab, vec({0, -1})), 1.8, 1e-12);
}

TEST(Pontryagin, UnitBoxMinusSmallBox) {
  const HPolytope p = HPolytope::abs_bounds(vec({1, 1}));
  const HPolytope d = pontryagin_diff(p, SupportSet::from_box(Box::centered(vec({0.2, 0.2}))));
  for (int i = 0; i < d.rows(); ++i) EXPECT_NEAR(d.offsets()(i), 0.8, 1e-15);
  EXPECT_TRUE(d.normals().isApprox(p.normals()));
}

TEST(Pontryagin, SlabTightensOnlyItsRows) {
  const HPolytope slab = HPolytope::abs_bounds(vec({INFINITY, 1.8, INFINITY}));
  const SupportSet s({SupportTerm{(MatrixXd(3, 2) << 1, 0, 0.5, 1, 0, 0).finished(),
                                  Box::centered(vec({0.3, 0.1}))}});
  const HPolytope d = pontryagin_diff(slab, s);
  ASSERT_EQ(d.rows(), 2);
  const double h = support(s, vec({0, 1, 0}));
  EXPECT_NEAR(h, 0.25, 1e-15);
  EXPECT_NEAR(d.offsets()(0), 1.8 - h, 1e-15);
  EXPECT_NEAR(d.offsets()(1), 1.8 - h, 1e-15);
}

TEST(Pontryagin, OverTighteningIsEmpty) {
  const HPolytope p = HPolytope::abs_bounds(vec({0.1}));
  EXPECT_EQ(code_of([&] { pontryagin_diff(p, SupportSet::from_box(Box::centered(vec({0.2})))); }),
            ErrorCode::kEmptySet);
}

TEST(Pontryagin, DifferencePlusSubtrahendStaysInside) {
  Rng rng(11);
  const HPolytope P(
      (MatrixXd(5, 2) << 1, 0, -1, 0, 0, 1, 0, -1, 1, 1).finished(), vec({2, 2, 1.5, 1.5, 2.5}));
  const SupportSet S = zonotope({Vector2d(0.3, 0.1), Vector2d(-0.1, 0.2)});
  const HPolytope D = pontryagin_diff(P, S);
  const Vector2d lo(-2, -1.5), hi(2, 1.5);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const VectorXd x = vec({rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y())});
    if (!D.contains(x)) continue;
    const VectorXd s = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const VectorXd y = x + S.terms()[0].map * s;
    EXPECT_TRUE(P.contains(y, 1e-12));
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(ScaleSet, Examples) {
  const HPolytope p(MatrixXd::Ones(1, 1), vec({2}));
  const HPolytope same = scale_set(p, 1.0);
  EXPECT_EQ(same.offsets(), p.offsets());
  EXPECT_DOUBLE_EQ(scale_set(p, 0.5).offsets()(0), 1.0);
  const double h = 0.012;
  const HPolytope u = HPolytope::abs_bounds(vec({0.05 - h}));
  const HPolytope s = scale_set(u, 0.99);
  EXPECT_NEAR(s.offsets()(0), 0.99 * (0.05 - h), 1e-17);
}

TEST(ScaleSet, Errors) {
  const HPolytope p(MatrixXd::Ones(1, 1), vec({2}));
  EXPECT_EQ(code_of([&] { scale_set(p, 0.0); }), ErrorCode::kInvalidArgument);
  const HPolytope off(MatrixXd::Ones(1, 1), vec({-1}));
  EXPECT_EQ(code_of([&] { scale_set(off, 0.5); }), ErrorCode::kInvalidArgument);
}

TEST(ScaleSet, ScaledSetIsSubset) {
  Rng rng(5);
  const HPolytope p(
      (MatrixXd(4, 2) << 1, 0.5, -1, 0.2, 0.1, 1, -0.3, -1).finished(), vec({1, 2, 1.5, 0.7}));
  const HPolytope s = scale_set(p, 0.6);
  for (int i = 0; i < 2000; ++i) {
    const VectorXd x = vec({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    if (s.contains(x)) {
      EXPECT_TRUE(p.contains(x));
    }
  }
}

TEST(Contains, Examples) {
  const HPolytope X = HPolytope::abs_bounds(vec({INFINITY, INFINITY, 1.8}));
  EXPECT_TRUE(X.contains(VectorXd::Zero(3)));
  EXPECT_FALSE(X.contains(vec({0, 0, 1.81}), 1e-9));
  EXPECT_TRUE(X.contains(vec({0, 0, 1.8}), 1e-9));
}

TEST(IsRedundant, Examples) {
  const HPolytope p(MatrixXd::Ones(1, 1), vec({1}));
  EXPECT_TRUE(is_redundant(vec({1}), 1.0, p));
  EXPECT_FALSE(is_redundant(vec({1}), 0.5, p));
  EXPECT_TRUE(is_redundant(vec({1}), 2.0, p));
  EXPECT_FALSE(is_redundant(vec({-1}), 5.0, p));  // unbounded below
}

TEST(Zonotope2d, SingleGeneratorBox) {
  const SupportSet s = SupportSet::from_box(Box::centered(vec({0.5, 0.25})));
  const HPolytope h = zonotope_facets_2d(s);
  EXPECT_EQ(h.rows(), 4);
  for (const auto& v : {vec({0.5, 0.25}), vec({-0.5, 0.25}), vec({0.5, -0.25})}) {
    EXPECT_TRUE(h.contains(v, 1e-12));
  }
  EXPECT_FALSE(h.contains(vec({0.51, 0}), 1e-9));
}

TEST(Zonotope2d, UnitSquare) {
  const auto verts = polygon_vertices(zonotope_facets_2d(zonotope({Vector2d(1, 0), Vector2d(0, 1)})));
  const std::vector<Vector2d> square{Vector2d(1, 1), Vector2d(-1, 1), Vector2d(-1, -1),
                                     Vector2d(1, -1)};
  EXPECT_LE(oracle::vertex_mismatch(verts, square), 1e-12);
}

TEST(Zonotope2d, TwoSkewGeneratorsGiveParallelogram) {
  const std::vector<Vector2d> gens{Vector2d(1, 0), Vector2d(1, 1)};
  const auto verts = polygon_vertices(zonotope_facets_2d(zonotope(gens)));
  const auto hull = oracle::zonotope_hull(Vector2d::Zero(), gens);
  EXPECT_EQ(verts.size(), 4u);
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_LE(oracle::vertex_mismatch(verts, hull), 1e-9);
}

TEST(Zonotope2d, ThreeGeneratorsGiveHexagon) {
  const std::vector<Vector2d> gens{Vector2d(1, 0), Vector2d(1, 1), Vector2d(0, 1)};
  const auto verts = polygon_vertices(zonotope_facets_2d(zonotope(gens)));
  const auto hull = oracle::zonotope_hull(Vector2d::Zero(), gens);
  EXPECT_EQ(verts.size(), 6u);
  EXPECT_EQ(hull.size(), 6u);
  EXPECT_LE(oracle::vertex_mismatch(verts, hull), 1e-9);
}

TEST(Zonotope2d, RandomGeneratorsMatchHull) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 2 + static_cast<int>(rng.uniform01() * 9);
    std::vector<Vector2d> gens;
    for (int j = 0; j < g; ++j) gens.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vector2d c(rng.uniform(-1, 1), rng.uniform(-1, 1));
    MatrixXd G(2, g);
    for (int j = 0; j < g; ++j) G.col(j) = gens[j];
    const SupportSet s({SupportTerm{G, Box::centered(VectorXd::Ones(g))},
                        SupportTerm{MatrixXd::Identity(2, 2), Box(c, VectorXd::Zero(2))}});
    const auto verts = polygon_vertices(zonotope_facets_2d(s));
    const auto hull = oracle::zonotope_hull(c, gens);
    EXPECT_LE(oracle::vertex_mismatch(verts, hull), 1e-9) << "trial " << trial << " g=" << g;
  }
}

TEST(Zonotope2d, AllZeroGeneratorsDegenerate) {
  const SupportSet s({SupportTerm{MatrixXd::Zero(2, 3), Box::centered(VectorXd::Ones(3))}});
  EXPECT_EQ(code_of([&] { zonotope_facets_2d(s); }), ErrorCode::kDegenerate);
}

TEST(SupportProperties, HomogeneityAndAdditivity) {
  Rng rng(9);
  const SupportSet A({SupportTerm{(MatrixXd(3, 2) << 1, 0.2, -0.4, 1, 0.3, 0.3).finished(),
                                  Box::centered(vec({0.5, 0.2}))}});
  const SupportSet B = SupportSet::from_box(Box::centered(vec({0.1, 0.4, 0.7})));
  const SupportSet AB = A.minkowski_sum(B);
  for (int i = 0; i < 1000; ++i) {
    const VectorXd a = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double t = rng.uniform(0.01, 10);
    EXPECT_NEAR(support(A, t * a), t * support(A, a), 1e-12 * t);
    EXPECT_NEAR(support(AB, a), support(A, a) + support(B, a), 1e-12);
  }
}

TEST(SupportProperties, ScaledSetScalesSupport) {
  const SupportSet base({SupportTerm{MatrixXd::Identity(2, 2), Box::centered(vec({1, 2}))}}, 3.0);
  EXPECT_NEAR(support(base, vec({1, 1})), 9.0, 1e-15);
  EXPECT_EQ(base.bounding_half_widths(), vec({3, 6}));
}

}  // namespace
}  // namespace rssa
