#include "rssa/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rssa/errors.hpp"
#include "rssa/lp.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

// ---------------------------------------------------------------- HPolytope

HPolytope::HPolytope(MatrixXd normals, VectorXd offsets)
    : normals_(std::move(normals)), offsets_(std::move(offsets)) {
  RSSA_REQUIRE(normals_.rows() == offsets_.size(), ErrorCode::kInvalidArgument,
               "HPolytope: normals and offsets disagree on the row count");
  RSSA_REQUIRE(normals_.rows() >= 1, ErrorCode::kInvalidArgument,
               "HPolytope: at least one halfspace is required");
  RSSA_REQUIRE(normals_.allFinite() && offsets_.allFinite(),
               ErrorCode::kInvalidArgument, "HPolytope: non-finite data");
  for (int i = 0; i < normals_.rows(); ++i) {
    RSSA_REQUIRE(normals_.row(i).squaredNorm() > 0.0, ErrorCode::kInvalidArgument,
                 "HPolytope: zero normal in row " + std::to_string(i));
  }
}

HPolytope HPolytope::constraint_set(MatrixXd normals, VectorXd offsets) {
  HPolytope p(std::move(normals), std::move(offsets));
  RSSA_REQUIRE(p.contains_origin(), ErrorCode::kInvalidArgument,
               "constraint set must contain the origin (all offsets >= 0)");
  return p;
}

HPolytope HPolytope::box(const VectorXd& lower, const VectorXd& upper) {
  RSSA_REQUIRE(lower.size() == upper.size(), ErrorCode::kInvalidArgument,
               "HPolytope::box: bound sizes differ");
  const auto n = lower.size();
  MatrixXd normals(2 * n, n);
  normals.topRows(n) = MatrixXd::Identity(n, n);
  normals.bottomRows(n) = -MatrixXd::Identity(n, n);
  VectorXd offsets(2 * n);
  offsets << upper, -lower;
  return HPolytope(std::move(normals), std::move(offsets));
}

HPolytope HPolytope::abs_bounds(const VectorXd& bounds) {
  const auto n = bounds.size();
  std::vector<int> idx;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(bounds(i))) idx.push_back(i);
  }
  RSSA_REQUIRE(!idx.empty(), ErrorCode::kInvalidArgument,
               "abs_bounds: at least one coordinate must be bounded");
  const auto k = static_cast<Eigen::Index>(idx.size());
  MatrixXd normals = MatrixXd::Zero(2 * k, n);
  VectorXd offsets(2 * k);
  for (Eigen::Index r = 0; r < k; ++r) {
    normals(2 * r, idx[r]) = 1.0;
    normals(2 * r + 1, idx[r]) = -1.0;
    offsets(2 * r) = bounds(idx[r]);
    offsets(2 * r + 1) = bounds(idx[r]);
  }
  return HPolytope(std::move(normals), std::move(offsets));
}

bool HPolytope::contains(const VectorXd& x, double tol) const {
  RSSA_REQUIRE(x.size() == dim(), ErrorCode::kInvalidArgument,
               "HPolytope::contains: dimension mismatch");
  return max_violation(x) <= tol;
}

double HPolytope::max_violation(const VectorXd& x) const {
  return (normals_ * x - offsets_).maxCoeff();
}

bool HPolytope::is_empty() const {
  return find_feasible_point(normals_, offsets_).status == LpStatus::kInfeasible;
}

bool HPolytope::is_bounded() const {
  for (int i = 0; i < dim(); ++i) {
    for (double sign : {1.0, -1.0}) {
      VectorXd e = VectorXd::Zero(dim());
      e(i) = sign;
      if (!support(*this, e).has_value()) return false;
    }
  }
  return true;
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
  RSSA_REQUIRE(dim() == other.dim(), ErrorCode::kInvalidArgument,
               "HPolytope::intersect: dimension mismatch");
  MatrixXd normals(rows() + other.rows(), dim());
  normals << normals_, other.normals_;
  VectorXd offsets(rows() + other.rows());
  offsets << offsets_, other.offsets_;
  return HPolytope(std::move(normals), std::move(offsets));
}

HPolytope HPolytope::without_duplicates(double tol) const {
  std::vector<int> keep;
  MatrixXd unit(rows(), dim());
  VectorXd unit_off(rows());
  for (int i = 0; i < rows(); ++i) {
    const double n = normals_.row(i).norm();
    unit.row(i) = normals_.row(i) / n;
    unit_off(i) = offsets_(i) / n;
  }
  for (int i = 0; i < rows(); ++i) {
    bool dup = false;
    for (int j : keep) {
      if ((unit.row(i) - unit.row(j)).cwiseAbs().maxCoeff() <= tol &&
          std::abs(unit_off(i) - unit_off(j)) <= tol * (1.0 + std::abs(unit_off(j)))) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  MatrixXd normals(keep.size(), dim());
  VectorXd offsets(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    normals.row(k) = normals_.row(keep[k]);
    offsets(k) = offsets_(keep[k]);
  }
  return HPolytope(std::move(normals), std::move(offsets));
}

// ---------------------------------------------------------------- Box

Box::Box(VectorXd c, VectorXd hw) : center(std::move(c)), half_widths(std::move(hw)) {
  RSSA_REQUIRE(center.size() == half_widths.size(), ErrorCode::kInvalidArgument,
               "Box: center and half_widths sizes differ");
  RSSA_REQUIRE(center.allFinite() && half_widths.allFinite(),
               ErrorCode::kInvalidArgument, "Box: non-finite data");
  RSSA_REQUIRE(half_widths.size() == 0 || half_widths.minCoeff() >= 0.0,
               ErrorCode::kInvalidArgument, "Box: negative half-width");
}

double Box::support(const VectorXd& a) const {
  return center.dot(a) + half_widths.dot(a.cwiseAbs());
}

bool Box::contains(const VectorXd& x, double tol) const {
  return ((x - center).cwiseAbs() - half_widths).maxCoeff() <= tol;
}

// ---------------------------------------------------------------- SupportSet

SupportSet::SupportSet(std::vector<SupportTerm> terms, double scale)
    : terms_(std::move(terms)), scale_(scale) {
  RSSA_REQUIRE(!terms_.empty(), ErrorCode::kInvalidArgument,
               "SupportSet: at least one term is required");
  RSSA_REQUIRE(std::isfinite(scale_) && scale_ > 0.0, ErrorCode::kInvalidArgument,
               "SupportSet: scale must be positive");
  dim_ = static_cast<int>(terms_.front().map.rows());
  for (const auto& t : terms_) {
    RSSA_REQUIRE(t.map.rows() == dim_, ErrorCode::kInvalidArgument,
                 "SupportSet: terms disagree on the ambient dimension");
    RSSA_REQUIRE(t.map.cols() == t.box.dim(), ErrorCode::kInvalidArgument,
                 "SupportSet: map columns do not match the box dimension");
  }
}

SupportSet SupportSet::from_box(const Box& box) {
  return SupportSet({SupportTerm{MatrixXd::Identity(box.dim(), box.dim()), box}});
}

SupportSet SupportSet::point(const VectorXd& p) {
  MatrixXd map = p;
  return SupportSet({SupportTerm{map, Box(VectorXd::Ones(1), VectorXd::Zero(1))}});
}

double SupportSet::support(const VectorXd& a) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    const VectorXd v = t.map.transpose() * a;
    total += t.box.support(v);
  }
  return scale_ * total;
}

VectorXd SupportSet::center() const {
  VectorXd c = VectorXd::Zero(dim_);
  for (const auto& t : terms_) c += t.map * t.box.center;
  return scale_ * c;
}

bool SupportSet::is_centered() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const SupportTerm& t) { return t.box.is_centered(); });
}

SupportSet SupportSet::minkowski_sum(const SupportSet& other) const {
  RSSA_REQUIRE(dim_ == other.dim_, ErrorCode::kInvalidArgument,
               "minkowski_sum: dimension mismatch");
  std::vector<SupportTerm> terms;
  terms.reserve(terms_.size() + other.terms_.size());
  for (const auto& t : terms_) terms.push_back({scale_ * t.map, t.box});
  for (const auto& t : other.terms_) terms.push_back({other.scale_ * t.map, t.box});
  return SupportSet(std::move(terms));
}

VectorXd SupportSet::bounding_half_widths() const {
  VectorXd hw(dim_);
  for (int i = 0; i < dim_; ++i) {
    VectorXd e = VectorXd::Zero(dim_);
    e(i) = 1.0;
    hw(i) = 0.5 * (support(e) + support(-e));
  }
  return hw;
}

// ---------------------------------------------------------------- operations

double support(const SupportSet& s, const VectorXd& a) {
  RSSA_REQUIRE(a.size() == s.dim(), ErrorCode::kInvalidArgument,
               "support: direction dimension mismatch");
  RSSA_REQUIRE(!a.isZero(0.0), ErrorCode::kInvalidArgument,
               "support: zero direction");
  return s.support(a);
}

std::optional<double> support(const HPolytope& p, const VectorXd& a) {
  RSSA_REQUIRE(a.size() == p.dim(), ErrorCode::kInvalidArgument,
               "support: direction dimension mismatch");
  RSSA_REQUIRE(!a.isZero(0.0), ErrorCode::kInvalidArgument,
               "support: zero direction");
  const LpResult lp = solve_lp(a, p.normals(), p.offsets(), LpSense::kMaximize);
  switch (lp.status) {
    case LpStatus::kOptimal: return lp.value;
    case LpStatus::kUnbounded: return std::nullopt;
    case LpStatus::kInfeasible: break;
  }
  throw Error(ErrorCode::kEmptySet, "support: polytope is empty");
}

HPolytope pontryagin_diff(const HPolytope& p, const SupportSet& s) {
  RSSA_REQUIRE(p.dim() == s.dim(), ErrorCode::kInvalidArgument,
               "pontryagin_diff: dimension mismatch");
  VectorXd offsets = p.offsets();
  for (int i = 0; i < p.rows(); ++i) {
    offsets(i) -= s.support(p.normals().row(i).transpose());
  }
  HPolytope out(p.normals(), std::move(offsets));
  if (out.is_empty()) {
    throw Error(ErrorCode::kEmptySet, "Pontryagin difference is empty");
  }
  return out;
}

HPolytope scale_set(const HPolytope& p, double lambda) {
  RSSA_REQUIRE(std::isfinite(lambda) && lambda > 0.0 && lambda <= 1.0,
               ErrorCode::kInvalidArgument, "scale_set: lambda must lie in (0, 1]");
  RSSA_REQUIRE(p.contains_origin(), ErrorCode::kInvalidArgument,
               "scale_set: set must contain the origin");
  return HPolytope(p.normals(), lambda * p.offsets());
}

bool is_redundant(const VectorXd& normal, double offset, const HPolytope& p, double tol) {
  const auto value = support(p, normal);
  return value.has_value() && *value <= offset + tol;
}

namespace {

struct Generator {
  Vector2d g;
  double angle;
};

}  // namespace

HPolytope zonotope_facets_2d(const SupportSet& s) {
  RSSA_REQUIRE(s.dim() == 2, ErrorCode::kInvalidArgument,
               "zonotope_facets_2d: set must be planar");
  const Vector2d c = s.center();
  std::vector<Generator> gens;
  double max_norm = 0.0;
  for (const auto& t : s.terms()) {
    for (int j = 0; j < t.map.cols(); ++j) {
      Vector2d g = s.scale() * t.box.half_widths(j) * t.map.col(j);
      max_norm = std::max(max_norm, g.norm());
      if (g.squaredNorm() == 0.0) continue;
      if (g.y() < 0.0 || (g.y() == 0.0 && g.x() < 0.0)) g = -g;
      gens.push_back({g, std::atan2(g.y(), g.x())});
    }
  }
  // Drop generators that vanish at working precision relative to the set.
  gens.erase(std::remove_if(gens.begin(), gens.end(),
                            [&](const Generator& x) { return x.g.norm() <= 1e-15 * max_norm; }),
             gens.end());
  if (gens.empty()) {
    throw Error(ErrorCode::kDegenerate, "zonotope_facets_2d: all generators are zero");
  }
  std::stable_sort(gens.begin(), gens.end(),
                   [](const Generator& a, const Generator& b) { return a.angle < b.angle; });

  // Merge parallel generators; the wrap-around pair (angle ~0 and ~pi) is
  // handled by comparing the last group with the first.
  std::vector<Vector2d> dirs;
  for (const auto& gen : gens) {
    if (!dirs.empty()) {
      const Vector2d& last = dirs.back();
      const double cross = last.x() * gen.g.y() - last.y() * gen.g.x();
      if (std::abs(cross) <= 1e-12 * last.norm() * gen.g.norm()) {
        dirs.back() += (last.dot(gen.g) >= 0.0 ? 1.0 : -1.0) * gen.g;
        continue;
      }
    }
    dirs.push_back(gen.g);
  }
  if (dirs.size() > 1) {
    const Vector2d& first = dirs.front();
    const Vector2d& last = dirs.back();
    const double cross = first.x() * last.y() - first.y() * last.x();
    if (std::abs(cross) <= 1e-12 * first.norm() * last.norm()) {
      dirs.front() += (first.dot(last) >= 0.0 ? 1.0 : -1.0) * last;
      dirs.pop_back();
    }
  }

  auto offset_along = [&](const Vector2d& n) {
    double h = n.dot(c);
    for (const auto& gen : gens) h += std::abs(n.dot(gen.g));
    return h;
  };

  std::vector<Vector2d> normals;
  if (dirs.size() == 1) {
    const Vector2d u = dirs.front().normalized();
    const Vector2d n(-u.y(), u.x());
    normals = {n, u, -n, -u};
    std::sort(normals.begin(), normals.end(), [](const Vector2d& a, const Vector2d& b) {
      return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
    });
  } else {
    for (const auto& g : dirs) {
      const Vector2d u = g.normalized();
      normals.emplace_back(-u.y(), u.x());
    }
    const std::size_t m = normals.size();
    for (std::size_t k = 0; k < m; ++k) normals.push_back(-normals[k]);
  }

  MatrixXd out_n(normals.size(), 2);
  VectorXd out_h(normals.size());
  for (std::size_t k = 0; k < normals.size(); ++k) {
    out_n.row(k) = normals[k].transpose();
    out_h(k) = offset_along(normals[k]);
  }
  return HPolytope(std::move(out_n), std::move(out_h));
}

std::vector<Vector2d> polygon_vertices(const HPolytope& p, double tol) {
  RSSA_REQUIRE(p.dim() == 2, ErrorCode::kInvalidArgument,
               "polygon_vertices: polytope must be planar");
  std::vector<Vector2d> pts;
  const auto& n = p.normals();
  const auto& h = p.offsets();
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = i + 1; j < p.rows(); ++j) {
      Eigen::Matrix2d m;
      m << n.row(i), n.row(j);
      const double det = m.determinant();
      if (std::abs(det) <= 1e-14 * n.row(i).norm() * n.row(j).norm()) continue;
      const Vector2d x = m.inverse() * Vector2d(h(i), h(j));
      if (p.max_violation(x) <= tol) pts.push_back(x);
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Vector2d& a, const Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  // Andrew's monotone chain; strict turns only so collinear points drop out.
  auto cross = [](const Vector2d& o, const Vector2d& a, const Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vector2d> unique;
  for (const auto& q : pts) {
    if (unique.empty() || (q - unique.back()).norm() > tol) unique.push_back(q);
  }
  if (unique.size() < 3) return unique;
  std::vector<Vector2d> hull(2 * unique.size());
  std::size_t k = 0;
  const double area_tol = 1e-18;
  for (const auto& q : unique) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= area_tol) --k;
    hull[k++] = q;
  }
  for (std::size_t i = unique.size() - 1, t = k + 1; i-- > 0;) {
    const auto& q = unique[i];
    while (k >= t && cross(hull[k - 2], hull[k - 1], q) <= area_tol) --k;
    hull[k++] = q;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace rssa
