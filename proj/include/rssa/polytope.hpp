#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rssa {

/// Default geometric tolerance for membership and redundancy decisions.
inline constexpr double kGeomTol = 1e-9;

/// {x : normals * x <= offsets}. May be unbounded (a slab, say).
class HPolytope {
 public:
  HPolytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets);

  /// Same as the constructor but additionally requires 0 in the set, as
  /// state and input constraint sets must.
  static HPolytope constraint_set(Eigen::MatrixXd normals, Eigen::VectorXd offsets);

  /// Axis-aligned box lower <= x <= upper.
  static HPolytope box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  /// {x : |x_i| <= bound_i} for every finite entry of `bounds`; infinite
  /// entries leave that coordinate free.
  static HPolytope abs_bounds(const Eigen::VectorXd& bounds);

  int dim() const { return static_cast<int>(normals_.cols()); }
  int rows() const { return static_cast<int>(normals_.rows()); }
  const Eigen::MatrixXd& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }

  bool contains(const Eigen::VectorXd& x, double tol = kGeomTol) const;
  /// max_i (normals_i x - offsets_i); <= 0 inside.
  double max_violation(const Eigen::VectorXd& x) const;
  bool contains_origin() const { return offsets_.minCoeff() >= 0.0; }

  bool is_empty() const;
  bool is_bounded() const;

  HPolytope intersect(const HPolytope& other) const;

  /// Copy with exactly repeated rows (after unit-normalisation) removed.
  HPolytope without_duplicates(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd normals_;
  Eigen::VectorXd offsets_;
};

struct Box {
  Eigen::VectorXd center;
  Eigen::VectorXd half_widths;

  Box(Eigen::VectorXd c, Eigen::VectorXd hw);
  static Box centered(Eigen::VectorXd hw) {
    const auto n = hw.size();
    return Box(Eigen::VectorXd::Zero(n), std::move(hw));
  }

  int dim() const { return static_cast<int>(center.size()); }
  bool is_centered() const { return center.isZero(0.0); }
  double support(const Eigen::VectorXd& a) const;
  bool contains(const Eigen::VectorXd& x, double tol = kGeomTol) const;
};

struct SupportTerm {
  Eigen::MatrixXd map;  // d x k
  Box box;              // k-dimensional
};

/// scale * (map_1 box_1 (+) ... (+) map_t box_t), accessed through its
/// support function only.
class SupportSet {
 public:
  SupportSet(std::vector<SupportTerm> terms, double scale = 1.0);

  static SupportSet from_box(const Box& box);
  static SupportSet point(const Eigen::VectorXd& p);

  int dim() const { return dim_; }
  double scale() const { return scale_; }
  const std::vector<SupportTerm>& terms() const { return terms_; }

  double support(const Eigen::VectorXd& a) const;
  Eigen::VectorXd center() const;
  bool is_centered() const;

  /// Minkowski sum; the scale of each operand is folded into its maps.
  SupportSet minkowski_sum(const SupportSet& other) const;

  /// Bounding box half-widths about center() (support along +-e_i).
  Eigen::VectorXd bounding_half_widths() const;

 private:
  std::vector<SupportTerm> terms_;
  double scale_;
  int dim_;
};

/// Support of a SupportSet. Zero directions are rejected.
double support(const SupportSet& s, const Eigen::VectorXd& a);

/// LP-based support of an H-polytope; std::nullopt means +unbounded.
/// Throws kEmptySet when P is empty.
std::optional<double> support(const HPolytope& p, const Eigen::VectorXd& a);

/// P (-) S, tightening each row by the support of S along its normal.
/// Throws kEmptySet when the result is empty.
HPolytope pontryagin_diff(const HPolytope& p, const SupportSet& s);

/// lambda * P for lambda in (0, 1]; P must contain the origin.
HPolytope scale_set(const HPolytope& p, double lambda);

/// True iff normal'x <= offset + tol holds on all of P (one LP).
bool is_redundant(const Eigen::VectorXd& normal, double offset, const HPolytope& p,
                  double tol = kGeomTol);

/// Exact H-representation of a planar zonotope. Facets come out sorted by
/// the angle of their outward normal. A set that collapses to a segment is
/// returned as a (flat) four-row description; an all-zero generator set
/// throws kDegenerate.
HPolytope zonotope_facets_2d(const SupportSet& s);

/// Vertices of a bounded planar polytope, counter-clockwise, collinear
/// points removed.
std::vector<Eigen::Vector2d> polygon_vertices(const HPolytope& p, double tol = 1e-9);

}  // namespace rssa
