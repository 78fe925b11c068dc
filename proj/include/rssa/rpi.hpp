#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rssa/polytope.hpp"

namespace rssa {

struct RpiOptions {
  double alpha_target = 0.05;
  /// Width given to zero-width disturbance components; defaults to
  /// 1e-6 * max(1, max half-width).
  std::optional<double> eta;
  int max_terms = 500;
};

/// Outer invariant approximation F = (1 - alpha)^-1 (+)_{i<s} A_K^i W_sum of
/// the minimal RPI set of e+ = A_K e + w, w in W.
struct RpiApprox {
  SupportSet F;
  int s = 1;
  double alpha = 0.0;
  Eigen::MatrixXd A_K;
  Box W;
  /// W with zero widths raised to eta. Equal to W when W has no flat
  /// directions or is identically zero.
  Box W_sum;
};

/// Smallest s with A_K^s W_sum contained in alpha W_sum, alpha <= alpha_target.
/// Throws kInvalidArgument when A_K is not Schur or W is not centered, and
/// kConvergenceFailure when s would exceed max_terms.
RpiApprox rakovic_approx(const Eigen::MatrixXd& A_K, const Box& W, const RpiOptions& options = {});

/// (1 - alpha)^-1 (+)_{i<s} A_K^i W_sum; {0} when W_sum is identically zero.
SupportSet rpi_support_set(const Eigen::MatrixXd& A_K, const Box& W_sum, int s, double alpha);

/// K F: every term map left-multiplied by K.
SupportSet image_set(const Eigen::MatrixXd& K, const SupportSet& F);

/// Coordinate groups that no term map couples (connected components of the
/// row-sharing graph of all maps, restricted to nonzero box directions).
std::vector<std::vector<int>> decoupled_blocks(const SupportSet& F);

/// Exact H-representation of F as a product of per-block facet sets. Every
/// block must have dimension <= 2 and be uncoupled from the rest (entries
/// above 1e-12); otherwise kStructure is thrown.
HPolytope block_facets(const SupportSet& F, const std::vector<std::vector<int>>& blocks);

/// Axis-aligned outer bounding box of F as an H-polytope.
HPolytope bounding_box_facets(const SupportSet& F);

}  // namespace rssa
