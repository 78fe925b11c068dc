#include "rssa/rpi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rssa/errors.hpp"
#include "rssa/lti.hpp"

namespace rssa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kCouplingTol = 1e-12;

}  // namespace

RpiApprox rakovic_approx(const MatrixXd& A_K, const Box& W, const RpiOptions& options) {
  const int n = static_cast<int>(A_K.rows());
  RSSA_REQUIRE(A_K.cols() == n && W.dim() == n, ErrorCode::kInvalidArgument,
               "rakovic_approx: dimension mismatch");
  RSSA_REQUIRE(options.alpha_target > 0.0 && options.alpha_target < 1.0,
               ErrorCode::kInvalidArgument, "rakovic_approx: alpha_target must lie in (0, 1)");
  RSSA_REQUIRE(W.is_centered(), ErrorCode::kInvalidArgument,
               "rakovic_approx: disturbance box must be centered at the origin");
  RSSA_REQUIRE(is_schur(A_K), ErrorCode::kInvalidArgument,
               "rakovic_approx: closed-loop error matrix is not Schur");

  RpiApprox out{SupportSet::point(VectorXd::Zero(n)), 1, 0.0, A_K, W, W};
  const double max_hw = W.half_widths.maxCoeff();
  if (max_hw == 0.0) return out;

  const double eta = options.eta.value_or(1e-6 * std::max(1.0, max_hw));
  RSSA_REQUIRE(eta > 0.0, ErrorCode::kInvalidArgument, "rakovic_approx: eta must be positive");
  VectorXd hw = W.half_widths;
  for (int i = 0; i < n; ++i) {
    if (hw(i) == 0.0) hw(i) = eta;
  }
  const Box w_sum = Box::centered(hw);

  // W_sum is a centered box, so containment reduces to the 2n axis supports,
  // and by symmetry to n of them.
  MatrixXd power = A_K;
  int s = 1;
  double alpha = 0.0;
  while (true) {
    alpha = 0.0;
    for (int j = 0; j < n; ++j) {
      const double h = hw.dot(power.row(j).transpose().cwiseAbs());
      alpha = std::max(alpha, h / hw(j));
    }
    if (alpha <= options.alpha_target) break;
    if (++s > options.max_terms) {
      throw Error(ErrorCode::kConvergenceFailure,
                  "rakovic_approx: no admissible s up to " + std::to_string(options.max_terms));
    }
    power = A_K * power;
  }

  out.F = rpi_support_set(A_K, w_sum, s, alpha);
  out.s = s;
  out.alpha = alpha;
  out.W_sum = w_sum;
  return out;
}

SupportSet rpi_support_set(const MatrixXd& A_K, const Box& W_sum, int s, double alpha) {
  const int n = static_cast<int>(A_K.rows());
  RSSA_REQUIRE(A_K.cols() == n && W_sum.dim() == n && s >= 1 && alpha >= 0.0 && alpha < 1.0,
               ErrorCode::kInvalidArgument, "rpi_support_set: invalid arguments");
  if (W_sum.half_widths.maxCoeff() == 0.0) return SupportSet::point(VectorXd::Zero(n));
  std::vector<SupportTerm> terms;
  terms.reserve(s);
  MatrixXd map = MatrixXd::Identity(n, n);
  for (int i = 0; i < s; ++i) {
    terms.push_back({map, W_sum});
    map = A_K * map;
  }
  return SupportSet(std::move(terms), 1.0 / (1.0 - alpha));
}

SupportSet image_set(const MatrixXd& K, const SupportSet& F) {
  RSSA_REQUIRE(K.cols() == F.dim(), ErrorCode::kInvalidArgument,
               "image_set: dimension mismatch");
  std::vector<SupportTerm> terms;
  terms.reserve(F.terms().size());
  for (const auto& t : F.terms()) terms.push_back({K * t.map, t.box});
  return SupportSet(std::move(terms), F.scale());
}

std::vector<std::vector<int>> decoupled_blocks(const SupportSet& F) {
  const int n = F.dim();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& t : F.terms()) {
    for (int k = 0; k < t.map.cols(); ++k) {
      if (t.box.half_widths(k) == 0.0 && t.box.center(k) == 0.0) continue;
      int first = -1;
      for (int i = 0; i < n; ++i) {
        if (std::abs(t.map(i, k)) <= kCouplingTol) continue;
        if (first < 0) {
          first = i;
        } else {
          parent[find(i)] = find(first);
        }
      }
    }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

HPolytope block_facets(const SupportSet& F, const std::vector<std::vector<int>>& blocks) {
  const int n = F.dim();
  std::vector<int> owner(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    RSSA_REQUIRE(!blocks[b].empty() && blocks[b].size() <= 2, ErrorCode::kStructure,
                 "block_facets: blocks must have dimension 1 or 2");
    for (int i : blocks[b]) {
      RSSA_REQUIRE(i >= 0 && i < n && owner[i] < 0, ErrorCode::kStructure,
                   "block_facets: blocks must partition the coordinates");
      owner[i] = static_cast<int>(b);
    }
  }
  RSSA_REQUIRE(std::find(owner.begin(), owner.end(), -1) == owner.end(), ErrorCode::kStructure,
               "block_facets: blocks must cover every coordinate");
  for (const auto& t : F.terms()) {
    for (int k = 0; k < t.map.cols(); ++k) {
      if (t.box.half_widths(k) == 0.0 && t.box.center(k) == 0.0) continue;
      int seen = -1;
      for (int i = 0; i < n; ++i) {
        if (std::abs(t.map(i, k)) <= kCouplingTol) continue;
        if (seen >= 0 && owner[i] != seen) {
          throw Error(ErrorCode::kStructure, "block_facets: set is coupled across blocks");
        }
        seen = owner[i];
      }
    }
  }

  std::vector<VectorXd> normals;
  std::vector<double> offsets;
  auto add = [&](const VectorXd& a, double b) {
    normals.push_back(a);
    offsets.push_back(b);
  };
  for (const auto& block : blocks) {
    const int k = static_cast<int>(block.size());
    std::vector<SupportTerm> sub;
    sub.reserve(F.terms().size());
    for (const auto& t : F.terms()) {
      MatrixXd rows(k, t.map.cols());
      for (int r = 0; r < k; ++r) rows.row(r) = t.map.row(block[r]);
      sub.push_back({rows, t.box});
    }
    const SupportSet part(std::move(sub), F.scale());
    if (k == 1) {
      VectorXd e = VectorXd::Zero(n);
      e(block[0]) = 1.0;
      add(e, part.support(VectorXd::Ones(1)));
      add(-e, part.support(-VectorXd::Ones(1)));
      continue;
    }
    try {
      const HPolytope facets = zonotope_facets_2d(part);
      for (int r = 0; r < facets.rows(); ++r) {
        VectorXd a = VectorXd::Zero(n);
        a(block[0]) = facets.normals()(r, 0);
        a(block[1]) = facets.normals()(r, 1);
        add(a, facets.offsets()(r));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      const VectorXd c = part.center();
      for (int r = 0; r < k; ++r) {
        VectorXd a = VectorXd::Zero(n);
        a(block[r]) = 1.0;
        add(a, c(r));
        add(-a, -c(r));
      }
    }
  }
  MatrixXd N(normals.size(), n);
  VectorXd h(offsets.size());
  for (std::size_t r = 0; r < normals.size(); ++r) {
    N.row(r) = normals[r].transpose();
    h(r) = offsets[r];
  }
  return HPolytope(std::move(N), std::move(h));
}

HPolytope bounding_box_facets(const SupportSet& F) {
  const int n = F.dim();
  MatrixXd N(2 * n, n);
  VectorXd h(2 * n);
  N.topRows(n) = MatrixXd::Identity(n, n);
  N.bottomRows(n) = -MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(n);
    e(i) = 1.0;
    h(i) = F.support(e);
    h(n + i) = F.support(-e);
  }
  return HPolytope(std::move(N), std::move(h));
}

}  // namespace rssa
