#include "rssa/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rssa/errors.hpp"

namespace rssa {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Revised simplex for  min b^T y  s.t.  A y = c, y >= 0  with A = G^T.
// Column j < q of A is G.row(j)^T; columns q..q+d-1 are phase-one artificials
// s_k e_k with s_k = sign(c_k).
class DualStandardSimplex {
 public:
  DualStandardSimplex(const MatrixXd& G, const VectorXd& b, const VectorXd& c,
                      const LpOptions& options)
      : G_(G), b_(b), c_(c), q_(static_cast<int>(G.rows())),
        d_(static_cast<int>(G.cols())), options_(options) {
    art_sign_ = VectorXd::Ones(d_);
    for (int k = 0; k < d_; ++k) {
      if (c_(k) < 0.0) art_sign_(k) = -1.0;
    }
    basis_.resize(d_);
    for (int k = 0; k < d_; ++k) basis_[k] = q_ + k;
    in_basis_.assign(q_, 0);
    max_iter_ = options.max_iterations > 0 ? options.max_iterations
                                           : 50 * (q_ + d_) + 1000;
    rc_tol_ = options.tolerance * (1.0 + (q_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0));
    factor();
  }

  enum class Outcome { kOptimal, kUnbounded };

  // Phase one: minimise the sum of artificials. Returns the residual sum.
  double phase_one() {
    if (x_basic_.cwiseAbs().maxCoeff() > 0.0) run(/*phase=*/1);
    double sum = 0.0;
    for (int i = 0; i < d_; ++i) {
      if (basis_[i] >= q_) sum += std::max(x_basic_(i), 0.0);
    }
    return sum;
  }

  void drive_out_artificials() {
    for (int r = 0; r < d_; ++r) {
      if (basis_[r] < q_) continue;
      VectorXd unit = VectorXd::Zero(d_);
      unit(r) = 1.0;
      const VectorXd row = lu_.transpose().solve(unit);
      const VectorXd alpha = G_ * row;
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < q_; ++j) {
        if (in_basis_[j]) continue;
        if (std::abs(alpha(j)) > best_abs) {
          best_abs = std::abs(alpha(j));
          best = j;
        }
      }
      if (best >= 0) {
        in_basis_[best] = 1;
        basis_[r] = best;
        factor();
      }
    }
  }

  Outcome phase_two() { return run(/*phase=*/2); }

  // Simplex multipliers of the current basis under phase-two costs.
  VectorXd multipliers() const {
    VectorXd cb(d_);
    for (int i = 0; i < d_; ++i) cb(i) = basis_[i] < q_ ? b_(basis_[i]) : 0.0;
    return lu_.transpose().solve(cb);
  }

  // Ray of the dual standard form found when phase two is unbounded.
  const VectorXd& ray() const { return ray_; }
  int iterations() const { return iterations_; }

 private:
  VectorXd column(int j) const {
    if (j < q_) return G_.row(j).transpose();
    VectorXd e = VectorXd::Zero(d_);
    e(j - q_) = art_sign_(j - q_);
    return e;
  }

  void factor() {
    MatrixXd B(d_, d_);
    for (int i = 0; i < d_; ++i) B.col(i) = column(basis_[i]);
    lu_.compute(B);
    x_basic_ = lu_.solve(c_);
  }

  double cost(int j, int phase) const {
    if (phase == 1) return j < q_ ? 0.0 : 1.0;
    return j < q_ ? b_(j) : 0.0;
  }

  Outcome run(int phase) {
    bool bland = false;
    int degenerate_run = 0;
    while (true) {
      if (++iterations_ > max_iter_) {
        throw Error(ErrorCode::kMaxIter,
                    "LP simplex exceeded its iteration limit (degenerate-failure)");
      }
      VectorXd cb(d_);
      for (int i = 0; i < d_; ++i) cb(i) = cost(basis_[i], phase);
      const VectorXd pi = lu_.transpose().solve(cb);
      const VectorXd g_pi = G_ * pi;

      int entering = -1;
      double best = -rc_tol_;
      for (int j = 0; j < q_; ++j) {
        if (in_basis_[j]) continue;
        const double rc = (phase == 1 ? 0.0 : b_(j)) - g_pi(j);
        if (rc < -rc_tol_) {
          if (bland) {
            entering = j;
            break;
          }
          if (rc < best) {
            best = rc;
            entering = j;
          }
        }
      }
      if (entering < 0) return Outcome::kOptimal;

      const VectorXd dir = lu_.solve(column(entering));
      int leave = -1;
      double t_min = std::numeric_limits<double>::infinity();
      bool leave_is_art = false;
      for (int i = 0; i < d_; ++i) {
        const bool art = basis_[i] >= q_;
        double t;
        if (phase == 2 && art) {
          // Artificials left over from redundant equality rows must stay at 0.
          if (std::abs(dir(i)) <= options_.pivot_tolerance) continue;
          t = 0.0;
        } else {
          if (dir(i) <= options_.pivot_tolerance) continue;
          t = std::max(x_basic_(i), 0.0) / dir(i);
        }
        const bool tie = leave >= 0 && std::abs(t - t_min) <= 1e-14 * (1.0 + t_min);
        bool take = false;
        if (leave < 0 || t < t_min - 1e-14 * (1.0 + t_min)) {
          take = true;
        } else if (tie) {
          if (art && !leave_is_art) {
            take = true;
          } else if (art == leave_is_art && basis_[i] < basis_[leave]) {
            take = true;
          }
        }
        if (take) {
          leave = i;
          t_min = t;
          leave_is_art = art;
        }
      }
      if (leave < 0) {
        ray_ = VectorXd::Zero(q_);
        ray_(entering) = 1.0;
        for (int i = 0; i < d_; ++i) {
          if (basis_[i] < q_) ray_(basis_[i]) = std::max(-dir(i), 0.0);
        }
        return Outcome::kUnbounded;
      }

      if (t_min <= 1e-13) {
        if (++degenerate_run > options_.bland_after_degenerate) bland = true;
      } else {
        degenerate_run = 0;
      }
      if (basis_[leave] < q_) in_basis_[basis_[leave]] = 0;
      basis_[leave] = entering;
      in_basis_[entering] = 1;
      factor();
    }
  }

  const MatrixXd& G_;
  const VectorXd& b_;
  VectorXd c_;
  int q_;
  int d_;
  LpOptions options_;
  VectorXd art_sign_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  Eigen::PartialPivLU<MatrixXd> lu_;
  VectorXd x_basic_;
  VectorXd ray_;
  int max_iter_ = 0;
  int iterations_ = 0;
  double rc_tol_ = 0.0;
};

struct Normalized {
  MatrixXd G;
  VectorXd h;
  std::vector<int> source;  // original row index per kept row
  VectorXd scale;           // 1 / ||G_i|| per kept row
};

LpResult solve_normalized(const VectorXd& c, const Normalized& p,
                          const LpOptions& options, int original_rows);

}  // namespace

LpResult solve_lp(const VectorXd& c, const MatrixXd& G, const VectorXd& h,
                  LpSense sense, const LpOptions& options) {
  RSSA_REQUIRE(G.rows() == h.size(), ErrorCode::kInvalidArgument,
               "solve_lp: G and h row counts differ");
  RSSA_REQUIRE(G.cols() == c.size(), ErrorCode::kInvalidArgument,
               "solve_lp: G columns and c size differ");
  RSSA_REQUIRE(c.allFinite() && G.allFinite() && h.allFinite(),
               ErrorCode::kInvalidArgument, "solve_lp: non-finite input");

  const int q = static_cast<int>(G.rows());
  const int d = static_cast<int>(G.cols());
  const double max_norm = q > 0 ? G.rowwise().norm().maxCoeff() : 0.0;

  Normalized p;
  p.G.resize(q, d);
  p.h.resize(q);
  p.scale.resize(q);
  int kept = 0;
  for (int i = 0; i < q; ++i) {
    const double norm = G.row(i).norm();
    if (norm <= 1e-13 * std::max(1.0, max_norm)) {
      if (h(i) < -options.tolerance) {
        LpResult res;
        res.status = LpStatus::kInfeasible;
        res.farkas = VectorXd::Zero(q);
        res.farkas(i) = 1.0;
        return res;
      }
      continue;
    }
    p.G.row(kept) = G.row(i) / norm;
    p.h(kept) = h(i) / norm;
    p.scale(kept) = 1.0 / norm;
    p.source.push_back(i);
    ++kept;
  }
  p.G.conservativeResize(kept, d);
  p.h.conservativeResize(kept);
  p.scale.conservativeResize(kept);

  const VectorXd c_max = sense == LpSense::kMaximize ? c : VectorXd(-c);
  LpResult res = solve_normalized(c_max, p, options, q);
  if (res.status == LpStatus::kOptimal && sense == LpSense::kMinimize) {
    res.value = -res.value;
  }
  return res;
}

LpResult find_feasible_point(const MatrixXd& G, const VectorXd& h,
                             const LpOptions& options) {
  return solve_lp(VectorXd::Zero(G.cols()), G, h, LpSense::kMaximize, options);
}

namespace {

LpResult solve_normalized(const VectorXd& c, const Normalized& p,
                          const LpOptions& options, int original_rows) {
  const int q = static_cast<int>(p.G.rows());
  const int d = static_cast<int>(p.G.cols());
  LpResult res;

  if (d == 0) {
    res.status = LpStatus::kOptimal;
    res.x = VectorXd::Zero(0);
    for (int i = 0; i < q; ++i) {
      if (p.h(i) < -options.tolerance) {
        res.status = LpStatus::kInfeasible;
        res.farkas = VectorXd::Zero(original_rows);
        res.farkas(p.source[i]) = 1.0;
      }
    }
    return res;
  }

  DualStandardSimplex simplex(p.G, p.h, c, options);
  const double residual = simplex.phase_one();
  const double feas_tol = 1e-9 * (1.0 + c.cwiseAbs().maxCoeff());
  if (residual > feas_tol) {
    // c lies outside the cone of constraint normals: the primal is unbounded
    // unless it is infeasible, which the zero-objective problem decides.
    res.iterations = simplex.iterations();
    if (c.isZero(0.0)) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
    LpResult feas = solve_normalized(VectorXd::Zero(d), p, options, original_rows);
    feas.iterations += res.iterations;
    if (feas.status == LpStatus::kInfeasible) return feas;
    res.status = LpStatus::kUnbounded;
    res.iterations = feas.iterations;
    return res;
  }

  simplex.drive_out_artificials();
  const auto outcome = simplex.phase_two();
  res.iterations = simplex.iterations();
  if (outcome == DualStandardSimplex::Outcome::kUnbounded) {
    res.status = LpStatus::kInfeasible;
    res.farkas = VectorXd::Zero(original_rows);
    const VectorXd& ray = simplex.ray();
    for (int i = 0; i < q; ++i) res.farkas(p.source[i]) = ray(i) * p.scale(i);
    return res;
  }
  res.status = LpStatus::kOptimal;
  res.x = simplex.multipliers();
  res.value = c.dot(res.x);
  return res;
}

}  // namespace

}  // namespace rssa
