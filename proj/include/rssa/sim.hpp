#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rssa/mpc.hpp"

namespace rssa {

/// splitmix64 finaliser; derives independent per-run seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// mt19937_64 with a fixed, platform-independent real mapping (53-bit).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

struct DisturbanceSpec {
  double beta = 0.0;
  /// State coordinates that receive an independent uniform [-beta, beta] draw.
  std::vector<int> active;
  std::uint64_t seed = 0;

  Eigen::VectorXd sample(Rng& rng, int n) const;
};

struct SimStep {
  Eigen::VectorXd x;
  Eigen::VectorXd x0_star;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd u;
  Eigen::VectorXd w;
  double cost = 0.0;
  bool feasible = true;
  int iterations = 0;
  double solve_ms = 0.0;
  bool candidate_checked = false;
  bool candidate_feasible = true;
  double candidate_violation = 0.0;
};

/// Steps t = 0..T. x(t+1) = A x(t) + B u(t) + w(t) for t < T; w(T) is zero.
struct SimTrace {
  std::vector<SimStep> steps;
  /// A step after the first was infeasible; steps ends at that step.
  bool truncated = false;
  std::string failure;

  int horizon() const { return static_cast<int>(steps.size()) - 1; }
};

struct Reference {
  Eigen::VectorXd r;
  Eigen::VectorXd x_des;
  Eigen::VectorXd u_des;
};

/// Closed loop from x0. Throws InfeasibleError when the first QP is
/// infeasible; later failures truncate the trace instead.
SimTrace simulate(const ControllerArtifacts& art, const Eigen::VectorXd& x0, const Reference& ref,
                  int T, const DisturbanceSpec& dist, const QpSettings& qp_settings = {});

/// (1/T) sum_{t=0}^{T} |x(t) - x_ref|^2 over the T + 1 recorded states.
double performance_index(const SimTrace& trace, const Eigen::VectorXd& x_ref);

/// Steady state M1 theta_r for the least-squares theta_r with L theta_r = r.
Eigen::VectorXd reference_state(const SteadyStateParam& ssp, const Eigen::VectorXd& r);

struct MonteCarloProtocol {
  int runs = 1;
  double beta = 0.0;
  std::vector<int> disturbance_active;
  /// Initial states are drawn uniformly from [x0_lo, x0_hi] (equal bounds
  /// pin a coordinate).
  Eigen::VectorXd x0_lo;
  Eigen::VectorXd x0_hi;
  /// Coordinates of x0 reported as sigma columns.
  std::vector<int> sigma_indices;
  int T = 150;
  std::uint64_t master_seed = 0;
  int threads = 1;
  Reference ref;
};

struct MonteCarloRun {
  int run_id = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd x0;
  Eigen::VectorXd x_final;
  double pi = 0.0;
  /// Largest realized violation of X and U over the run (<= 0 inside).
  double max_violation = 0.0;
  bool initial_infeasible = false;
  bool mid_run_infeasible = false;
  int candidate_failures = 0;
  double max_candidate_violation = 0.0;
  int tube_failures = 0;
  int steps_completed = 0;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  std::string failure;
};

struct MonteCarloSummary {
  std::vector<MonteCarloRun> runs;
  int initial_infeasible = 0;
  int mid_run_infeasible = 0;
  int candidate_failures = 0;
  int tube_failures = 0;
  double max_violation = 0.0;
  double pi_mean = 0.0;
  double pi_std = 0.0;
  /// Per time step over completed runs: (T + 1) x n.
  Eigen::MatrixXd state_mean;
  Eigen::MatrixXd state_std;
  int completed_runs = 0;
};

/// Independent runs over shared artifacts. Results do not depend on the
/// thread count.
MonteCarloSummary monte_carlo(const ControllerArtifacts& art, const MonteCarloProtocol& protocol);

struct RoaGrid {
  int axis_x = 0;
  int axis_y = 2;
  double x_lo = -3.0;
  double x_hi = 3.0;
  int nx = 61;
  double y_lo = -2.5;
  double y_hi = 2.5;
  int ny = 51;
  /// Values of the remaining coordinates.
  Eigen::VectorXd base_state;
  int threads = 1;
};

struct RoaPoint {
  double x = 0.0;
  double y = 0.0;
  bool feasible_rssa = false;
  bool feasible_base = false;
};

std::vector<RoaPoint> roa_scan(const ControllerArtifacts& art_rssa,
                               const ControllerArtifacts& art_base, const RoaGrid& grid);

}  // namespace rssa
