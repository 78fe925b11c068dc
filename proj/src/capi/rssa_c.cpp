#include "rssa/rssa.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rssa/artifact_io.hpp"
#include "rssa/audit.hpp"
#include "rssa/config.hpp"
#include "rssa/errors.hpp"
#include "rssa/mpc.hpp"
#include "rssa/sim.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

struct rssa_artifact {
  rssa::StoredArtifact stored;
  rssa::ExperimentConfig cfg;
};

struct rssa_controller {
  const rssa_artifact* art;
  rssa::MpcSolver solver;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

rssa_status status_of(rssa::ErrorCode code) {
  using rssa::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return RSSA_ERR_INVALID_ARGUMENT;
    case ErrorCode::kEmptySet: return RSSA_ERR_EMPTY_SET;
    case ErrorCode::kConvergenceFailure: return RSSA_ERR_CONVERGENCE;
    case ErrorCode::kNoSteadyState: return RSSA_ERR_NO_STEADY_STATE;
    case ErrorCode::kStructure: return RSSA_ERR_STRUCTURE;
    case ErrorCode::kFiniteDetermination: return RSSA_ERR_FINITE_DETERMINATION;
    case ErrorCode::kInfeasible: return RSSA_ERR_INFEASIBLE;
    case ErrorCode::kMaxIter: return RSSA_ERR_MAX_ITER;
    case ErrorCode::kConditionViolated: return RSSA_ERR_CONDITION_VIOLATED;
    case ErrorCode::kConfig: return RSSA_ERR_CONFIG;
    case ErrorCode::kIo: return RSSA_ERR_IO;
    case ErrorCode::kDegenerate: return RSSA_ERR_DEGENERATE;
  }
  return RSSA_ERR_INTERNAL;
}

rssa_status set_error(rssa_status status, std::string message, std::string stage = {}) {
  g_error = std::move(message);
  g_stage = std::move(stage);
  return status;
}

template <typename Fn>
rssa_status guard(Fn&& fn) {
  try {
    g_error.clear();
    g_stage.clear();
    return fn();
  } catch (const rssa::Error& e) {
    return set_error(status_of(e.code()), e.what(), e.stage());
  } catch (const json::exception& e) {
    return set_error(RSSA_ERR_CONFIG, std::string("json: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RSSA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RSSA_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(RSSA_ERR_INTERNAL, "unknown exception");
  }
}

#define RSSA_ARG(cond, msg) \
  if (!(cond)) return set_error(RSSA_ERR_INVALID_ARGUMENT, (msg))

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const json& j) {
  if (out) *out = dup_string(j.dump(2));
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw rssa::Error(rssa::ErrorCode::kInvalidArgument, "options: expected a JSON object");
  return j;
}

rssa_artifact* wrap(rssa::StoredArtifact stored) {
  rssa::ExperimentConfig cfg = rssa::parse_config(stored.config);
  return new rssa_artifact{std::move(stored), std::move(cfg)};
}

VectorXd view(const double* p, int n) {
  return Eigen::Map<const VectorXd>(p, n);
}

/// Shortest round-trip formatting; identical runs give identical bytes.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_csv(const char* path, const rssa_artifact* art, std::uint64_t seed,
                       const std::string& extra) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw rssa::Error(rssa::ErrorCode::kIo, std::string("cannot write '") + path + "'");
  f << "# rssa config_hash=" << art->stored.config_hash << " master_seed=" << seed
    << " controller=" << rssa::to_string(art->stored.art.kind) << extra << '\n';
  return f;
}

template <typename T>
T option(const json& opts, const char* key, T fallback) {
  return opts.contains(key) ? opts.at(key).get<T>() : fallback;
}

void check_closed(std::ofstream& f, const char* path) {
  f.flush();
  if (!f) throw rssa::Error(rssa::ErrorCode::kIo, std::string("write failed for '") + path + "'");
}

}  // namespace

extern "C" {

const char* rssa_version(void) { return "1.0.0"; }

const char* rssa_status_name(rssa_status status) {
  switch (status) {
    case RSSA_OK: return "ok";
    case RSSA_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case RSSA_ERR_EMPTY_SET: return "empty-set";
    case RSSA_ERR_CONVERGENCE: return "convergence-failure";
    case RSSA_ERR_NO_STEADY_STATE: return "no-steady-state";
    case RSSA_ERR_STRUCTURE: return "structure-error";
    case RSSA_ERR_FINITE_DETERMINATION: return "finite-determination-failure";
    case RSSA_ERR_INFEASIBLE: return "infeasible";
    case RSSA_ERR_MAX_ITER: return "max-iter";
    case RSSA_ERR_CONDITION_VIOLATED: return "condition-violated";
    case RSSA_ERR_CONFIG: return "config-error";
    case RSSA_ERR_IO: return "io-error";
    case RSSA_ERR_DEGENERATE: return "degenerate-set";
    case RSSA_ERR_INTERNAL: return "internal-error";
    case RSSA_ERR_CHECK_FAILED: return "check-failed";
  }
  return "unknown";
}

const char* rssa_last_error(void) { return g_error.c_str(); }
const char* rssa_last_error_stage(void) { return g_stage.c_str(); }

void rssa_string_free(char* s) { std::free(s); }

rssa_status rssa_precompute(const char* config_json, const char* overrides_json,
                            rssa_artifact** out) {
  RSSA_ARG(config_json && out, "rssa_precompute: null argument");
  *out = nullptr;
  return guard([&] {
    json raw;
    try {
      raw = json::parse(config_json);
    } catch (const json::parse_error& e) {
      return set_error(RSSA_ERR_CONFIG, std::string("config is not valid JSON: ") + e.what(),
                       "config");
    }
    if (overrides_json) raw = rssa::apply_overrides(raw, json::parse(overrides_json));
    const rssa::ExperimentConfig cfg = rssa::parse_config(raw);
    rssa::StoredArtifact stored{rssa::precompute(cfg.problem, cfg.options), cfg.normalized,
                                rssa::config_hash(cfg.normalized)};
    *out = new rssa_artifact{std::move(stored), cfg};
    return RSSA_OK;
  });
}

rssa_status rssa_precompute_file(const char* config_path, const char* overrides_json,
                                 rssa_artifact** out) {
  RSSA_ARG(config_path && out, "rssa_precompute_file: null argument");
  *out = nullptr;
  std::ifstream f(config_path, std::ios::binary);
  if (!f) {
    return set_error(RSSA_ERR_IO, std::string("cannot open config file '") + config_path + "'",
                     "config");
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return rssa_precompute(ss.str().c_str(), overrides_json, out);
}

rssa_status rssa_drone_preset(double beta, int baseline, char** config_json) {
  RSSA_ARG(config_json, "rssa_drone_preset: null argument");
  return guard([&] {
    const auto kind = baseline ? rssa::ControllerKind::kBaseline : rssa::ControllerKind::kRssa;
    emit(config_json, rssa::drone_preset_json(beta, kind));
    return RSSA_OK;
  });
}

rssa_status rssa_artifact_save(const rssa_artifact* art, const char* path) {
  RSSA_ARG(art && path, "rssa_artifact_save: null argument");
  return guard([&] {
    rssa::save_artifact(art->stored, path);
    return RSSA_OK;
  });
}

rssa_status rssa_artifact_load(const char* path, rssa_artifact** out) {
  RSSA_ARG(path && out, "rssa_artifact_load: null argument");
  *out = nullptr;
  return guard([&] {
    *out = wrap(rssa::load_artifact(path));
    return RSSA_OK;
  });
}

void rssa_artifact_free(rssa_artifact* art) { delete art; }

rssa_status rssa_artifact_dims(const rssa_artifact* art, int* n, int* p, int* m, int* n_theta,
                               int* horizon) {
  RSSA_ARG(art, "rssa_artifact_dims: null artifact");
  const auto& a = art->stored.art;
  if (n) *n = a.n();
  if (p) *p = a.p();
  if (m) *m = a.sys.m();
  if (n_theta) *n_theta = a.n_theta();
  if (horizon) *horizon = a.N;
  return RSSA_OK;
}

rssa_status rssa_artifact_info(const rssa_artifact* art, char** info_json) {
  RSSA_ARG(art && info_json, "rssa_artifact_info: null argument");
  return guard([&] {
    const auto& a = art->stored.art;
    auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json j = {{"name", art->cfg.name},
              {"controller", rssa::to_string(a.kind)},
              {"config_hash", art->stored.config_hash},
              {"n", a.n()},
              {"p", a.p()},
              {"n_theta", a.n_theta()},
              {"horizon", a.N},
              {"epsilon", a.epsilon},
              {"rpi_terms", a.rpi.s},
              {"rpi_alpha", a.rpi.alpha},
              {"facet_rows", a.F_facets.rows()},
              {"facets_exact", a.facets_exact},
              {"terminal_rows", a.terminal.rows()},
              {"gamma_star", a.gamma_star},
              {"dare_residual", a.riccati.residual},
              {"tightened_state_offsets", vec(a.X_t.offsets())},
              {"tightened_input_offsets", vec(a.U_t.offsets())},
              {"qp_variables", a.model.d},
              {"qp_constraints", a.model.G.rows()}};
    if (a.kind == rssa::ControllerKind::kBaseline) {
      j["target_state"] = vec(a.x_target);
      j["target_input"] = vec(a.u_target);
    }
    emit(info_json, j);
    return RSSA_OK;
  });
}

rssa_status rssa_controller_create(const rssa_artifact* art, rssa_controller** out) {
  RSSA_ARG(art && out, "rssa_controller_create: null argument");
  *out = nullptr;
  return guard([&] {
    *out = new rssa_controller{art, rssa::MpcSolver{}};
    return RSSA_OK;
  });
}

void rssa_controller_free(rssa_controller* ctrl) { delete ctrl; }

rssa_status rssa_controller_reset(rssa_controller* ctrl) {
  RSSA_ARG(ctrl, "rssa_controller_reset: null controller");
  ctrl->solver.reset();
  return RSSA_OK;
}

rssa_status rssa_controller_step(rssa_controller* ctrl, const double* x, const double* r,
                                 const double* x_des, const double* u_des, double* u_out,
                                 double* theta_out, double* cost_out) {
  RSSA_ARG(ctrl && x && u_out, "rssa_controller_step: null argument");
  return guard([&] {
    const auto& a = ctrl->art->stored.art;
    const rssa::Reference& ref = ctrl->art->cfg.reference;
    const VectorXd rv = r ? view(r, a.sys.m()) : ref.r;
    const VectorXd xd = x_des ? view(x_des, a.n()) : ref.x_des;
    const VectorXd ud = u_des ? view(u_des, a.p()) : ref.u_des;
    const rssa::StepResult st = rssa::any_control_step(a, ctrl->solver, view(x, a.n()), rv, xd, ud);
    Eigen::Map<VectorXd>(u_out, a.p()) = st.u_applied;
    if (theta_out && st.theta_star.size() > 0) {
      Eigen::Map<VectorXd>(theta_out, st.theta_star.size()) = st.theta_star;
    }
    if (cost_out) *cost_out = st.cost_star;
    return RSSA_OK;
  });
}

rssa_status rssa_first_step_feasible(const rssa_artifact* art, const double* x, int* feasible) {
  RSSA_ARG(art && x && feasible, "rssa_first_step_feasible: null argument");
  return guard([&] {
    *feasible = rssa::first_step_feasible(art->stored.art, view(x, art->stored.art.n())) ? 1 : 0;
    return RSSA_OK;
  });
}

rssa_status rssa_simulate_csv(const rssa_artifact* art, const char* options_json,
                              const char* trace_path, char** report_json) {
  RSSA_ARG(art && trace_path, "rssa_simulate_csv: null argument");
  return guard([&] {
    const json opts = parse_options(options_json);
    const json& sim_cfg = art->stored.config.at("simulation");
    const auto& a = art->stored.art;
    const int n = a.n();
    const int p = a.p();
    const std::uint64_t seed = option<std::uint64_t>(opts, "seed", sim_cfg.at("seed").get<std::uint64_t>());
    const int T = option<int>(opts, "horizon", sim_cfg.at("T").get<int>());
    const bool timing = option<bool>(opts, "timing", false);
    rssa::DisturbanceSpec dist{option<double>(opts, "beta", art->cfg.beta),
                               art->cfg.disturbance_active, seed};
    VectorXd x0 = art->cfg.x0;
    if (opts.contains("x0")) {
      const auto v = opts.at("x0").get<std::vector<double>>();
      RSSA_ARG(static_cast<int>(v.size()) == n, "rssa_simulate_csv: x0 has the wrong length");
      x0 = Eigen::Map<const VectorXd>(v.data(), n);
    }
    const rssa::SimTrace trace = rssa::simulate(a, x0, art->cfg.reference, T, dist);

    std::ofstream f = open_csv(trace_path, art, seed, " beta=" + num(dist.beta));
    f << "t";
    for (int i = 1; i <= n; ++i) f << ",x" << i;
    for (int i = 1; i <= n; ++i) f << ",xbar" << i;
    for (int i = 1; i <= p; ++i) f << ",u" << i;
    for (int i = 1; i <= n; ++i) f << ",w" << i;
    f << ",cost,feasible,iters,solve_ms\n";
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
      const rssa::SimStep& s = trace.steps[t];
      f << t;
      for (int i = 0; i < n; ++i) f << ',' << num(s.x(i));
      for (int i = 0; i < n; ++i) f << ',' << (s.feasible ? num(s.x0_star(i)) : "nan");
      for (int i = 0; i < p; ++i) f << ',' << (s.feasible ? num(s.u(i)) : "nan");
      for (int i = 0; i < n; ++i) f << ',' << (s.feasible ? num(s.w(i)) : "nan");
      f << ',' << num(s.cost) << ',' << (s.feasible ? 1 : 0) << ',' << s.iterations << ','
        << num(timing ? s.solve_ms : 0.0) << '\n';
    }
    check_closed(f, trace_path);

    const VectorXd x_ref = rssa::reference_state(a.ssp, art->cfg.reference.r);
    json report = {{"steps", trace.steps.size()},
                   {"truncated", trace.truncated},
                   {"failure", trace.failure},
                   {"performance_index", rssa::performance_index(trace, x_ref)}};
    emit(report_json, report);
    return trace.truncated ? set_error(RSSA_ERR_INFEASIBLE, trace.failure, "simulate") : RSSA_OK;
  });
}

rssa_status rssa_montecarlo_csv(const rssa_artifact* art, const char* options_json,
                                const char* summary_path, const char* stats_path,
                                char** report_json) {
  RSSA_ARG(art && summary_path, "rssa_montecarlo_csv: null argument");
  return guard([&] {
    const json opts = parse_options(options_json);
    const auto& a = art->stored.art;
    const int n = a.n();
    rssa::MonteCarloProtocol prot = art->cfg.protocol;
    prot.runs = option<int>(opts, "runs", prot.runs);
    prot.beta = option<double>(opts, "beta", prot.beta);
    prot.T = option<int>(opts, "horizon", prot.T);
    prot.master_seed = option<std::uint64_t>(opts, "seed", prot.master_seed);
    prot.threads = option<int>(opts, "threads", prot.threads);
    const bool timing = option<bool>(opts, "timing", false);
    const rssa::MonteCarloSummary sum = rssa::monte_carlo(a, prot);

    std::ofstream f = open_csv(summary_path, art, prot.master_seed, " beta=" + num(prot.beta));
    f << "run_id,seed";
    for (std::size_t k = 1; k <= prot.sigma_indices.size(); ++k) f << ",sigma" << k;
    f << ",beta,PI,max_violation,initial_infeasible,mid_run_infeasible,candidate_failures,"
         "tube_failures,steps";
    if (timing) f << ",mean_solve_ms,max_solve_ms";
    f << '\n';
    for (const auto& run : sum.runs) {
      f << run.run_id << ',' << run.seed;
      for (int idx : prot.sigma_indices) f << ',' << num(run.x0(idx));
      f << ',' << num(prot.beta) << ',' << num(run.pi) << ',' << num(run.max_violation) << ','
        << run.initial_infeasible << ',' << run.mid_run_infeasible << ','
        << run.candidate_failures << ',' << run.tube_failures << ',' << run.steps_completed;
      if (timing) f << ',' << num(run.mean_solve_ms) << ',' << num(run.max_solve_ms);
      f << '\n';
    }
    check_closed(f, summary_path);

    if (stats_path) {
      std::ofstream g = open_csv(stats_path, art, prot.master_seed, " beta=" + num(prot.beta));
      g << "t";
      for (int i = 1; i <= n; ++i) g << ",mean_x" << i;
      for (int i = 1; i <= n; ++i) g << ",std_x" << i;
      g << '\n';
      for (int t = 0; t < sum.state_mean.rows(); ++t) {
        g << t;
        for (int i = 0; i < n; ++i) g << ',' << num(sum.state_mean(t, i));
        for (int i = 0; i < n; ++i) g << ',' << num(sum.state_std(t, i));
        g << '\n';
      }
      check_closed(g, stats_path);
    }

    json report = {{"runs", sum.runs.size()},
                   {"completed_runs", sum.completed_runs},
                   {"beta", prot.beta},
                   {"initial_infeasible", sum.initial_infeasible},
                   {"mid_run_infeasible", sum.mid_run_infeasible},
                   {"candidate_failures", sum.candidate_failures},
                   {"tube_failures", sum.tube_failures},
                   {"max_violation", sum.max_violation},
                   {"pi_mean", sum.pi_mean},
                   {"pi_std", sum.pi_std}};
    emit(report_json, report);
    return RSSA_OK;
  });
}

rssa_status rssa_roa_csv(const rssa_artifact* art_rssa, const rssa_artifact* art_base,
                         const char* options_json, const char* roa_path, char** report_json) {
  RSSA_ARG(art_rssa && art_base && roa_path, "rssa_roa_csv: null argument");
  return guard([&] {
    const json opts = parse_options(options_json);
    RSSA_ARG(art_rssa->stored.art.kind == rssa::ControllerKind::kRssa &&
                 art_base->stored.art.kind == rssa::ControllerKind::kBaseline,
             "rssa_roa_csv: expected an rssa artifact and a baseline artifact");
    RSSA_ARG(art_rssa->stored.art.n() == art_base->stored.art.n(),
             "rssa_roa_csv: artifacts have different state dimensions");
    rssa::RoaGrid grid = art_rssa->cfg.roa;
    grid.nx = option<int>(opts, "nx", grid.nx);
    grid.ny = option<int>(opts, "ny", grid.ny);
    grid.threads = option<int>(opts, "threads", grid.threads);
    const auto points = rssa::roa_scan(art_rssa->stored.art, art_base->stored.art, grid);

    std::ofstream f = open_csv(roa_path, art_rssa, 0,
                               " baseline_hash=" + art_base->stored.config_hash +
                                   " axis_x=x" + std::to_string(grid.axis_x + 1) + " axis_y=x" +
                                   std::to_string(grid.axis_y + 1));
    f << "x" << grid.axis_x + 1 << ",x" << grid.axis_y + 1 << ",feasible_rssa,feasible_base\n";
    int n_rssa = 0, n_base = 0, base_only = 0;
    for (const auto& pt : points) {
      f << num(pt.x) << ',' << num(pt.y) << ',' << pt.feasible_rssa << ',' << pt.feasible_base
        << '\n';
      n_rssa += pt.feasible_rssa;
      n_base += pt.feasible_base;
      base_only += pt.feasible_base && !pt.feasible_rssa;
    }
    check_closed(f, roa_path);
    json report = {{"points", points.size()},
                   {"feasible_rssa", n_rssa},
                   {"feasible_base", n_base},
                   {"base_not_rssa", base_only}};
    emit(report_json, report);
    return RSSA_OK;
  });
}

rssa_status rssa_check(const rssa_artifact* art, const char* options_json, char** report_json) {
  RSSA_ARG(art, "rssa_check: null artifact");
  return guard([&] {
    const json opts = parse_options(options_json);
    rssa::AuditOptions ao;
    ao.seed = option<std::uint64_t>(opts, "seed", ao.seed);
    ao.rpi_samples = option<int>(opts, "rpi_samples", ao.rpi_samples);
    ao.terminal_samples = option<int>(opts, "terminal_samples", ao.terminal_samples);
    ao.closed_loop_steps = option<int>(opts, "horizon", ao.closed_loop_steps);
    ao.x0 = art->cfg.x0;
    ao.ref = art->cfg.reference;
    const rssa::AuditReport rep = rssa::audit_artifact(art->stored.art, ao);
    json j = rep.to_json();
    j["config_hash"] = art->stored.config_hash;
    emit(report_json, j);
    if (rep.all_passed()) return RSSA_OK;
    std::string failed;
    for (const auto& c : rep.checks) {
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    return set_error(RSSA_ERR_CHECK_FAILED, "failed checks: " + failed, "check");
  });
}

}  // extern "C"
