#pragma once

// Scenario execution: builds the initial state, dispatches to the right
// solver, and writes result files plus a resolved-config echo under a common
// output prefix.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "rotordyn/classical_rotor.hpp"
#include "rotordyn/errors.hpp"
#include "rotordyn/evolution.hpp"
#include "rotordyn/output.hpp"
#include "rotordyn/rotor_basis.hpp"
#include "rotordyn/scenario_config.hpp"
#include "rotordyn/spectrum.hpp"
#include "rotordyn/wigner_tomography.hpp"

namespace rotordyn {

struct RunResult {
  std::vector<std::string> files;
};

// Relative output prefixes are placed under ROTORDYN_OUT_DIR when it is set.
inline std::string resolve_output_prefix(const std::string& prefix) {
  const char* dir = std::getenv("ROTORDYN_OUT_DIR");
  if (!dir || !*dir || std::filesystem::path(prefix).is_absolute()) return prefix;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / prefix).string();
}

namespace detail_run {

inline PureState initial_state(const ScenarioConfig& cfg) {
  if (cfg.state == "superposition") return superposition_state(cfg.components, cfg.j_max);
  return coherent_state(cfg.state_j, cfg.state_alpha, cfg.state_beta, cfg.j_max);
}

inline EvolutionConfig evolution_config(const ScenarioConfig& cfg, double default_t_end) {
  EvolutionConfig e;
  e.dt = cfg.dt;
  e.t_end = cfg.t_end > 0.0 ? cfg.t_end : default_t_end;
  e.record_stride = cfg.record_stride;
  e.n_traj = cfg.n_traj;
  e.seed = cfg.seed;
  e.tail_tolerance = cfg.tail_tolerance;
  return e;
}

inline ModelParams model_params(const ScenarioConfig& cfg, bool with_gamma) {
  return {cfg.u, with_gamma ? cfg.gamma_ratio : 0.0, cfg.j_max};
}

inline std::string snapshot_label(double tau) {
  // compact tau tag for file names: integral values lose the decimal point
  std::string s = io::format_number(tau);
  for (auto& c : s)
    if (c == '.' || c == '+') c = '_';
  return s;
}

}  // namespace detail_run

inline RunResult run_classical(const ScenarioConfig& cfg, const std::string& prefix) {
  const classical::ClassicalParams params{cfg.u_d, cfg.u};
  const classical::ClassicalState s0{cfg.theta0, cfg.phi0, cfg.theta_dot0, cfg.phi_dot0};

  double t_end = cfg.t_end;
  if (t_end <= 0.0) {
    t_end = 100.0;
    if (cfg.u > 0.0) {
      const auto c = classical::conserved_quantities(s0, params);
      if (c.epsilon > -1.0)
        t_end = 3.0 * classical::nutation_period(
                          classical::solution_constants(c.epsilon, c.kappa_z, cfg.u));
    }
  }
  const int n_records = cfg.record_stride > 0 ? cfg.record_stride : 2000;
  std::vector<double> grid(n_records + 1);
  for (int i = 0; i <= n_records; ++i) grid[i] = t_end * i / n_records;
  const auto states = classical::integrate_ode(s0, params, grid, cfg.dt);

  const std::string path = prefix + ".csv";
  io::write_classical_timeseries(path, grid, states, params);
  return {{path}};
}

inline RunResult run_spectrum(const ScenarioConfig& cfg, const std::string& prefix) {
  const auto table = spectrum::level_shift_table(cfg.u, cfg.l_max);
  const std::string path = prefix + ".csv";
  io::write_level_table(path, table, cfg.u);
  return {{path}};
}

inline RunResult run_evolve_unitary(const ScenarioConfig& cfg, const std::string& prefix) {
  const auto e = detail_run::evolution_config(cfg, 1200.0);
  std::vector<ObservableRecord> records;
  evolve_unitary_cb(detail_run::initial_state(cfg), detail_run::model_params(cfg, false), e,
                    [&records](double tau, const PureState& psi) {
                      records.push_back(observables(psi, tau));
                    });
  const std::string path = prefix + ".csv";
  io::write_timeseries(path, records);
  return {{path}};
}

inline RunResult run_evolve_master(const ScenarioConfig& cfg, const std::string& prefix) {
  const auto e = detail_run::evolution_config(cfg, 1200.0);
  const PureState psi0 = detail_run::initial_state(cfg);
  const DensityMatrix sigma0 = psi0 * psi0.adjoint();
  std::vector<ObservableRecord> records;
  evolve_master_cb(sigma0, detail_run::model_params(cfg, true), e,
                   [&records](double tau, const DensityMatrix& sigma) {
                     records.push_back(observables(sigma, tau));
                   });
  const std::string path = prefix + ".csv";
  io::write_timeseries(path, records);
  return {{path}};
}

inline RunResult run_evolve_trajectory(const ScenarioConfig& cfg, const std::string& prefix) {
  const auto e = detail_run::evolution_config(cfg, 1200.0);
  const PureState psi0 = detail_run::initial_state(cfg);
  RunResult out;
  if (cfg.n_traj == 1) {
    const auto tr = evolve_trajectory(psi0, detail_run::model_params(cfg, true), e, 0);
    std::vector<ObservableRecord> records;
    records.reserve(tr.taus.size());
    for (std::size_t i = 0; i < tr.taus.size(); ++i)
      records.push_back(observables(tr.states[i], tr.taus[i]));
    io::write_timeseries(prefix + ".csv", records);
    io::write_jump_log(prefix + ".jumps.csv", tr.jumps);
    out.files = {prefix + ".csv", prefix + ".jumps.csv"};
  } else {
    const auto avg = ensemble_average(psi0, detail_run::model_params(cfg, true), e);
    std::vector<ObservableRecord> records;
    records.reserve(avg.taus.size());
    for (std::size_t i = 0; i < avg.taus.size(); ++i)
      records.push_back(observables(avg.states[i], avg.taus[i]));
    io::write_timeseries(prefix + ".csv", records);
    out.files = {prefix + ".csv"};
  }
  return out;
}

inline RunResult run_wigner_snapshots(const ScenarioConfig& cfg, const std::string& prefix) {
  std::vector<double> times = cfg.snapshot_times;
  std::sort(times.begin(), times.end());
  const double t_end = times.back();
  auto e = detail_run::evolution_config(cfg, t_end);
  e.t_end = cfg.t_end > 0.0 ? cfg.t_end : t_end;

  const wigner::SphereGrid grid = wigner::make_sphere_grid(cfg.n_theta, cfg.n_phi);
  const PureState psi0 = detail_run::initial_state(cfg);

  RunResult out;
  std::size_t next = 0;
  auto maybe_emit = [&](double tau, const DensityMatrix& sigma) {
    // emit each requested snapshot at the first record time reaching it
    while (next < times.size() && tau >= times[next] - 1e-9) {
      wigner::WignerGrid w = wigner::wigner_total(sigma, grid, tau);
      const std::string path =
          prefix + ".tau" + detail_run::snapshot_label(times[next]) + ".wig";
      io::write_wigner_grid(path, w);
      out.files.push_back(path);
      ++next;
    }
  };

  if (cfg.gamma_ratio > 0.0) {
    const DensityMatrix sigma0 = psi0 * psi0.adjoint();
    evolve_master_cb(sigma0, detail_run::model_params(cfg, true), e, maybe_emit);
  } else {
    evolve_unitary_cb(psi0, detail_run::model_params(cfg, false), e,
                      [&maybe_emit](double tau, const PureState& psi) {
                        const DensityMatrix sigma = psi * psi.adjoint() / psi.squaredNorm();
                        maybe_emit(tau, sigma);
                      });
  }
  if (next < times.size())
    throw std::domain_error("wigner-snapshots: t_end below the last snapshot time");
  return out;
}

// Dispatch a validated configuration. Output files share the given prefix;
// the resolved configuration is echoed to <prefix>.config.
inline RunResult run_scenario(const ScenarioConfig& cfg, const std::string& prefix) {
  io::write_text(prefix + ".config", render_config(cfg));
  RunResult result;
  switch (cfg.scenario) {
    case Scenario::classical: result = run_classical(cfg, prefix); break;
    case Scenario::spectrum: result = run_spectrum(cfg, prefix); break;
    case Scenario::evolve_unitary: result = run_evolve_unitary(cfg, prefix); break;
    case Scenario::evolve_master: result = run_evolve_master(cfg, prefix); break;
    case Scenario::evolve_trajectory: result = run_evolve_trajectory(cfg, prefix); break;
    case Scenario::wigner_snapshots: result = run_wigner_snapshots(cfg, prefix); break;
  }
  result.files.push_back(prefix + ".config");
  return result;
}

}  // namespace rotordyn
