#pragma once

// Flat key-value run configuration: one `key = value` per line, `#` comments,
// unknown keys are a hard error. Every key has a documented default; keys
// that make no sense for the selected scenario are rejected with the line
// number. The fully resolved configuration can be echoed back for
// reproducibility.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/rotor_basis.hpp"

namespace rotordyn {

enum class Scenario {
  classical,
  spectrum,
  evolve_unitary,
  evolve_master,
  evolve_trajectory,
  wigner_snapshots,
};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::classical: return "classical";
    case Scenario::spectrum: return "spectrum";
    case Scenario::evolve_unitary: return "evolve-unitary";
    case Scenario::evolve_master: return "evolve-master";
    case Scenario::evolve_trajectory: return "evolve-trajectory";
    case Scenario::wigner_snapshots: return "wigner-snapshots";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::classical, Scenario::spectrum, Scenario::evolve_unitary,
                     Scenario::evolve_master, Scenario::evolve_trajectory,
                     Scenario::wigner_snapshots})
    if (name == scenario_name(s)) return s;
  return std::nullopt;
}

struct ScenarioConfig {
  Scenario scenario = Scenario::evolve_unitary;

  // physical parameters
  double u = 0.1;            // 2 Theta U_alpha / hbar^2
  double gamma_ratio = 0.0;  // Gamma / Delta
  double u_d = 0.0;          // classical permanent-dipole depth

  // initial state (quantum scenarios)
  std::string state = "coherent";  // "coherent" or "superposition"
  int state_j = 2;
  double state_alpha = std::numbers::pi / 2;
  double state_beta = 0.0;
  std::vector<CoherentSpec> components;  // superposition components

  // initial state (classical scenario)
  double theta0 = 0.0;
  double phi0 = 0.0;
  double theta_dot0 = 0.0;
  double phi_dot0 = 0.0;

  // numerics
  int j_max = 12;
  double dt = 0.0;     // 0 = per-scenario default
  double t_end = 0.0;  // 0 = per-scenario default
  int record_stride = 0;
  int n_traj = 2000;
  std::uint64_t seed = 20260811ULL;
  int n_theta = 64;
  int n_phi = 128;
  double tail_tolerance = 1e-6;
  int l_max = 8;  // spectrum: highest reported level
  std::vector<double> snapshot_times = {660.0, 830.0, 990.0, 1165.0};
};

namespace detail_config {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text, int line_no) {
  const std::string t = trim(text);
  // strtod-style but strict: the full token must be consumed
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw parse_error("config line " + std::to_string(line_no) + ": malformed number '" + t + "'");
  return v;
}

inline long parse_integer(const std::string& text, int line_no) {
  const std::string t = trim(text);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw parse_error("config line " + std::to_string(line_no) + ": malformed integer '" + t + "'");
  return v;
}

inline std::vector<double> parse_number_list(const std::string& text, int line_no) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, line_no));
  return out;
}

// superposition components: groups "w_re w_im j alpha beta" separated by ';'
inline std::vector<CoherentSpec> parse_components(const std::string& text, int line_no) {
  std::vector<CoherentSpec> out;
  std::string group;
  std::istringstream in(text);
  while (std::getline(in, group, ';')) {
    if (trim(group).empty()) continue;
    const std::vector<double> nums = parse_number_list(group, line_no);
    if (nums.size() != 5)
      throw parse_error("config line " + std::to_string(line_no) +
                        ": component needs 5 numbers (w_re w_im j alpha beta)");
    CoherentSpec spec;
    spec.weight = {nums[0], nums[1]};
    spec.j = static_cast<int>(std::lround(nums[2]));
    spec.alpha = nums[3];
    spec.beta = nums[4];
    out.push_back(spec);
  }
  if (out.empty())
    throw parse_error("config line " + std::to_string(line_no) + ": empty component list");
  return out;
}

enum : unsigned {
  kClassical = 1u << 0,
  kSpectrum = 1u << 1,
  kUnitary = 1u << 2,
  kMaster = 1u << 3,
  kTrajectory = 1u << 4,
  kWigner = 1u << 5,
  kQuantum = kUnitary | kMaster | kTrajectory | kWigner,
  kAll = kClassical | kSpectrum | kQuantum,
};

inline unsigned scenario_bit(Scenario s) {
  switch (s) {
    case Scenario::classical: return kClassical;
    case Scenario::spectrum: return kSpectrum;
    case Scenario::evolve_unitary: return kUnitary;
    case Scenario::evolve_master: return kMaster;
    case Scenario::evolve_trajectory: return kTrajectory;
    case Scenario::wigner_snapshots: return kWigner;
  }
  return 0;
}

struct KeyInfo {
  unsigned applicable;
};

inline const std::map<std::string, KeyInfo>& key_table() {
  static const std::map<std::string, KeyInfo> table = {
      {"scenario", {kAll}},
      {"u", {kClassical | kQuantum | kSpectrum}},
      {"gamma_ratio", {kMaster | kTrajectory | kWigner}},
      {"u_d", {kClassical}},
      {"state", {kQuantum}},
      {"state_j", {kQuantum}},
      {"state_alpha", {kQuantum}},
      {"state_beta", {kQuantum}},
      {"components", {kQuantum}},
      {"theta0", {kClassical}},
      {"phi0", {kClassical}},
      {"theta_dot0", {kClassical}},
      {"phi_dot0", {kClassical}},
      {"j_max", {kQuantum}},
      {"dt", {kClassical | kQuantum}},
      {"t_end", {kClassical | kQuantum}},
      {"record_stride", {kClassical | kQuantum}},
      {"n_traj", {kTrajectory}},
      {"seed", {kTrajectory}},
      {"n_theta", {kWigner}},
      {"n_phi", {kWigner}},
      {"tail_tolerance", {kQuantum}},
      {"l_max", {kSpectrum}},
      {"snapshot_times", {kWigner}},
  };
  return table;
}

}  // namespace detail_config

// Parse a config document. The scenario may come from the document itself or
// from the command line; if both are present they must agree. Assignments
// are validated against the applicability table and basic ranges.
inline ScenarioConfig parse_config(const std::string& text,
                                   std::optional<Scenario> cli_scenario = std::nullopt,
                                   const std::vector<std::string>& overrides = {}) {
  using namespace detail_config;

  // collect raw assignments with their line numbers
  std::vector<std::pair<std::string, std::pair<std::string, int>>> entries;
  std::optional<Scenario> file_scenario;
  {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw parse_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw parse_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
      entries.push_back({key, {value, line_no}});
    }
  }
  int override_line = -1;
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw parse_error("override '" + ov + "': expected key=value");
    entries.push_back({trim(ov.substr(0, eq)), {trim(ov.substr(eq + 1)), override_line--}});
  }

  // scenario resolution first (it gates key applicability)
  for (const auto& [key, vl] : entries) {
    if (key != "scenario") continue;
    const auto s = scenario_from_name(vl.first);
    if (!s)
      throw parse_error("config line " + std::to_string(vl.second) + ": unknown scenario '" +
                        vl.first + "'");
    if (file_scenario && *file_scenario != *s)
      throw parse_error("config: conflicting scenario assignments");
    file_scenario = s;
  }
  if (cli_scenario && file_scenario && *cli_scenario != *file_scenario)
    throw parse_error(std::string("config: scenario '") + scenario_name(*file_scenario) +
                      "' conflicts with command line '" + scenario_name(*cli_scenario) + "'");
  if (!cli_scenario && !file_scenario)
    throw parse_error("config: no scenario given (command line or 'scenario = ...' key)");

  ScenarioConfig cfg;
  cfg.scenario = cli_scenario ? *cli_scenario : *file_scenario;
  const unsigned bit = scenario_bit(cfg.scenario);

  for (const auto& [key, vl] : entries) {
    const auto& [value, line_no] = vl;
    const std::string where =
        line_no > 0 ? "config line " + std::to_string(line_no) : "override '" + key + "'";
    const auto it = key_table().find(key);
    if (it == key_table().end()) throw parse_error(where + ": unknown key '" + key + "'");
    if (!(it->second.applicable & bit))
      throw parse_error(where + ": key '" + key + "' does not apply to scenario '" +
                        scenario_name(cfg.scenario) + "'");

    if (key == "scenario") continue;
    if (key == "u") cfg.u = parse_number(value, line_no);
    else if (key == "gamma_ratio") cfg.gamma_ratio = parse_number(value, line_no);
    else if (key == "u_d") cfg.u_d = parse_number(value, line_no);
    else if (key == "state") {
      if (value != "coherent" && value != "superposition")
        throw parse_error(where + ": state must be 'coherent' or 'superposition'");
      cfg.state = value;
    } else if (key == "state_j") cfg.state_j = static_cast<int>(parse_integer(value, line_no));
    else if (key == "state_alpha") cfg.state_alpha = parse_number(value, line_no);
    else if (key == "state_beta") cfg.state_beta = parse_number(value, line_no);
    else if (key == "components") cfg.components = parse_components(value, line_no);
    else if (key == "theta0") cfg.theta0 = parse_number(value, line_no);
    else if (key == "phi0") cfg.phi0 = parse_number(value, line_no);
    else if (key == "theta_dot0") cfg.theta_dot0 = parse_number(value, line_no);
    else if (key == "phi_dot0") cfg.phi_dot0 = parse_number(value, line_no);
    else if (key == "j_max") cfg.j_max = static_cast<int>(parse_integer(value, line_no));
    else if (key == "dt") cfg.dt = parse_number(value, line_no);
    else if (key == "t_end") cfg.t_end = parse_number(value, line_no);
    else if (key == "record_stride")
      cfg.record_stride = static_cast<int>(parse_integer(value, line_no));
    else if (key == "n_traj") cfg.n_traj = static_cast<int>(parse_integer(value, line_no));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(parse_integer(value, line_no));
    else if (key == "n_theta") cfg.n_theta = static_cast<int>(parse_integer(value, line_no));
    else if (key == "n_phi") cfg.n_phi = static_cast<int>(parse_integer(value, line_no));
    else if (key == "tail_tolerance") cfg.tail_tolerance = parse_number(value, line_no);
    else if (key == "l_max") cfg.l_max = static_cast<int>(parse_integer(value, line_no));
    else if (key == "snapshot_times") {
      cfg.snapshot_times = parse_number_list(value, line_no);
      if (cfg.snapshot_times.empty()) throw parse_error(where + ": empty snapshot_times");
    }
  }

  // range validation
  auto reject = [](const std::string& msg) { throw parse_error("config: " + msg); };
  if (cfg.u < 0.0) reject("u must be >= 0");
  if (cfg.gamma_ratio < 0.0) reject("gamma_ratio must be >= 0");
  if (cfg.u_d < 0.0) reject("u_d must be >= 0");
  if (cfg.j_max < 2) reject("j_max must be >= 2");
  if (cfg.dt < 0.0) reject("dt must be >= 0 (0 = default)");
  if (cfg.t_end < 0.0) reject("t_end must be >= 0 (0 = default)");
  if (cfg.n_traj < 1) reject("n_traj must be >= 1");
  if (cfg.n_theta < 2 || cfg.n_phi < 2) reject("n_theta and n_phi must be >= 2");
  if (cfg.tail_tolerance <= 0.0) reject("tail_tolerance must be > 0");
  if (cfg.l_max < 0) reject("l_max must be >= 0");
  if (cfg.state_j < 0 || cfg.state_j > cfg.j_max) reject("state_j must satisfy 0 <= j <= j_max");
  if (cfg.state == "superposition" && cfg.components.empty())
    reject("superposition state needs a 'components' list");
  for (double t : cfg.snapshot_times)
    if (t <= 0.0) reject("snapshot_times must be positive");

  return cfg;
}

// Stable text rendering of the fully resolved configuration, written next to
// the outputs so a run is reproducible from its artifacts alone.
inline std::string render_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "scenario = " << scenario_name(cfg.scenario) << "\n";
  const unsigned bit = detail_config::scenario_bit(cfg.scenario);
  using namespace detail_config;
  if (bit & (kClassical | kQuantum | kSpectrum)) out << "u = " << cfg.u << "\n";
  if (bit & (kMaster | kTrajectory | kWigner)) out << "gamma_ratio = " << cfg.gamma_ratio << "\n";
  if (bit & kClassical) {
    out << "u_d = " << cfg.u_d << "\n";
    out << "theta0 = " << cfg.theta0 << "\n";
    out << "phi0 = " << cfg.phi0 << "\n";
    out << "theta_dot0 = " << cfg.theta_dot0 << "\n";
    out << "phi_dot0 = " << cfg.phi_dot0 << "\n";
  }
  if (bit & kQuantum) {
    out << "state = " << cfg.state << "\n";
    if (cfg.state == "coherent") {
      out << "state_j = " << cfg.state_j << "\n";
      out << "state_alpha = " << cfg.state_alpha << "\n";
      out << "state_beta = " << cfg.state_beta << "\n";
    } else {
      out << "components =";
      for (std::size_t i = 0; i < cfg.components.size(); ++i) {
        const auto& c = cfg.components[i];
        if (i) out << " ;";
        out << " " << c.weight.real() << " " << c.weight.imag() << " " << c.j << " " << c.alpha
            << " " << c.beta;
      }
      out << "\n";
    }
    out << "j_max = " << cfg.j_max << "\n";
    out << "tail_tolerance = " << cfg.tail_tolerance << "\n";
  }
  if (bit & (kClassical | kQuantum)) {
    out << "dt = " << cfg.dt << "\n";
    out << "t_end = " << cfg.t_end << "\n";
    out << "record_stride = " << cfg.record_stride << "\n";
  }
  if (bit & kTrajectory) {
    out << "n_traj = " << cfg.n_traj << "\n";
    out << "seed = " << cfg.seed << "\n";
  }
  if (bit & kWigner) {
    out << "n_theta = " << cfg.n_theta << "\n";
    out << "n_phi = " << cfg.n_phi << "\n";
    out << "snapshot_times =";
    for (double t : cfg.snapshot_times) out << " " << t;
    out << "\n";
  }
  if (bit & kSpectrum) out << "l_max = " << cfg.l_max << "\n";
  return out.str();
}

}  // namespace rotordyn
