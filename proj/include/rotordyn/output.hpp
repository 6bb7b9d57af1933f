#pragma once

// Result-file writers and readers. All numeric output uses 12 significant
// digits rendered with std::to_chars, so files are locale-independent and
// byte-reproducible; lines end with LF, fields are comma-separated.

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rotordyn/classical_rotor.hpp"
#include "rotordyn/errors.hpp"
#include "rotordyn/evolution.hpp"
#include "rotordyn/spectrum.hpp"
#include "rotordyn/wigner_tomography.hpp"

namespace rotordyn::io {

inline std::string format_number(double v) {
  std::array<char, 40> buf;
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 12);
  return std::string(buf.data(), res.ptr);
}

namespace detail_io {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: LF line ends everywhere
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail_io

// Observable time series: tau, jx_mean, jz_mean, jz_var, purity, p0..p_jmax.
inline void write_timeseries(const std::string& path,
                             const std::vector<ObservableRecord>& records) {
  auto out = detail_io::open_out(path);
  const std::size_t n_pop = records.empty() ? 0 : records.front().populations.size();
  out << "tau,jx_mean,jz_mean,jz_var,purity";
  for (std::size_t j = 0; j < n_pop; ++j) out << ",p" << j;
  out << "\n";
  for (const auto& r : records) {
    out << format_number(r.tau) << ',' << format_number(r.jx_mean) << ','
        << format_number(r.jz_mean) << ',' << format_number(r.jz_var) << ','
        << format_number(r.purity);
    for (double p : r.populations) out << ',' << format_number(p);
    out << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

// Classical trajectory: tau, theta, phi, lx, ly, lz, epsilon, kappa_z.
inline void write_classical_timeseries(const std::string& path, const std::vector<double>& taus,
                                       const std::vector<classical::ClassicalState>& states,
                                       const classical::ClassicalParams& params) {
  if (taus.size() != states.size())
    throw std::domain_error("write_classical_timeseries: size mismatch");
  auto out = detail_io::open_out(path);
  out << "tau,theta,phi,lx,ly,lz,epsilon,kappa_z\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto l = classical::lab_angular_momentum(states[i]);
    const auto c = classical::conserved_quantities(states[i], params);
    out << format_number(taus[i]) << ',' << format_number(states[i].theta) << ','
        << format_number(states[i].phi) << ',' << format_number(l[0]) << ','
        << format_number(l[1]) << ',' << format_number(l[2]) << ',' << format_number(c.epsilon)
        << ',' << format_number(c.kappa_z) << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

// Jump log of a single quantum trajectory.
inline void write_jump_log(const std::string& path, const std::vector<JumpEvent>& jumps) {
  auto out = detail_io::open_out(path);
  out << "tau,channel\n";
  static const char* names[3] = {"x", "y", "z"};
  for (const auto& j : jumps)
    out << format_number(j.tau) << ',' << names[j.channel] << "\n";
  if (!out) throw io_error("write failed for '" + path + "'");
}

// Spectrum table: l, m_abs, u, energy, shift.
inline void write_level_table(const std::string& path,
                              const std::vector<spectrum::LevelShift>& table, double u) {
  auto out = detail_io::open_out(path);
  out << "l,m_abs,u,energy,shift\n";
  for (const auto& row : table)
    out << row.l << ',' << row.m_abs << ',' << format_number(u) << ','
        << format_number(row.energy) << ',' << format_number(row.shift) << "\n";
  if (!out) throw io_error("write failed for '" + path + "'");
}

// Self-describing Wigner grid file: header comments carry tau and the grid
// shape, then the theta nodes, theta weights and phi nodes, then the value
// matrix row-major (theta-major, one theta row per line).
inline void write_wigner_grid(const std::string& path, const wigner::WignerGrid& w) {
  auto out = detail_io::open_out(path);
  const auto& g = w.grid;
  out << "# rotordyn wigner grid\n";
  out << "# tau=" << format_number(w.tau) << "\n";
  out << "# n_theta=" << g.n_theta() << "\n";
  out << "# n_phi=" << g.n_phi() << "\n";
  out << "theta:";
  for (double t : g.thetas) out << ' ' << format_number(t);
  out << "\ntheta_weights:";
  for (double t : g.theta_weights) out << ' ' << format_number(t);
  out << "\nphi:";
  for (double t : g.phis) out << ' ' << format_number(t);
  out << "\n";
  for (int i = 0; i < g.n_theta(); ++i) {
    for (int k = 0; k < g.n_phi(); ++k) {
      if (k) out << ' ';
      out << format_number(w.values(i, k));
    }
    out << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline wigner::WignerGrid read_wigner_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  wigner::WignerGrid w;
  int n_theta = -1, n_phi = -1;
  std::string line;
  auto read_values = [&](const std::string& payload) {
    std::vector<double> vals;
    std::istringstream is(payload);
    double v;
    while (is >> v) vals.push_back(v);
    return vals;
  };
  int row = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# tau=", 0) == 0) {
      w.tau = std::strtod(line.c_str() + 6, nullptr);
    } else if (line.rfind("# n_theta=", 0) == 0) {
      n_theta = std::atoi(line.c_str() + 10);
    } else if (line.rfind("# n_phi=", 0) == 0) {
      n_phi = std::atoi(line.c_str() + 8);
    } else if (line.rfind("#", 0) == 0 || line.empty()) {
      continue;
    } else if (line.rfind("theta:", 0) == 0) {
      w.grid.thetas = read_values(line.substr(6));
    } else if (line.rfind("theta_weights:", 0) == 0) {
      w.grid.theta_weights = read_values(line.substr(14));
    } else if (line.rfind("phi:", 0) == 0) {
      w.grid.phis = read_values(line.substr(4));
    } else {
      if (n_theta < 0 || n_phi < 0) throw io_error("wigner grid '" + path + "': missing header");
      if (w.values.size() == 0) w.values.resize(n_theta, n_phi);
      if (row >= n_theta) throw io_error("wigner grid '" + path + "': too many value rows");
      const auto vals = read_values(line);
      if (static_cast<int>(vals.size()) != n_phi)
        throw io_error("wigner grid '" + path + "': bad value row length");
      for (int k = 0; k < n_phi; ++k) w.values(row, k) = vals[k];
      ++row;
    }
  }
  if (row != n_theta || static_cast<int>(w.grid.thetas.size()) != n_theta ||
      static_cast<int>(w.grid.theta_weights.size()) != n_theta ||
      static_cast<int>(w.grid.phis.size()) != n_phi)
    throw io_error("wigner grid '" + path + "': incomplete file");
  return w;
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = detail_io::open_out(path);
  out << text;
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace rotordyn::io
