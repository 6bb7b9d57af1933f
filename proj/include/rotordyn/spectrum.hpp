#pragma once

// Energy spectrum of the light-dressed rotor. The fixed-m blocks of T + V
// (couplings Delta l = 0, +-2 only) are diagonalized with a dense symmetric
// eigensolver; the first-order spheroidal expansion serves as an independent
// cross-check. Levels are labeled by adiabatic continuation from u = 0,
// i.e. ascending order within each m block.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/rotor_basis.hpp"

namespace rotordyn::spectrum {

struct LevelShift {
  int l;
  int m_abs;
  double energy;  // scaled units hbar^2/(2 Theta)
  double shift;   // energy - l(l+1)
};

// Eigenvalues of the fixed-m block spanning l = |m| .. l_max, ascending.
// When check_levels > 0 the lowest check_levels eigenvectors must carry at
// most 1e-8 weight in the top two shells, otherwise the basis is too small.
inline std::vector<double> eigenenergies_numeric(int m, double u, int l_max,
                                                 int check_levels = 0) {
  const int ma = std::abs(m);
  if (l_max < ma) throw std::domain_error("eigenenergies_numeric: l_max < |m|");
  const int n = l_max - ma + 1;

  // same operator content as the dynamics: j(j+1) diagonal plus -u <cos^2>
  const OperatorMatrix nz = direction_cosine(Axis::z, l_max);
  const OperatorMatrix nz2 = nz * nz;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const int la = ma + a;
    block(a, a) = static_cast<double>(la) * (la + 1);
    for (int b = a; b < n; ++b) {
      const int lb = ma + b;
      const double v = -u * nz2(basis_offset(la, m), basis_offset(lb, m)).real();
      block(a, b) += v;
      block(b, a) = block(a, b);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  if (solver.info() != Eigen::Success)
    throw convergence_error("eigenenergies_numeric: eigensolver failed");

  for (int k = 0; k < check_levels && k < n; ++k) {
    double tail = 0.0;
    for (int a = std::max(0, n - 2); a < n; ++a) {
      const double c = solver.eigenvectors()(a, k);
      tail += c * c;
    }
    if (tail > 1e-8)
      throw convergence_error("eigenenergies_numeric: level " + std::to_string(ma + k) +
                              " leaks into the top shells; increase l_max");
  }
  return {solver.eigenvalues().data(), solver.eigenvalues().data() + n};
}

// First-order expansion of the oblate-spheroidal eigenvalues,
// E = l(l+1) - (u/2) [1 + (1 - 4 m^2) / ((2l-1)(2l+3))].
inline double eigenenergies_perturbative(int l, int m, double u) {
  if (l < 0 || std::abs(m) > l)
    throw std::domain_error("eigenenergies_perturbative: require 0 <= |m| <= l");
  const double denom = (2.0 * l - 1.0) * (2.0 * l + 3.0);
  return static_cast<double>(l) * (l + 1) -
         0.5 * u * (1.0 + (1.0 - 4.0 * static_cast<double>(m) * m) / denom);
}

// Level shifts E(l, |m|) - l(l+1) for all l <= l_max, grouped by (l, |m|).
// An internal convergence buffer of six extra shells is used.
inline std::vector<LevelShift> level_shift_table(double u, int l_max) {
  const int basis_l_max = l_max + 6;
  std::vector<LevelShift> table;
  for (int m = 0; m <= l_max; ++m) {
    const std::vector<double> ev = eigenenergies_numeric(m, u, basis_l_max, l_max - m + 1);
    for (int k = 0; k + m <= l_max; ++k) {
      const int l = m + k;
      table.push_back({l, m, ev[k], ev[k] - static_cast<double>(l) * (l + 1)});
    }
  }
  std::sort(table.begin(), table.end(), [](const LevelShift& a, const LevelShift& b) {
    return a.l != b.l ? a.l < b.l : a.m_abs < b.m_abs;
  });
  return table;
}

}  // namespace rotordyn::spectrum
