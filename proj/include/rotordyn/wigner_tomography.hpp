#pragma once

// Spherical phase-space representation: multipole (state) operators, per-j
// Wigner functions and their j-summed distribution, evaluated on a product
// quadrature grid (Gauss-Legendre in cos theta, uniform in phi).
//
// The summed distribution is not a complete description of the rotational
// state (it drops cross-j coherences by construction) but integrates to the
// trace and is the representation used for the phase-space snapshots.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/rotor_basis.hpp"
#include "rotordyn/specfun.hpp"

namespace rotordyn::wigner {

struct SphereGrid {
  std::vector<double> thetas;         // ascending theta, acos of GL nodes
  std::vector<double> theta_weights;  // GL weights (sum to 2)
  std::vector<double> phis;           // uniform on [0, 2pi)
  int n_theta() const { return static_cast<int>(thetas.size()); }
  int n_phi() const { return static_cast<int>(phis.size()); }
  double phi_weight() const { return 2.0 * std::numbers::pi / n_phi(); }
  // product quadrature weight of node (i, k); independent of k
  double weight(int i) const { return theta_weights[i] * phi_weight(); }
};

struct WignerGrid {
  Eigen::MatrixXd values;  // n_theta x n_phi
  SphereGrid grid;
  double tau = 0.0;
};

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int l = 0; l < n; ++l) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * l + 1.0) * x * p1 - l * p2) / (l + 1.0);
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[n - 1 - i] = weights[i];
  }
}

}  // namespace detail

inline SphereGrid make_sphere_grid(int n_theta = 64, int n_phi = 128) {
  if (n_theta < 2 || n_phi < 2)
    throw std::domain_error("make_sphere_grid: need n_theta >= 2 and n_phi >= 2");
  std::vector<double> x, w;
  detail::gauss_legendre(n_theta, x, w);
  SphereGrid g;
  g.thetas.resize(n_theta);
  g.theta_weights.resize(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    // descending x gives ascending theta
    g.thetas[i] = std::acos(x[n_theta - 1 - i]);
    g.theta_weights[i] = w[n_theta - 1 - i];
  }
  g.phis.resize(n_phi);
  for (int k = 0; k < n_phi; ++k) g.phis[k] = 2.0 * std::numbers::pi * k / n_phi;
  return g;
}

// Multipole operator T_{j,sm} as the (2j+1) x (2j+1) block within the
// j manifold, rows and columns ordered m' = -j..j:
//   T[m', m''] = sqrt(2s+1) (-1)^{j-m'} 3j(j, s, j; -m', m, m'').
inline Eigen::MatrixXcd multipole_matrix(int j, int s, int m) {
  if (j < 0 || s < 0 || std::abs(m) > s)
    throw std::domain_error("multipole_matrix: require j >= 0, 0 <= s, |m| <= s");
  const int n = 2 * j + 1;
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  if (s > 2 * j) return t;  // triangle rule: empty block
  const double root = std::sqrt(2.0 * s + 1.0);
  for (int mp = -j; mp <= j; ++mp) {
    const int mpp = mp - m;
    if (std::abs(mpp) > j) continue;
    const double sign = ((j - mp) & 1) ? -1.0 : 1.0;
    t(mp + j, mpp + j) = root * sign * specfun::wigner_3j(j, s, j, -mp, m, mpp);
  }
  return t;
}

namespace detail {

// Harmonic synthesis of W(theta, phi) = Re sum_{s,m} C_{sm} Y_sm on the grid.
// The imaginary residue of the full complex sum must stay below 1e-10; a
// larger residue signals a non-Hermitian input.
inline WignerGrid synthesize(const Eigen::MatrixXcd& coeff, int s_max, const SphereGrid& grid,
                             double tau) {
  const int nt = grid.n_theta();
  const int np = grid.n_phi();
  WignerGrid w;
  w.grid = grid;
  w.tau = tau;
  w.values.resize(nt, np);

  double max_imag = 0.0;
  std::vector<std::complex<double>> a_m(2 * s_max + 1);
  for (int i = 0; i < nt; ++i) {
    const double x = std::cos(grid.thetas[i]);
    const std::vector<double> leg = specfun::normalized_legendre_table(s_max, x);
    for (int m = -s_max; m <= s_max; ++m) {
      std::complex<double> acc(0.0, 0.0);
      const int ma = std::abs(m);
      const double neg = (m < 0 && (ma & 1)) ? -1.0 : 1.0;
      for (int s = ma; s <= s_max; ++s)
        acc += coeff(s, m + s_max) * (neg * leg[s * (s + 1) / 2 + ma]);
      a_m[m + s_max] = acc;
    }
    for (int k = 0; k < np; ++k) {
      std::complex<double> val(0.0, 0.0);
      for (int m = -s_max; m <= s_max; ++m)
        val += a_m[m + s_max] * std::exp(std::complex<double>(0.0, m * grid.phis[k]));
      max_imag = std::max(max_imag, std::abs(val.imag()));
      w.values(i, k) = val.real();
    }
  }
  if (max_imag > 1e-10)
    throw numerical_error("wigner synthesis: imaginary residue exceeds 1e-10; input not Hermitian");
  return w;
}

// Multipole coefficients sqrt((2j+1)/4pi) Tr(T^dag_{j,sm} sigma_j) of the
// j block, accumulated into coeff(s, m + s_max).
inline void accumulate_block_coefficients(const DensityMatrix& sigma, int j, int s_max,
                                          Eigen::MatrixXcd& coeff) {
  const double pre = std::sqrt((2.0 * j + 1.0) / (4.0 * std::numbers::pi));
  for (int s = 0; s <= 2 * j; ++s) {
    const double root = std::sqrt(2.0 * s + 1.0);
    for (int m = -s; m <= s; ++m) {
      std::complex<double> tr(0.0, 0.0);
      for (int mp = -j; mp <= j; ++mp) {
        const int mpp = mp - m;
        if (std::abs(mpp) > j) continue;
        const double sign = ((j - mp) & 1) ? -1.0 : 1.0;
        const double t = root * sign * specfun::wigner_3j(j, s, j, -mp, m, mpp);
        tr += t * sigma(basis_offset(j, mp), basis_offset(j, mpp));
      }
      coeff(s, m + s_max) += pre * tr;
    }
  }
}

}  // namespace detail

// Wigner function of the j block of sigma,
//   W_j = sqrt((2j+1)/4pi) sum_{s=0}^{2j} sum_m Y_sm Tr(T^dag_{j,sm} sigma_j).
// Integrates to the population of the block.
inline WignerGrid wigner_single_j(const DensityMatrix& sigma, int j, const SphereGrid& grid,
                                  double tau = 0.0) {
  const int s_max = 2 * j;
  Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(s_max + 1, 2 * s_max + 1);
  detail::accumulate_block_coefficients(sigma, j, s_max, coeff);
  return detail::synthesize(coeff, s_max, grid, tau);
}

// Sum of W_j over every j block of the truncated basis; integrates to Tr sigma.
inline WignerGrid wigner_total(const DensityMatrix& sigma, const SphereGrid& grid,
                               double tau = 0.0) {
  const int dim = static_cast<int>(sigma.rows());
  const int j_max = basis_index(dim - 1).j;
  const int s_max = 2 * j_max;
  Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(s_max + 1, 2 * s_max + 1);
  for (int j = 0; j <= j_max; ++j) detail::accumulate_block_coefficients(sigma, j, s_max, coeff);
  return detail::synthesize(coeff, s_max, grid, tau);
}

// Quadrature-weighted integral of the sampled distribution over the sphere.
inline double sphere_integral(const WignerGrid& w) {
  double acc = 0.0;
  for (int i = 0; i < w.grid.n_theta(); ++i) acc += w.grid.theta_weights[i] * w.values.row(i).sum();
  return acc * w.grid.phi_weight();
}

}  // namespace rotordyn::wigner
