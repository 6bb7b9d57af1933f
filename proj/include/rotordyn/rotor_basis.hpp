#pragma once

// Truncated angular-momentum Hilbert space |j,m>, j <= j_max, and the
// operators and states living on it: direction-cosine matrices, kinetic and
// light-induced potential terms, spontaneous-Raman jump operators, angular
// momentum components, coherent and superposition states.
//
// Basis ordering: k = j^2 + j + m, so each j block is contiguous.
// Units: hbar = 1, energies in hbar^2/(2 Theta).

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <iostream>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/specfun.hpp"

namespace rotordyn {

using OperatorMatrix = Eigen::MatrixXcd;
using PureState = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;

// Dimensionless model parameters. u = 2 Theta U_alpha / hbar^2 is the
// light-induced potential depth, identical to the scaled Raman rate
// 2 Theta Omega_R / hbar since U_alpha = hbar Omega_R. gamma_ratio is
// Gamma/Delta, the relative rate of spontaneous vs stimulated transitions;
// the scaled jump rate is gamma_ratio * u.
struct ModelParams {
  double u = 0.1;
  double gamma_ratio = 0.0;
  int j_max = 12;
};

struct BasisIndex {
  int j;
  int m;
};

constexpr int basis_dim(int j_max) { return (j_max + 1) * (j_max + 1); }

constexpr int basis_offset(int j, int m) { return j * j + j + m; }

inline BasisIndex basis_index(int k) {
  int j = static_cast<int>(std::sqrt(static_cast<double>(k)));
  while ((j + 1) * (j + 1) <= k) ++j;
  while (j * j > k) --j;
  return {j, k - j * j - j};
}

inline void validate(const ModelParams& p) {
  if (p.u < 0.0) throw std::domain_error("ModelParams: u must be >= 0");
  if (p.gamma_ratio < 0.0) throw std::domain_error("ModelParams: gamma_ratio must be >= 0");
  if (p.j_max < 2) throw std::domain_error("ModelParams: j_max must be >= 2");
  if (p.gamma_ratio > 0.1)
    std::cerr << "rotordyn: warning: gamma_ratio = " << p.gamma_ratio
              << " is outside the perturbative regime (expected << 1)\n";
}

inline bool is_hermitian(const OperatorMatrix& a, double tol = 1e-12) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

enum class Axis { x, y, z };

namespace detail {

// Matrix of the rank-1 spherical tensor component n_q = sqrt(4 pi / 3) Y_1q
// in the |j,m> basis (Wigner-Eckart with the Gaunt integral).
inline OperatorMatrix spherical_unit_component(int q, int j_max) {
  const int dim = basis_dim(j_max);
  OperatorMatrix n = OperatorMatrix::Zero(dim, dim);
  for (int j = 0; j <= j_max; ++j) {
    for (int jp : {j - 1, j + 1}) {
      if (jp < 0 || jp > j_max) continue;
      const double reduced = specfun::wigner_3j(jp, 1, j, 0, 0, 0) *
                             std::sqrt((2.0 * jp + 1.0) * (2.0 * j + 1.0));
      for (int m = -j; m <= j; ++m) {
        const int mp = m + q;
        if (std::abs(mp) > jp) continue;
        const double g = reduced * specfun::wigner_3j(jp, 1, j, -mp, q, m);
        const double sign = (mp & 1) ? -1.0 : 1.0;  // (-1)^{m'}
        n(basis_offset(jp, mp), basis_offset(j, m)) = sign * g;
      }
    }
  }
  return n;
}

}  // namespace detail

// Multiplication operator for the Cartesian component of the molecular-axis
// unit vector: n_z = cos(theta), n_x = sin(theta)cos(phi),
// n_y = sin(theta)sin(phi). n_z couples j -> j+-1 at fixed m; n_x and n_y
// couple j -> j+-1 and m -> m+-1.
inline OperatorMatrix direction_cosine(Axis axis, int j_max) {
  using detail::spherical_unit_component;
  const std::complex<double> i_unit(0.0, 1.0);
  switch (axis) {
    case Axis::z:
      return spherical_unit_component(0, j_max);
    case Axis::x:
      return (spherical_unit_component(-1, j_max) - spherical_unit_component(+1, j_max)) /
             std::sqrt(2.0);
    case Axis::y:
    default:
      return i_unit *
             (spherical_unit_component(-1, j_max) + spherical_unit_component(+1, j_max)) /
             std::sqrt(2.0);
  }
}

// Kinetic energy J^2/(2 Theta): diagonal j(j+1) in scaled units.
inline OperatorMatrix kinetic(int j_max) {
  const int dim = basis_dim(j_max);
  OperatorMatrix t = OperatorMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const int j = basis_index(k).j;
    t(k, k) = static_cast<double>(j) * (j + 1);
  }
  return t;
}

// Light-induced potential V = -u n_z^2; couples j -> j, j+-2 at fixed m.
inline OperatorMatrix potential(const ModelParams& p) {
  const OperatorMatrix nz = direction_cosine(Axis::z, p.j_max);
  return -p.u * (nz * nz);
}

// Spontaneous-Raman jump operators S_i = sqrt(gamma_ratio * u) n_i n_z for
// i = x, y, z, with the scaled rate convention described at ModelParams.
inline std::array<OperatorMatrix, 3> jump_operators(const ModelParams& p) {
  const double root_rate = std::sqrt(p.gamma_ratio * p.u);
  const OperatorMatrix nz = direction_cosine(Axis::z, p.j_max);
  return {root_rate * (direction_cosine(Axis::x, p.j_max) * nz),
          root_rate * (direction_cosine(Axis::y, p.j_max) * nz),
          root_rate * (nz * nz)};
}

struct AngularMomentumMatrices {
  OperatorMatrix jx, jy, jz;
};

// Block-diagonal J_x, J_y, J_z from the standard ladder construction.
inline AngularMomentumMatrices angular_momentum_matrices(int j_max) {
  const int dim = basis_dim(j_max);
  OperatorMatrix jp = OperatorMatrix::Zero(dim, dim);
  OperatorMatrix jz = OperatorMatrix::Zero(dim, dim);
  for (int j = 0; j <= j_max; ++j) {
    for (int m = -j; m <= j; ++m) {
      jz(basis_offset(j, m), basis_offset(j, m)) = m;
      if (m < j)
        jp(basis_offset(j, m + 1), basis_offset(j, m)) =
            std::sqrt(static_cast<double>(j) * (j + 1) - static_cast<double>(m) * (m + 1));
    }
  }
  const std::complex<double> i_unit(0.0, 1.0);
  return {(jp + jp.adjoint()) / 2.0, (jp - jp.adjoint()) / (2.0 * i_unit), jz};
}

// Coherent angular-momentum state |j, alpha, beta> embedded in the full
// basis; amplitudes sqrt(C(2j, j+m)) sin(alpha/2)^{j+m} cos(alpha/2)^{j-m}
// e^{-i (j+m) beta} on |j,m>.
inline PureState coherent_state(int j, double alpha, double beta, int j_max) {
  if (j < 0 || j > j_max)
    throw std::domain_error("coherent_state: j must satisfy 0 <= j <= j_max");
  PureState psi = PureState::Zero(basis_dim(j_max));
  const double sa = std::sin(0.5 * alpha);
  const double ca = std::cos(0.5 * alpha);
  for (int m = -j; m <= j; ++m) {
    const double ln_binom = specfun::detail::ln_factorial(2 * j) -
                            specfun::detail::ln_factorial(j + m) -
                            specfun::detail::ln_factorial(j - m);
    const double mag = std::exp(0.5 * ln_binom) * std::pow(sa, j + m) * std::pow(ca, j - m);
    psi(basis_offset(j, m)) = mag * std::exp(std::complex<double>(0.0, -(j + m) * beta));
  }
  psi.normalize();
  return psi;
}

struct CoherentSpec {
  std::complex<double> weight{1.0, 0.0};
  int j = 2;
  double alpha = 0.0;
  double beta = 0.0;
};

// Weighted sum of coherent states, renormalized to unit norm. Destructive
// interference down to the zero vector is rejected.
inline PureState superposition_state(const std::vector<CoherentSpec>& components, int j_max) {
  if (components.empty())
    throw std::domain_error("superposition_state: need at least one component");
  PureState psi = PureState::Zero(basis_dim(j_max));
  double weight_scale = 0.0;
  for (const auto& c : components) {
    psi += c.weight * coherent_state(c.j, c.alpha, c.beta, j_max);
    weight_scale += std::abs(c.weight);
  }
  const double n = psi.norm();
  if (n <= 1e-12 * std::max(weight_scale, 1.0))
    throw numerical_error("superposition_state: components interfere to the zero vector");
  return psi / n;
}

}  // namespace rotordyn
