#pragma once

// Classical dynamics of the molecular axis in a linearly polarised field:
// potentials, conserved quantities, the exact elliptic-function solution for
// the nutation angle, and an independent fixed-step RK4 integrator of the
// Euler-angle equations of motion.
//
// Unit system: hbar = 1, energies in units of hbar^2/(2 Theta), time is the
// dimensionless tau = t hbar / (2 Theta). With these units the kinetic energy
// is (theta_dot^2 + phi_dot^2 sin^2 theta)/4 and the angular momentum in
// units of hbar carries a factor 1/2 relative to the bare Euler-angle rates,
// e.g. L_z/hbar = phi_dot sin^2(theta) / 2.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/specfun.hpp"

namespace rotordyn::classical {

// Dimensionless potential depths: u_d = 2 Theta U_d / hbar^2 (permanent
// dipole), u_alpha = 2 Theta U_alpha / hbar^2 (polarisability).
struct ClassicalParams {
  double u_d = 0.0;
  double u_alpha = 0.0;
};

// Euler angles and their rates in scaled time.
struct ClassicalState {
  double theta = 0.0;
  double phi = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;
};

struct Conserved {
  double epsilon;  // E / U_alpha
  double kappa_z;  // T_z / U_alpha
};

// Constants of the closed-form nutation solution. The elliptic parameter is
// m = c_u / (c_u - c_l), which reduces to the compact 1/(epsilon+1) in the
// kappa_z = 0 regime of the preset runs; the general form follows from the cn
// addition theorem applied to the turning-point quartic and is validated
// against the ODE integrator for kappa_z > 0. m exceeds 1 for bounded motion
// (c_l > 0); that branch is handled by the reciprocal-modulus transformation
// inside the elliptic functions.
struct SolutionConstants {
  double m_ell;  // elliptic parameter c_u / (c_u - c_l)
  double c_l;    // lower turning point of cos^2 theta
  double c_u;    // upper turning point of cos^2 theta
  double omega;  // elliptic argument rate in scaled time
};

inline double potential_energy(double theta, const ClassicalParams& p) {
  const double c = std::cos(theta);
  return -p.u_d * c - p.u_alpha * c * c;
}

namespace detail {
inline double potential_derivative(double theta, const ClassicalParams& p) {
  return p.u_d * std::sin(theta) + p.u_alpha * std::sin(2.0 * theta);
}
}  // namespace detail

// Nutation potential U(theta) = T_z/sin^2(theta) + V(theta) with all terms in
// scaled energy units. Diverges at the poles whenever t_z > 0.
inline double effective_potential(double theta, double t_z, const ClassicalParams& p) {
  const double s = std::sin(theta);
  if (s == 0.0 && t_z > 0.0)
    throw numerical_error("effective_potential: centrifugal barrier diverges at theta = 0, pi");
  const double centrifugal = (t_z == 0.0) ? 0.0 : t_z / (s * s);
  return centrifugal + potential_energy(theta, p);
}

// Laboratory-frame angular momentum (L_x, L_y, L_z) in units of hbar.
inline std::array<double, 3> lab_angular_momentum(const ClassicalState& s) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double sp = std::sin(s.phi), cp = std::cos(s.phi);
  return {0.5 * (s.theta_dot * cp - s.phi_dot * st * ct * sp),
          0.5 * (s.theta_dot * sp + s.phi_dot * st * ct * cp),
          0.5 * s.phi_dot * st * st};
}

inline Conserved conserved_quantities(const ClassicalState& s, const ClassicalParams& p) {
  if (p.u_alpha <= 0.0)
    throw std::domain_error("conserved_quantities: scaled energies require u_alpha > 0");
  const double st = std::sin(s.theta);
  const double kin = 0.25 * (s.theta_dot * s.theta_dot + s.phi_dot * s.phi_dot * st * st);
  const double lz = 0.5 * s.phi_dot * st * st;
  return {(kin + potential_energy(s.theta, p)) / p.u_alpha, lz * lz / p.u_alpha};
}

inline SolutionConstants solution_constants(double epsilon, double kappa_z, double u_alpha) {
  if (!(epsilon > -1.0))
    throw std::domain_error("solution_constants: epsilon <= -1 lies below the potential minimum");
  const double disc = 0.25 * (1.0 + epsilon) * (1.0 + epsilon) - kappa_z;
  if (disc < 0.0)
    throw std::domain_error("solution_constants: no real turning points (kappa_z too large)");
  const double root = std::sqrt(disc);
  const double mid = 0.5 * (1.0 - epsilon);
  const double c_l = mid - root;
  const double c_u = mid + root;
  const double m = c_u / (c_u - c_l);
  return {m, c_l, c_u, 2.0 * std::sqrt(u_alpha * c_u / m)};
}

// Period after which the nutation returns to its initial mechanical state
// (cos theta together with its rate). For m <= 1 this is one full period of
// cn; for m > 1 the bounded dn-type oscillation needs two barrier reflections
// to restore the rate, hence two dn periods.
inline double nutation_period(const SolutionConstants& sc) {
  if (sc.m_ell <= 1.0)
    return 4.0 * specfun::complete_elliptic_k(sc.m_ell) / sc.omega;
  return 4.0 * specfun::complete_elliptic_k(1.0 / sc.m_ell) / (std::sqrt(sc.m_ell) * sc.omega);
}

// Closed-form cos theta(tau). The formula as printed fixes the branch with
// initially increasing theta; theta_dot0_sign < 0 selects the time-mirrored
// branch. theta0 exactly at a turning point is allowed (the square-root
// factor vanishes there).
inline double costheta_analytic(double tau, double theta0, const SolutionConstants& sc,
                                int theta_dot0_sign = +1) {
  const double x0 = std::cos(theta0);
  double x0sq = x0 * x0;
  const double tol = 1e-12 * std::max(1.0, std::abs(sc.c_u));
  if (x0sq < sc.c_l - tol || x0sq > sc.c_u + tol)
    throw std::domain_error("costheta_analytic: cos^2(theta0) outside [c_l, c_u]");
  x0sq = std::clamp(x0sq, std::max(sc.c_l, 0.0), sc.c_u);

  const double arg = (theta_dot0_sign >= 0 ? 1.0 : -1.0) * sc.omega * tau;
  const auto [sn, cn, dn] = specfun::jacobi_elliptic(arg, sc.m_ell);
  const double cross = std::sqrt(std::max(0.0, (x0sq - sc.c_l) * (sc.c_u - x0sq) * sc.m_ell / sc.c_u));
  const double num = x0 * cn - cross * sn * dn;
  const double den = 1.0 - (sc.c_u - x0sq) * (sc.m_ell / sc.c_u) * sn * sn;
  return std::clamp(num / den, -1.0, 1.0);
}

namespace detail {

// Map an unconstrained chart angle back to theta in [0, pi], phi in [0, 2pi).
// Crossing a pole flips the reported theta_dot and advances phi by pi; this
// is the smooth great-circle motion expressed in chart coordinates.
inline ClassicalState fold_state(double theta_raw, double phi_raw, double theta_dot_raw,
                                 double lz) {
  double t = std::fmod(theta_raw, 2.0 * std::numbers::pi);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  double phi = phi_raw;
  double tdot = theta_dot_raw;
  if (t > std::numbers::pi) {
    t = 2.0 * std::numbers::pi - t;
    phi += std::numbers::pi;
    tdot = -tdot;
  }
  double p = std::fmod(phi, 2.0 * std::numbers::pi);
  if (p < 0.0) p += 2.0 * std::numbers::pi;
  const double st = std::sin(t);
  const double pdot = (lz == 0.0 || st == 0.0) ? 0.0 : 2.0 * lz / (st * st);
  return {t, p, tdot, pdot};
}

}  // namespace detail

// Fixed-step RK4 integration of the nutation equation
//   theta_ddot = phi_dot^2 sin(theta) cos(theta) - 2 V'(theta),
// with phi_dot slaved to the conserved L_z. States are reported at the given
// monotone grid times, folded back to theta in [0, pi]. A step size of 0
// selects the default 1e-3 of the nutation period (or of a free-rotation
// scale when u_alpha vanishes).
inline std::vector<ClassicalState> integrate_ode(const ClassicalState& s0,
                                                 const ClassicalParams& p,
                                                 const std::vector<double>& t_grid,
                                                 double dt = 0.0) {
  const double st0 = std::sin(s0.theta);
  const double lz = 0.5 * s0.phi_dot * st0 * st0;

  if (dt <= 0.0) {
    double omega_scale = 0.0;
    if (p.u_alpha > 0.0) {
      const Conserved c = conserved_quantities(s0, p);
      if (c.epsilon > -1.0) omega_scale = solution_constants(c.epsilon, c.kappa_z, p.u_alpha).omega;
    }
    omega_scale = std::max({omega_scale, std::abs(s0.theta_dot), std::abs(s0.phi_dot),
                            2.0 * std::sqrt(p.u_d + p.u_alpha), 1e-3});
    dt = 1e-3 * (2.0 * std::numbers::pi / omega_scale);
  }

  // raw chart variables y = (theta, theta_dot, phi), theta unconstrained
  double y[3] = {s0.theta, s0.theta_dot, s0.phi};
  auto rhs = [&](const double* y_in, double* dy) {
    const double st = std::sin(y_in[0]);
    double pdot = 0.0;
    if (lz != 0.0) {
      if (std::abs(st) < 1e-8)
        throw numerical_error(
            "integrate_ode: trajectory reached the centrifugal singularity; reduce the step size");
      pdot = 2.0 * lz / (st * st);
    }
    dy[0] = y_in[1];
    dy[1] = pdot * pdot * st * std::cos(y_in[0]) - 2.0 * detail::potential_derivative(y_in[0], p);
    dy[2] = pdot;
  };
  auto step = [&](double h) {
    double k1[3], k2[3], k3[3], k4[3], tmp[3];
    rhs(y, k1);
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp, k4);
    for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };

  std::vector<ClassicalState> out;
  out.reserve(t_grid.size());
  double t_now = t_grid.empty() ? 0.0 : t_grid.front();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && !(t_grid[i] >= t_grid[i - 1]))
      throw std::domain_error("integrate_ode: t_grid must be monotone non-decreasing");
    const double span = t_grid[i] - t_now;
    if (span > 0.0) {
      const int n_sub = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
      const double h = span / n_sub;
      for (int k = 0; k < n_sub; ++k) step(h);
      t_now = t_grid[i];
    }
    out.push_back(detail::fold_state(y[0], y[2], y[1], lz));
  }
  return out;
}

}  // namespace rotordyn::classical
