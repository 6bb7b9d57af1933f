#pragma once

// Special functions used across the toolkit: complete elliptic integral K(m),
// Jacobi elliptic functions sn/cn/dn, Wigner 3j symbols, normalized associated
// Legendre functions and spherical harmonics.
//
// All functions are pure and reentrant.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rotordyn::specfun {

struct EllipticTriple {
  double sn;
  double cn;
  double dn;
};

// Complete elliptic integral of the first kind, K(m) = F(pi/2 | m), computed
// by the arithmetic-geometric mean. Parameter convention (not modulus k): the
// quarter period of sn(u, m) is K(m).
inline double complete_elliptic_k(double m) {
  if (!(m >= 0.0) || m >= 1.0)
    throw std::domain_error("complete_elliptic_k: parameter m must lie in [0, 1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int it = 0; it < 64 && std::abs(a - b) > 1e-16 * a; ++it) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (2.0 * a);
}

// Jacobi elliptic functions (sn, cn, dn)(u, m) via the descending Landen /
// AGM phase recursion. The parameter may exceed 1; that regime is mapped back
// to m' = 1/m < 1 through the reciprocal-modulus transformation
//   sn(u, m) = m^{-1/2} sn(u sqrt(m), 1/m),
//   cn(u, m) = dn(u sqrt(m), 1/m),
//   dn(u, m) = cn(u sqrt(m), 1/m).
inline EllipticTriple jacobi_elliptic(double u, double m) {
  if (!(m >= 0.0))
    throw std::domain_error("jacobi_elliptic: parameter m must be >= 0");
  if (m > 1.0) {
    const double k = std::sqrt(m);
    const EllipticTriple t = jacobi_elliptic(u * k, 1.0 / m);
    return {t.sn / k, t.dn, t.cn};
  }
  if (m < 1e-14) {
    const double s = std::sin(u);
    return {s, std::cos(u), std::sqrt(1.0 - m * s * s)};
  }
  if (1.0 - m < 1e-14) {
    const double c = 1.0 / std::cosh(u);
    return {std::tanh(u), c, c};
  }

  constexpr int kMaxLevel = 32;
  double a[kMaxLevel];
  double c[kMaxLevel];
  a[0] = 1.0;
  c[0] = std::sqrt(m);
  double b = std::sqrt(1.0 - m);
  int n = 0;
  while (std::abs(c[n]) > 4e-16 * a[n] && n + 1 < kMaxLevel) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  // Gauss transformation applied downward to the amplitude phi.
  double phi = std::ldexp(1.0, n) * a[n] * u;
  for (int i = n; i >= 1; --i) {
    const double s = std::clamp(c[i] / a[i] * std::sin(phi), -1.0, 1.0);
    phi = 0.5 * (phi + std::asin(s));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  const double dn = std::sqrt(std::max(0.0, 1.0 - m * sn * sn));
  return {sn, cn, dn};
}

namespace detail {

// ln(n!) lookup, sized for 3j symbols up to the largest multipole rank used
// by the tomography module (perimeter j1+j2+j3+1 entries).
inline double ln_factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(512, 0.0);
    for (std::size_t i = 2; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

// Doubles a half-integer argument, rejecting anything else.
inline int to_twice(double x, const char* name) {
  const double t = 2.0 * x;
  const double r = std::nearbyint(t);
  if (std::abs(t - r) > 1e-9)
    throw std::domain_error(std::string("wigner_3j: ") + name + " must be integer or half-integer");
  return static_cast<int>(r);
}

}  // namespace detail

// Wigner 3j symbol by the Racah closed-form sum with log-factorial
// stabilization. Out-of-domain symbols (triangle rule, m-sum, |m| > j)
// evaluate to exactly zero; non-half-integer inputs are rejected.
inline double wigner_3j(double j1, double j2, double j3,
                        double m1, double m2, double m3) {
  using detail::ln_factorial;
  const int tj1 = detail::to_twice(j1, "j1");
  const int tj2 = detail::to_twice(j2, "j2");
  const int tj3 = detail::to_twice(j3, "j3");
  const int tm1 = detail::to_twice(m1, "m1");
  const int tm2 = detail::to_twice(m2, "m2");
  const int tm3 = detail::to_twice(m3, "m3");

  if (tj1 < 0 || tj2 < 0 || tj3 < 0) return 0.0;
  if (((tj1 + tm1) | (tj2 + tm2) | (tj3 + tm3)) & 1) return 0.0;
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
  if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2)) return 0.0;
  if ((tj1 + tj2 + tj3) & 1) return 0.0;

  const double ln_pre =
      0.5 * (ln_factorial((tj1 + tj2 - tj3) / 2) + ln_factorial((tj1 - tj2 + tj3) / 2) +
             ln_factorial((-tj1 + tj2 + tj3) / 2) - ln_factorial((tj1 + tj2 + tj3) / 2 + 1) +
             ln_factorial((tj1 + tm1) / 2) + ln_factorial((tj1 - tm1) / 2) +
             ln_factorial((tj2 + tm2) / 2) + ln_factorial((tj2 - tm2) / 2) +
             ln_factorial((tj3 + tm3) / 2) + ln_factorial((tj3 - tm3) / 2));

  const int t_min = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
  const int t_max = std::min({(tj1 + tj2 - tj3) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});

  double sum = 0.0;
  for (int t = t_min; t <= t_max; ++t) {
    const double ln_term = ln_pre - ln_factorial(t) -
                           ln_factorial((tj1 + tj2 - tj3) / 2 - t) -
                           ln_factorial((tj1 - tm1) / 2 - t) -
                           ln_factorial((tj2 + tm2) / 2 - t) -
                           ln_factorial((tj3 - tj2 + tm1) / 2 + t) -
                           ln_factorial((tj3 - tj1 - tm2) / 2 + t);
    sum += ((t & 1) ? -1.0 : 1.0) * std::exp(ln_term);
  }
  const int phase_exp = (tj1 - tj2 - tm3) / 2;
  return ((phase_exp & 1) ? -1.0 : 1.0) * sum;
}

// Normalized associated Legendre functions with Condon-Shortley phase,
//   S_l^m(x) = sqrt((2l+1)(l-m)! / (4 pi (l+m)!)) P_l^m(x),  m >= 0,
// so that Y_lm = S_l^m(cos theta) e^{i m phi}. Returned packed for
// 0 <= m <= l <= l_max at index l(l+1)/2 + m. Stable well beyond l = 100.
inline std::vector<double> normalized_legendre_table(int l_max, double x) {
  if (l_max < 0) throw std::domain_error("normalized_legendre_table: l_max must be >= 0");
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  std::vector<double> tab((l_max + 1) * (l_max + 2) / 2);
  auto at = [&tab](int l, int m) -> double& { return tab[l * (l + 1) / 2 + m]; };

  at(0, 0) = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 1; m <= l_max; ++m)
    at(m, m) = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * at(m - 1, m - 1);
  for (int m = 0; m < l_max; ++m)
    at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * at(m, m);
  for (int m = 0; m <= l_max; ++m) {
    for (int l = m + 2; l <= l_max; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      const double lm1 = l - 1.0;
      const double b = std::sqrt((lm1 * lm1 - static_cast<double>(m) * m) / (4.0 * lm1 * lm1 - 1.0));
      at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
    }
  }
  return tab;
}

// Spherical harmonic Y_sm(theta, phi), Condon-Shortley convention.
inline std::complex<double> spherical_harmonic(int s, int m, double theta, double phi) {
  if (s < 0 || std::abs(m) > s)
    throw std::domain_error("spherical_harmonic: require s >= 0 and |m| <= s");
  const int ma = std::abs(m);
  const double x = std::cos(theta);
  // single-column recurrence along l at fixed |m|
  const double sx = std::abs(std::sin(theta));
  double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int k = 1; k <= ma; ++k)
    pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sx;
  double p = pmm;
  if (s > ma) {
    double pm1 = pmm;
    p = std::sqrt(2.0 * ma + 3.0) * x * pmm;
    for (int l = ma + 2; l <= s; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(ma) * ma));
      const double lm1 = l - 1.0;
      const double b = std::sqrt((lm1 * lm1 - static_cast<double>(ma) * ma) / (4.0 * lm1 * lm1 - 1.0));
      const double pn = a * (x * p - b * pm1);
      pm1 = p;
      p = pn;
    }
  }
  const double sign = (m < 0 && (ma & 1)) ? -1.0 : 1.0;
  return sign * p * std::exp(std::complex<double>(0.0, m * phi));
}

}  // namespace rotordyn::specfun
