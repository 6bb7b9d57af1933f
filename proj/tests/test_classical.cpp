#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "rotordyn/classical_rotor.hpp"

using namespace rotordyn;
using classical::ClassicalParams;
using classical::ClassicalState;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// fig4/fig5-preset initial states: axis at the north pole launched along phi = 0 with
// L_x(0)/hbar = lx0, so theta_dot = 2 lx0 in scaled time.
ClassicalState polar_launch(double lx0) { return {0.0, 0.0, 2.0 * lx0, 0.0}; }

}  // namespace

TEST_CASE("potential energy closed forms", "[classical]") {
  CHECK(classical::potential_energy(0.0, {0.0, 1.0}) == Catch::Approx(-1.0));
  CHECK(classical::potential_energy(std::numbers::pi / 2, {3.0, 7.0}) ==
        Catch::Approx(0.0).margin(1e-12));
  // antiparallel dipole cancels the polarisability term
  CHECK(classical::potential_energy(std::numbers::pi, {1.0, 1.0}) ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("effective potential barrier", "[classical]") {
  const ClassicalParams p{0.0, 1.0};
  CHECK(classical::effective_potential(std::numbers::pi / 2, 0.1, p) ==
        Catch::Approx(0.1).margin(1e-12));
  CHECK_THROWS_AS(classical::effective_potential(0.0, 0.1, p), numerical_error);
  // kappa_z = 0.1: double well with diverging walls near the poles
  const double t_z = 0.1;
  CHECK(classical::effective_potential(1e-4, t_z, p) > 1e6);
  CHECK(classical::effective_potential(std::numbers::pi - 1e-4, t_z, p) > 1e6);
  const double mid = classical::effective_potential(std::numbers::pi / 2, t_z, p);
  const double well = classical::effective_potential(0.5, t_z, p);
  CHECK(well < mid);  // off-equator minimum between wall and hump
}

TEST_CASE("conserved quantities reproduce the preset parameters", "[classical]") {
  const ClassicalParams p{0.0, 0.025};
  // L_x(0)/hbar = 0.16 -> epsilon = 0.16^2/0.025 - 1 = 0.024
  auto c = classical::conserved_quantities(polar_launch(0.16), p);
  CHECK(c.epsilon == Catch::Approx(0.024).margin(1e-12));
  CHECK(c.kappa_z == Catch::Approx(0.0).margin(1e-15));
  // L_x(0)/hbar = 0.15 -> epsilon = -0.1
  c = classical::conserved_quantities(polar_launch(0.15), p);
  CHECK(c.epsilon == Catch::Approx(-0.1).margin(1e-12));
  // static aligned state sits at the potential minimum
  c = classical::conserved_quantities({0.0, 0.0, 0.0, 0.0}, p);
  CHECK(c.epsilon == Catch::Approx(-1.0));
  CHECK(c.kappa_z == Catch::Approx(0.0));
  CHECK_THROWS_AS(classical::conserved_quantities(polar_launch(0.1), {1.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("solution constants", "[classical]") {
  auto sc = classical::solution_constants(0.024, 0.0, 0.025);
  CHECK(sc.m_ell == Catch::Approx(1.0 / 1.024).epsilon(1e-12));
  // kappa_z = 0 turning points: c_l = -epsilon, c_u = 1
  CHECK(sc.c_l == Catch::Approx(-0.024).margin(1e-12));
  CHECK(sc.c_u == Catch::Approx(1.0).margin(1e-12));
  CHECK(sc.omega == Catch::Approx(0.32).margin(1e-12));  // = 2 L_x / hbar at the pole

  // bounded regime: the elliptic parameter exceeds 1
  sc = classical::solution_constants(-0.1, 0.0, 0.025);
  CHECK(sc.m_ell == Catch::Approx(1.0 / 0.9).epsilon(1e-12));
  CHECK(sc.c_l == Catch::Approx(0.1).margin(1e-12));

  CHECK_THROWS_AS(classical::solution_constants(-1.0, 0.0, 0.025), std::domain_error);
  CHECK_THROWS_AS(classical::solution_constants(0.5, 10.0, 0.025), std::domain_error);
}

TEST_CASE("analytic solution limits", "[classical]") {
  // t = 0 reproduces the initial angle exactly
  auto sc = classical::solution_constants(0.3, 0.05, 0.025);
  for (double th0 : {0.4, 1.0, 2.0})
    CHECK(classical::costheta_analytic(0.0, th0, sc) == Catch::Approx(std::cos(th0)).margin(1e-14));
  // bounded regime rejects an initial angle outside the turning points
  CHECK_THROWS_AS(
      classical::costheta_analytic(1.0, 1.5707, classical::solution_constants(-0.1, 0.0, 0.025)),
      std::domain_error);

  // free-rotator limit: cos(theta_0 + omega t) for the increasing branch,
  // with the O(m) phase correction m omega t / 4 bounding the residual
  sc = classical::solution_constants(1.0e4, 0.0, 0.025);
  for (double tau : {0.3, 1.1, 2.6}) {
    const double expect = std::cos(0.7 + sc.omega * tau);
    CHECK(classical::costheta_analytic(tau, 0.7, sc, +1) == Catch::Approx(expect).margin(5e-3));
  }
}

TEST_CASE("ode cross-validates the elliptic solution", "[classical]") {
  const ClassicalParams p{0.0, 0.025};

  // generic interior start, both launch directions, kappa_z = 0
  for (int sign : {+1, -1}) {
    const ClassicalState s0{1.0, 0.3, sign * 0.2, 0.0};
    const auto c = classical::conserved_quantities(s0, p);
    const auto sc = classical::solution_constants(c.epsilon, c.kappa_z, p.u_alpha);
    const auto grid = linspace(0.0, 2.5 * classical::nutation_period(sc), 400);
    const auto states = classical::integrate_ode(s0, p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::cos(states[i].theta) ==
            Catch::Approx(classical::costheta_analytic(grid[i], 1.0, sc, sign)).margin(1e-6));
  }

  // precessing case with a centrifugal barrier (kappa_z > 0)
  {
    const ClassicalState s0{1.2, 0.0, -0.1, 0.3};
    const auto c = classical::conserved_quantities(s0, p);
    REQUIRE(c.kappa_z > 0.0);
    const auto sc = classical::solution_constants(c.epsilon, c.kappa_z, p.u_alpha);
    const auto grid = linspace(0.0, 2.0 * classical::nutation_period(sc), 300);
    const auto states = classical::integrate_ode(s0, p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::cos(states[i].theta) ==
            Catch::Approx(classical::costheta_analytic(grid[i], 1.2, sc, -1)).margin(1e-6));
  }
}

TEST_CASE("nutation regimes: full-range vs bounded", "[classical]") {
  const ClassicalParams p{0.0, 0.025};

  // solid curve: epsilon = 0.024, unbound, |cos theta| reaches both poles;
  // the 3001-point grid over three periods samples the exact turning times
  {
    const ClassicalState s0 = polar_launch(0.16);
    const auto sc = classical::solution_constants(0.024, 0.0, p.u_alpha);
    const auto grid = linspace(0.0, 3.0 * classical::nutation_period(sc), 3001);
    const auto states = classical::integrate_ode(s0, p, grid);
    double lo = 1.0, hi = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ca = classical::costheta_analytic(grid[i], 0.0, sc, +1);
      CHECK(std::cos(states[i].theta) == Catch::Approx(ca).margin(1e-6));
      lo = std::min(lo, std::cos(states[i].theta));
      hi = std::max(hi, std::cos(states[i].theta));
    }
    CHECK(hi > 1.0 - 1e-6);
    CHECK(lo < -1.0 + 1e-6);
  }

  // dashed curve: epsilon = -0.1, reflected at the light-induced barrier
  {
    const ClassicalState s0 = polar_launch(0.15);
    const auto sc = classical::solution_constants(-0.1, 0.0, p.u_alpha);
    const auto grid = linspace(0.0, 3.0 * classical::nutation_period(sc), 3001);
    const auto states = classical::integrate_ode(s0, p, grid);
    double lo = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ca = classical::costheta_analytic(grid[i], 0.0, sc, +1);
      CHECK(std::cos(states[i].theta) == Catch::Approx(ca).margin(1e-6));
      lo = std::min(lo, std::cos(states[i].theta));
    }
    // bounded motion: cos theta never leaves the cap |cos| >= sqrt(0.1)
    CHECK(lo > std::sqrt(0.1) - 1e-6);
  }
}

TEST_CASE("angular momentum sign pattern over one nutation period", "[classical]") {
  const ClassicalParams p{0.0, 0.025};
  auto count_sign_flips = [&p](double lx0) {
    const ClassicalState s0 = polar_launch(lx0);
    const auto c = classical::conserved_quantities(s0, p);
    const auto sc = classical::solution_constants(c.epsilon, c.kappa_z, p.u_alpha);
    const auto grid = linspace(0.0, classical::nutation_period(sc), 4000);
    const auto states = classical::integrate_ode(s0, p, grid);
    int flips = 0;
    double prev = classical::lab_angular_momentum(states.front())[0];
    for (const auto& s : states) {
      const double lx = classical::lab_angular_momentum(s)[0];
      if (lx * prev < 0.0) ++flips;
      if (lx != 0.0) prev = lx;
    }
    return flips;
  };
  CHECK(count_sign_flips(0.16) == 0);  // continuous rotation about x
  CHECK(count_sign_flips(0.15) == 2);  // one flip at each barrier reflection
}

TEST_CASE("ode conservation over ten periods", "[classical]") {
  const ClassicalParams p{0.0, 0.025};
  const ClassicalState s0{1.2, 0.1, -0.1, 0.3};
  const auto c0 = classical::conserved_quantities(s0, p);
  const auto sc = classical::solution_constants(c0.epsilon, c0.kappa_z, p.u_alpha);
  const auto grid = linspace(0.0, 10.0 * classical::nutation_period(sc), 200);
  const auto states = classical::integrate_ode(s0, p, grid);
  for (const auto& s : states) {
    const auto c = classical::conserved_quantities(s, p);
    CHECK(c.epsilon == Catch::Approx(c0.epsilon).margin(1e-6));
    CHECK(c.kappa_z == Catch::Approx(c0.kappa_z).margin(1e-8));
    // L_z is the conserved momentum itself
    CHECK(classical::lab_angular_momentum(s)[2] ==
          Catch::Approx(classical::lab_angular_momentum(s0)[2]).margin(1e-8));
  }
}

TEST_CASE("free rotor is uniform rotation", "[classical]") {
  const ClassicalParams p{0.0, 0.0};
  const ClassicalState s0{0.6, 0.0, 0.5, 0.0};
  const auto grid = linspace(0.0, 8.0, 100);
  const auto states = classical::integrate_ode(s0, p, grid, 1e-3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // chart angle grows linearly; compare through cos to absorb folding
    CHECK(std::cos(states[i].theta) ==
          Catch::Approx(std::cos(0.6 + 0.5 * grid[i])).margin(1e-9));
    const auto l = classical::lab_angular_momentum(states[i]);
    CHECK(l[0] == Catch::Approx(0.25).margin(1e-9));
    CHECK(l[2] == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("singular input guards", "[classical]") {
  // an oversized step that lands a stage on the pole with L_z != 0 is refused
  const ClassicalParams p{0.0, 0.025};
  const ClassicalState s0{0.5, 0.0, -2.0, 1.0};
  CHECK_THROWS_AS(classical::integrate_ode(s0, p, {0.0, 1.0}, 0.5), numerical_error);
}
