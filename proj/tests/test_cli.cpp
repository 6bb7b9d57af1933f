#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rotordyn/output.hpp"
#include "rotordyn/scenario.hpp"
#include "rotordyn/scenario_config.hpp"

using namespace rotordyn;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("rotordyn_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string prefix(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("config defaults and the fig9 preset mapping", "[cli]") {
  // empty document plus command-line scenario: all defaults
  const auto cfg = parse_config("", Scenario::evolve_unitary);
  CHECK(cfg.u == Approx(0.1));
  CHECK(cfg.j_max == 12);
  CHECK(cfg.state == "coherent");
  CHECK(cfg.state_j == 2);
  CHECK(cfg.state_alpha == Approx(std::numbers::pi / 2));

  // the fig9-preset run is a three-line config
  const auto fig9 = parse_config("u = 0.1\ngamma_ratio = 0.01\nstate = coherent\n",
                                 Scenario::evolve_master);
  CHECK(fig9.u == Approx(0.1));
  CHECK(fig9.gamma_ratio == Approx(0.01));
  CHECK(fig9.state_beta == Approx(0.0));
}

TEST_CASE("config rejects bad input with line numbers", "[cli]") {
  // unknown key is a hard error naming the line
  try {
    parse_config("u = 0.1\nuu = 3\n", Scenario::evolve_unitary);
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  // malformed value
  CHECK_THROWS_AS(parse_config("u = banana\n", Scenario::evolve_unitary), parse_error);
  // negative coupling rejected
  CHECK_THROWS_AS(parse_config("u = -1\n", Scenario::evolve_unitary), parse_error);
  // inconsistent combination: n_traj with evolve-master
  CHECK_THROWS_AS(parse_config("n_traj = 100\n", Scenario::evolve_master), parse_error);
  // classical keys rejected for quantum scenarios
  CHECK_THROWS_AS(parse_config("theta0 = 1\n", Scenario::evolve_unitary), parse_error);
  // scenario conflict between file and command line
  CHECK_THROWS_AS(parse_config("scenario = classical\n", Scenario::spectrum), parse_error);
  // no scenario at all
  CHECK_THROWS_AS(parse_config("u = 0.1\n"), parse_error);
}

TEST_CASE("config comments, overrides and components", "[cli]") {
  const std::string text =
      "# preset\n"
      "scenario = wigner-snapshots\n"
      "u = 0.1  # interaction strength\n"
      "gamma_ratio = 0.01\n"
      "state = superposition\n"
      "components = 1 0 2 1.5707963267948966 0.7853981633974483 ; "
      "1 0 2 1.5707963267948966 -0.7853981633974483\n"
      "snapshot_times = 660 830 990 1165\n";
  const auto cfg = parse_config(text);
  CHECK(cfg.scenario == Scenario::wigner_snapshots);
  REQUIRE(cfg.components.size() == 2);
  CHECK(cfg.components[1].beta == Approx(-std::numbers::pi / 4));
  CHECK(cfg.snapshot_times.size() == 4);

  // --set overrides win over the file
  const auto cfg2 = parse_config("u = 0.1\n", Scenario::evolve_unitary, {"u=0.25", "j_max=6"});
  CHECK(cfg2.u == Approx(0.25));
  CHECK(cfg2.j_max == 6);
  CHECK_THROWS_AS(parse_config("", Scenario::evolve_unitary, {"nonsense=1"}), parse_error);
}

TEST_CASE("resolved config echo round-trips", "[cli]") {
  const auto cfg = parse_config("u = 0.07\ngamma_ratio = 0.02\nj_max = 6\n",
                                Scenario::evolve_master);
  const auto again = parse_config(render_config(cfg));
  CHECK(again.scenario == cfg.scenario);
  CHECK(again.u == cfg.u);
  CHECK(again.gamma_ratio == cfg.gamma_ratio);
  CHECK(again.j_max == cfg.j_max);
}

TEST_CASE("number formatting is 12 significant digits", "[cli]") {
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_number(-2.5e-13) == "-2.5e-13");
}

TEST_CASE("wigner grid file round-trip", "[cli]") {
  TempDir tmp;
  const auto grid = wigner::make_sphere_grid(16, 32);
  const PureState psi = coherent_state(2, std::numbers::pi / 2, 0.0, 3);
  wigner::WignerGrid w = wigner::wigner_total(psi * psi.adjoint(), grid, 12.5);

  const std::string path = tmp.prefix("grid.wig");
  io::write_wigner_grid(path, w);
  const auto r = io::read_wigner_grid(path);
  CHECK(r.tau == Approx(12.5));
  CHECK(r.grid.n_theta() == 16);
  CHECK(r.grid.n_phi() == 32);
  CHECK((r.values - w.values).cwiseAbs().maxCoeff() < 1e-10);
  // quadrature-summing the re-read grid still gives the trace
  CHECK(wigner::sphere_integral(r) == Approx(1.0).margin(1e-8));
}

TEST_CASE("classical scenario writes the fig4 preset run", "[cli]") {
  TempDir tmp;
  auto cfg = parse_config(
      "u = 0.025\nu_d = 0\ntheta0 = 0\nphi0 = 0\ntheta_dot0 = 0.32\nphi_dot0 = 0\n"
      "record_stride = 200\n",
      Scenario::classical);
  const auto result = run_scenario(cfg, tmp.prefix("fig4"));
  const std::string csv = slurp(tmp.prefix("fig4") + ".csv");
  CHECK(csv.rfind("tau,theta,phi,lx,ly,lz,epsilon,kappa_z\n", 0) == 0);
  // epsilon column carries the run's scaled energy on every row
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto p1 = line.rfind(',');
    const auto p0 = line.rfind(',', p1 - 1);
    CHECK(std::strtod(line.substr(p0 + 1, p1 - p0 - 1).c_str(), nullptr) == Approx(0.024));
    ++rows;
  }
  CHECK(rows == 201);
}

TEST_CASE("unitary scenario conserves jz_var in the csv", "[cli]") {
  TempDir tmp;
  auto cfg = parse_config("u = 0.1\nj_max = 6\nt_end = 20\ndt = 0.01\nrecord_stride = 200\n",
                          Scenario::evolve_unitary);
  run_scenario(cfg, tmp.prefix("uni"));
  const std::string csv = slurp(tmp.prefix("uni") + ".csv");
  std::istringstream lines(csv);
  std::string header, line;
  std::getline(lines, header);
  CHECK(header.rfind("tau,jx_mean,jz_mean,jz_var,purity,p0,", 0) == 0);
  while (std::getline(lines, line)) {
    // jz_var is the fourth field
    std::istringstream fields(line);
    std::string f;
    for (int i = 0; i < 4; ++i) std::getline(fields, f, ',');
    CHECK(std::strtod(f.c_str(), nullptr) == Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("runs are byte-identical under a fixed seed", "[cli]") {
  TempDir tmp;
  auto cfg = parse_config(
      "u = 0.3\ngamma_ratio = 0.05\nj_max = 4\nt_end = 20\ndt = 0.02\n"
      "n_traj = 20\nseed = 42\nrecord_stride = 100\ntail_tolerance = 2\n",
      Scenario::evolve_trajectory);
  run_scenario(cfg, tmp.prefix("a"));
  run_scenario(cfg, tmp.prefix("b"));
  CHECK(slurp(tmp.prefix("a") + ".csv") == slurp(tmp.prefix("b") + ".csv"));
  CHECK(slurp(tmp.prefix("a") + ".config") == slurp(tmp.prefix("b") + ".config"));

  // single-trajectory runs also write the jump log deterministically
  auto cfg1 = parse_config(
      "u = 0.5\ngamma_ratio = 0.1\nj_max = 4\nt_end = 50\ndt = 0.02\n"
      "n_traj = 1\nseed = 7\ntail_tolerance = 2\n",
      Scenario::evolve_trajectory);
  run_scenario(cfg1, tmp.prefix("c"));
  run_scenario(cfg1, tmp.prefix("d"));
  CHECK(slurp(tmp.prefix("c") + ".jumps.csv") == slurp(tmp.prefix("d") + ".jumps.csv"));
}

TEST_CASE("wigner snapshot scenario emits grids at the requested times", "[cli]") {
  TempDir tmp;
  auto cfg = parse_config(
      "u = 0.1\ngamma_ratio = 0\nj_max = 4\nstate = coherent\nstate_j = 2\n"
      "n_theta = 16\nn_phi = 32\nsnapshot_times = 5 10\ndt = 0.01\ntail_tolerance = 1e-4\n",
      Scenario::wigner_snapshots);
  const auto result = run_scenario(cfg, tmp.prefix("w"));
  REQUIRE(result.files.size() == 3);  // two grids + config echo
  const auto g5 = io::read_wigner_grid(tmp.prefix("w") + ".tau5.wig");
  const auto g10 = io::read_wigner_grid(tmp.prefix("w") + ".tau10.wig");
  CHECK(g5.tau == Approx(5.0));
  CHECK(g10.tau == Approx(10.0));
  CHECK(wigner::sphere_integral(g5) == Approx(1.0).margin(1e-8));
  CHECK(wigner::sphere_integral(g10) == Approx(1.0).margin(1e-8));
}

TEST_CASE("output directory environment variable", "[cli]") {
  TempDir tmp;
  const std::string dir = (tmp.path / "outputs").string();
  ::setenv("ROTORDYN_OUT_DIR", dir.c_str(), 1);
  CHECK(resolve_output_prefix("run1") == dir + "/run1");
  CHECK(std::filesystem::exists(dir));
  // absolute prefixes are untouched
  CHECK(resolve_output_prefix("/tmp/abs") == "/tmp/abs");
  ::unsetenv("ROTORDYN_OUT_DIR");
  CHECK(resolve_output_prefix("run1") == "run1");
}

TEST_CASE("spectrum scenario writes the level table", "[cli]") {
  TempDir tmp;
  auto cfg = parse_config("u = 1\nl_max = 3\n", Scenario::spectrum);
  run_scenario(cfg, tmp.prefix("spec"));
  const std::string csv = slurp(tmp.prefix("spec") + ".csv");
  CHECK(csv.rfind("l,m_abs,u,energy,shift\n", 0) == 0);
  // one row per (l, m_abs) pair up to l = 3, plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 10);
}
