#pragma once

// Time evolution on the truncated basis: unitary Schroedinger propagation,
// Lindblad master-equation integration, Monte-Carlo wave-function
// trajectories with deterministic per-trajectory RNG streams, observable
// extraction, and the vibrational validity-time estimate.
//
// All propagation uses fixed-step classical RK4 with a shared step size. The
// Lindblad right-hand side is applied as sparse-times-dense matrix products
// (the dim^2 x dim^2 superoperator is never formed), with CSR operators
// acting on row-major state matrices so every product reduces to contiguous
// row axpys. The x/y jump sandwiches are evaluated through the spherical
// components N_{+-1} of the axis vector,
//   S_x s S_x + S_y s S_y = gamma (N_+ W N_+^dag + N_- W N_-^dag),
// with the shared inner product W = n_z s n_z; a unit test pins this
// rewrite against the textbook Lindblad form.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "rotordyn/errors.hpp"
#include "rotordyn/rotor_basis.hpp"

namespace rotordyn {

struct EvolutionConfig {
  double dt = 0.0;             // 0 selects a stability-safe default
  double t_end = 100.0;
  int record_stride = 0;       // 0 selects a stride giving <= 1200 records
  int n_traj = 1;
  std::uint64_t seed = 20260811ULL;
  double tail_tolerance = 1e-6;  // max allowed population of the top j shell
};

struct ObservableRecord {
  double tau = 0.0;
  double jx_mean = 0.0;
  double jz_mean = 0.0;
  double jz_var = 0.0;
  double purity = 1.0;
  std::vector<double> populations;  // p_j, j = 0..j_max
};

struct UnitaryTrajectory {
  std::vector<double> taus;
  std::vector<PureState> states;
};

struct MasterTrajectory {
  std::vector<double> taus;
  std::vector<DensityMatrix> states;
};

struct JumpEvent {
  double tau;
  int channel;  // 0 = x, 1 = y, 2 = z
};

struct QuantumTrajectory {
  std::vector<double> taus;
  std::vector<PureState> states;  // unnormalized; the norm decay is part of the record
  std::vector<JumpEvent> jumps;
};

// Effective Hamiltonian of the conditioned no-jump evolution in its closed
// form H_eff = T + V (1 + i gamma_ratio / 2).
inline OperatorMatrix effective_hamiltonian(const ModelParams& p) {
  return kinetic(p.j_max) + std::complex<double>(1.0, 0.5 * p.gamma_ratio) * potential(p);
}

// Upper bound on the interaction time before resonant vibronic excitation
// spoils the purely rotational description: t << Delta^2 / (eta^2 Gamma
// omega_nu Omega_R). All rates in rad/s, returned time in seconds.
inline double max_interaction_time(double delta, double eta, double gamma,
                                   double omega_nu, double omega_r) {
  if (!(delta > 0.0) || !(eta > 0.0) || !(gamma > 0.0) || !(omega_nu > 0.0) || !(omega_r > 0.0))
    throw std::domain_error("max_interaction_time: all inputs must be positive");
  return delta * delta / (eta * eta * gamma * omega_nu * omega_r);
}

// Raman Rabi frequency Omega_R = |d_ge E_0|^2 / (4 hbar^2 Delta) in rad/s,
// from the dipole matrix element (C m), field amplitude (V/m) and detuning.
inline double raman_rabi_frequency(double d_ge, double e0, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("raman_rabi_frequency: detuning must be positive");
  constexpr double hbar = 1.054571817e-34;  // J s
  const double de = std::abs(d_ge * e0);
  return de * de / (4.0 * hbar * hbar * delta);
}

namespace detail {

using RowMatrixXcd =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// portable uniform draw in [0, 1); avoids the implementation-defined
// std::uniform_real_distribution
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Compressed-sparse-row operator acting on row-major dense matrices, so a
// product is a sequence of contiguous row axpys.
struct CsrOp {
  int dim = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<std::complex<double>> val;

  static CsrOp from_dense(const OperatorMatrix& a, double prune = 1e-14) {
    CsrOp op;
    op.dim = static_cast<int>(a.rows());
    op.row_ptr.assign(op.dim + 1, 0);
    for (int r = 0; r < op.dim; ++r) {
      for (int c = 0; c < op.dim; ++c) {
        if (std::abs(a(r, c)) > prune) {
          op.col.push_back(c);
          op.val.push_back(a(r, c));
        }
      }
      op.row_ptr[r + 1] = static_cast<int>(op.col.size());
    }
    return op;
  }

  void apply(const PureState& x, PureState& y) const {
    for (int r = 0; r < dim; ++r) {
      std::complex<double> acc(0.0, 0.0);
      for (int idx = row_ptr[r]; idx < row_ptr[r + 1]; ++idx) acc += val[idx] * x(col[idx]);
      y(r) = acc;
    }
  }
};

// out = a * b
inline void csr_mul(const CsrOp& a, const RowMatrixXcd& b, RowMatrixXcd& out) {
  for (int r = 0; r < a.dim; ++r) {
    auto orow = out.row(r);
    const int i0 = a.row_ptr[r], i1 = a.row_ptr[r + 1];
    if (i0 == i1) {
      orow.setZero();
      continue;
    }
    orow.noalias() = a.val[i0] * b.row(a.col[i0]);
    for (int idx = i0 + 1; idx < i1; ++idx) orow.noalias() += a.val[idx] * b.row(a.col[idx]);
  }
}

// out += scale * (a * b)
inline void csr_mul_acc(const CsrOp& a, const RowMatrixXcd& b, RowMatrixXcd& out,
                        std::complex<double> scale) {
  for (int r = 0; r < a.dim; ++r) {
    auto orow = out.row(r);
    for (int idx = a.row_ptr[r]; idx < a.row_ptr[r + 1]; ++idx)
      orow.noalias() += (scale * a.val[idx]) * b.row(a.col[idx]);
  }
}

// Precomputed operator set for one parameter point.
struct Model {
  int j_max = 0;
  int dim = 0;
  double gamma = 0.0;   // scaled jump rate gamma_ratio * u
  CsrOp h_slow;         // -i (H - diag H): slow unitary RHS in the rotating frame
  CsrOp a_slow;         // -i H - Q/2 with the diagonal free phases -i h_aa removed
  CsrOp nz, np, nm;     // n_z and the spherical components n_{+1}, n_{-1}
  Eigen::VectorXd h_diag;     // real diagonal of H, the exactly-integrated phases
  std::array<CsrOp, 3> jump;  // S_x, S_y, S_z
  double h_norm_estimate = 0.0;
};

inline Model build_model(const ModelParams& p) {
  validate(p);
  Model m;
  m.j_max = p.j_max;
  m.dim = basis_dim(p.j_max);
  m.gamma = p.gamma_ratio * p.u;

  const OperatorMatrix h_dense = kinetic(p.j_max) + potential(p);
  const auto s_dense = jump_operators(p);
  OperatorMatrix q_dense = OperatorMatrix::Zero(m.dim, m.dim);
  for (const auto& s : s_dense) q_dense += s.adjoint() * s;

  const std::complex<double> i_unit(0.0, 1.0);
  m.h_diag = h_dense.diagonal().real();
  const OperatorMatrix free_diag =
      m.h_diag.asDiagonal().toDenseMatrix().cast<std::complex<double>>();
  m.h_slow = CsrOp::from_dense(-i_unit * (h_dense - free_diag));
  m.a_slow = CsrOp::from_dense(-i_unit * (h_dense - free_diag) - 0.5 * q_dense);
  m.nz = CsrOp::from_dense(direction_cosine(Axis::z, p.j_max));
  m.np = CsrOp::from_dense(spherical_unit_component(+1, p.j_max));
  m.nm = CsrOp::from_dense(spherical_unit_component(-1, p.j_max));
  for (int i = 0; i < 3; ++i) m.jump[i] = CsrOp::from_dense(s_dense[i]);
  m.h_norm_estimate = static_cast<double>(p.j_max) * (p.j_max + 1) + p.u;
  return m;
}

// Operator set conjugated by the free-phase factor at stage offset s:
// X -> E(-s) X E(s) with E(s) = diag(e^{-i h_a s}), i.e. entries pick up
// e^{+i (h_row - h_col) s}.
struct StageOps {
  CsrOp a, nz, np, nm;
};

inline CsrOp modulate(const CsrOp& op, const Eigen::VectorXd& h_diag, double s) {
  CsrOp out = op;
  for (int r = 0; r < op.dim; ++r) {
    for (int idx = op.row_ptr[r]; idx < op.row_ptr[r + 1]; ++idx) {
      const double w = h_diag(r) - h_diag(op.col[idx]);
      out.val[idx] *= std::exp(std::complex<double>(0.0, w * s));
    }
  }
  return out;
}

inline StageOps make_stage_ops(const Model& m, double s) {
  if (s == 0.0) return {m.a_slow, m.nz, m.np, m.nm};
  return {modulate(m.a_slow, m.h_diag, s), modulate(m.nz, m.h_diag, s),
          modulate(m.np, m.h_diag, s), modulate(m.nm, m.h_diag, s)};
}

// Integrating-factor RK4 stepper for state vectors; the diagonal free phases
// advance exactly through an elementwise unit-modulus factor, so fast basis
// phases neither limit the step nor leak spurious norm contraction into the
// jump statistics.
struct VectorStepper {
  CsrOp n0, nh, nf;
  Eigen::VectorXcd phase;  // e^{-i h_a dt}
  double dt;
  PureState k1, k2, k3, k4, stage;

  VectorStepper(const CsrOp& slow, const Eigen::VectorXd& h_diag, double dt_in)
      : n0(slow),
        nh(modulate(slow, h_diag, 0.5 * dt_in)),
        nf(modulate(slow, h_diag, dt_in)),
        dt(dt_in) {
    const int dim = slow.dim;
    phase.resize(dim);
    for (int a = 0; a < dim; ++a)
      phase(a) = std::exp(std::complex<double>(0.0, -h_diag(a) * dt_in));
    for (auto* v : {&k1, &k2, &k3, &k4, &stage}) v->resize(dim);
  }

  void step(PureState& psi) {
    n0.apply(psi, k1);
    stage = psi + (0.5 * dt) * k1;
    nh.apply(stage, k2);
    stage = psi + (0.5 * dt) * k2;
    nh.apply(stage, k3);
    stage = psi + dt * k3;
    nf.apply(stage, k4);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    psi.array() *= phase.array();
  }
};

struct MasterWorkspace {
  RowMatrixXcd x, t, adj, w, k1, k2, k3, k4, stage;
  void resize(int dim) {
    for (auto* m : {&x, &t, &adj, &w, &k1, &k2, &k3, &k4, &stage}) m->resize(dim, dim);
  }
};

// Slow part of the Lindblad right-hand side in the free-rotating frame (the
// diagonal phases of H are integrated exactly by the elementwise propagator).
// Requires Hermitian input, which holds at every RK4 stage because the RHS of
// a Hermitian matrix is Hermitian by construction: for Hermitian s,
// s A^dag = (A s)^dag, and each jump sandwich X W X^dag is assembled as
// X (X W)^dag using the Hermiticity of W = n_z s n_z.
inline void master_rhs(const StageOps& ops, double gamma, const RowMatrixXcd& sigma,
                       RowMatrixXcd& out, MasterWorkspace& ws) {
  csr_mul(ops.a, sigma, ws.x);
  out = ws.x + ws.x.adjoint();
  if (gamma == 0.0) return;
  csr_mul(ops.nz, sigma, ws.t);   // t = nz sigma
  ws.adj = ws.t.adjoint();        // = sigma nz^dag
  csr_mul(ops.nz, ws.adj, ws.w);  // W = nz sigma nz^dag
  csr_mul(ops.nz, ws.w, ws.t);
  ws.adj = ws.t.adjoint();
  csr_mul_acc(ops.nz, ws.adj, out, gamma);  // += gamma nz W nz^dag
  csr_mul(ops.np, ws.w, ws.t);
  ws.adj = ws.t.adjoint();
  csr_mul_acc(ops.np, ws.adj, out, gamma);  // += gamma np W np^dag
  csr_mul(ops.nm, ws.w, ws.t);
  ws.adj = ws.t.adjoint();
  csr_mul_acc(ops.nm, ws.adj, out, gamma);
}

struct StepPlan {
  double dt;
  long steps;
  long stride;
};

inline StepPlan resolve_steps(const EvolutionConfig& cfg, double h_norm, double default_dt,
                              bool quiet = false) {
  if (!(cfg.t_end > 0.0)) throw std::domain_error("EvolutionConfig: t_end must be positive");
  double dt = cfg.dt;
  if (dt == 0.0) dt = default_dt;
  if (!(dt > 0.0)) throw std::domain_error("EvolutionConfig: dt must be positive");
  if (!quiet && dt * h_norm > 0.1)
    std::cerr << "rotordyn: warning: dt * |H| ~ " << dt * h_norm
              << " exceeds the recommended 0.1; phase accuracy in the top shells degrades\n";
  long steps = std::lround(std::ceil(cfg.t_end / dt - 1e-9));
  steps = std::max<long>(steps, 1);
  dt = cfg.t_end / static_cast<double>(steps);  // land exactly on t_end
  long stride = cfg.record_stride;
  if (stride <= 0) stride = std::max<long>(1, (steps + 1199) / 1200);
  return {dt, steps, stride};
}

inline double top_shell_population(const PureState& psi, int j_max) {
  double pop = 0.0;
  for (int m = -j_max; m <= j_max; ++m) pop += std::norm(psi(basis_offset(j_max, m)));
  const double n2 = psi.squaredNorm();
  return n2 > 0.0 ? pop / n2 : 0.0;
}

inline double top_shell_population(const RowMatrixXcd& sigma, int j_max) {
  double pop = 0.0;
  for (int m = -j_max; m <= j_max; ++m)
    pop += sigma(basis_offset(j_max, m), basis_offset(j_max, m)).real();
  return pop;
}

inline void check_tail(double pop, double tol, const char* where) {
  if (pop > tol)
    throw convergence_error(std::string(where) +
                            ": top-shell population exceeds tail_tolerance; increase j_max");
}

}  // namespace detail

// Observables of a density matrix: <J_x>, <J_z>, Var(J_z), purity Tr(sigma^2)
// and the j-shell populations.
inline ObservableRecord observables(const DensityMatrix& sigma, double tau = 0.0) {
  const int dim = static_cast<int>(sigma.rows());
  const int j_max = basis_index(dim - 1).j;
  ObservableRecord rec;
  rec.tau = tau;
  rec.populations.assign(j_max + 1, 0.0);
  double jz = 0.0, jz2 = 0.0;
  std::complex<double> jx(0.0, 0.0);
  for (int j = 0; j <= j_max; ++j) {
    for (int m = -j; m <= j; ++m) {
      const int k = basis_offset(j, m);
      const double pop = sigma(k, k).real();
      rec.populations[j] += pop;
      jz += m * pop;
      jz2 += static_cast<double>(m) * m * pop;
      if (m < j) {
        const double ladder =
            std::sqrt(static_cast<double>(j) * (j + 1) - static_cast<double>(m) * (m + 1));
        jx += 0.5 * ladder * (sigma(basis_offset(j, m + 1), k) + sigma(k, basis_offset(j, m + 1)));
      }
    }
  }
  rec.jx_mean = jx.real();
  rec.jz_mean = jz;
  rec.jz_var = jz2 - jz * jz;
  rec.purity = sigma.cwiseProduct(sigma.transpose()).sum().real();
  return rec;
}

// Observables of a (possibly unnormalized) pure state.
inline ObservableRecord observables(const PureState& psi, double tau = 0.0) {
  const int dim = static_cast<int>(psi.size());
  const int j_max = basis_index(dim - 1).j;
  ObservableRecord rec;
  rec.tau = tau;
  rec.populations.assign(j_max + 1, 0.0);
  const double n2 = psi.squaredNorm();
  double jz = 0.0, jz2 = 0.0;
  std::complex<double> jx(0.0, 0.0);
  for (int j = 0; j <= j_max; ++j) {
    for (int m = -j; m <= j; ++m) {
      const int k = basis_offset(j, m);
      const double pop = std::norm(psi(k)) / n2;
      rec.populations[j] += pop;
      jz += m * pop;
      jz2 += static_cast<double>(m) * m * pop;
      if (m < j) {
        const double ladder =
            std::sqrt(static_cast<double>(j) * (j + 1) - static_cast<double>(m) * (m + 1));
        jx += ladder * std::conj(psi(basis_offset(j, m + 1))) * psi(k) / n2;
      }
    }
  }
  rec.jx_mean = jx.real();
  rec.jz_mean = jz;
  rec.jz_var = jz2 - jz * jz;
  rec.purity = 1.0;
  return rec;
}

// ---- unitary path -----------------------------------------------------------

using UnitaryRecorder = std::function<void(double tau, const PureState& psi)>;

inline void evolve_unitary_cb(const PureState& psi0, const ModelParams& p,
                              const EvolutionConfig& cfg, const UnitaryRecorder& record) {
  const detail::Model mdl = detail::build_model(p);
  if (psi0.size() != mdl.dim)
    throw std::domain_error("evolve_unitary: state dimension does not match j_max");
  const auto plan =
      detail::resolve_steps(cfg, mdl.h_norm_estimate, 1.5 / (4.0 * p.j_max + 7.0));

  detail::VectorStepper stepper(mdl.h_slow, mdl.h_diag, plan.dt);
  PureState psi = psi0;
  record(0.0, psi);
  for (long n = 1; n <= plan.steps; ++n) {
    stepper.step(psi);
    if (n % plan.stride == 0 || n == plan.steps) {
      detail::check_tail(detail::top_shell_population(psi, mdl.j_max), cfg.tail_tolerance,
                         "evolve_unitary");
      record(static_cast<double>(n) * plan.dt, psi);
    }
  }
}

inline UnitaryTrajectory evolve_unitary(const PureState& psi0, const ModelParams& p,
                                        const EvolutionConfig& cfg) {
  UnitaryTrajectory out;
  evolve_unitary_cb(psi0, p, cfg, [&out](double tau, const PureState& psi) {
    out.taus.push_back(tau);
    out.states.push_back(psi);
  });
  return out;
}

// ---- master-equation path ---------------------------------------------------

using MasterRecorder = std::function<void(double tau, const DensityMatrix& sigma)>;

// Integrating-factor RK4 for the Lindblad equation: the free diagonal phases
// e^{-i h_a tau} of H are applied exactly through an elementwise propagator,
// and RK4 integrates only the slow rotated remainder (off-diagonal couplings
// and the dissipator). This removes the kinetic-energy stiffness of the
// truncated basis, so the step size is limited by the coupling Bohr
// frequencies of the populated shells rather than by j_max(j_max+1). One RK4
// step advances
//   z2 = s + dt/2 k1(ops at 0),  z3 = s + dt/2 k2(ops at dt/2), ...
//   s <- P o [s + dt/6 (k1 + 2 k2 + 2 k3 + k4)],  P_ab = e^{-i (h_a - h_b) dt},
// with the three stage operator sets precomputed once per run.
inline void evolve_master_cb(const DensityMatrix& sigma0, const ModelParams& p,
                             const EvolutionConfig& cfg, const MasterRecorder& record) {
  const detail::Model mdl = detail::build_model(p);
  if (sigma0.rows() != mdl.dim || sigma0.cols() != mdl.dim)
    throw std::domain_error("evolve_master: density matrix dimension does not match j_max");
  if (std::abs(sigma0.trace().real() - 1.0) > 1e-8 ||
      (sigma0 - sigma0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw numerical_error("evolve_master: input is not a unit-trace Hermitian density matrix");
  const auto plan =
      detail::resolve_steps(cfg, mdl.h_norm_estimate, 1.5 / (4.0 * p.j_max + 7.0));

  const detail::StageOps ops0 = detail::make_stage_ops(mdl, 0.0);
  const detail::StageOps ops_half = detail::make_stage_ops(mdl, 0.5 * plan.dt);
  const detail::StageOps ops_full = detail::make_stage_ops(mdl, plan.dt);
  detail::RowMatrixXcd propagator(mdl.dim, mdl.dim);
  for (int a = 0; a < mdl.dim; ++a)
    for (int b = 0; b < mdl.dim; ++b)
      propagator(a, b) =
          std::exp(std::complex<double>(0.0, -(mdl.h_diag(a) - mdl.h_diag(b)) * plan.dt));

  detail::MasterWorkspace ws;
  ws.resize(mdl.dim);
  detail::RowMatrixXcd sigma = sigma0;
  sigma = 0.5 * (sigma + sigma.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DensityMatrix> eigs;
  DensityMatrix snapshot = sigma;

  record(0.0, snapshot);
  for (long n = 1; n <= plan.steps; ++n) {
    detail::master_rhs(ops0, mdl.gamma, sigma, ws.k1, ws);
    ws.stage = sigma + (0.5 * plan.dt) * ws.k1;
    detail::master_rhs(ops_half, mdl.gamma, ws.stage, ws.k2, ws);
    ws.stage = sigma + (0.5 * plan.dt) * ws.k2;
    detail::master_rhs(ops_half, mdl.gamma, ws.stage, ws.k3, ws);
    ws.stage = sigma + plan.dt * ws.k3;
    detail::master_rhs(ops_full, mdl.gamma, ws.stage, ws.k4, ws);
    sigma += (plan.dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
    sigma.array() *= propagator.array();             // exact free-phase advance
    sigma = 0.5 * (sigma + sigma.adjoint()).eval();  // suppress Hermiticity drift

    if (n % plan.stride == 0 || n == plan.steps) {
      detail::check_tail(detail::top_shell_population(sigma, mdl.j_max), cfg.tail_tolerance,
                         "evolve_master");
      snapshot = sigma;
      eigs.compute(snapshot, Eigen::EigenvaluesOnly);
      if (eigs.eigenvalues().minCoeff() < -1e-6)
        throw numerical_error(
            "evolve_master: density matrix lost positivity beyond 1e-6; reduce dt");
      record(static_cast<double>(n) * plan.dt, snapshot);
    }
  }
}

inline MasterTrajectory evolve_master(const DensityMatrix& sigma0, const ModelParams& p,
                                      const EvolutionConfig& cfg) {
  MasterTrajectory out;
  evolve_master_cb(sigma0, p, cfg, [&out](double tau, const DensityMatrix& sigma) {
    out.taus.push_back(tau);
    out.states.push_back(sigma);
  });
  return out;
}

// ---- quantum-trajectory path ------------------------------------------------

namespace detail {

inline QuantumTrajectory trajectory_impl(const Model& mdl, const StepPlan& plan,
                                         const PureState& psi0, const EvolutionConfig& cfg,
                                         std::uint64_t stream_id) {
  std::mt19937_64 eng(splitmix64(cfg.seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1)));
  double threshold = uniform01(eng);

  VectorStepper stepper(mdl.a_slow, mdl.h_diag, plan.dt);  // slow part of -i H_eff
  PureState psi = psi0, jumped(mdl.dim);
  QuantumTrajectory out;
  out.taus.push_back(0.0);
  out.states.push_back(psi);
  for (long n = 1; n <= plan.steps; ++n) {
    stepper.step(psi);
    const double tau = static_cast<double>(n) * plan.dt;
    while (psi.squaredNorm() <= threshold) {
      double flux[3];
      double total = 0.0;
      for (int i = 0; i < 3; ++i) {
        mdl.jump[i].apply(psi, jumped);
        flux[i] = jumped.squaredNorm();
        total += flux[i];
      }
      if (total <= 0.0)
        throw numerical_error("evolve_trajectory: norm collapsed without jump flux");
      const double pick = uniform01(eng) * total;
      int channel = 0;
      double acc = flux[0];
      while (channel < 2 && pick > acc) acc += flux[++channel];
      mdl.jump[channel].apply(psi, jumped);
      psi = jumped / jumped.norm();
      out.jumps.push_back({tau, channel});
      threshold = uniform01(eng);
    }

    if (n % plan.stride == 0 || n == plan.steps) {
      check_tail(top_shell_population(psi, mdl.j_max), cfg.tail_tolerance, "evolve_trajectory");
      out.taus.push_back(tau);
      out.states.push_back(psi);
    }
  }
  return out;
}

}  // namespace detail

// First-order MCWF unravelling: integrate with the non-Hermitian effective
// Hamiltonian until the squared norm falls to a uniform threshold r, then
// apply jump channel i with probability |S_i psi|^2 / sum_k |S_k psi|^2,
// renormalize and redraw r. The RNG stream is derived from (seed, stream_id)
// only, so any execution order reproduces the same trajectory.
inline QuantumTrajectory evolve_trajectory(const PureState& psi0, const ModelParams& p,
                                           const EvolutionConfig& cfg, std::uint64_t stream_id) {
  const detail::Model mdl = detail::build_model(p);
  if (psi0.size() != mdl.dim)
    throw std::domain_error("evolve_trajectory: state dimension does not match j_max");
  const auto plan =
      detail::resolve_steps(cfg, mdl.h_norm_estimate, 1.5 / (4.0 * p.j_max + 7.0));
  return detail::trajectory_impl(mdl, plan, psi0, cfg, stream_id);
}

// Mean of |psi><psi| / |psi|^2 over n_traj trajectories at every record time.
// Trajectories are simulated in fixed-size chunks (parallel within a chunk)
// and accumulated strictly in trajectory order, so the result is independent
// of thread count and execution order.
inline MasterTrajectory ensemble_average(const PureState& psi0, const ModelParams& p,
                                         const EvolutionConfig& cfg) {
  if (cfg.n_traj < 1) throw std::domain_error("ensemble_average: n_traj must be >= 1");
  const int dim = static_cast<int>(psi0.size());
  const detail::Model mdl = detail::build_model(p);
  if (dim != mdl.dim)
    throw std::domain_error("ensemble_average: state dimension does not match j_max");
  const auto plan =
      detail::resolve_steps(cfg, mdl.h_norm_estimate, 1.5 / (4.0 * p.j_max + 7.0));

  MasterTrajectory out;
  constexpr int kChunk = 64;
  std::vector<QuantumTrajectory> buffer(std::min(cfg.n_traj, kChunk));
  std::exception_ptr failure;
  for (int base = 0; base < cfg.n_traj; base += kChunk) {
    const int count = std::min(kChunk, cfg.n_traj - base);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        buffer[i] =
            detail::trajectory_impl(mdl, plan, psi0, cfg, static_cast<std::uint64_t>(base + i));
      } catch (...) {
        // exceptions must not unwind out of the parallel region
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (int i = 0; i < count; ++i) {
      const QuantumTrajectory& tr = buffer[i];
      if (out.states.empty()) {
        out.taus = tr.taus;
        out.states.assign(tr.taus.size(), DensityMatrix::Zero(dim, dim));
      }
      for (std::size_t r = 0; r < tr.states.size(); ++r) {
        const PureState& psi = tr.states[r];
        out.states[r].noalias() += (psi * psi.adjoint()) / psi.squaredNorm();
      }
    }
  }
  for (auto& s : out.states) s /= static_cast<double>(cfg.n_traj);
  return out;
}

}  // namespace rotordyn
