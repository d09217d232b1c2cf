// Construction of the thermal machines: Hamiltonians, jump operators and
// transition rates, in finite-parameter mode and in the ideal limit
// (U, mu1 -> infinity with U/mu1 -> infinity).
//
// Units: hbar = k_B = 1 and all energies, temperatures and rates are
// dimensionless multiples of the qubit splitting epsilon; time runs in units
// of 1/epsilon.
#pragma once

#include "qtm/hilbert.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtm {

// Distinguished parameter value for the ideal limit. Never plugged into
// arithmetic that could produce inf - inf; the builders special-case it.
inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

inline bool is_infinite(double x) { return std::isinf(x) && x > 0; }

// Reservoir occupation 1/(e^{(E-mu)/T} + 1). mu = kInfinite means a fully
// inverted reservoir and returns exactly 1 (no inf - inf excursion).
inline double fermi_dirac(double energy, double mu, double T) {
  if (is_infinite(mu)) return 1.0;
  if (std::isinf(mu) && mu < 0) return 0.0;
  if (T <= 0.0) throw std::domain_error("fermi_dirac: T must be > 0 for finite mu");
  // exp overflow saturates to inf, giving the exact 0/1 limits.
  return 1.0 / (std::exp((energy - mu) / T) + 1.0);
}

// Coulomb cost of adding one excitation next to p+q existing ones:
// 0, U or 2U.
inline double charging_energy(int p, int q, double U) {
  if ((p != 0 && p != 1) || (q != 0 && q != 1))
    throw std::invalid_argument("charging_energy: p, q must be bits");
  return static_cast<double>(p + q) * U;
}

struct MachineConfig {
  double epsilon = 1.0;
  double g13 = 0.0;
  double g23 = 0.0;
  double U = 0.0;    // kInfinite selects ideal mode (with mu1 = kInfinite)
  double mu1 = 0.0;  // left reservoir; may be kInfinite
  double mu3 = 0.0;  // right reservoir, grounded in the paper setup
  double T1 = 1.0;
  double T3 = 1.0;
  double gamma1 = 0.0;
  double gamma3 = 0.0;

  bool ideal_mode() const { return is_infinite(U) && is_infinite(mu1); }

  void validate() const {
    if (g13 < 0 || g23 < 0 || gamma1 < 0 || gamma3 < 0 || T1 < 0 || T3 < 0)
      throw std::invalid_argument("MachineConfig: couplings, rates and temperatures must be >= 0");
    if (is_infinite(U) && !is_infinite(mu1))
      throw std::invalid_argument("MachineConfig: U = INFINITE requires mu1 = INFINITE (ideal mode)");
  }
};

// 2n-1 qubits: qubit 1 pumped, qubits 2..n entangled targets, qubits
// n+1..2n-1 sinks. couplings[j-1] = (g_{1,n+j}, g_{1+j,n+j}).
struct GeneralMachineConfig {
  std::size_t n = 2;
  std::vector<std::pair<double, double>> couplings;
  double U = kInfinite;
  double mu = kInfinite;
  double T = 1.0;
  double gamma1 = 0.0;
  std::vector<double> gamma_sink;

  std::size_t n_qubits() const { return 2 * n - 1; }

  void validate() const {
    if (n < 2) throw std::invalid_argument("GeneralMachineConfig: n must be >= 2");
    if (couplings.size() != n - 1)
      throw std::invalid_argument("GeneralMachineConfig: need n-1 coupling pairs");
    if (gamma_sink.size() != n - 1)
      throw std::invalid_argument("GeneralMachineConfig: need n-1 sink rates");
    for (const auto& [ga, gb] : couplings)
      if (ga < 0 || gb < 0)
        throw std::invalid_argument("GeneralMachineConfig: couplings must be >= 0");
    if (gamma1 < 0) throw std::invalid_argument("GeneralMachineConfig: gamma1 must be >= 0");
    for (double g : gamma_sink)
      if (g < 0) throw std::invalid_argument("GeneralMachineConfig: sink rates must be >= 0");
  }
};

enum class Side { kLeft, kRight };
enum class Direction { kExcite, kRelax };

// Which reservoir drives a process; site is the 1-based qubit label it acts
// on (1 for the left reservoir, 3 or n+1..2n-1 for right/sink reservoirs).
struct Reservoir {
  Side side = Side::kLeft;
  std::size_t site = 1;
};

inline std::string reservoir_label(const Reservoir& r) {
  return r.side == Side::kLeft ? "left" : "right_" + std::to_string(r.site);
}

struct JumpProcess {
  ComplexMatrix op;  // single-transition matrix, one entry equal to 1
  double rate = 0.0;
  Reservoir reservoir;
  Direction direction = Direction::kExcite;
};

// A machine ready for Liouvillian assembly. `basis` names the physical state
// behind each matrix index; for subspace-restricted machines it is shorter
// than the full register would allow.
struct Machine {
  ComplexMatrix hamiltonian;
  std::vector<JumpProcess> jumps;
  std::size_t n_qubits = 0;
  std::vector<BasisState> basis;

  Eigen::Index dim() const { return hamiltonian.rows(); }
  bool restricted() const { return basis.size() < (std::size_t{1} << n_qubits); }
};

// Ground state plus one excitation per site, ground first.
inline std::vector<BasisState> single_excitation_basis(std::size_t n_qubits) {
  std::vector<BasisState> basis;
  basis.reserve(n_qubits + 1);
  basis.push_back(BasisState(std::vector<int>(n_qubits, 0)));
  for (std::size_t s = 0; s < n_qubits; ++s) {
    std::vector<int> bits(n_qubits, 0);
    bits[s] = 1;
    basis.push_back(BasisState(std::move(bits)));
  }
  return basis;
}

// Project a full-space operator onto the span of the given basis states.
inline ComplexMatrix restrict_operator(const ComplexMatrix& op, const std::vector<BasisState>& basis) {
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  ComplexMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out(i, j) = op(static_cast<Eigen::Index>(basis[i].index()),
                     static_cast<Eigen::Index>(basis[j].index()));
  return out;
}

// Embed a subspace operator back into the full register, zero elsewhere.
inline ComplexMatrix expand_operator(const ComplexMatrix& op, const std::vector<BasisState>& basis,
                                     std::size_t n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      out(static_cast<Eigen::Index>(basis[i].index()), static_cast<Eigen::Index>(basis[j].index())) =
          op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

// Full 8x8 three-qubit Hamiltonian: splitting, pairwise Coulomb, and the
// 1<->3, 2<->3 flip-flops (no direct 1<->2 coupling).
inline ComplexMatrix build_hamiltonian_3q(const MachineConfig& cfg) {
  cfg.validate();
  if (is_infinite(cfg.U))
    throw std::invalid_argument("build_hamiltonian_3q: U = INFINITE has no finite matrix; use ideal mode");
  ComplexMatrix h = ComplexMatrix::Zero(8, 8);
  for (std::size_t idx = 0; idx < 8; ++idx) {
    const auto s = BasisState::from_index(idx, 3);
    const int k = s.total_occupation();
    h(idx, idx) = cfg.epsilon * k + cfg.U * 0.5 * k * (k - 1);
  }
  const ComplexMatrix sp = sigma_plus(), sm = sigma_minus();
  auto flip_flop = [&](std::size_t a, std::size_t b) {
    ComplexMatrix t = embed_site_operator(sp, a, 3) * embed_site_operator(sm, b, 3);
    return ComplexMatrix(t + t.adjoint());
  };
  h += cfg.g13 * flip_flop(0, 2);
  h += cfg.g23 * flip_flop(1, 2);
  return h;
}

namespace detail {

inline ComplexMatrix transition_op(std::size_t to, std::size_t from, Eigen::Index dim) {
  ComplexMatrix op = ComplexMatrix::Zero(dim, dim);
  op(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
  return op;
}

inline void push_process(std::vector<JumpProcess>& out, ComplexMatrix op, double rate,
                         Reservoir res, Direction dir) {
  if (rate <= 0.0) return;  // zero-rate processes are dropped at construction
  out.push_back(JumpProcess{std::move(op), rate, res, dir});
}

}  // namespace detail

// Jump processes on the full 8-dim space. Finite mode: one excite/relax pair
// per reservoir j in {1,3} and spectator occupations (p,q), rates
// gamma_j * n_F(eps + U_pq, mu_j, T_j) and its complement. Ideal mode: only
// the three processes that survive the limits.
inline std::vector<JumpProcess> build_jump_processes_3q(const MachineConfig& cfg) {
  cfg.validate();
  std::vector<JumpProcess> jumps;
  const Reservoir left{Side::kLeft, 1};
  const Reservoir right{Side::kRight, 3};

  if (cfg.ideal_mode()) {
    // Inverted left reservoir pumps qubit 1 at the bare rate; infinite U
    // blocks every transition out of a state that is already excited.
    detail::push_process(jumps, detail::transition_op(0b100, 0b000, 8), cfg.gamma1, left,
                         Direction::kExcite);
    const double nf = fermi_dirac(cfg.epsilon, cfg.mu3, cfg.T3);
    detail::push_process(jumps, detail::transition_op(0b001, 0b000, 8), cfg.gamma3 * nf, right,
                         Direction::kExcite);
    detail::push_process(jumps, detail::transition_op(0b000, 0b001, 8), cfg.gamma3 * (1.0 - nf),
                         right, Direction::kRelax);
    return jumps;
  }

  for (int p = 0; p <= 1; ++p) {
    for (int q = 0; q <= 1; ++q) {
      const double cost = charging_energy(p, q, cfg.U);
      // Qubit 1 with spectators (q2, q3) = (p, q): |1pq><0pq|.
      {
        const std::size_t from = static_cast<std::size_t>(2 * p + q);
        const std::size_t to = from | 0b100;
        const double up = cfg.gamma1 * fermi_dirac(cfg.epsilon + cost, cfg.mu1, cfg.T1);
        detail::push_process(jumps, detail::transition_op(to, from, 8), up, left,
                             Direction::kExcite);
        detail::push_process(jumps, detail::transition_op(from, to, 8), cfg.gamma1 - up, left,
                             Direction::kRelax);
      }
      // Qubit 3 with spectators (q1, q2) = (p, q): |pq1><pq0|.
      {
        const std::size_t from = static_cast<std::size_t>(4 * p + 2 * q);
        const std::size_t to = from | 0b001;
        const double up = cfg.gamma3 * fermi_dirac(cfg.epsilon + cost, cfg.mu3, cfg.T3);
        detail::push_process(jumps, detail::transition_op(to, from, 8), up, right,
                             Direction::kExcite);
        detail::push_process(jumps, detail::transition_op(from, to, 8), cfg.gamma3 - up, right,
                             Direction::kRelax);
      }
    }
  }
  return jumps;
}

// Assembled three-qubit machine. Ideal mode restricts everything to the
// 4-dim span {|000>, |100>, |010>, |001>}; double and triple excitations are
// unreachable there by construction.
inline Machine build_three_qubit_machine(const MachineConfig& cfg) {
  cfg.validate();
  Machine m;
  m.n_qubits = 3;
  if (cfg.ideal_mode()) {
    m.basis = single_excitation_basis(3);
    MachineConfig flat = cfg;  // U drops out on <= 1 excitation
    flat.U = 0.0;
    flat.mu1 = 0.0;
    m.hamiltonian = restrict_operator(build_hamiltonian_3q(flat), m.basis);
    for (auto& j : build_jump_processes_3q(cfg)) {
      j.op = restrict_operator(j.op, m.basis);
      m.jumps.push_back(std::move(j));
    }
  } else {
    m.basis.reserve(8);
    for (std::size_t i = 0; i < 8; ++i) m.basis.push_back(BasisState::from_index(i, 3));
    m.hamiltonian = build_hamiltonian_3q(cfg);
    m.jumps = build_jump_processes_3q(cfg);
  }
  return m;
}

enum class SubspaceMode { kFull, kSingleExcitation };

// Hamiltonian of the (2n-1)-qubit machine. Full mode carries the all-pairs
// Coulomb term U/2 * k(k-1); the single-excitation restriction never sees it.
inline ComplexMatrix build_hamiltonian_general(const GeneralMachineConfig& cfg, SubspaceMode mode) {
  cfg.validate();
  const std::size_t nq = cfg.n_qubits();

  if (mode == SubspaceMode::kSingleExcitation) {
    const Eigen::Index d = static_cast<Eigen::Index>(nq) + 1;
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) h(i, i) = 1.0;  // one excitation, epsilon = 1 units
    for (std::size_t j = 1; j < cfg.n; ++j) {
      const auto [g_pump, g_target] = cfg.couplings[j - 1];
      const Eigen::Index sink = static_cast<Eigen::Index>(cfg.n + j);
      h(1, sink) += g_pump;  // qubit 1 <-> sink n+j
      h(sink, 1) += g_pump;
      const Eigen::Index target = static_cast<Eigen::Index>(1 + j);
      h(target, sink) += g_target;  // qubit 1+j <-> sink n+j
      h(sink, target) += g_target;
    }
    return h;
  }

  if (nq > 11) throw std::invalid_argument("build_hamiltonian_general: full mode capped at 11 qubits");
  if (is_infinite(cfg.U))
    throw std::invalid_argument("build_hamiltonian_general: full mode needs finite U");
  const Eigen::Index dim = Eigen::Index{1} << nq;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(dim); ++idx) {
    const auto s = BasisState::from_index(idx, nq);
    const int k = s.total_occupation();
    h(idx, idx) = 1.0 * k + cfg.U * 0.5 * k * (k - 1);
  }
  const ComplexMatrix sp = sigma_plus(), sm = sigma_minus();
  auto flip_flop = [&](std::size_t qa, std::size_t qb, double g) {
    if (g == 0.0) return;
    ComplexMatrix t = embed_site_operator(sp, qa - 1, nq) * embed_site_operator(sm, qb - 1, nq);
    h += g * (t + ComplexMatrix(t.adjoint()));
  };
  for (std::size_t j = 1; j < cfg.n; ++j) {
    flip_flop(1, cfg.n + j, cfg.couplings[j - 1].first);
    flip_flop(1 + j, cfg.n + j, cfg.couplings[j - 1].second);
  }
  return h;
}

// Jump processes of the general machine in its single-excitation reduction
// (ideal limit: inverted pump reservoir, grounded sinks at temperature T).
// Subspace index of an excitation on qubit k is k; index 0 is the ground
// state.
inline std::vector<JumpProcess> build_jump_processes_general(const GeneralMachineConfig& cfg) {
  cfg.validate();
  if (!is_infinite(cfg.U) || !is_infinite(cfg.mu))
    throw std::invalid_argument(
        "build_jump_processes_general: only the ideal single-excitation reduction is supported "
        "(U = mu = INFINITE)");
  const Eigen::Index d = static_cast<Eigen::Index>(cfg.n_qubits()) + 1;
  std::vector<JumpProcess> jumps;
  detail::push_process(jumps, detail::transition_op(1, 0, d), cfg.gamma1,
                       Reservoir{Side::kLeft, 1}, Direction::kExcite);
  const double nf = fermi_dirac(1.0, 0.0, cfg.T);
  for (std::size_t j = 1; j < cfg.n; ++j) {
    const std::size_t sink = cfg.n + j;  // qubit label and subspace index
    const double g = cfg.gamma_sink[j - 1];
    detail::push_process(jumps, detail::transition_op(sink, 0, d), g * nf,
                         Reservoir{Side::kRight, sink}, Direction::kExcite);
    detail::push_process(jumps, detail::transition_op(0, sink, d), g * (1.0 - nf),
                         Reservoir{Side::kRight, sink}, Direction::kRelax);
  }
  return jumps;
}

inline Machine build_general_machine(const GeneralMachineConfig& cfg) {
  Machine m;
  m.n_qubits = cfg.n_qubits();
  m.basis = single_excitation_basis(m.n_qubits);
  m.hamiltonian = build_hamiltonian_general(cfg, SubspaceMode::kSingleExcitation);
  m.jumps = build_jump_processes_general(cfg);
  return m;
}

// Weak-coupling / local-dissipation checks behind the Lindblad description:
//   gamma_j <= r * max{T_j, |eps +- g - mu_j|}   per coupling g on qubit j,
//   g      <= r * max{T_j, |eps - mu_j|}        per reservoir the coupling touches.
// Warnings only; r = 0.1 stands in for "much less than".
inline std::vector<std::string> check_validity_regime(const MachineConfig& cfg, double r = 0.1) {
  cfg.validate();
  std::vector<std::string> warnings;
  struct Res {
    const char* name;
    double gamma, T, mu;
    std::vector<double> couplings;
  };
  const std::vector<Res> reservoirs = {
      {"reservoir 1", cfg.gamma1, cfg.T1, cfg.mu1, {cfg.g13}},
      {"reservoir 3", cfg.gamma3, cfg.T3, cfg.mu3, {cfg.g13, cfg.g23}},
  };
  for (const auto& res : reservoirs) {
    if (std::isinf(res.mu)) continue;  // detuning bound is infinite
    double bound = res.T;
    for (double g : res.couplings) {
      bound = std::max(bound, std::abs(cfg.epsilon + g - res.mu));
      bound = std::max(bound, std::abs(cfg.epsilon - g - res.mu));
    }
    if (res.gamma > r * bound)
      warnings.push_back(std::string(res.name) + ": gamma = " + std::to_string(res.gamma) +
                         " exceeds " + std::to_string(r) + " * max{T, |eps+-g-mu|} = " +
                         std::to_string(r * bound));
    const double local = std::max(res.T, std::abs(cfg.epsilon - res.mu));
    for (double g : res.couplings) {
      if (g > r * local)
        warnings.push_back(std::string(res.name) + ": coupling g = " + std::to_string(g) +
                           " exceeds " + std::to_string(r) +
                           " * max{T, |eps-mu|} = " + std::to_string(r * local) +
                           " (dissipation no longer local)");
    }
  }
  return warnings;
}

}  // namespace qtm
