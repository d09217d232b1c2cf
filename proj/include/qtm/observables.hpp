// Entanglement and transport observables plus the target states the machines
// are meant to reach: the tunable pure steady state, the two-qubit singlet,
// and the n-qubit W family.
#pragma once

#include "qtm/hilbert.hpp"
#include "qtm/machine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtm {

// Pure target state over a computational basis. Global phase convention: the
// leading written component (highest basis index with support, which is the
// qubit-1 excitation for every state below) is real positive; the relative
// minus signs of the analytic steady states live underneath that convention.
struct TargetState {
  ComplexVector amplitudes;
  std::string label;
};

namespace detail {

inline void fix_global_phase(ComplexVector& v) {
  for (Eigen::Index i = v.size() - 1; i >= 0; --i) {
    if (std::abs(v(i)) > kScalarTol) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

}  // namespace detail

// Two-qubit singlet (|10> - |01>)/sqrt(2).
inline TargetState singlet() {
  ComplexVector v = ComplexVector::Zero(4);
  v(2) = 1.0 / std::sqrt(2.0);
  v(1) = -1.0 / std::sqrt(2.0);
  return TargetState{std::move(v), "singlet"};
}

// Three-qubit pure steady state cos(theta)|100> - sin(theta)|010> with
// theta = arctan(g13/g23); the sink qubit stays in |0>.
inline TargetState psi_ss(double g13, double g23) {
  const double norm = std::hypot(g13, g23);
  if (norm <= 0.0) throw std::invalid_argument("psi_ss: needs a nonzero coupling");
  ComplexVector v = ComplexVector::Zero(8);
  v(0b100) = g23 / norm;   // cos(theta)
  v(0b010) = -g13 / norm;  // -sin(theta)
  detail::fix_global_phase(v);
  return TargetState{std::move(v), "psi_ss"};
}

// W-like steady state of the (2n-1)-qubit machine: amplitude 1/sqrt(beta) on
// the qubit-1 excitation and -alpha_j/sqrt(beta) on the qubit-(1+j)
// excitations, sinks in the ground state. alphas has n-1 entries.
inline TargetState general_w(const std::vector<double>& alphas) {
  const std::size_t n = alphas.size() + 1;
  const std::size_t nq = 2 * n - 1;
  if (nq > 16) throw std::invalid_argument("general_w: register too large");
  double beta = 1.0;
  for (double a : alphas) beta += a * a;
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << nq);
  auto exc_index = [nq](std::size_t qubit) {  // 1-based label -> basis index
    return std::size_t{1} << (nq - qubit);
  };
  v(static_cast<Eigen::Index>(exc_index(1))) = 1.0 / std::sqrt(beta);
  for (std::size_t j = 1; j < n; ++j)
    v(static_cast<Eigen::Index>(exc_index(1 + j))) = -alphas[j - 1] / std::sqrt(beta);
  detail::fix_global_phase(v);
  return TargetState{std::move(v), "general_w"};
}

// Equal-amplitude case: (|10...0> - |010...0> - ... )/sqrt(n) on the first n
// qubits, ground sinks.
inline TargetState w_state(std::size_t n) {
  if (n < 2) throw std::invalid_argument("w_state: n must be >= 2");
  TargetState t = general_w(std::vector<double>(n - 1, 1.0));
  t.label = "w_" + std::to_string(n);
  return t;
}

// Express a full-register target in a machine's (sub)basis. Rejects targets
// with support outside the span.
inline TargetState restrict_to_basis(const TargetState& target, const std::vector<BasisState>& basis) {
  ComplexVector v(static_cast<Eigen::Index>(basis.size()));
  double captured = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = target.amplitudes(static_cast<Eigen::Index>(basis[i].index()));
    captured += std::norm(v(static_cast<Eigen::Index>(i)));
  }
  if (std::abs(captured - target.amplitudes.squaredNorm()) > 1e-12)
    throw std::invalid_argument("restrict_to_basis: target has support outside the subspace");
  return TargetState{std::move(v), target.label};
}

// Two-qubit concurrence in the closed form valid for this machine's reduced
// states: C = 2 max{0, |c| - sqrt(p00 p11)} with c the |01><10| coherence.
inline double concurrence_paper(const ComplexMatrix& rho12) {
  if (rho12.rows() != 4 || rho12.cols() != 4)
    throw std::invalid_argument("concurrence_paper: expected a two-qubit state");
  const double c = std::abs(rho12(1, 2));
  const double p00 = rho12(0, 0).real();
  const double p11 = rho12(3, 3).real();
  return 2.0 * std::max(0.0, c - std::sqrt(std::max(0.0, p00 * p11)));
}

// Standard two-qubit concurrence (spin-flip construction); the general-state
// ground truth the closed form is checked against.
inline double concurrence_wootters(const ComplexMatrix& rho12) {
  if (rho12.rows() != 4 || rho12.cols() != 4)
    throw std::invalid_argument("concurrence_wootters: expected a two-qubit state");
  const ComplexMatrix yy = kron(sigma_y(), sigma_y());
  const ComplexMatrix r = rho12 * yy * rho12.conjugate() * yy;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(r, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("concurrence_wootters: eigensolver failed");
  std::vector<double> lambda(4);
  for (int i = 0; i < 4; ++i) lambda[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

// <psi|rho|psi> against a pure target.
inline double fidelity_pure(const ComplexMatrix& rho, const TargetState& target) {
  if (rho.rows() != target.amplitudes.size())
    throw std::invalid_argument("fidelity_pure: dimension mismatch");
  const Complex f = target.amplitudes.dot(rho * target.amplitudes);
  return f.real();
}

inline double purity(const ComplexMatrix& rho) { return (rho * rho).trace().real(); }

struct EnergyCurrents {
  double q1 = 0.0;  // power into the system from the left reservoir
  double q3 = 0.0;  // power from the right/sink reservoirs
  double j = 0.0;   // (q1 - q3)/2
};

// Q_j = Tr{H * (dissipative action of reservoir j on rho)}, summed over every
// process the reservoir drives. A reservoir with no surviving processes
// contributes zero.
inline EnergyCurrents energy_currents(const ComplexMatrix& rho, const ComplexMatrix& h,
                                      const std::vector<JumpProcess>& jumps) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols())
    throw std::invalid_argument("energy_currents: dimension mismatch");
  EnergyCurrents out;
  for (const auto& jp : jumps) {
    if (jp.op.rows() != rho.rows())
      throw std::invalid_argument("energy_currents: jump dimension mismatch");
    const ComplexMatrix ldl = jp.op.adjoint() * jp.op;
    const ComplexMatrix diss =
        jp.op * rho * jp.op.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    const double q = jp.rate * (h * diss).trace().real();
    (jp.reservoir.side == Side::kLeft ? out.q1 : out.q3) += q;
  }
  out.j = 0.5 * (out.q1 - out.q3);
  return out;
}

struct DarkStateReport {
  struct JumpAction {
    std::string reservoir;
    Direction direction;
    double norm;       // ||L |psi>||
    bool annihilates;  // norm < 1e-10
  };
  std::vector<JumpAction> jump_actions;
  Complex eigenvalue;       // <psi|H'|psi> for H' = H - (i/2) sum rate L^dag L
  double eigen_residual;    // ||H'|psi> - eigenvalue |psi>||
  bool pass = false;
};

// A dark state must be killed by every jump operator and be an eigenstate of
// the rate-weighted non-Hermitian Hamiltonian.
inline DarkStateReport dark_state_check(const TargetState& psi, const ComplexMatrix& h,
                                        const std::vector<JumpProcess>& jumps) {
  const ComplexVector& v = psi.amplitudes;
  if (v.size() != h.rows()) throw std::invalid_argument("dark_state_check: dimension mismatch");

  DarkStateReport report;
  bool all_dark = true;
  ComplexMatrix h_eff = h;
  for (const auto& jp : jumps) {
    const double norm = (jp.op * v).norm();
    const bool dark = norm < 1e-10;
    all_dark = all_dark && dark;
    report.jump_actions.push_back(
        {reservoir_label(jp.reservoir), jp.direction, norm, dark});
    h_eff -= 0.5 * kImag * jp.rate * (jp.op.adjoint() * jp.op);
  }
  report.eigenvalue = v.dot(h_eff * v);
  report.eigen_residual = (h_eff * v - report.eigenvalue * v).norm();
  report.pass = all_dark && report.eigen_residual < 1e-10;
  return report;
}

}  // namespace qtm
