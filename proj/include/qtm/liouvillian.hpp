// Lindblad generator as a dense superoperator: assembly, steady-state solve,
// time propagation, and spectral data (relaxation gap, zero-mode count).
//
// Vectorization is column-stacking throughout: vec(A rho B) = (B^T kron A) vec(rho).
#pragma once

#include "qtm/hilbert.hpp"
#include "qtm/machine.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtm {

struct Superoperator {
  ComplexMatrix matrix;  // d^2 x d^2
  Eigen::Index dim = 0;  // d
};

struct SpectralInfo {
  std::vector<Complex> eigenvalues;  // sorted by descending real part
  int zero_mode_count = 0;
  double gap = 0.0;  // -Re of the slowest nonzero mode; 0 if none
};

class DegenerateSteadyStateError : public NumericalError {
 public:
  explicit DegenerateSteadyStateError(int count)
      : NumericalError("steady state is not unique: " + std::to_string(count) +
                       " Liouvillian zero modes"),
        zero_mode_count(count) {}
  int zero_mode_count;
};

// Eigen's column-major layout makes Map<> exactly the column-stacking vec.
inline ComplexVector vectorize(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("vectorize: matrix must be square");
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

inline ComplexMatrix devectorize(const ComplexVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw std::invalid_argument("devectorize: length is not a perfect square");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

// L = -i(I kron H - H^T kron I)
//     + sum_k rate_k [ conj(L_k) kron L_k - 1/2 I kron L_k^dag L_k - 1/2 (L_k^dag L_k)^T kron I ]
inline Superoperator build_liouvillian(const ComplexMatrix& h, const std::vector<JumpProcess>& jumps) {
  if (h.rows() != h.cols()) throw std::invalid_argument("build_liouvillian: H must be square");
  if (hermiticity_residual(h) > kScalarTol)
    throw std::invalid_argument("build_liouvillian: H must be Hermitian");
  const Eigen::Index d = h.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);

  ComplexMatrix l = -kImag * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& jp : jumps) {
    if (jp.op.rows() != d || jp.op.cols() != d)
      throw std::invalid_argument("build_liouvillian: jump operator dimension mismatch");
    const ComplexMatrix ldl = jp.op.adjoint() * jp.op;
    l += jp.rate * (kron(jp.op.conjugate(), jp.op) -
                    0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
  }
  return Superoperator{std::move(l), d};
}

inline Superoperator build_liouvillian(const Machine& m) {
  return build_liouvillian(m.hamiltonian, m.jumps);
}

inline SpectralInfo spectral_info(const Superoperator& sup) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(sup.matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_info: eigensolver failed");

  SpectralInfo out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const Complex& a, const Complex& b) { return a.real() > b.real(); });

  double scale = 0.0;
  for (const auto& ev : out.eigenvalues) scale = std::max(scale, std::abs(ev));
  if (scale == 0.0) {  // L = 0: everything is stationary
    out.zero_mode_count = static_cast<int>(out.eigenvalues.size());
    out.gap = 0.0;
    return out;
  }
  const double tol = 1e-9 * scale;
  for (const auto& ev : out.eigenvalues)
    if (std::abs(ev) < tol) ++out.zero_mode_count;
  // Slowest decaying mode: largest real part among eigenvalues that actually decay.
  double gap = 0.0;
  for (const auto& ev : out.eigenvalues) {
    if (-ev.real() > tol) {
      const double candidate = -ev.real();
      gap = (gap == 0.0) ? candidate : std::min(gap, candidate);
    }
  }
  out.gap = gap;
  return out;
}

// Unique steady state via the trace-replaced linear system: the diagonal-sector
// rows of L sum to zero, so overwriting one of them (row 0) with the trace
// constraint yields a nonsingular solve whenever the zero mode is simple.
inline ComplexMatrix steady_state(const Superoperator& sup) {
  const auto spec = spectral_info(sup);
  if (spec.zero_mode_count != 1) throw DegenerateSteadyStateError(spec.zero_mode_count);

  const Eigen::Index d = sup.dim;
  ComplexMatrix a = sup.matrix;
  a.row(0).setZero();
  for (Eigen::Index c = 0; c < d; ++c) a(0, c * d + c) = 1.0;  // tr(rho) = 1
  ComplexVector rhs = ComplexVector::Zero(d * d);
  rhs(0) = 1.0;

  Eigen::FullPivLU<ComplexMatrix> lu(a);
  if (!lu.isInvertible())
    throw NumericalError("steady_state: trace-replaced system is singular");
  ComplexMatrix rho = devectorize(lu.solve(rhs));

  rho = 0.5 * (rho + rho.adjoint().eval());  // scrub round-off skew
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  if (es.info() != Eigen::Success) throw NumericalError("steady_state: eigensolver failed");
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw NumericalError("steady_state: negative population beyond tolerance: " +
                         std::to_string(es.eigenvalues().minCoeff()));
  Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  rho = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
  rho /= rho.trace().real();

  const double residual = (sup.matrix * vectorize(rho)).cwiseAbs().maxCoeff();
  if (residual > 1e-9)
    throw NumericalError("steady_state: residual " + std::to_string(residual) + " above 1e-9");
  return rho;
}

namespace detail {

inline void require_state(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("evolve: state must be square");
  if (hermiticity_residual(rho) > 1e-9)
    throw std::invalid_argument("evolve: initial state is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
    throw std::invalid_argument("evolve: initial state must have unit trace");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("evolve: initial state is not positive semidefinite");
}

}  // namespace detail

// rho(t_k) = devec(exp(L t_k) vec(rho0)). One eigendecomposition serves all
// time points; if the eigenbasis is ill-conditioned, fall back to
// scaling-and-squaring exponentials per time step.
inline std::vector<ComplexMatrix> evolve(const Superoperator& sup, const ComplexMatrix& rho0,
                                         const std::vector<double>& times) {
  detail::require_state(rho0);
  if (rho0.rows() != sup.dim) throw std::invalid_argument("evolve: state dimension mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw std::invalid_argument("evolve: times must be nonnegative");
    if (i > 0 && times[i] < times[i - 1])
      throw std::invalid_argument("evolve: times must be ascending");
  }

  std::vector<ComplexMatrix> out;
  out.reserve(times.size());
  const ComplexVector v0 = vectorize(rho0);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(sup.matrix, /*computeEigenvectors=*/true);
  bool eigen_ok = (es.info() == Eigen::Success);
  double cond = std::numeric_limits<double>::infinity();
  if (eigen_ok) {
    Eigen::JacobiSVD<ComplexMatrix> svd(es.eigenvectors());
    const double smin = svd.singularValues().minCoeff();
    cond = (smin > 0.0) ? svd.singularValues().maxCoeff() / smin
                        : std::numeric_limits<double>::infinity();
  }

  if (eigen_ok && cond < 1e12) {
    const ComplexVector w = es.eigenvectors().fullPivLu().solve(v0);
    for (double t : times) {
      if (t == 0.0) {
        out.push_back(rho0);
        continue;
      }
      ComplexVector phases(es.eigenvalues().size());
      for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(es.eigenvalues()(k) * t) * w(k);
      out.push_back(devectorize(es.eigenvectors() * phases));
    }
  } else {
    ComplexVector v = v0;
    double t_prev = 0.0;
    for (double t : times) {
      if (t > t_prev) v = ComplexMatrix(sup.matrix * (t - t_prev)).exp() * v;
      t_prev = t;
      out.push_back(devectorize(v));
    }
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(out[i].trace() - Complex{1.0, 0.0}) > 1e-8)
      throw NumericalError("evolve: trace drift above 1e-8 at t = " + std::to_string(times[i]));
  }
  return out;
}

}  // namespace qtm
