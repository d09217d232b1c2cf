// Multi-qubit Hilbert-space bookkeeping: basis enumeration, operator
// embedding, tensor products and partial traces on dense complex matrices.
//
// Conventions used throughout the library:
//   - |0> is the qubit ground state, |1> the excited state.
//   - Multi-qubit kets are big-endian: in |pqr>, qubit 1 (site 0) is the
//     leftmost / most significant bit, so index(|pqr>) = 4p + 2q + r.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qtm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Absolute tolerance for complex-scalar equality checks, shared by all modules.
inline constexpr double kScalarTol = 1e-10;

inline constexpr Complex kImag{0.0, 1.0};

// Raised when an operation would produce an invalid quantum state or a
// solver leaves its accuracy budget.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ComplexMatrix sigma_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;  // |1><0|
  return m;
}

inline ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;  // |0><1|
  return m;
}

inline ComplexMatrix sigma_x() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline ComplexMatrix sigma_y() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = -kImag;
  m(1, 0) = kImag;
  return m;
}

inline ComplexMatrix sigma_z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// Occupation-number operator |1><1|.
inline ComplexMatrix number_op() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

// One computational basis state of an N-qubit register, stored as the ordered
// occupation list with site 0 (qubit 1) leftmost.
struct BasisState {
  std::vector<int> occupations;

  explicit BasisState(std::vector<int> bits) : occupations(std::move(bits)) {
    for (int b : occupations) {
      if (b != 0 && b != 1) throw std::invalid_argument("BasisState: occupations must be 0 or 1");
    }
  }

  static BasisState from_index(std::size_t index, std::size_t n_qubits) {
    if (n_qubits == 0 || index >= (std::size_t{1} << n_qubits))
      throw std::invalid_argument("BasisState: index out of range");
    std::vector<int> bits(n_qubits);
    for (std::size_t s = 0; s < n_qubits; ++s)
      bits[s] = static_cast<int>((index >> (n_qubits - 1 - s)) & 1u);
    return BasisState(std::move(bits));
  }

  std::size_t size() const { return occupations.size(); }

  int total_occupation() const {
    int n = 0;
    for (int b : occupations) n += b;
    return n;
  }

  // Big-endian linear index: site 0 is the most significant bit.
  std::size_t index() const {
    std::size_t v = 0;
    for (int b : occupations) v = (v << 1) | static_cast<std::size_t>(b);
    return v;
  }
};

inline ComplexVector ket(const BasisState& s) {
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << s.size());
  v(static_cast<Eigen::Index>(s.index())) = 1.0;
  return v;
}

// Kronecker product, dims multiply.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// I (x) ... (x) op (x) ... (x) I with the 2x2 operator at `site`
// (site 0 = most significant factor).
inline ComplexMatrix embed_site_operator(const ComplexMatrix& op2x2, std::size_t site,
                                         std::size_t n_qubits) {
  if (op2x2.rows() != 2 || op2x2.cols() != 2)
    throw std::invalid_argument("embed_site_operator: operator must be 2x2");
  if (site >= n_qubits)
    throw std::invalid_argument("embed_site_operator: site out of range");
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t s = 0; s < n_qubits; ++s) out = kron(out, s == site ? op2x2 : id2);
  return out;
}

// Reduced density matrix on the kept sites (ascending site order preserved).
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const std::vector<std::size_t>& keep,
                                   std::size_t n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("partial_trace: dimension does not match qubit count");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n_qubits) throw std::invalid_argument("partial_trace: keep site out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw std::invalid_argument("partial_trace: keep sites must be strictly ascending");
  }

  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < n_qubits; ++s) {
    bool kept = false;
    for (std::size_t k : keep) kept |= (k == s);
    if (!kept) traced.push_back(s);
  }

  const std::size_t nk = keep.size();
  const std::size_t nt = traced.size();
  // Bit position (from the left) of site s is n_qubits-1-s.
  auto bit_of = [n_qubits](std::size_t s) { return n_qubits - 1 - s; };

  ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index{1} << nk, Eigen::Index{1} << nk);
  for (std::size_t r = 0; r < (std::size_t{1} << nk); ++r) {
    for (std::size_t c = 0; c < (std::size_t{1} << nk); ++c) {
      std::size_t base_i = 0, base_j = 0;
      for (std::size_t k = 0; k < nk; ++k) {
        const std::size_t bit = bit_of(keep[k]);
        base_i |= ((r >> (nk - 1 - k)) & 1u) << bit;
        base_j |= ((c >> (nk - 1 - k)) & 1u) << bit;
      }
      Complex sum = 0.0;
      for (std::size_t t = 0; t < (std::size_t{1} << nt); ++t) {
        std::size_t i = base_i, j = base_j;
        for (std::size_t k = 0; k < nt; ++k) {
          const std::size_t bit = bit_of(traced[k]);
          const std::size_t b = (t >> (nt - 1 - k)) & 1u;
          i |= b << bit;
          j |= b << bit;
        }
        sum += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sum;
    }
  }
  return out;
}

inline double hermiticity_residual(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol = kScalarTol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qtm
