#pragma once

// Collective spin algebra in the maximum-total-spin (Dicke) sector j = N/2.
//
// Basis states |j, m> are stored in descending-m order: index 0 is |j, j>
// (all spins up), index N is |j, -j>. S- therefore maps index k to k + 1.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace btckur {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Thrown when a computation leaves its numerical validity envelope
/// (positivity loss, step too coarse, negative radicand beyond tolerance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DickeSpace {
 public:
  explicit DickeSpace(int n_spins) : n_spins_(n_spins) {
    if (n_spins < 1) throw std::invalid_argument("DickeSpace: N must be >= 1, got " + std::to_string(n_spins));
  }

  int n_spins() const { return n_spins_; }
  double j() const { return 0.5 * n_spins_; }
  int dim() const { return n_spins_ + 1; }
  /// Magnetic quantum number of basis index k.
  double m_at(int k) const { return j() - k; }

  friend bool operator==(const DickeSpace&, const DickeSpace&) = default;

 private:
  int n_spins_;
};

enum class OpLabel { Sx, Sy, Sz, Sp, Sm, custom };

struct CollectiveOperator {
  DickeSpace space;
  CMatrix matrix;
  OpLabel label = OpLabel::custom;
};

struct OperatorSet {
  CollectiveOperator sx, sy, sz, sp, sm;
};

/// <k+1| S- |k> = sqrt(j(j+1) - m(m-1)), m = j - k, for k = 0 .. N-1.
inline Eigen::VectorXd ladder_coefficients(const DickeSpace& space) {
  const double j = space.j();
  Eigen::VectorXd c(space.dim() - 1);
  for (int k = 0; k + 1 < space.dim(); ++k) {
    const double m = space.m_at(k);
    c(k) = std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m - 1.0)));
  }
  return c;
}

inline OperatorSet build_operators(const DickeSpace& space) {
  const int d = space.dim();
  const Eigen::VectorXd c = ladder_coefficients(space);

  CMatrix sz = CMatrix::Zero(d, d);
  CMatrix sm = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) sz(k, k) = space.m_at(k);
  for (int k = 0; k + 1 < d; ++k) sm(k + 1, k) = c(k);
  CMatrix sp = sm.adjoint();
  CMatrix sx = 0.5 * (sp + sm);
  CMatrix sy = (sp - sm) / cplx(0.0, 2.0);

  return {
      {space, std::move(sx), OpLabel::Sx}, {space, std::move(sy), OpLabel::Sy},
      {space, std::move(sz), OpLabel::Sz}, {space, std::move(sp), OpLabel::Sp},
      {space, std::move(sm), OpLabel::Sm},
  };
}

struct StateVector {
  DickeSpace space;
  CVector amplitudes;

  double norm_defect() const { return std::abs(amplitudes.squaredNorm() - 1.0); }
};

struct DensityMatrix {
  DickeSpace space;
  CMatrix matrix;

  static DensityMatrix from_pure(const StateVector& psi) {
    return {psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
  }
  double hermiticity_defect() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
  double trace_defect() const { return std::abs(matrix.trace() - cplx(1.0)); }
  double min_eigenvalue() const {
    const CMatrix herm = 0.5 * (matrix + matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

inline StateVector basis_state(const DickeSpace& space, int k) {
  if (k < 0 || k >= space.dim()) throw std::out_of_range("basis_state: index out of range");
  CVector v = CVector::Zero(space.dim());
  v(k) = 1.0;
  return {space, std::move(v)};
}

/// |theta, phi> = exp[theta (e^{i phi} S- - e^{-i phi} S+) / 2] |j, j>, via the
/// closed-form binomial amplitudes sqrt(C(N,k)) cos^{N-k}(theta/2) sin^k(theta/2) e^{i k phi}.
inline StateVector spin_coherent_state(const DickeSpace& space, double theta_bloch, double phi) {
  const int n = space.n_spins();
  const double c = std::cos(0.5 * theta_bloch);
  const double s = std::sin(0.5 * theta_bloch);
  CVector amp(space.dim());
  for (int k = 0; k <= n; ++k) {
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    double mag;
    if (c != 0.0 && s != 0.0) {
      const double sign = ((c < 0.0 && (n - k) % 2 == 1) != (s < 0.0 && k % 2 == 1)) ? -1.0 : 1.0;
      mag = sign * std::exp(0.5 * log_binom + (n - k) * std::log(std::abs(c)) + k * std::log(std::abs(s)));
    } else {
      mag = std::exp(0.5 * log_binom) * std::pow(c, n - k) * std::pow(s, k);
    }
    amp(k) = mag * std::polar(1.0, k * phi);
  }
  amp /= amp.norm();
  return {space, std::move(amp)};
}

inline void require_same_space(const DickeSpace& a, const DickeSpace& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": Dicke space dimension mismatch");
}

inline cplx expectation(const CMatrix& op, const StateVector& psi) {
  if (op.rows() != psi.space.dim() || op.cols() != psi.space.dim())
    throw std::invalid_argument("expectation: operator and state dimensions differ");
  return psi.amplitudes.dot(op * psi.amplitudes);
}
inline cplx expectation(const CMatrix& op, const DensityMatrix& rho) {
  if (op.rows() != rho.space.dim() || op.cols() != rho.space.dim())
    throw std::invalid_argument("expectation: operator and state dimensions differ");
  return (op * rho.matrix).trace();
}

template <class State>
cplx expectation(const CollectiveOperator& op, const State& state) {
  require_same_space(op.space, state.space, "expectation");
  return expectation(op.matrix, state);
}

/// <A B> - <A><B>, operator order preserved.
template <class State>
cplx covariance(const CollectiveOperator& a, const CollectiveOperator& b, const State& state) {
  require_same_space(a.space, state.space, "covariance");
  require_same_space(b.space, state.space, "covariance");
  return expectation(CMatrix(a.matrix * b.matrix), state) - expectation(a.matrix, state) * expectation(b.matrix, state);
}

template <class State>
cplx covariance(const CMatrix& a, const CMatrix& b, const State& state) {
  return expectation(CMatrix(a * b), state) - expectation(a, state) * expectation(b, state);
}

/// m_alpha = <S_alpha> / (N/2).
template <class State>
Eigen::Vector3d magnetization(const OperatorSet& ops, const State& state) {
  const double scale = 2.0 / state.space.n_spins();
  return {scale * expectation(ops.sx, state).real(), scale * expectation(ops.sy, state).real(),
          scale * expectation(ops.sz, state).real()};
}

inline Eigen::Vector3d bloch_vector(double theta_bloch, double phi) {
  return {std::sin(theta_bloch) * std::cos(phi), std::sin(theta_bloch) * std::sin(phi), std::cos(theta_bloch)};
}

}  // namespace btckur
