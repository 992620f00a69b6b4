#include "obsest/hermitian.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obsest {

Observable::Observable(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("observable matrix is not square (" + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + ")");
  if (matrix_.rows() < 2) throw std::invalid_argument("observable dimension must be at least 2");
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermiticityTolerance)
    throw std::invalid_argument("observable is not Hermitian (max |M - M^dagger| = " + std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // Eigen returns ascending order; stable_sort keeps the solver's order among ties.
  const int d = dim();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return solver.eigenvalues()[a] > solver.eigenvalues()[b]; });
  eigenvalues_.resize(d);
  eigenvectors_.resize(d, d);
  for (int k = 0; k < d; ++k) {
    eigenvalues_[k] = solver.eigenvalues()[order[k]];
    eigenvectors_.col(k) = solver.eigenvectors().col(order[k]);
  }

  trace_ = matrix_.trace().real();
  trace_sq_ = (matrix_ * matrix_).trace().real();
}

Observable make_observable(const CMatrix& entries) { return Observable(entries); }

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 1) throw std::invalid_argument("pure state needs at least one amplitude");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kNormTolerance)
    throw std::invalid_argument("pure state is not normalised (|c|^2 = " + std::to_string(norm2) + ")");
}

PureState PureState::normalized(const CVector& amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalise the zero vector");
  return PureState(amplitudes / norm);
}

Vec3 PureState::bloch() const {
  if (dim() != 2) throw std::invalid_argument("Bloch vector requires d = 2");
  const Complex c0 = amplitudes_[0], c1 = amplitudes_[1];
  const Complex off = std::conj(c0) * c1;
  return {2.0 * off.real(), 2.0 * off.imag(), std::norm(c0) - std::norm(c1)};
}

MixedQubitState::MixedQubitState(const Vec3& bloch) : bloch_(bloch) {
  if (bloch_.norm() > 1.0 + 1e-12)
    throw std::invalid_argument("Bloch vector length exceeds 1 (|n| = " + std::to_string(bloch_.norm()) + ")");
}

CMatrix MixedQubitState::density() const {
  CMatrix rho = CMatrix::Identity(2, 2);
  for (int k = 0; k < 3; ++k) rho += bloch_[k] * pauli(k);
  return rho / 2.0;
}

CMatrix pauli(int axis) {
  const Complex i{0.0, 1.0};
  CMatrix s(2, 2);
  switch (axis) {
    case 0: s << 0, 1, 1, 0; break;
    case 1: s << 0, -i, i, 0; break;
    case 2: s << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("Pauli axis must be 0, 1 or 2");
  }
  return s;
}

namespace {
void require_same_dim(const PureState& state, const Observable& obs) {
  if (state.dim() != obs.dim())
    throw std::invalid_argument("dimension mismatch: state d = " + std::to_string(state.dim()) +
                                ", observable d = " + std::to_string(obs.dim()));
}
}  // namespace

RVector outcome_distribution(const PureState& state, const Observable& obs) {
  require_same_dim(state, obs);
  return (obs.eigenvectors().adjoint() * state.amplitudes()).cwiseAbs2();
}

double expectation(const PureState& state, const Observable& obs) {
  return outcome_distribution(state, obs).dot(obs.eigenvalues());
}

double mixed_qubit_expectation(const MixedQubitState& state, const Observable& obs) {
  if (obs.dim() != 2) throw std::invalid_argument("mixed-qubit expectation requires d = 2");
  const CMatrix& m = obs.matrix();
  const Vec3& n = state.bloch();
  // tr[σ_k Ω] for k = x, y, z
  const double sx = (m(0, 1) + m(1, 0)).real();
  const double sy = (Complex{0.0, 1.0} * (m(0, 1) - m(1, 0))).real();
  const double sz = (m(0, 0) - m(1, 1)).real();
  return (obs.trace() + n[0] * sx + n[1] * sy + n[2] * sz) / 2.0;
}

}  // namespace obsest
