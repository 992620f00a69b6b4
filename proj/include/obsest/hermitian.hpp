#pragma once

#include <optional>

#include "obsest/types.hpp"

namespace obsest {

/// Hermitian observable together with its spectral data.
///
/// Eigenvalues are sorted in descending order; column `i` of `eigenvectors()`
/// is the eigenvector for `eigenvalues()[i]`. Inside a degenerate eigenspace
/// the basis is whatever the eigensolver returned. Immutable once built.
class Observable {
 public:
  static constexpr double kHermiticityTolerance = 1e-10;

  /// Validates and diagonalises `matrix`. Throws std::invalid_argument for
  /// a non-square matrix, d < 2, or a Hermiticity violation above 1e-10.
  explicit Observable(CMatrix matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }
  const RVector& eigenvalues() const { return eigenvalues_; }
  const CMatrix& eigenvectors() const { return eigenvectors_; }

  /// trΩ and trΩ², taken from the matrix entries.
  double trace() const { return trace_; }
  double trace_of_square() const { return trace_sq_; }

  /// d·trΩ² − (trΩ)², the spread that every error formula is proportional to.
  double spread() const { return dim() * trace_sq_ - trace_ * trace_; }

 private:
  CMatrix matrix_;
  RVector eigenvalues_;
  CMatrix eigenvectors_;
  double trace_ = 0.0;
  double trace_sq_ = 0.0;
};

Observable make_observable(const CMatrix& entries);

/// Unit-norm pure state |φ⟩.
class PureState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws std::invalid_argument if the norm differs from 1 by more than 1e-12.
  explicit PureState(CVector amplitudes);
  /// Normalises `amplitudes` first; throws on a zero vector.
  static PureState normalized(const CVector& amplitudes);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  CMatrix density() const { return amplitudes_ * amplitudes_.adjoint(); }
  /// Bloch vector ⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩; only for d = 2.
  Vec3 bloch() const;

 private:
  CVector amplitudes_;
};

/// Qubit state (1 + n·σ)/2 with |n| ≤ 1.
class MixedQubitState {
 public:
  explicit MixedQubitState(const Vec3& bloch);

  const Vec3& bloch() const { return bloch_; }
  CMatrix density() const;

 private:
  Vec3 bloch_;
};

/// Pauli matrices σ_x, σ_y, σ_z.
CMatrix pauli(int axis);

double expectation(const PureState& state, const Observable& obs);
RVector outcome_distribution(const PureState& state, const Observable& obs);
double mixed_qubit_expectation(const MixedQubitState& state, const Observable& obs);

}  // namespace obsest
