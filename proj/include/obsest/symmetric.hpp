#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "obsest/ensemble.hpp"
#include "obsest/hermitian.hpp"

namespace obsest {

/// Largest tensor-power dimension dⁿ the exact constructions accept.
inline constexpr std::uint64_t kMaxTensorDimension = 4096;

/// C(n+d−1, d−1). Throws std::overflow_error instead of wrapping.
std::uint64_t symmetric_dimension(int d, int n);

/// dⁿ, checked against kMaxTensorDimension (std::length_error).
Eigen::Index tensor_dimension(int d, int n);

/// Occupation numbers (n_1, …, n_d) with Σ n_i = n.
struct OccupationIndex {
  std::vector<int> counts;
};

/// All occupations for (d, n), in lexicographically descending order of counts.
std::vector<OccupationIndex> enumerate_occupations(int d, int n);

/// Digits (i_1, …, i_n) of a product-basis index; i_1 is the most significant.
std::vector<int> basis_digits(Eigen::Index index, int d, int n);
Eigen::Index basis_index(std::span<const int> digits, int d);

/// Normalised symmetric basis vector for an occupation: the equal-weight sum
/// of every distinct product state with those occupations.
RVector occupation_basis_vector(const OccupationIndex& occ, int d);

struct SymmetricProjector {
  int local_dim = 0;
  int copies = 0;
  SparseReal matrix;
  std::uint64_t dimension = 0;

  RMatrix dense() const { return RMatrix(matrix); }
  SparseComplex complex() const { return matrix.cast<Complex>(); }
};

enum class PermutationRoute {
  automatic,  ///< enumerate when n!·dⁿ is small, coset otherwise
  enumerate,  ///< all n! permutations in lexicographic order
  coset,      ///< Σ_{S_n} = Σ_{S_{n−1}} · (1 + Σ_k (k n)), applied recursively
};

/// (1/n!) Σ_π P_π over all permutations of the n tensor factors.
SymmetricProjector build_projector_permutation(int d, int n, PermutationRoute route = PermutationRoute::automatic);

/// Σ_occ |ψ_occ⟩⟨ψ_occ| over the normalised occupation basis.
SymmetricProjector build_projector_occupation(int d, int n);

/// Operator permuting tensor factors: factor k of the input lands on slot perm[k].
SparseReal permutation_operator(int d, std::span<const int> perm);
/// Swap of tensor factors a and b (0-based).
SparseReal transposition_operator(int d, int n, int a, int b);

/// Ω(position) = 1^{⊗(position−1)} ⊗ Ω ⊗ 1^{⊗(copies−position)}, position 1-based.
SparseComplex embed_one_body(const Observable& obs, int position, int copies);

/// (trΩ + Σ_n Ω(n)) / (N + d).
SparseComplex omega_hat(const Observable& obs, int copies);

/// (1/N) Σ_n Ω(n).
SparseComplex omega_hat_av(const Observable& obs, int copies);

/// Traces out the last of `copies` tensor factors of local dimension d.
template <typename Derived>
Matrix<typename Derived::Scalar> partial_trace_last(const Eigen::MatrixBase<Derived>& m, int d, int copies) {
  const Eigen::Index outer = tensor_dimension(d, copies - 1);
  if (copies < 1 || m.rows() != outer * d || m.cols() != outer * d)
    throw std::invalid_argument("partial_trace_last: matrix size does not match d^copies");
  Matrix<typename Derived::Scalar> out = Matrix<typename Derived::Scalar>::Zero(outer, outer);
  for (Eigen::Index i = 0; i < outer; ++i)
    for (Eigen::Index j = 0; j < outer; ++j)
      for (int k = 0; k < d; ++k) out(i, j) += m(i * d + k, j * d + k);
  return out;
}

template <typename Scalar>
Matrix<Scalar> partial_trace_last(const SparseMatrix<Scalar>& m, int d, int copies) {
  const Eigen::Index outer = tensor_dimension(d, copies - 1);
  if (copies < 1 || m.rows() != outer * d || m.cols() != outer * d)
    throw std::invalid_argument("partial_trace_last: matrix size does not match d^copies");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(outer, outer);
  for (int c = 0; c < m.outerSize(); ++c)
    for (typename SparseMatrix<Scalar>::InnerIterator it(m, c); it; ++it)
      if (it.row() % d == it.col() % d) out(it.row() / d, it.col() / d) += it.value();
  return out;
}

/// |φ⟩^{⊗n}.
CVector tensor_power(const CVector& v, int n);

/// Columns are the product eigenvectors |i_1 … i_N⟩ of Ω, ordered by basis_index.
CMatrix product_eigenbasis(const Observable& obs, int copies);

/// Empirical mean of ρ^{⊗n} over `trials` Haar-random pure states.
CMatrix haar_average_tensor_power(int d, int n, int trials, RngStream& stream);

struct UnbiasedLemmaReport {
  double forward_max_deviation = 0.0;   ///< max |tr[A ρ^⊗N]| with S A S = 0
  double converse_deviation = 0.0;      ///< max |S (Σ ω_a E_a − Ω̂_av) S|
  double negative_control_max_deviation = 0.0;  ///< max |tr[S ρ^⊗N] − 1|
  int trials = 0;
};

/// Both directions of: tr[A ρ^⊗N] = 0 for every pure ρ  ⇔  S_N A S_N = 0.
UnbiasedLemmaReport check_unbiased_lemma(int d, int copies, int trials, RngStream& stream);

/// Random Hermitian d×d matrix (A + A†)/2 with standard complex normal A.
CMatrix random_hermitian(int d, RngStream& stream);

}  // namespace obsest
