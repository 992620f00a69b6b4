#include "obsest/symmetric.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obsest {

namespace {

using Triplet = Eigen::Triplet<double>;

std::uint64_t factorial_capped(int n, std::uint64_t cap) {
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) {
    if (f > cap / k) return cap;
    f *= k;
  }
  return f;
}

SymmetricProjector wrap(int d, int n, SparseReal matrix) {
  SymmetricProjector s;
  s.local_dim = d;
  s.copies = n;
  s.matrix = std::move(matrix);
  s.matrix.makeCompressed();
  s.dimension = symmetric_dimension(d, n);
  return s;
}

SparseReal projector_by_enumeration(int d, int n) {
  const Eigen::Index dim = tensor_dimension(d, n);
  const double norm = 1.0 / static_cast<double>(factorial_capped(n, std::numeric_limits<std::uint64_t>::max()));
  std::vector<Triplet> trips;
  std::vector<int> perm(n), in(n), out(n);
  std::vector<Eigen::Index> images;
  for (Eigen::Index col = 0; col < dim; ++col) {
    in = basis_digits(col, d, n);
    images.clear();
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (int k = 0; k < n; ++k) out[perm[k]] = in[k];
      images.push_back(basis_index(out, d));
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::sort(images.begin(), images.end());
    for (std::size_t a = 0; a < images.size();) {
      std::size_t b = a;
      while (b < images.size() && images[b] == images[a]) ++b;
      trips.emplace_back(images[a], col, static_cast<double>(b - a) * norm);
      a = b;
    }
  }
  SparseReal s(dim, dim);
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

SparseReal projector_by_cosets(int d, int n) {
  tensor_dimension(d, n);
  SparseReal s = sparse_identity<double>(d);
  for (int k = 2; k <= n; ++k) {
    const Eigen::Index dim = tensor_dimension(d, k);
    SparseReal cosets = sparse_identity<double>(dim);
    for (int a = 0; a < k - 1; ++a) cosets += transposition_operator(d, k, a, k - 1);
    SparseReal lifted = kron(s, sparse_identity<double>(d));
    s = (lifted * cosets) / static_cast<double>(k);
    s.prune(0.0);
  }
  return s;
}

void require_copies(int copies) {
  if (copies < 1) throw std::invalid_argument("number of copies must be at least 1");
}

}  // namespace

std::uint64_t symmetric_dimension(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("symmetric_dimension needs d >= 1 and n >= 0");
  // C(n+d−1, k) with k = min(d−1, n), built up multiplicatively so every
  // intermediate is itself a binomial coefficient.
  const std::uint64_t top = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(d) - 1;
  const std::uint64_t k = std::min<std::uint64_t>(d - 1, n);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (top - k + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("symmetric dimension exceeds 64-bit range");
  }
  return static_cast<std::uint64_t>(c);
}

Eigen::Index tensor_dimension(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("tensor dimension needs d >= 1 and n >= 0");
  std::uint64_t dim = 1;
  for (int k = 0; k < n; ++k) {
    dim *= static_cast<std::uint64_t>(d);
    if (dim > kMaxTensorDimension)
      throw std::length_error("d^n = " + std::to_string(d) + "^" + std::to_string(n) + " exceeds the " +
                              std::to_string(kMaxTensorDimension) + " limit of the exact oracle");
  }
  return static_cast<Eigen::Index>(dim);
}

std::vector<OccupationIndex> enumerate_occupations(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("enumerate_occupations needs d >= 1 and n >= 0");
  std::vector<OccupationIndex> out;
  std::vector<int> counts(d, 0);
  // Depth-first over n_1 ≥ … from n down to 0, remainder forced into n_d.
  auto recurse = [&](auto&& self, int slot, int remaining) -> void {
    if (slot == d - 1) {
      counts[slot] = remaining;
      out.push_back({counts});
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[slot] = c;
      self(self, slot + 1, remaining - c);
    }
  };
  recurse(recurse, 0, n);
  return out;
}

std::vector<int> basis_digits(Eigen::Index index, int d, int n) {
  std::vector<int> digits(n);
  for (int k = n - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(index % d);
    index /= d;
  }
  return digits;
}

Eigen::Index basis_index(std::span<const int> digits, int d) {
  Eigen::Index idx = 0;
  for (int digit : digits) idx = idx * d + digit;
  return idx;
}

RVector occupation_basis_vector(const OccupationIndex& occ, int d) {
  if (static_cast<int>(occ.counts.size()) != d) throw std::invalid_argument("occupation has wrong number of modes");
  const int n = std::accumulate(occ.counts.begin(), occ.counts.end(), 0);
  std::vector<int> seq;
  for (int i = 0; i < d; ++i) seq.insert(seq.end(), occ.counts[i], i);

  RVector v = RVector::Zero(tensor_dimension(d, n));
  std::size_t terms = 0;
  do {
    v[basis_index(seq, d)] = 1.0;
    ++terms;
  } while (std::next_permutation(seq.begin(), seq.end()));
  return v / std::sqrt(static_cast<double>(terms));
}

SymmetricProjector build_projector_permutation(int d, int n, PermutationRoute route) {
  if (n < 1) throw std::invalid_argument("projector needs n >= 1");
  const Eigen::Index dim = tensor_dimension(d, n);
  if (route == PermutationRoute::automatic) {
    const std::uint64_t work = factorial_capped(n, std::uint64_t{1} << 40) * static_cast<std::uint64_t>(dim);
    route = work <= (std::uint64_t{1} << 24) ? PermutationRoute::enumerate : PermutationRoute::coset;
  }
  return wrap(d, n, route == PermutationRoute::enumerate ? projector_by_enumeration(d, n) : projector_by_cosets(d, n));
}

SymmetricProjector build_projector_occupation(int d, int n) {
  if (n < 1) throw std::invalid_argument("projector needs n >= 1");
  const Eigen::Index dim = tensor_dimension(d, n);
  std::vector<Triplet> trips;
  std::vector<Eigen::Index> members;
  for (const auto& occ : enumerate_occupations(d, n)) {
    std::vector<int> seq;
    for (int i = 0; i < d; ++i) seq.insert(seq.end(), occ.counts[i], i);
    members.clear();
    do {
      members.push_back(basis_index(seq, d));
    } while (std::next_permutation(seq.begin(), seq.end()));
    const double w = 1.0 / static_cast<double>(members.size());
    for (Eigen::Index r : members)
      for (Eigen::Index c : members) trips.emplace_back(r, c, w);
  }
  SparseReal s(dim, dim);
  s.setFromTriplets(trips.begin(), trips.end());
  return wrap(d, n, std::move(s));
}

SparseReal permutation_operator(int d, std::span<const int> perm) {
  const int n = static_cast<int>(perm.size());
  const Eigen::Index dim = tensor_dimension(d, n);
  std::vector<int> out(n);
  std::vector<Triplet> trips;
  trips.reserve(dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto in = basis_digits(col, d, n);
    for (int k = 0; k < n; ++k) out[perm[k]] = in[k];
    trips.emplace_back(basis_index(out, d), col, 1.0);
  }
  SparseReal p(dim, dim);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

SparseReal transposition_operator(int d, int n, int a, int b) {
  if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("transposition slot out of range");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[a], perm[b]);
  return permutation_operator(d, perm);
}

SparseComplex embed_one_body(const Observable& obs, int position, int copies) {
  require_copies(copies);
  if (position < 1 || position > copies)
    throw std::out_of_range("embedding position " + std::to_string(position) + " outside 1.." +
                            std::to_string(copies));
  const int d = obs.dim();
  tensor_dimension(d, copies);
  const SparseComplex left = sparse_identity<Complex>(tensor_dimension(d, position - 1));
  const SparseComplex right = sparse_identity<Complex>(tensor_dimension(d, copies - position));
  const SparseComplex local = obs.matrix().sparseView();
  return kron(kron(left, local), right);
}

SparseComplex omega_hat(const Observable& obs, int copies) {
  require_copies(copies);
  const Eigen::Index dim = tensor_dimension(obs.dim(), copies);
  SparseComplex sum = sparse_identity<Complex>(dim) * Complex(obs.trace());
  for (int n = 1; n <= copies; ++n) sum += embed_one_body(obs, n, copies);
  return sum / Complex(copies + obs.dim());
}

SparseComplex omega_hat_av(const Observable& obs, int copies) {
  require_copies(copies);
  SparseComplex sum(tensor_dimension(obs.dim(), copies), tensor_dimension(obs.dim(), copies));
  for (int n = 1; n <= copies; ++n) sum += embed_one_body(obs, n, copies);
  return sum / Complex(copies);
}

CVector tensor_power(const CVector& v, int n) {
  CVector out = CVector::Ones(1);
  for (int k = 0; k < n; ++k) out = kron(out, v);
  return out;
}

CMatrix product_eigenbasis(const Observable& obs, int copies) {
  require_copies(copies);
  tensor_dimension(obs.dim(), copies);
  CMatrix u = obs.eigenvectors();
  for (int k = 1; k < copies; ++k) u = kron(u, obs.eigenvectors());
  return u;
}

CMatrix haar_average_tensor_power(int d, int n, int trials, RngStream& stream) {
  if (trials < 1) throw std::invalid_argument("haar_average_tensor_power needs at least one trial");
  if (n < 1) throw std::invalid_argument("haar_average_tensor_power needs n >= 1");
  const Eigen::Index dim = tensor_dimension(d, n);
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (int t = 0; t < trials; ++t) {
    const CVector v = tensor_power(sample_haar_pure(d, stream).amplitudes(), n);
    acc.noalias() += v * v.adjoint();
  }
  return acc / static_cast<double>(trials);
}

CMatrix random_hermitian(int d, RngStream& stream) {
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double re = stream.normal();
      const double im = stream.normal();
      a(i, j) = Complex(re, im);
    }
  CMatrix h = (a + a.adjoint()) / 2.0;
  return (h + h.adjoint()) / 2.0;
}

UnbiasedLemmaReport check_unbiased_lemma(int d, int copies, int trials, RngStream& stream) {
  require_copies(copies);
  if (trials < 1) throw std::invalid_argument("check_unbiased_lemma needs at least one trial");
  const Eigen::Index dim = tensor_dimension(d, copies);
  const CMatrix s = build_projector_occupation(d, copies).dense().cast<Complex>();

  UnbiasedLemmaReport report;
  report.trials = trials;

  // "if": any A with S A S = 0 is invisible to every ρ^⊗N.
  const CMatrix b = random_hermitian(static_cast<int>(dim), stream);
  const CMatrix a = b - s * b * s;
  for (int t = 0; t < trials; ++t) {
    const CVector v = tensor_power(sample_haar_pure(d, stream).amplitudes(), copies);
    const double forward = std::abs((v.adjoint() * a * v)(0, 0));
    const double control = std::abs((v.adjoint() * s * v)(0, 0) - 1.0);
    report.forward_max_deviation = std::max(report.forward_max_deviation, forward);
    report.negative_control_max_deviation = std::max(report.negative_control_max_deviation, control);
  }

  // Unbiased sample-average POVM: S (Σ_a ω_a E_a − Ω̂_av) S = 0.
  const Observable obs(random_hermitian(d, stream));
  const CMatrix u = product_eigenbasis(obs, copies);
  RVector omega(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    double sum = 0.0;
    for (int digit : basis_digits(idx, d, copies)) sum += obs.eigenvalues()[digit];
    omega[idx] = sum / copies;
  }
  const CMatrix povm_sum = u * omega.cast<Complex>().asDiagonal() * u.adjoint();
  const CMatrix av = CMatrix(omega_hat_av(obs, copies));
  report.converse_deviation = (s * (povm_sum - av) * s).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace obsest
