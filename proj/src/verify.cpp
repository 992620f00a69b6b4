#include "obsest/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "obsest/ensemble.hpp"
#include "obsest/estimation.hpp"
#include "obsest/symmetric.hpp"

namespace obsest {

namespace {

constexpr double kTolerance = 1e-10;
constexpr double kAttainmentTolerance = 1e-12;
constexpr Eigen::Index kDensePovmLimit = 512;
constexpr Eigen::Index kPositivityLimit = 256;

double relative_deviation(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& check, int d, int n) {
  std::uint64_t h = mix64(seed);
  for (char c : check) h = mix64(h ^ static_cast<unsigned char>(c));
  return mix64(h ^ (static_cast<std::uint64_t>(d) << 32) ^ static_cast<std::uint64_t>(n));
}

int max_copies(int d) {
  int n = 0;
  std::uint64_t dim = 1;
  while (dim * d <= kMaxTensorDimension) {
    dim *= d;
    ++n;
  }
  return n;
}

std::uint64_t pow_int(int d, int n) {
  std::uint64_t p = 1;
  for (int k = 0; k < n; ++k) p *= d;
  return p;
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& options) : options_(options) {}

  std::vector<CheckResult> run() {
    const bool fast = options_.level == VerifyLevel::fast;
    const int d_max = fast ? 2 : 8;
    for (int d = 2; d <= d_max; ++d) {
      const int n_max = fast ? 3 : max_copies(d);
      for (int n = 2; n <= n_max; ++n) projector_checks(d, n);
      for (int n = 1; n <= n_max; ++n) {
        if (n >= 2) trace_formula_checks(d, n, observables_for(d, n));
        omega_hat_square_check(d, n);
        if (n + 1 <= n_max) partial_trace_check(d, n);
        const std::uint64_t dim = pow_int(d, n);
        if (dim <= kDensePovmLimit) {
          if (n + 1 <= n_max) completed_square_check(d, n);
          attainment_checks(d, n);
          if (n >= 2) lemma_checks(d, n);
        }
        if (dim <= kPositivityLimit) positivity_check(d, n);
      }
    }
    return std::move(results_);
  }

 private:
  int observables_for(int d, int n) const {
    if (options_.level == VerifyLevel::fast) return 5;
    return (d <= 3 && n <= 4) ? 20 : 2;
  }

  const SparseReal& projector(int d, int n) {
    auto key = std::make_pair(d, n);
    auto it = projectors_.find(key);
    if (it == projectors_.end()) {
      SparseReal s = build_projector_occupation(d, n).matrix * options_.projector_scale;
      it = projectors_.emplace(key, std::move(s)).first;
    }
    return it->second;
  }

  SparseComplex projector_c(int d, int n) { return projector(d, n).cast<Complex>(); }

  std::vector<Observable> random_observables(const std::string& check, int d, int n, int count) {
    RngStream stream(cell_seed(options_.seed, check, d, n), 0);
    std::vector<Observable> out;
    for (int k = 0; k < count; ++k) out.emplace_back(random_hermitian(d, stream));
    return out;
  }

  void record(std::string check, int d, int n, double deviation, double tolerance, bool extra_ok = true) {
    CheckResult r;
    r.check = std::move(check);
    r.params = {{"d", d}, {"n", n}};
    r.max_deviation = deviation;
    r.tolerance = tolerance;
    r.pass = std::isfinite(deviation) && deviation < tolerance && extra_ok;
    results_.push_back(std::move(r));
  }

  void projector_checks(int d, int n) {
    const SparseReal& s = projector(d, n);
    const SparseReal perm = build_projector_permutation(d, n).matrix * options_.projector_scale;
    record("projector_construction_equivalence", d, n, SparseReal(perm - s).norm(), kTolerance);

    const SparseReal sq = s * s;
    record("projector_idempotence", d, n, max_abs(SparseReal(sq - s)), kTolerance);
    record("projector_self_adjoint", d, n, max_abs(SparseReal(s - SparseReal(s.transpose()))), kTolerance);

    double tr = 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) tr += s.coeff(i, i);
    record("projector_trace", d, n, std::abs(tr - static_cast<double>(symmetric_dimension(d, n))), kTolerance);

    double comm = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
      const SparseReal t = transposition_operator(d, n, k, k + 1);
      comm = std::max(comm, max_abs(SparseReal(s * t - t * s)));
    }
    record("projector_transposition_commutation", d, n, comm, kTolerance);
  }

  static double max_abs(const SparseReal& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.nonZeros(); ++k) best = std::max(best, std::abs(m.valuePtr()[k]));
    return best;
  }

  void trace_formula_checks(int d, int n, int count) {
    const SparseComplex s = projector_c(d, n);
    const double dn = static_cast<double>(symmetric_dimension(d, n));
    double single = 0.0, same = 0.0, distinct = 0.0;
    for (const auto& obs : random_observables("trace_formulas", d, n, count)) {
      std::vector<SparseComplex> embedded;
      for (int k = 1; k <= n; ++k) embedded.push_back(embed_one_body(obs, k, n));
      const double ref_single = dn / d * obs.trace();
      const double ref_same = dn / d * obs.trace_of_square();
      const double ref_distinct = dn / (d * (d + 1.0)) * (obs.trace_of_square() + obs.trace() * obs.trace());
      for (int a = 0; a < n; ++a) {
        single = std::max(single, relative_deviation(trace_of_product(s, embedded[a]).real(), ref_single));
        for (int b = 0; b < n; ++b) {
          const SparseComplex prod = embedded[a] * embedded[b];
          const Complex value = trace_of_product(s, prod);
          const double dev = relative_deviation(value.real(), a == b ? ref_same : ref_distinct) +
                             std::abs(value.imag()) / std::max(1.0, std::abs(ref_same));
          (a == b ? same : distinct) = std::max(a == b ? same : distinct, dev);
        }
      }
    }
    record("trace_single_embedding", d, n, single, kTolerance);
    record("trace_pair_same_slot", d, n, same, kTolerance);
    record("trace_pair_distinct_slots", d, n, distinct, kTolerance);
  }

  void omega_hat_square_check(int d, int n) {
    const SparseComplex s = projector_c(d, n);
    const double dn = static_cast<double>(symmetric_dimension(d, n));
    double dev = 0.0;
    for (const auto& obs : random_observables("omega_hat_squared", d, n, observables_for(d, n))) {
      const SparseComplex hat = omega_hat(obs, n);
      const SparseComplex hat_sq = hat * hat;
      const double ref = dn * (n * obs.trace_of_square() + (n + d + 1.0) * obs.trace() * obs.trace()) /
                         (d * (d + 1.0) * (n + d));
      dev = std::max(dev, relative_deviation(trace_of_product(s, hat_sq).real(), ref));
    }
    record("trace_omega_hat_squared", d, n, dev, kTolerance);
  }

  void partial_trace_check(int d, int n) {
    const SparseComplex s_next = projector_c(d, n + 1);
    const SparseComplex s = projector_c(d, n);
    double dev = 0.0;
    for (const auto& obs : random_observables("partial_trace", d, n, std::min(3, observables_for(d, n)))) {
      const SparseComplex lhs_full = s_next * embed_one_body(obs, n + 1, n + 1);
      const CMatrix lhs = partial_trace_last(lhs_full, d, n + 1);
      SparseComplex one_body = sparse_identity<Complex>(s.rows()) * Complex(obs.trace());
      for (int k = 1; k <= n; ++k) one_body += embed_one_body(obs, k, n);
      const CMatrix rhs = CMatrix(s * one_body) / static_cast<double>(n + 1);
      dev = std::max(dev, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    record("partial_trace_identity", d, n, dev, kTolerance);
  }

  struct SquareTerms {
    double delta1 = 0, delta2_direct = 0, delta2_hat = 0, delta3_direct = 0, delta3_closed = 0;
    double first = 0, second = 0;
  };

  // Every quantity is evaluated in the product eigenbasis of Ω with the
  // product eigenprojector POVM and the estimates `omega`.
  SquareTerms square_terms(const Observable& obs, int n, const RVector& omega, bool with_direct) {
    const int d = obs.dim();
    const double dn = static_cast<double>(symmetric_dimension(d, n));
    const CMatrix u = product_eigenbasis(obs, n);
    const CMatrix s = CMatrix(projector_c(d, n));
    const CMatrix hat = CMatrix(omega_hat(obs, n));
    const CMatrix s_rot = u.adjoint() * s * u;
    const CMatrix hat_rot = u.adjoint() * hat * u;
    const CMatrix s_hat = s_rot * hat_rot;
    const CMatrix s_hat_sq = s_hat * hat_rot;

    SquareTerms t;
    for (Eigen::Index a = 0; a < omega.size(); ++a) {
      const double w = omega[a];
      t.delta1 += w * w * s_rot(a, a).real();
      t.delta2_hat += w * s_hat(a, a).real();
      t.first += (w * w * s_rot(a, a) - 2.0 * w * s_hat(a, a) + s_hat_sq(a, a)).real();
    }
    t.delta1 /= dn;
    t.delta2_hat *= -2.0 / dn;
    t.first /= dn;
    t.second = obs.spread() / (d * (d + 1.0) * (n + d));
    t.delta3_closed = analytic_second_moment(obs);

    if (with_direct) {
      const double dn_next = static_cast<double>(symmetric_dimension(d, n + 1));
      const SparseComplex lifted = projector_c(d, n + 1) * embed_one_body(obs, n + 1, n + 1);
      const CMatrix reduced = partial_trace_last(lifted, d, n + 1);
      const CMatrix reduced_rot = u.adjoint() * reduced * u;
      for (Eigen::Index a = 0; a < omega.size(); ++a) t.delta2_direct += omega[a] * reduced_rot(a, a).real();
      t.delta2_direct *= -2.0 / dn_next;

      const SparseComplex pair = embed_one_body(obs, 1, 2) * embed_one_body(obs, 2, 2);
      t.delta3_direct = trace_of_product(projector_c(d, 2), pair).real() /
                        static_cast<double>(symmetric_dimension(d, 2));
    }
    return t;
  }

  static RVector optimal_estimates(const Observable& obs, int n) {
    const Eigen::Index dim = tensor_dimension(obs.dim(), n);
    RVector w(dim);
    for (Eigen::Index a = 0; a < dim; ++a)
      w[a] = estimate_optimal(outcomes_from_indices(basis_digits(a, obs.dim(), n), obs), obs);
    return w;
  }

  static RVector sample_average_estimates(const Observable& obs, int n) {
    const Eigen::Index dim = tensor_dimension(obs.dim(), n);
    RVector w(dim);
    for (Eigen::Index a = 0; a < dim; ++a)
      w[a] = estimate_sample_average(outcomes_from_indices(basis_digits(a, obs.dim(), n), obs));
    return w;
  }

  void completed_square_check(int d, int n) {
    RngStream stream(cell_seed(options_.seed, "completed_square_estimates", d, n), 0);
    double dev = 0.0;
    for (const auto& obs : random_observables("completed_square", d, n, 2)) {
      // Arbitrary estimates as well as the optimal ones: the identity holds for any ω_a.
      RVector arbitrary(tensor_dimension(d, n));
      for (Eigen::Index a = 0; a < arbitrary.size(); ++a) arbitrary[a] = stream.normal();
      for (const RVector& omega : {arbitrary, optimal_estimates(obs, n)}) {
        const SquareTerms t = square_terms(obs, n, omega, true);
        const double expanded = t.delta1 + t.delta2_direct + t.delta3_direct;
        dev = std::max({dev, relative_deviation(t.delta2_direct, t.delta2_hat),
                        relative_deviation(t.delta3_direct, t.delta3_closed),
                        relative_deviation(expanded, t.first + t.second)});
      }
    }
    record("completed_square_identity", d, n, dev, kTolerance);
  }

  void attainment_checks(int d, int n) {
    double attained = 0.0, excess_dev = 0.0;
    bool excess_positive = true;
    for (const auto& obs : random_observables("attainment", d, n, 2)) {
      const SquareTerms opt = square_terms(obs, n, optimal_estimates(obs, n), false);
      attained = std::max(attained, std::abs(opt.first));
      const SquareTerms av = square_terms(obs, n, sample_average_estimates(obs, n), false);
      const double expected = analytic_delta_av(obs, n) - analytic_delta_opt(obs, n);
      excess_dev = std::max(excess_dev, relative_deviation(av.first, expected));
      excess_positive = excess_positive && av.first > 0.0;
    }
    record("lower_bound_attainment", d, n, attained, kAttainmentTolerance);
    record("sample_average_excess", d, n, excess_dev, kTolerance, excess_positive);
  }

  void positivity_check(int d, int n) {
    double worst = 0.0;
    const CMatrix s = CMatrix(projector_c(d, n));
    for (const auto& obs : random_observables("positivity", d, n, 1)) {
      const CMatrix hat = CMatrix(omega_hat(obs, n));
      const double lo = obs.eigenvalues().minCoeff() - 1.0, hi = obs.eigenvalues().maxCoeff() + 1.0;
      for (int k = 0; k <= 8; ++k) {
        const double w = lo + (hi - lo) * k / 8.0;
        const CMatrix diff = CMatrix::Identity(s.rows(), s.cols()) * w - hat;
        const CMatrix op = s * diff * diff * s;
        const CMatrix herm = (op + op.adjoint()) / 2.0;
        const double min_eig = Eigen::SelfAdjointEigenSolver<CMatrix>(herm, Eigen::EigenvaluesOnly).eigenvalues()[0];
        worst = std::max(worst, -min_eig);
      }
    }
    record("square_positivity", d, n, std::max(0.0, worst), 1e-12);
  }

  void lemma_checks(int d, int n) {
    RngStream stream(cell_seed(options_.seed, "unbiased_lemma", d, n), 0);
    const int trials = pow_int(d, n) <= 64 ? 1000 : 100;
    const UnbiasedLemmaReport rep = check_unbiased_lemma(d, n, trials, stream);
    record("unbiased_lemma_forward", d, n, rep.forward_max_deviation, kTolerance);
    record("unbiased_lemma_converse", d, n, rep.converse_deviation, 1e-12);
    record("unbiased_lemma_negative_control", d, n, rep.negative_control_max_deviation, kTolerance);
  }

  VerifyOptions options_;
  std::map<std::pair<int, int>, SparseReal> projectors_;
  std::vector<CheckResult> results_;
};

}  // namespace

VerifyLevel parse_verify_level(const std::string& name) {
  if (name == "fast") return VerifyLevel::fast;
  if (name == "full") return VerifyLevel::full;
  throw std::invalid_argument("unknown verify level '" + name + "' (expected fast or full)");
}

nlohmann::json to_json(const CheckResult& result) {
  return {{"check", result.check},
          {"params", result.params},
          {"max_deviation", result.max_deviation},
          {"tolerance", result.tolerance},
          {"pass", result.pass}};
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) { return Suite(options).run(); }

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

}  // namespace obsest
