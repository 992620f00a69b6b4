#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "obsest/ensemble.hpp"
#include "obsest/hermitian.hpp"
#include "obsest/symmetric.hpp"

using namespace obsest;

namespace {

CVector ket(std::initializer_list<Complex> amps) {
  CVector v(amps.size());
  std::copy(amps.begin(), amps.end(), v.data());
  return v;
}

}  // namespace

TEST_CASE("pauli z is already diagonal") {
  const Observable z = make_observable(pauli(2));
  CHECK(z.eigenvalues()[0] == doctest::Approx(1.0));
  CHECK(z.eigenvalues()[1] == doctest::Approx(-1.0));
  CHECK((z.eigenvectors().cwiseAbs() - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(z.trace() == 0.0);
  CHECK(z.trace_of_square() == 2.0);
}

TEST_CASE("degenerate identity accepts any orthonormal eigenbasis") {
  const Observable id = make_observable(CMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues()[i] == doctest::Approx(1.0));
  CHECK((id.eigenvectors().adjoint() * id.eigenvectors() - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("random Hermitian matrices: spectral invariants against a reference eigensolver") {
  RngStream stream(11, 0);
  for (int d = 2; d <= 5; ++d) {
    for (int rep = 0; rep < 100; ++rep) {
      const CMatrix h = random_hermitian(d, stream);
      const Observable obs(h);

      CHECK((obs.matrix() - obs.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      const CMatrix gram = obs.eigenvectors().adjoint() * obs.eigenvectors();
      CHECK((gram - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);

      CMatrix rebuilt = CMatrix::Zero(d, d);
      for (int i = 0; i < d; ++i)
        rebuilt += obs.eigenvalues()[i] * obs.eigenvectors().col(i) * obs.eigenvectors().col(i).adjoint();
      CHECK((rebuilt - h).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(obs.eigenvalues().sum() - h.trace().real()) < 1e-10);

      for (int i = 0; i + 1 < d; ++i) CHECK(obs.eigenvalues()[i] >= obs.eigenvalues()[i + 1]);

      // General (non-Hermitian) complex eigensolver as the reference spectrum.
      Eigen::ComplexEigenSolver<CMatrix> reference(h);
      std::vector<double> ref(d);
      for (int i = 0; i < d; ++i) ref[i] = reference.eigenvalues()[i].real();
      std::sort(ref.rbegin(), ref.rend());
      for (int i = 0; i < d; ++i) CHECK(std::abs(obs.eigenvalues()[i] - ref[i]) < 1e-10);
    }
  }
}

TEST_CASE("make_observable rejects bad input") {
  CHECK_THROWS_AS(make_observable(CMatrix::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(make_observable(CMatrix::Identity(1, 1)), std::invalid_argument);
  CMatrix skew = pauli(2);
  skew(0, 1) = 1e-6;
  CHECK_THROWS_AS(make_observable(skew), std::invalid_argument);
  // Below the 1e-10 input tolerance the matrix is accepted as is.
  CMatrix nearly = pauli(2);
  nearly(0, 1) = 1e-12;
  CHECK_NOTHROW(make_observable(nearly));
}

TEST_CASE("expectation values") {
  const Observable z(pauli(2));
  const PureState north(ket({1.0, 0.0}));
  const PureState equator = PureState::normalized(ket({1.0, 1.0}));
  CHECK(expectation(north, z) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(expectation(equator, z)) < 1e-15);

  RngStream stream(3, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix h = random_hermitian(4, stream);
    const Observable obs(h);
    const PureState phi = sample_haar_pure(4, stream);
    const Complex direct = (phi.amplitudes().adjoint() * h * phi.amplitudes())(0, 0);
    CHECK(std::abs(direct.imag()) < 1e-12);
    CHECK(std::abs(expectation(phi, obs) - direct.real()) < 1e-12);

    const Complex phase = std::polar(1.0, 0.37 * rep);
    const PureState rotated(phi.amplitudes() * phase);
    CHECK(std::abs(expectation(rotated, obs) - expectation(phi, obs)) < 1e-12);
  }
  CHECK_THROWS_AS(expectation(PureState(ket({1.0, 0.0, 0.0})), z), std::invalid_argument);
}

TEST_CASE("outcome distributions") {
  const Observable z(pauli(2));
  const RVector p0 = outcome_distribution(PureState(ket({1.0, 0.0})), z);
  CHECK(p0[0] == doctest::Approx(1.0));
  CHECK(p0[1] == doctest::Approx(0.0));
  const RVector half = outcome_distribution(PureState::normalized(ket({1.0, 1.0})), z);
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  RngStream stream(5, 2);
  for (int rep = 0; rep < 50; ++rep) {
    const Observable obs(random_hermitian(3, stream));
    const PureState phi = sample_haar_pure(3, stream);
    const RVector p = outcome_distribution(phi, obs);
    const CMatrix rho = phi.density();
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      const CMatrix projector = obs.eigenvectors().col(i) * obs.eigenvectors().col(i).adjoint();
      CHECK(std::abs(p[i] - (projector * rho).trace().real()) < 1e-12);
      CHECK(p[i] >= 0.0);
      total += p[i];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(p.dot(obs.eigenvalues()) - expectation(phi, obs)) < 1e-12);
  }
}

TEST_CASE("pure states validate their norm") {
  CHECK_THROWS_AS(PureState(ket({1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(PureState::normalized(ket({0.0, 0.0})), std::invalid_argument);
  const Vec3 n = PureState::normalized(ket({1.0, Complex(0.0, 1.0)})).bloch();
  CHECK(n[0] == doctest::Approx(0.0));
  CHECK(n[1] == doctest::Approx(1.0));
  CHECK(n[2] == doctest::Approx(0.0));
}

TEST_CASE("mixed qubit expectation") {
  const Observable z(pauli(2));
  CHECK(mixed_qubit_expectation(MixedQubitState({0, 0, 1}), z) == 1.0);
  CHECK(mixed_qubit_expectation(MixedQubitState({0, 0, 0.5}), z) == doctest::Approx(0.5));

  RngStream stream(8, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Observable obs(random_hermitian(2, stream));
    // Completely mixed state: exactly trΩ/2.
    CHECK(mixed_qubit_expectation(MixedQubitState({0, 0, 0}), obs) == obs.trace() / 2.0);
    const MixedQubitState rho(0.7 * sample_direction(stream));
    const double oracle = (rho.density() * obs.matrix()).trace().real();
    CHECK(std::abs(mixed_qubit_expectation(rho, obs) - oracle) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.density());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
  CHECK_THROWS_AS(MixedQubitState({0, 0, 1.01}), std::invalid_argument);
  CHECK_THROWS_AS(mixed_qubit_expectation(MixedQubitState({0, 0, 0}), Observable(CMatrix::Identity(3, 3))),
                  std::invalid_argument);
}
