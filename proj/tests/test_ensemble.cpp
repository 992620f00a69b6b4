#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "obsest/ensemble.hpp"
#include "obsest/symmetric.hpp"

using namespace obsest;

TEST_CASE("streams are pure functions of (seed, trial)") {
  RngStream a = derive_stream(42, 0), b = derive_stream(42, 0), c = derive_stream(42, 1);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);
  CHECK(derive_stream(42, 0)() != derive_stream(43, 0)());

  RngStream n1 = derive_stream(9, 9), n2 = derive_stream(9, 9);
  for (int i = 0; i < 5; ++i) CHECK(n1.normal() == n2.normal());
}

TEST_CASE("pooled uniforms have mean 1/2") {
  double sum = 0.0;
  const int per_stream = 1000, streams = 1000;
  for (int k = 0; k < streams; ++k) {
    RngStream s = derive_stream(7, k);
    for (int i = 0; i < per_stream; ++i) {
      const double u = s.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
  }
  // 3σ for 10⁶ uniforms is 3·sqrt(1/12)/1000 ≈ 0.00087.
  CHECK(std::abs(sum / (per_stream * streams) - 0.5) < 0.002);
}

TEST_CASE("haar states are normalised and isotropic") {
  const int m = 1000000;
  Vec3 mean = Vec3::Zero();
  CMatrix second = CMatrix::Zero(4, 4);
  for (int k = 0; k < m; ++k) {
    RngStream s = derive_stream(2024, k);
    const PureState phi = sample_haar_pure(2, s);
    REQUIRE(std::abs(phi.amplitudes().norm() - 1.0) < 1e-12);
    mean += phi.bloch();
    const CVector v = tensor_power(phi.amplitudes(), 2);
    second.noalias() += v * v.adjoint();
  }
  mean /= m;
  second /= m;
  // Per component σ = sqrt(1/3)/sqrt(M); 3σ on the magnitude.
  CHECK(mean.norm() < 0.004);
  const CMatrix target = build_projector_occupation(2, 2).dense().cast<Complex>() / 3.0;
  CHECK((second - target).norm() < 0.005);
}

TEST_CASE("haar sampling is unitarily invariant (two-sample KS)") {
  const int m = 100000;
  RngStream ustream(55, 0);
  const CMatrix h = random_hermitian(3, ustream);
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CMatrix u = es.eigenvectors();  // a fixed unitary

  std::vector<double> plain(m), rotated(m);
  for (int k = 0; k < m; ++k) {
    RngStream a = derive_stream(100, k), b = derive_stream(200, k);
    plain[k] = std::norm(sample_haar_pure(3, a).amplitudes()[0]);
    rotated[k] = std::norm((u * sample_haar_pure(3, b).amplitudes())[0]);
  }
  std::sort(plain.begin(), plain.end());
  std::sort(rotated.begin(), rotated.end());
  double ks = 0.0;
  std::size_t i = 0, j = 0;
  while (i < plain.size() && j < rotated.size()) {
    if (plain[i] <= rotated[j]) ++i; else ++j;
    ks = std::max(ks, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / m));
  }
  const double critical_1pct = 1.628 * std::sqrt(2.0 / m);
  CHECK(ks < critical_1pct);
}

TEST_CASE("radial laws") {
  RngStream s = derive_stream(1, 1);
  for (int k = 0; k < 1000; ++k) {
    CHECK(std::abs(sample_bloch_mixed(RadialLaw::pure_surface(), s).bloch().norm() - 1.0) < 1e-12);
    CHECK(sample_bloch_mixed(RadialLaw::fixed_radius(0.0), s).bloch().norm() == 0.0);
  }
  CHECK(RadialLaw::pure_surface().second_moment() == 1.0);
  CHECK(RadialLaw::uniform_ball().second_moment() == doctest::Approx(0.6));
  CHECK(RadialLaw::fixed_radius(0.5).second_moment() == doctest::Approx(0.25));
  CHECK(RadialLaw::two_point(0.8, 0.5).second_moment() == doctest::Approx(0.32));

  CHECK_THROWS_AS(sample_bloch_mixed(RadialLaw::fixed_radius(1.2), s), std::invalid_argument);
  CHECK_THROWS_AS(sample_bloch_mixed(RadialLaw::two_point(0.5, 1.5), s), std::invalid_argument);
}

TEST_CASE("empirical <n^2> matches the closed form for every law") {
  const int m = 1000000;
  for (const RadialLaw law : {RadialLaw::pure_surface(), RadialLaw::uniform_ball(), RadialLaw::fixed_radius(0.6),
                              RadialLaw::two_point(0.9, 0.4)}) {
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < m; ++k) {
      RngStream s = derive_stream(77, k);
      const Vec3 n = sample_bloch_mixed(law, s).bloch();
      REQUIRE(n.norm() <= 1.0 + 1e-12);
      const double r2 = n.squaredNorm();
      sum += r2;
      sum_sq += r2 * r2;
    }
    const double mean = sum / m;
    const double sigma = std::sqrt(std::max(0.0, sum_sq / m - mean * mean) / m);
    INFO(to_string(law.kind));
    CHECK(std::abs(mean - law.second_moment()) <= 3.0 * sigma + 1e-12);
    if (law.kind == RadialLaw::Kind::uniform_ball) CHECK(std::abs(mean - 0.6) < 0.002);
  }
}
