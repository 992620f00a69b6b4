#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "obsest/hermitian.hpp"

namespace obsest {

/// Per-trial random stream. The output sequence depends only on the
/// (master_seed, trial_index) pair it was derived from: the generator is a
/// SplitMix64 counter whose starting point is a hash of that pair.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t trial_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal draw.
  double normal();

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t trial_index() const { return trial_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t trial_index_;
  std::uint64_t counter_;
  std::normal_distribution<double> gauss_;
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index);

/// SplitMix64 finaliser; also used to separate seed domains.
std::uint64_t mix64(std::uint64_t x);

/// Radial distribution of an isotropic Bloch-ball ensemble.
struct RadialLaw {
  enum class Kind { pure_surface, uniform_ball, fixed_radius, two_point };

  Kind kind = Kind::pure_surface;
  double radius = 1.0;  // fixed_radius, two_point
  double weight = 1.0;  // two_point: probability of `radius` (else 0)

  static RadialLaw pure_surface() { return {Kind::pure_surface, 1.0, 1.0}; }
  static RadialLaw uniform_ball() { return {Kind::uniform_ball, 1.0, 1.0}; }
  static RadialLaw fixed_radius(double r) { return {Kind::fixed_radius, r, 1.0}; }
  static RadialLaw two_point(double r, double w) { return {Kind::two_point, r, w}; }

  /// Throws std::invalid_argument when the law can produce |n| > 1 or has
  /// out-of-range parameters.
  void validate() const;
  /// ⟨n²⟩ in closed form.
  double second_moment() const;
  double sample_radius(RngStream& stream) const;
};

const char* to_string(RadialLaw::Kind kind);

/// Unitary-invariant pure state: 2d standard normals, paired into complex
/// amplitudes and normalised.
PureState sample_haar_pure(int d, RngStream& stream);

/// Uniform direction on the unit sphere.
Vec3 sample_direction(RngStream& stream);

MixedQubitState sample_bloch_mixed(const RadialLaw& law, RngStream& stream);

}  // namespace obsest
