#include "obsest/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace obsest {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trial_index)
    : master_seed_(master_seed),
      trial_index_(trial_index),
      counter_(mix64(mix64(master_seed + kGolden) ^ (trial_index * kGolden + 0x632be59bd9b4e019ULL))) {}

RngStream::result_type RngStream::operator()() {
  counter_ += kGolden;
  return mix64(counter_);
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return gauss_(*this); }

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return RngStream(master_seed, trial_index);
}

void RadialLaw::validate() const {
  switch (kind) {
    case Kind::pure_surface:
    case Kind::uniform_ball:
      return;
    case Kind::fixed_radius:
    case Kind::two_point:
      if (!(radius >= 0.0 && radius <= 1.0))
        throw std::invalid_argument("radial law radius must lie in [0, 1], got " + std::to_string(radius));
      if (!(weight >= 0.0 && weight <= 1.0))
        throw std::invalid_argument("two-point weight must lie in [0, 1], got " + std::to_string(weight));
      return;
  }
}

double RadialLaw::second_moment() const {
  switch (kind) {
    case Kind::pure_surface: return 1.0;
    case Kind::uniform_ball: return 3.0 / 5.0;
    case Kind::fixed_radius: return radius * radius;
    case Kind::two_point: return weight * radius * radius;
  }
  return 0.0;
}

double RadialLaw::sample_radius(RngStream& stream) const {
  switch (kind) {
    case Kind::pure_surface: return 1.0;
    case Kind::uniform_ball: return std::cbrt(stream.uniform());
    case Kind::fixed_radius: return radius;
    case Kind::two_point: return stream.uniform() < weight ? radius : 0.0;
  }
  return 0.0;
}

const char* to_string(RadialLaw::Kind kind) {
  switch (kind) {
    case RadialLaw::Kind::pure_surface: return "pure-surface";
    case RadialLaw::Kind::uniform_ball: return "uniform-ball";
    case RadialLaw::Kind::fixed_radius: return "fixed-radius";
    case RadialLaw::Kind::two_point: return "two-point";
  }
  return "?";
}

PureState sample_haar_pure(int d, RngStream& stream) {
  if (d < 1) throw std::invalid_argument("state dimension must be positive");
  CVector amps(d);
  for (int i = 0; i < d; ++i) {
    const double re = stream.normal();
    const double im = stream.normal();
    amps[i] = Complex{re, im};
  }
  return PureState::normalized(amps);
}

Vec3 sample_direction(RngStream& stream) {
  for (;;) {
    Vec3 v{stream.normal(), stream.normal(), stream.normal()};
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

MixedQubitState sample_bloch_mixed(const RadialLaw& law, RngStream& stream) {
  law.validate();
  const Vec3 dir = sample_direction(stream);
  const double r = law.sample_radius(stream);
  return MixedQubitState(r * dir);
}

}  // namespace obsest
