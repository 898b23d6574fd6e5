// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "kdmc/background.hpp"
#include "kdmc/errors.hpp"

namespace kdmc {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace detail

/// Per-particle random stream: xoshiro256** keyed by (master seed, index).
///
/// The state is derived by hashing the pair through splitmix64, so stream i
/// is fully determined by its key and never depends on which worker runs it.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index) : seed_(seed), index_(index) {
    std::uint64_t key = seed;
    std::uint64_t mixed = detail::splitmix64(key);
    std::uint64_t salt = index ^ 0x6a09e667f3bcc909ULL;
    mixed ^= detail::splitmix64(salt);
    for (auto& word : state_) word = detail::splitmix64(mixed);
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on (0, 1].
  double uniform_open_closed() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on (0, 1), symmetric about 1/2.
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t state_[4];
};

/// Standard normal quantile, Wichura's AS241 (PPND16), relative accuracy
/// about 1e-16. normal_quantile(1 - u) == -normal_quantile(u) whenever 1 - u
/// is exact.
inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                  0.24178072517745061177) * r + 1.27045825245236838258) * r +
                3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

/// Inverse-CDF exponential transform: -ln(u)/rate for u in (0, 1].
inline double exponential_from_uniform(double u, double rate) {
  if (!(rate > 0.0)) {
    throw InvalidRateError("exponential rate must be positive, got " +
                           std::to_string(rate));
  }
  return -std::log(u) / rate + 0.0;
}

inline double sample_exponential(RngStream& stream, double rate) {
  return exponential_from_uniform(stream.uniform_open_closed(), rate);
}

inline double sample_standard_normal(RngStream& stream) {
  return normal_quantile(stream.uniform_open());
}

/// Drifting Maxwellian velocity u_p(x) + sigma~_p(x) * xi.
inline double maxwellian_velocity(const LocalPlasma& p, double xi) {
  return p.mean_velocity + p.thermal_speed * xi;
}

template <Background B>
double sample_maxwellian(RngStream& stream, double x, const B& bg) {
  return maxwellian_velocity(bg.local(x), sample_standard_normal(stream));
}

// clang-format off
/// Source of the random draws consumed by the particle simulators. Tests
/// substitute scripted draws through the same interface.
template <class S>
concept Sampler = requires(S& s, double rate) {
  { s.exponential(rate) } -> std::convertible_to<double>;
  { s.standard_normal() } -> std::convertible_to<double>;
  { s.uniform() } -> std::convertible_to<double>;
};
// clang-format on

class StreamSampler {
 public:
  explicit StreamSampler(RngStream stream) : stream_(stream) {}
  StreamSampler(std::uint64_t seed, std::uint64_t index) : stream_(seed, index) {}

  double exponential(double rate) { return sample_exponential(stream_, rate); }
  double standard_normal() { return sample_standard_normal(stream_); }
  double uniform() { return stream_.uniform_open_closed(); }

  RngStream& stream() { return stream_; }

 private:
  RngStream stream_;
};

}  // namespace kdmc
