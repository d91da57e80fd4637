#ifndef UNILEARN_RNG_HPP
#define UNILEARN_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace unilearn {

// Counter-keyed xoshiro256++ stream.  Streams are identified by (seed, stream)
// so that chunked parallel sampling replays bit-identically no matter how the
// chunks are scheduled.  Deliberately avoids std::<distribution>s, whose output
// is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    for (auto& s : state_) s = splitmix64(x);
    // avoid the all-zero state
    if (!(state_[0] | state_[1] | state_[2] | state_[3])) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform double in [0,1) with 53 random bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do { u1 = uniform(); } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  std::complex<double> complex_normal() { return {normal(), normal()}; }

  // Haar on SU(2): normalized 4-dimensional Gaussian
  std::array<double, 4> unit_quaternion() {
    while (true) {
      std::array<double, 4> q{normal(), normal(), normal(), normal()};
      const double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
      if (n2 < 1e-30) continue;
      const double inv = 1.0 / std::sqrt(n2);
      for (auto& c : q) c *= inv;
      return q;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace unilearn

#endif
