#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace kslab {

// Philox 4x64-10 block cipher (counter-based RNG).  Verified against the
// reference implementation's known-answer vectors.
inline std::array<uint64_t, 4> philox4x64(const std::array<uint64_t, 4>& ctr,
                                          const std::array<uint64_t, 2>& key) {
  uint64_t x0 = ctr[0], x1 = ctr[1], x2 = ctr[2], x3 = ctr[3];
  uint64_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    unsigned __int128 p0 = static_cast<unsigned __int128>(0xD2E7470EE14C6C93ull) * x0;
    unsigned __int128 p1 = static_cast<unsigned __int128>(0xCA5A826395121157ull) * x2;
    uint64_t hi0 = static_cast<uint64_t>(p0 >> 64), lo0 = static_cast<uint64_t>(p0);
    uint64_t hi1 = static_cast<uint64_t>(p1 >> 64), lo1 = static_cast<uint64_t>(p1);
    x0 = hi1 ^ x1 ^ k0;
    x1 = lo1;
    x2 = hi0 ^ x3 ^ k1;
    x3 = lo0;
    k0 += 0x9E3779B97F4A7C15ull;
    k1 += 0xBB67AE8584CAA73Bull;
  }
  return {x0, x1, x2, x3};
}

inline double to_unit_interval(uint64_t x) {
  // (0, 1]: safe under log()
  return ((x >> 11) + 1) * 0x1.0p-53;
}

// Per-particle random stream: key = (seed, particle id), counter
// = (purpose, step, block, 0).  Every draw is a pure function of those
// coordinates, so results do not depend on evaluation order or thread count.
class ParticleStream {
 public:
  ParticleStream(uint64_t seed, uint64_t particle) : key_{seed, particle} {}

  std::array<uint64_t, 4> raw(uint64_t purpose, uint64_t step, uint64_t block) const {
    return philox4x64({purpose, step, block, 0}, key_);
  }

  double uniform(uint64_t purpose, uint64_t step, uint64_t lane) const {
    return to_unit_interval(raw(purpose, step, lane / 4)[lane % 4]);
  }

  // Standard normals via Box-Muller; blocks of 4 uniforms produce 4 normals.
  void gaussians(uint64_t purpose, uint64_t step, double* out, int count) const {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    int produced = 0;
    uint64_t block = 0;
    while (produced < count) {
      auto r = raw(purpose, step, block++);
      for (int p = 0; p < 2 && produced < count; ++p) {
        double u1 = to_unit_interval(r[2 * p]);
        double u2 = to_unit_interval(r[2 * p + 1]);
        double mag = std::sqrt(-2.0 * std::log(u1));
        out[produced++] = mag * std::cos(kTwoPi * u2);
        if (produced < count) out[produced++] = mag * std::sin(kTwoPi * u2);
      }
    }
  }

 private:
  std::array<uint64_t, 2> key_;
};

}  // namespace kslab
