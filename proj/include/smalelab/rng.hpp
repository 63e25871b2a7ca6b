#ifndef SMALELAB_RNG_HPP
#define SMALELAB_RNG_HPP

#include <cstdint>
#include <cmath>

namespace smalelab {

// Deterministic xoshiro-style generator. Sampling code must not depend on
// libstdc++ distribution internals, so uniforms are derived from raw bits.
// Streams are indexed so parallel sampling stays reproducible.
class Rng {
public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) {
    uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    for (int i = 0; i < 4; ++i) s_[i] = splitmix(z);
    for (int i = 0; i < 8; ++i) next();
  }

  uint64_t next() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  uint32_t below(uint32_t n) { return static_cast<uint32_t>(next() % n); }
  int pick_weighted(const double* w, int n) {
    double total = 0;
    for (int i = 0; i < n; ++i) total += w[i];
    double x = uniform() * total;
    for (int i = 0; i < n; ++i) {
      x -= w[i];
      if (x < 0) return i;
    }
    return n - 1;
  }

private:
  static uint64_t splitmix(uint64_t& z) {
    z += 0x9e3779b97f4a7c15ULL;
    uint64_t r = z;
    r = (r ^ (r >> 30)) * 0xbf58476d1ce4e5b9ULL;
    r = (r ^ (r >> 27)) * 0x94d049bb133111ebULL;
    return r ^ (r >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

// 2-D low-discrepancy sequence (additive recurrence with the plastic constant),
// used for quasi-random Lebesgue-number probes.
class R2Sequence {
public:
  void next(double& x, double& y) {
    n_ += 1;
    x = std::fmod(0.5 + a1_ * n_, 1.0);
    y = std::fmod(0.5 + a2_ * n_, 1.0);
  }

private:
  double n_ = 0;
  static constexpr double g_ = 1.32471795724474602596;  // plastic constant
  static constexpr double a1_ = 1.0 / g_;
  static constexpr double a2_ = 1.0 / (g_ * g_);
};

}  // namespace smalelab

#endif
