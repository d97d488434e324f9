#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace sgk {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t stream_id(std::string_view tag) {
  // FNV-1a, used to turn a short label into a stream identifier.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based seed derivation: every consumer of randomness gets its own
// (stream, counter) slot under the master seed, so replicates and stages are
// individually reproducible.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t counter = 0) {
  uint64_t s = master;
  uint64_t h = splitmix64(s);
  s ^= 0xd1b54a32d192ed03ULL * (stream + 0x632be59bd9b4e019ULL);
  h ^= splitmix64(s);
  s ^= 0x2545f4914f6cdd1dULL * (counter + 0x9e3779b97f4a7c15ULL);
  h ^= splitmix64(s);
  return h;
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t counter = 0) {
  return derive_seed(master, stream_id(tag), counter);
}

// Deterministic generator: mt19937_64 (sequence pinned by the standard) with
// hand-rolled draws so results do not depend on the stdlib's distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double chi_squared(int dof) {
    double s = 0;
    for (int i = 0; i < dof; ++i) {
      double z = normal();
      s += z * z;
    }
    return s;
  }

  // Uniform integer in [0, bound); rejection sampling, no modulo bias.
  int uniform_int(int bound) {
    const uint64_t b = static_cast<uint64_t>(bound);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return static_cast<int>(x % b);
  }

  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[uniform_int(i + 1)]);
    return idx;
  }

  // k distinct values from {0,...,n-1}, sorted ascending.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> perm = permutation(n);
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace sgk
