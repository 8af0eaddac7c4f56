#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gadnr {

// splitmix64; used to derive independent sub-seeds from the single run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fixed role offsets for the seed fan-out. One `seed` key controls every
// random choice in a run; each consumer mixes its role in first.
namespace seed_role {
constexpr std::uint64_t synth = 1;
constexpr std::uint64_t inject = 2;
constexpr std::uint64_t model_init = 3;
constexpr std::uint64_t train_noise = 4;
constexpr std::uint64_t score_noise = 5;
constexpr std::uint64_t node_noise = 6;
}  // namespace seed_role

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t role) {
  return mix_seed(base ^ mix_seed(role));
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t role, std::uint64_t index) {
  return mix_seed(derive_seed(base, role) ^ mix_seed(index + 0x51ed2701ULL));
}

// Seeded generator with portable uniform/normal transforms. The engine is
// std::mt19937_64 but the distributions are hand-rolled so that streams do
// not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller; caches the spare draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates sample of k distinct values from [0, n).
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gadnr
