#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vchan {

/// SplitMix64 finalizer (Steele/Lea/Vigna). Used to derive independent
/// stream seeds from a master seed so per-particle streams can be split off
/// deterministically.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `stream_index` of `master_seed`.
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  return splitmix64(master_seed + stream_index * 0x9E3779B97F4A7C15ULL);
}

/// Standard-normal deviates with a fully pinned algorithm so histograms are
/// reproducible across platforms: 53-bit uniforms from mt19937_64 (whose
/// output sequence the C++ standard fixes) fed through the basic Box-Muller
/// transform. std::normal_distribution is implementation-defined and would
/// tie results to one standard library.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in (0, 1].
  double uniform_open0() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace vchan
