#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rotconv {

/// Counter-based generator: output n is a bijective mix of (key, n), so any
/// stream can be split into independent children by hashing a stream id into
/// the key. Results depend only on (key, counter), never on call order across
/// streams.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return mix(key_ + kGolden * ++counter_); }

    /// Independent child stream; does not advance this generator.
    constexpr CounterRng split(std::uint64_t stream) const noexcept {
        CounterRng child;
        child.key_ = mix(key_ ^ mix(stream + 0x3c6ef372fe94f82bULL));
        return child;
    }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one draw per call, two uniforms consumed).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace rotconv
