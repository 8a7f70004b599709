#pragma once

#include <cmath>
#include <cstdint>

#include "rotconv/rng.hpp"
#include "rotconv/spectral/operators.hpp"

namespace rotconv {

/// Recipe for a reproducible random band-limited field.
struct RandomFieldSpec {
    std::uint64_t seed = 0;
    /// Modes with |j| <= max_mode (Euclidean) are active.
    double max_mode = 4.0;
    /// Per-mode amplitude scales as |j|^slope.
    double slope = -2.0;
    /// Target root-mean-square value; 0 leaves the raw spectrum unnormalized.
    double rms = 1.0;
    bool zero_horizontal_mean = true;
    /// Restrict to the two-thirds band of the grid.
    bool dealiased = true;
};

namespace detail {

inline std::uint64_t mode_stream(const Wavevector& j) {
    auto enc = [](int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v) + (1 << 20)); };
    return (enc(j[0]) << 42) ^ (enc(j[1]) << 21) ^ enc(j[2]);
}

} // namespace detail

/// Each mode's random draw depends only on (seed, j), so the same spec yields
/// the same continuous function on any grid that contains the active modes.
inline SpectralField random_field(const GridPtr& grid, const RandomFieldSpec& spec) {
    const SpectralGrid& g = *grid;
    SpectralField f(grid);
    const CounterRng root(spec.seed);
    const double m2 = spec.max_mode * spec.max_mode;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.positions(i);
        if (g.is_nyquist(0, p[0]) || g.is_nyquist(1, p[1]) || g.is_nyquist(2, p[2])) continue;
        if (spec.dealiased && !g.in_dealias_band(i)) continue;
        const Wavevector j = g.wavevector(i);
        const Wavevector mj{-j[0], -j[1], -j[2]};
        // draw once per conjugate pair, from the lexicographically larger member
        if (j < mj) continue;
        const std::size_t ci = g.conjugate_index(i);
        if (spec.zero_horizontal_mean && j[0] == 0 && j[1] == 0) continue;
        const double n2 = double(j[0]) * j[0] + double(j[1]) * j[1] + double(j[2]) * j[2];
        if (n2 > m2) continue;
        CounterRng rng = root.split(detail::mode_stream(j));
        const double amp = n2 == 0.0 ? 1.0 : std::pow(std::sqrt(n2), spec.slope);
        if (ci == i) {
            f[i] = amp * rng.normal();
        } else {
            const cplx c(amp * rng.normal(), amp * rng.normal());
            f[i] = c;
            f[ci] = std::conj(c);
        }
    }
    if (spec.rms > 0.0) {
        const double ms = norm2(f) / g.volume();
        if (ms > 0.0) f *= spec.rms / std::sqrt(ms);
    }
    return f;
}

} // namespace rotconv
