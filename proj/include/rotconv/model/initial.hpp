#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotconv/model/state.hpp"
#include "rotconv/spectral/random_field.hpp"

namespace rotconv {

/// Random band-limited initial state. Each component is normalized to its
/// own RMS target: w and theta directly, the horizontal velocity through
/// sqrt(mean(u^2 + v^2)). omega comes from a random stream function, so u is
/// exactly divergence-free.
struct RandomStateSpec {
    std::uint64_t seed = 0;
    double max_mode = 4.0;
    double slope = -2.0;
    double w_rms = 1.0;
    double u_rms = 1.0;
    double theta_rms = 1.0;
};

inline ModelState random_state(const GridPtr& grid, const RandomStateSpec& spec) {
    const CounterRng root(spec.seed);
    auto component = [&](std::uint64_t stream, double rms) {
        RandomFieldSpec fs;
        fs.seed = root.split(stream).key();
        fs.max_mode = spec.max_mode;
        fs.slope = spec.slope;
        fs.rms = rms > 0.0 ? 1.0 : 0.0;
        SpectralField f = random_field(grid, fs);
        if (rms <= 0.0) f *= 0.0;
        return f;
    };
    ModelState s = ModelState::zero(grid);
    s.w = component(1, spec.w_rms) * spec.w_rms;
    s.theta = component(3, spec.theta_rms) * spec.theta_rms;
    const SpectralField phi = component(2, spec.u_rms);
    s.omega = -horizontal_laplacian(phi);
    const double u2 = inner(s.omega, phi);  // (omega, phi) = ||u||^2
    if (u2 > 0.0) s.omega *= spec.u_rms / std::sqrt(u2 / grid->volume());
    return s;
}

/// One real Fourier pair amp * cos(k.x) (or sin) placed in a named field.
struct ModeSpec {
    std::string field = "theta";  // "w", "omega" or "theta"
    Wavevector j{1, 0, 0};
    double amplitude = 1.0;
    bool sine = false;
};

inline ModelState mode_state(const GridPtr& grid, const std::vector<ModeSpec>& modes) {
    ModelState s = ModelState::zero(grid);
    for (const auto& m : modes) {
        if (m.j[0] == 0 && m.j[1] == 0)
            throw InvalidInput("mode (0,0," + std::to_string(m.j[2]) + ") has nonzero horizontal mean");
        const SpectralField f = SpectralField::mode(grid, m.j, m.amplitude, m.sine);
        if (m.field == "w")
            s.w += f;
        else if (m.field == "omega")
            s.omega += f;
        else if (m.field == "theta")
            s.theta += f;
        else
            throw InvalidInput("unknown field '" + m.field + "' (expected w, omega or theta)");
    }
    return s;
}

} // namespace rotconv
