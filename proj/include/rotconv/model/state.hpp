#pragma once

#include <algorithm>
#include <string>
#include <utility>

#include "rotconv/errors.hpp"
#include "rotconv/spectral/operators.hpp"

namespace rotconv {

/// Horizontal velocity (u, v).
struct Velocity {
    SpectralField u;
    SpectralField v;
};

/// u = d_y phi, v = -d_x phi with phi = (-Delta_h)^{-1} omega.
inline Velocity velocity_from_stream(const SpectralField& phi) { return {dy(phi), -dx(phi)}; }

inline Velocity velocity_from_vorticity(const SpectralField& omega) {
    return velocity_from_stream(invert_horizontal_laplacian(omega));
}

/// Prognostic fields (w, omega, theta) at time t.
struct ModelState {
    double t = 0.0;
    SpectralField w;
    SpectralField omega;
    SpectralField theta;

    static ModelState zero(const GridPtr& grid) { return {0.0, SpectralField(grid), SpectralField(grid), SpectralField(grid)}; }

    const GridPtr& grid() const noexcept { return w.grid(); }
    SpectralField phi() const { return invert_horizontal_laplacian(omega); }
    Velocity velocity() const { return velocity_from_vorticity(omega); }

    template <class Fn>
    void for_each_field(Fn&& fn) const {
        fn("w", w);
        fn("omega", omega);
        fn("theta", theta);
    }
};

/// ||w||^2 + ||u||^2 + ||theta||^2, with ||u||^2 = (omega, phi).
inline double state_norm2(const ModelState& s) { return norm2(s.w) + inner(s.omega, s.phi()) + norm2(s.theta); }

inline double difference_norm2(const ModelState& a, const ModelState& b) {
    return state_norm2({a.t, a.w - b.w, a.omega - b.omega, a.theta - b.theta});
}

/// Largest horizontal-mean amplitude of w, omega, theta, each relative to its
/// own max amplitude (0 for identically zero fields).
inline double relative_mean_defect(const ModelState& s) {
    double worst = 0.0;
    s.for_each_field([&](const char*, const SpectralField& f) {
        const double scale = f.max_amplitude();
        if (scale > 0.0) worst = std::max(worst, horizontal_mean_amplitude(f) / scale);
    });
    return worst;
}

/// Throws InvalidState unless fields share a grid and have zero horizontal mean.
inline void check_state(const ModelState& s) {
    if (s.w.empty() || s.omega.empty() || s.theta.empty()) throw InvalidState("model state has empty fields");
    if (!same_grid(s.w.grid(), s.omega.grid()) || !same_grid(s.w.grid(), s.theta.grid()))
        throw InvalidState("model state fields live on different grids");
    s.for_each_field([](const char* name, const SpectralField& f) {
        if (!has_zero_horizontal_mean(f))
            throw InvalidState(std::string("field '") + name + "' has nonzero horizontal mean (relative amplitude " +
                               std::to_string(horizontal_mean_amplitude(f) / f.max_amplitude()) + ")");
    });
}

} // namespace rotconv
