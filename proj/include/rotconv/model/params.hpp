#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rotconv/spectral/grid.hpp"
#include "rotconv/spectral/operators.hpp"

namespace rotconv {

/// Treatment of the linear vertical-coupling pair (d_z phi in the w equation, d_z w in omega).
enum class Coupling { Implicit, Explicit };

/// Physical and numerical parameters of one run.
struct Params {
    double L = 2.0 * std::numbers::pi;
    double Re = 1.0;
    double Pe = 1.0;
    double Gamma = 1.0;
    double epsilon = 0.1;
    int nx = 32;
    int ny = 32;
    int nz = 16;
    double dt = 1e-3;
    double T = 1.0;
    int sample_every = 1;
    Dealias dealias = Dealias::TwoThirds;
    Coupling coupling = Coupling::Implicit;

    /// Poincare constant; always derived from L.
    double gamma() const noexcept { return L * L / (4.0 * std::numbers::pi * std::numbers::pi); }

    std::size_t steps() const noexcept { return T <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(T / dt)); }

    GridPtr make_grid() const { return SpectralGrid::make(L, nx, ny, nz); }

    /// Every violated constraint, formatted "name: message (value)".
    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        auto bad = [&](const std::string& what, double v) { errs.push_back(what + " (got " + fmt(v) + ")"); };
        if (!(L > 0.0) || !std::isfinite(L)) bad("L must be positive", L);
        if (!(Re > 0.0) || !std::isfinite(Re)) bad("Re must be positive", Re);
        if (!(Pe > 0.0) || !std::isfinite(Pe)) bad("Pe must be positive", Pe);
        if (!std::isfinite(Gamma)) bad("Gamma must be finite", Gamma);
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) bad("epsilon must be non-negative", epsilon);
        if (!(dt > 0.0) || !std::isfinite(dt)) bad("dt must be positive", dt);
        if (!(T >= 0.0) || !std::isfinite(T)) bad("T must be non-negative", T);
        if (sample_every < 1) bad("sample_every must be >= 1", sample_every);
        const int ns[3] = {nx, ny, nz};
        for (int d = 0; d < 3; ++d)
            if (ns[d] < 4 || ns[d] % 2 != 0)
                bad(std::string("N") + "xyz"[d] + " must be even and >= 4", ns[d]);
        return errs;
    }

  private:
    static std::string fmt(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
};

/// Largest neutral frequency |k_z|/|k_h| of the explicit vertical coupling over
/// the dealiased band, and the step bound 1/that frequency.
inline double coupling_stability_bound(const Params& p) {
    const SpectralGrid g(p.L, p.nx, p.ny, p.nz);
    double fmax = 0.0;
    for (int p1 = 0; p1 < g.nx(); ++p1)
        for (int p2 = 0; p2 < g.ny(); ++p2) {
            const double kh2 = g.kh2(p1, p2);
            if (kh2 == 0.0) continue;
            if (p.dealias == Dealias::TwoThirds && !(g.in_dealias_band(0, p1) && g.in_dealias_band(1, p2))) continue;
            for (int p3 = 0; p3 < g.nz(); ++p3) {
                if (p.dealias == Dealias::TwoThirds && !g.in_dealias_band(2, p3)) continue;
                fmax = std::max(fmax, std::abs(g.k_deriv(2, p3)) / std::sqrt(kh2));
            }
        }
    return fmax > 0.0 ? 1.0 / fmax : std::numeric_limits<double>::infinity();
}

} // namespace rotconv
