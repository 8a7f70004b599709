#pragma once

#include <optional>
#include <vector>

#include "rotconv/model/params.hpp"
#include "rotconv/model/state.hpp"

namespace rotconv {

/// Time derivatives of (w, omega, theta).
struct FieldTriple {
    SpectralField w;
    SpectralField omega;
    SpectralField theta;
};

/// Right-hand side split into the explicitly stepped part (advection,
/// buoyancy, vertical coupling, nonlocal feedback) and the stiff diagonal part
/// (horizontal diffusion and the eps^2 d_zz phi term).
struct Tendency {
    FieldTriple explicit_part;
    FieldTriple linear_part;

    FieldTriple total() const {
        return {explicit_part.w + linear_part.w, explicit_part.omega + linear_part.omega,
                explicit_part.theta + linear_part.theta};
    }
};

/// Diagonal multipliers of the linear part, one per stored coefficient.
struct LinearMultipliers {
    std::vector<double> w;
    std::vector<double> omega;
    std::vector<double> theta;

    LinearMultipliers(const SpectralGrid& g, const Params& p) : w(g.size()), omega(g.size()), theta(g.size()) {
        const double eps2 = p.epsilon * p.epsilon;
        for (int p1 = 0; p1 < g.nx(); ++p1)
            for (int p2 = 0; p2 < g.ny(); ++p2) {
                const double kh2 = g.kh2(p1, p2);
                for (int p3 = 0; p3 < g.nz(); ++p3) {
                    const std::size_t i = g.flat(p1, p2, p3);
                    const double kz = g.k_deriv(2, p3);
                    w[i] = -kh2 / p.Re;
                    // eps^2 d_zz phi = -eps^2 k_z^2 omega / |k_h|^2, skipped exactly on k_h = 0
                    omega[i] = -kh2 / p.Re - (kh2 == 0.0 || eps2 == 0.0 ? 0.0 : eps2 * kz * kz / kh2);
                    theta[i] = -kh2 / p.Pe;
                }
            }
    }
};

namespace detail {

inline SpectralField scale_diagonal(const SpectralField& f, const std::vector<double>& m) {
    SpectralField out(f.grid());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] * f[i];
    return out;
}

} // namespace detail

inline FieldTriple linear_tendency(const ModelState& s, const LinearMultipliers& m) {
    return {detail::scale_diagonal(s.w, m.w), detail::scale_diagonal(s.omega, m.omega),
            detail::scale_diagonal(s.theta, m.theta)};
}

/// Horizontal mean of w * theta, taken from the dealiased product.
inline ZProfile mean_w_theta(const SpectralField& w, const SpectralField& theta, Dealias policy = Dealias::TwoThirds) {
    return horizontal_mean(multiply(w, theta, policy));
}

/// w(x,y,z) * mean(w theta)(z).
inline SpectralField nonlocal_feedback(const SpectralField& w, const SpectralField& theta,
                                       Dealias policy = Dealias::TwoThirds) {
    w.check_same(theta);
    return multiply_by_profile(w, mean_w_theta(w, theta, policy), policy);
}

/// Zero coefficients with |j|^2 > m^2 (Euclidean norm of the integer wavevector).
inline SpectralField project_level(SpectralField f, int m) {
    const SpectralGrid& g = f.g();
    const long m2 = static_cast<long>(m) * m;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Wavevector j = g.wavevector(i);
        const long n2 = static_cast<long>(j[0]) * j[0] + static_cast<long>(j[1]) * j[1] + static_cast<long>(j[2]) * j[2];
        if (n2 > m2) f[i] = 0.0;
    }
    return f;
}

/// Hooks that turn the full explicit tendency into the level-m Galerkin one.
struct ExplicitOptions {
    /// Temperature driving the buoyancy term Gamma * theta; the state's own theta when null.
    const SpectralField* buoyancy_source = nullptr;
    /// When set, the w and omega explicit parts are projected onto |j| <= level.
    std::optional<int> projection_level;
    /// Drop d_z phi and d_z w; the stepper then advances them implicitly.
    bool skip_coupling = false;
};

/// Explicit part of the right-hand side:
///   w:     -u.grad_h w + d_z phi + Gamma theta
///   omega: -u.grad_h omega + d_z w
///   theta: -u.grad_h theta - w mean(w theta)
inline FieldTriple explicit_tendency(const ModelState& s, const Params& p, const ExplicitOptions& opt = {}) {
    const GridPtr& grid = s.grid();
    const SpectralField phi = invert_horizontal_laplacian(s.omega);
    const Velocity vel = velocity_from_stream(phi);
    const GridValues U = from_coefficients(vel.u);
    const GridValues V = from_coefficients(vel.v);

    auto advect = [&](const SpectralField& f) {
        const GridValues fx = from_coefficients(dx(f));
        const GridValues fy = from_coefficients(dy(f));
        GridValues out(grid);
        auto o = out.values();
        auto u = U.values(), v = V.values(), a = fx.values(), b = fy.values();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = u[i] * a[i] + v[i] * b[i];
        SpectralField adv = to_coefficients(out);
        return p.dealias == Dealias::TwoThirds ? dealias(std::move(adv)) : adv;
    };

    SpectralField adv_w = advect(s.w);
    SpectralField adv_omega = advect(s.omega);
    SpectralField adv_theta = advect(s.theta);

    const SpectralField& source = opt.buoyancy_source ? *opt.buoyancy_source : s.theta;
    if (!same_grid(source.grid(), grid)) throw InvalidInput("buoyancy source lives on a different grid");

    FieldTriple out;
    if (opt.skip_coupling) {
        out.w = SpectralField(grid);
        out.omega = SpectralField(grid);
    } else {
        out.w = vertical_derivative(phi);
        out.omega = vertical_derivative(s.w);
    }
    if (opt.projection_level) {
        const int m = *opt.projection_level;
        out.w -= project_level(std::move(adv_w), m);
        out.w.axpy(p.Gamma, project_level(source, m));
        out.omega -= project_level(std::move(adv_omega), m);
    } else {
        out.w -= adv_w;
        out.w.axpy(p.Gamma, source);
        out.omega -= adv_omega;
    }
    out.theta = -adv_theta;
    out.theta -= nonlocal_feedback(s.w, s.theta, p.dealias);
    return out;
}

/// Full right-hand side of the regularized model, split into explicit and linear parts.
inline Tendency tendency(const ModelState& s, const Params& p) {
    check_state(s);
    const LinearMultipliers m(s.w.g(), p);
    return {explicit_tendency(s, p), linear_tendency(s, m)};
}

} // namespace rotconv
