#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rotconv/errors.hpp"
#include "rotconv/spectral/field.hpp"

namespace rotconv {

enum class Dealias { TwoThirds, None };

namespace detail {

template <class Multiplier>
SpectralField apply_diagonal(const SpectralField& f, Multiplier&& mult) {
    const SpectralGrid& g = f.g();
    SpectralField out(f.grid());
    auto src = f.coeffs();
    auto dst = out.coeffs();
    for (int p1 = 0; p1 < g.nx(); ++p1)
        for (int p2 = 0; p2 < g.ny(); ++p2)
            for (int p3 = 0; p3 < g.nz(); ++p3) {
                const std::size_t i = g.flat(p1, p2, p3);
                dst[i] = mult(p1, p2, p3) * src[i];
            }
    return out;
}

} // namespace detail

inline SpectralField dx(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    return detail::apply_diagonal(f, [&](int p1, int, int) { return cplx(0.0, g.k_deriv(0, p1)); });
}

inline SpectralField dy(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    return detail::apply_diagonal(f, [&](int, int p2, int) { return cplx(0.0, g.k_deriv(1, p2)); });
}

inline SpectralField vertical_derivative(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    return detail::apply_diagonal(f, [&](int, int, int p3) { return cplx(0.0, g.k_deriv(2, p3)); });
}

inline SpectralField horizontal_laplacian(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    return detail::apply_diagonal(f, [&](int p1, int p2, int) { return cplx(-g.kh2(p1, p2), 0.0); });
}

/// Largest |c| on the k_h = 0 line.
inline double horizontal_mean_amplitude(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    double m = 0.0;
    for (int p3 = 0; p3 < g.nz(); ++p3) m = std::max(m, std::abs(f[g.flat(0, 0, p3)]));
    return m;
}

/// Relative tolerance on the k_h = 0 line accepted as "zero horizontal mean".
inline constexpr double kMeanTolerance = 1e-12;

inline bool has_zero_horizontal_mean(const SpectralField& f, double rel_tol = kMeanTolerance) {
    return horizontal_mean_amplitude(f) <= rel_tol * f.max_amplitude();
}

/// Stream function phi = (-Delta_h)^{-1} omega with the k_h = 0 line pinned to zero.
inline SpectralField invert_horizontal_laplacian(const SpectralField& omega) {
    const SpectralGrid& g = omega.g();
    const double scale = omega.max_amplitude();
    std::vector<int> offending;
    for (int p3 = 0; p3 < g.nz(); ++p3)
        if (std::abs(omega[g.flat(0, 0, p3)]) > kMeanTolerance * scale) offending.push_back(g.signed_index(2, p3));
    if (!offending.empty()) {
        std::ostringstream msg;
        msg << "invert_horizontal_laplacian: input has nonzero horizontal mean at modes";
        for (int j3 : offending) msg << " (0,0," << j3 << ")";
        throw PreconditionViolation(msg.str());
    }
    return detail::apply_diagonal(omega, [&](int p1, int p2, int) {
        const double k2 = g.kh2(p1, p2);
        return cplx(k2 == 0.0 ? 0.0 : 1.0 / k2, 0.0);
    });
}

/// Zero the k_h = 0 line.
inline SpectralField remove_horizontal_mean(SpectralField f) {
    const SpectralGrid& g = f.g();
    for (int p3 = 0; p3 < g.nz(); ++p3) f[g.flat(0, 0, p3)] = 0.0;
    return f;
}

/// Horizontal average as a function of z, evaluated at the vertical collocation points.
inline ZProfile horizontal_mean(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    const int nz = g.nz();
    ZProfile prof{std::vector<double>(nz, 0.0)};
    for (int k = 0; k < nz; ++k) {
        double acc = 0.0;
        for (int p3 = 0; p3 < nz; ++p3) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(p3) * k) % nz) / nz;
            const cplx c = f[g.flat(0, 0, p3)];
            acc += c.real() * std::cos(phase) - c.imag() * std::sin(phase);
        }
        prof.values[k] = acc;
    }
    return prof;
}

/// Zero all coefficients outside the two-thirds band.
inline SpectralField dealias(SpectralField f) {
    const SpectralGrid& g = f.g();
    for (int p1 = 0; p1 < g.nx(); ++p1) {
        const bool b1 = g.in_dealias_band(0, p1);
        for (int p2 = 0; p2 < g.ny(); ++p2) {
            const bool b2 = b1 && g.in_dealias_band(1, p2);
            for (int p3 = 0; p3 < g.nz(); ++p3)
                if (!(b2 && g.in_dealias_band(2, p3))) f[g.flat(p1, p2, p3)] = 0.0;
        }
    }
    return f;
}

inline bool within_dealias_band(const SpectralField& f, double rel_tol = 0.0) {
    const SpectralGrid& g = f.g();
    const double bound = rel_tol * f.max_amplitude();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.in_dealias_band(i) && std::abs(f[i]) > bound) return false;
    return true;
}

/// Physical-space product of two sample arrays.
inline GridValues pointwise_product(const GridValues& a, const GridValues& b) {
    if (!same_grid(a.grid(), b.grid())) throw InvalidInput("pointwise_product: grid mismatch");
    GridValues out(a.grid());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    return out;
}

inline SpectralField multiply(const SpectralField& f, const SpectralField& g, Dealias policy) {
    if (!same_grid(f.grid(), g.grid())) throw InvalidInput("multiply: fields live on different grids");
    SpectralField prod = to_coefficients(pointwise_product(from_coefficients(f), from_coefficients(g)));
    return policy == Dealias::TwoThirds ? dealias(std::move(prod)) : prod;
}

/// Product in physical space followed by two-thirds truncation of the result.
inline SpectralField multiply_dealiased(const SpectralField& f, const SpectralField& g) {
    return multiply(f, g, Dealias::TwoThirds);
}

/// f(x,y,z) * p(z), computed in physical space.
inline SpectralField multiply_by_profile(const SpectralField& f, const ZProfile& p, Dealias policy) {
    const SpectralGrid& g = f.g();
    if (p.size() != static_cast<std::size_t>(g.nz())) throw InvalidInput("multiply_by_profile: profile length mismatch");
    GridValues v = from_coefficients(f);
    auto vals = v.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] *= p.values[i % g.nz()];
    SpectralField out = to_coefficients(v);
    return policy == Dealias::TwoThirds ? dealias(std::move(out)) : out;
}

/// Copy coefficients onto another grid with the same L: zero-padding where the
/// target is larger, truncation where smaller. Nyquist modes of the source are
/// dropped so the result stays exactly Hermitian.
inline SpectralField resample(const SpectralField& f, const GridPtr& target) {
    const SpectralGrid& src = f.g();
    if (src.L() != target->L()) throw InvalidInput("resample: grids have different periods");
    SpectralField out(target);
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto p = src.positions(i);
        if (src.is_nyquist(0, p[0]) || src.is_nyquist(1, p[1]) || src.is_nyquist(2, p[2])) continue;
        const Wavevector j = src.wavevector(i);
        const Wavevector mj{-j[0], -j[1], -j[2]};
        if (target->contains(j) && target->contains(mj)) out[target->index_of(j)] = f[i];
    }
    return out;
}

// --- quadratures (Parseval on the coefficient array; identical to uniform-weight grid quadrature) ---

/// ||f||_2^2 over the periodic box.
inline double norm2(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& c : f.coeffs()) acc += std::norm(c);
    return acc * f.g().volume();
}

/// (f, g) = integral of f g over the box.
inline double inner(const SpectralField& f, const SpectralField& g) {
    f.check_same(g);
    auto a = f.coeffs();
    auto b = g.coeffs();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return acc * f.g().volume();
}

/// ||grad_h f||_2^2.
inline double grad_h_norm2(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    double acc = 0.0;
    for (int p1 = 0; p1 < g.nx(); ++p1)
        for (int p2 = 0; p2 < g.ny(); ++p2) {
            const double kx = g.k_deriv(0, p1), ky = g.k_deriv(1, p2);
            const double k2 = kx * kx + ky * ky;
            for (int p3 = 0; p3 < g.nz(); ++p3) acc += k2 * std::norm(f[g.flat(p1, p2, p3)]);
        }
    return acc * g.volume();
}

/// ||d_z f||_2^2.
inline double dz_norm2(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double kz = g.k_deriv(2, static_cast<int>(i % g.nz()));
        acc += kz * kz * std::norm(f[i]);
    }
    return acc * g.volume();
}

/// Uniform-weight grid quadrature of the samples.
inline double grid_integral(const GridValues& v) {
    double acc = 0.0;
    for (double x : v.values()) acc += x;
    return acc * v.grid()->cell_volume();
}

/// L^2 norm squared of a z-profile viewed as a field on the box: L^2 * integral p^2 dz.
inline double profile_norm2(const ZProfile& p, double L) {
    double acc = 0.0;
    for (double v : p.values) acc += v * v;
    return acc * L * L / static_cast<double>(p.size());
}

} // namespace rotconv
