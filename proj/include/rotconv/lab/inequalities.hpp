#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rotconv/errors.hpp"
#include "rotconv/spectral/operators.hpp"

namespace rotconv {

/// One evaluation of an inequality: LHS, RHS with the constant dropped, and their ratio.
struct InequalitySample {
    std::string lemma;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool discarded = false;
    std::string flag;
};

namespace detail {

inline InequalitySample make_sample(std::string lemma, double lhs, double rhs) {
    InequalitySample s{std::move(lemma), lhs, rhs, 0.0, false, {}};
    if (lhs == 0.0) return s;
    if (!(rhs > 0.0)) {
        s.discarded = true;
        s.flag = "nonzero left side with vanishing right side";
        return s;
    }
    s.ratio = lhs / rhs;
    if (!std::isfinite(s.ratio)) {
        s.discarded = true;
        s.flag = "non-finite ratio";
    }
    return s;
}

inline GridPtr doubled(const SpectralGrid& g) { return SpectralGrid::make(g.L(), 2 * g.nx(), 2 * g.ny(), 2 * g.nz()); }

inline GridValues fine_values(const SpectralField& f, const GridPtr& fine) { return from_coefficients(resample(f, fine)); }

} // namespace detail

/// Anisotropic triple-product bound
///   int |f g h| <= C (|f| + |grad_h f|)^1/2 (|f| + |f_z|)^1/2 |g|^1/2 (|g| + |grad_h g|)^1/2 |h|.
/// The left side is integrated on a grid doubled in every direction.
inline InequalitySample ladyzhenskaya_ratio(const SpectralField& f, const SpectralField& g, const SpectralField& h) {
    f.check_same(g);
    f.check_same(h);
    const GridPtr fine = detail::doubled(f.g());
    const GridValues fv = detail::fine_values(f, fine), gv = detail::fine_values(g, fine), hv = detail::fine_values(h, fine);
    double acc = 0.0;
    auto a = fv.values(), b = gv.values(), c = hv.values();
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] * b[i] * c[i]);
    const double lhs = acc * fine->cell_volume();

    const double nf = std::sqrt(norm2(f)), ng = std::sqrt(norm2(g)), nh = std::sqrt(norm2(h));
    const double rhs = std::sqrt(nf + std::sqrt(grad_h_norm2(f))) * std::sqrt(nf + std::sqrt(dz_norm2(f))) *
                       std::sqrt(ng) * std::sqrt(ng + std::sqrt(grad_h_norm2(g))) * nh;
    return detail::make_sample("ladyzhenskaya", lhs, rhs);
}

/// sup_z int_{[0,L]^2} f^2 <= C |f| (|f| + |f_z|), the sup taken over z collocation points.
inline InequalitySample agmon_ratio(const SpectralField& f) {
    const SpectralGrid& g = f.g();
    const GridValues v = from_coefficients(f);
    std::vector<double> plane(g.nz(), 0.0);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 0; k < g.nz(); ++k) plane[k] += v(i, j, k) * v(i, j, k);
    const double lhs = *std::max_element(plane.begin(), plane.end()) * g.dx() * g.dy();
    const double nf = std::sqrt(norm2(f));
    return detail::make_sample("agmon", lhs, nf * (nf + std::sqrt(dz_norm2(f))));
}

/// Residuals of the transport identities for u = (phi_y, -phi_x):
///   antisymmetry  (u.grad f, g) + (u.grad g, f) = 0
///   skew          (u.grad f, f) = 0
///   stream        (u.grad f, phi) = 0
///   vorticity     (omega, phi) - |u|^2 = 0, omega = -lap_h phi
/// Each residual is normalized by the largest integral of |integrand| among the
/// identity's terms, so it stays meaningful when the terms themselves vanish.
/// All products live on the doubled grid.
struct IdentityResiduals {
    double antisymmetry = 0.0;
    double skew = 0.0;
    double stream = 0.0;
    double vorticity = 0.0;

    double max() const { return std::max({antisymmetry, skew, stream, vorticity}); }
};

inline IdentityResiduals identity_suite(const SpectralField& phi, const SpectralField& f, const SpectralField& g) {
    phi.check_same(f);
    phi.check_same(g);
    const GridPtr fine = detail::doubled(phi.g());
    auto fv = [&](const SpectralField& s) { return detail::fine_values(s, fine); };
    const GridValues u1 = fv(dy(phi)), u2 = fv(-dx(phi)), om = fv(-horizontal_laplacian(phi)), ph = fv(phi);
    const GridValues fx = fv(dx(f)), fy = fv(dy(f)), gx = fv(dx(g)), gy = fv(dy(g)), F = fv(f), G = fv(g);

    long double a = 0.0, a_abs = 0.0, b = 0.0, b_abs = 0.0, skew = 0.0, skew_abs = 0.0, st = 0.0, st_abs = 0.0;
    long double wp = 0.0, wp_abs = 0.0, uu = 0.0;
    for (std::size_t i = 0; i < fine->size(); ++i) {
        const double x1 = u1.values()[i], x2 = u2.values()[i];
        const double af = x1 * fx.values()[i] + x2 * fy.values()[i];
        const double ag = x1 * gx.values()[i] + x2 * gy.values()[i];
        a += af * G.values()[i];
        a_abs += std::abs(af * G.values()[i]);
        b += ag * F.values()[i];
        b_abs += std::abs(ag * F.values()[i]);
        skew += af * F.values()[i];
        skew_abs += std::abs(af * F.values()[i]);
        st += af * ph.values()[i];
        st_abs += std::abs(af * ph.values()[i]);
        wp += om.values()[i] * ph.values()[i];
        wp_abs += std::abs(om.values()[i] * ph.values()[i]);
        uu += x1 * x1 + x2 * x2;
    }
    auto rel = [](long double num, long double den) {
        return den > 0.0L ? static_cast<double>(std::abs(num) / den) : 0.0;
    };
    IdentityResiduals r;
    r.antisymmetry = rel(a + b, std::max(a_abs, b_abs));
    r.skew = rel(skew, skew_abs);
    r.stream = rel(st, st_abs);
    r.vorticity = rel(wp - uu, std::max(wp_abs, uu));
    return r;
}

/// Time series for the Gronwall-type checks. F, G, H, E are running integrals
/// of f, g, h and eta from the first sample.
struct ScalarSeries {
    std::vector<double> t, eta, F, G, H, E;
};

/// eta eta' + h <= f + g eta  implies  eta^2(t) + 2 int h <= C [eta^2(0) + int f + (int g)^2].
/// Ratio is the max over t > t0 of left over bracket; points where both vanish are skipped.
inline InequalitySample gronwall_check(const ScalarSeries& s) {
    const std::size_t n = s.t.size();
    if (n == 0 || s.eta.size() != n || s.F.size() != n || s.G.size() != n || s.H.size() != n)
        throw InvalidInput("gronwall_check: series have mismatched lengths");
    InequalitySample out{"gronwall", 0.0, 0.0, 0.0, false, {}};
    const double e0 = s.eta[0] * s.eta[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s.eta[i] >= 0.0) || !std::isfinite(s.eta[i])) {
            out.discarded = true;
            out.flag = "eta left [0, inf) at t = " + std::to_string(s.t[i]);
            return out;
        }
        const double lhs = s.eta[i] * s.eta[i] + 2.0 * s.H[i];
        const double rhs = e0 + s.F[i] + s.G[i] * s.G[i];
        if (rhs == 0.0 && lhs == 0.0) continue;
        const auto cur = detail::make_sample("gronwall", lhs, rhs);
        if (cur.discarded) return cur;
        if (cur.ratio >= out.ratio) out = cur;
    }
    return out;
}

/// eta' <= g eta + h  implies  eta(t+1) <= exp(int g) (int eta + int h) over [t, t+1].
/// Evaluated at the window starts given as sample indices; the time step must divide 1.
inline InequalitySample uniform_gronwall_check(const ScalarSeries& s, const std::vector<std::size_t>& starts) {
    const std::size_t n = s.t.size();
    if (n < 2 || s.eta.size() != n || s.G.size() != n || s.H.size() != n || s.E.size() != n)
        throw InvalidInput("uniform_gronwall_check: series have mismatched lengths");
    const double dt = s.t[1] - s.t[0];
    const auto span = static_cast<std::size_t>(std::llround(1.0 / dt));
    if (std::abs(span * dt - 1.0) > 1e-9) throw InvalidInput("uniform_gronwall_check: time step must divide 1");
    InequalitySample out{"uniform_gronwall", 0.0, 0.0, 0.0, false, {}};
    for (std::size_t i0 : starts) {
        if (i0 + span >= n) throw InvalidInput("uniform_gronwall_check: window runs past the series");
        const std::size_t i1 = i0 + span;
        const double lhs = s.eta[i1];
        const double rhs = std::exp(s.G[i1] - s.G[i0]) * ((s.E[i1] - s.E[i0]) + (s.H[i1] - s.H[i0]));
        const auto cur = detail::make_sample("uniform_gronwall", lhs, rhs);
        if (cur.discarded) return cur;
        if (cur.ratio >= out.ratio) out = cur;
    }
    return out;
}

} // namespace rotconv
