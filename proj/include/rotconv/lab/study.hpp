#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotconv/lab/inequalities.hpp"
#include "rotconv/rng.hpp"
#include "rotconv/spectral/random_field.hpp"
#include "rotconv/util/parallel.hpp"

namespace rotconv {

struct LabOptions {
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    std::size_t identity_samples = 500;
    /// Base resolution for the field lemmas; the refined study doubles it.
    int n = 16;
    int nz = 16;
    double L = 2.0 * std::numbers::pi;
    double slope = -2.0;
    /// Largest active |j|; 0 means the whole two-thirds band of the grid.
    double max_mode = 0.0;
    /// Time grid for the scalar lemmas; the refined study halves dt.
    double horizon = 4.0;
    double dt = 1.0 / 64.0;
    std::size_t windows = 8;
    double stability_factor = 2.0;
    double violation_tolerance = 1e-8;
    double identity_tolerance = 1e-11;
    unsigned threads = 1;
};

/// Piecewise smooth nonnegative driver a_k (1 + b_k sin(c_k t + d_k)) on pieces of fixed width.
struct PiecewiseDriver {
    double width = 0.25;
    std::vector<std::array<double, 4>> pieces;

    double operator()(double t, std::size_t piece) const {
        const auto& p = pieces[std::min(piece, pieces.size() - 1)];
        return p[0] * (1.0 + p[1] * std::sin(p[2] * t + p[3]));
    }

    static PiecewiseDriver random(CounterRng& rng, double horizon, double width, double amp_max) {
        PiecewiseDriver d;
        d.width = width;
        const auto count = static_cast<std::size_t>(std::ceil(horizon / width - 1e-9));
        for (std::size_t k = 0; k < count; ++k)
            d.pieces.push_back({rng.uniform(0.0, amp_max), rng.uniform(0.0, 1.0), rng.uniform(0.0, 4.0 * std::numbers::pi),
                                rng.uniform(0.0, 2.0 * std::numbers::pi)});
        return d;
    }
};

/// Instance for the Gronwall-type lemma. The constructed eta solves
///   eta eta' = (1 - a - b)(f + g eta),  h = a (f + g eta),  slack = b (f + g eta),
/// with a + b <= 1, so the hypothesis holds with equality up to the slack.
struct GronwallInstance {
    double eta0 = 0.0;
    PiecewiseDriver f, g, a, b;
};

/// Instance for the uniform lemma: eta' = (g - s) eta + (1 - c) h, the slack being s eta + c h.
struct UniformGronwallInstance {
    double eta0 = 1.0;
    PiecewiseDriver g, h, s, c;
};

namespace detail {

template <class Rhs>
ScalarSeries integrate_rk4(std::array<double, 4> y, double horizon, double dt, double width, Rhs&& rhs,
                           bool eta_is_square) {
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    ScalarSeries s;
    auto record = [&](double t) {
        s.t.push_back(t);
        s.eta.push_back(eta_is_square ? std::sqrt(std::max(y[0], 0.0)) : y[0]);
        s.F.push_back(y[1]);
        s.G.push_back(y[2]);
        s.H.push_back(y[3]);
    };
    record(0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = n * dt;
        const auto piece = static_cast<std::size_t>(std::floor((t + 0.5 * dt) / width));
        auto add = [](std::array<double, 4> a, const std::array<double, 4>& k, double c) {
            for (int i = 0; i < 4; ++i) a[i] += c * k[i];
            return a;
        };
        const auto k1 = rhs(t, piece, y);
        const auto k2 = rhs(t + 0.5 * dt, piece, add(y, k1, 0.5 * dt));
        const auto k3 = rhs(t + 0.5 * dt, piece, add(y, k2, 0.5 * dt));
        const auto k4 = rhs(t + dt, piece, add(y, k3, dt));
        for (int i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        record((n + 1) * dt);
    }
    return s;
}

} // namespace detail

/// Series (eta, int f, int g, int h) for a Gronwall-type instance.
inline ScalarSeries integrate(const GronwallInstance& in, double horizon, double dt) {
    auto rhs = [&](double t, std::size_t p, const std::array<double, 4>& y) {
        const double eta = std::sqrt(std::max(y[0], 0.0));
        const double drive = in.f(t, p) + in.g(t, p) * eta;
        const double a = in.a(t, p), b = in.b(t, p);
        return std::array<double, 4>{2.0 * (1.0 - a - b) * drive, in.f(t, p), in.g(t, p), a * drive};
    };
    return detail::integrate_rk4({in.eta0 * in.eta0, 0.0, 0.0, 0.0}, horizon, dt, in.f.width, rhs, true);
}

/// Series (eta, int g, int h, int eta) for a uniform-lemma instance.
inline ScalarSeries integrate(const UniformGronwallInstance& in, double horizon, double dt) {
    auto rhs = [&](double t, std::size_t p, const std::array<double, 4>& y) {
        const double g = in.g(t, p), h = in.h(t, p);
        return std::array<double, 4>{(g - in.s(t, p)) * y[0] + (1.0 - in.c(t, p)) * h, y[0], g, h};
    };
    ScalarSeries s = detail::integrate_rk4({in.eta0, 0.0, 0.0, 0.0}, horizon, dt, in.g.width, rhs, false);
    s.E = std::move(s.F);
    s.F.clear();
    return s;
}

inline GronwallInstance random_gronwall_instance(CounterRng rng, double horizon) {
    GronwallInstance in;
    in.eta0 = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.0, 2.0);
    in.f = PiecewiseDriver::random(rng, horizon, 0.25, 2.0);
    in.g = PiecewiseDriver::random(rng, horizon, 0.25, 1.0);
    in.a = PiecewiseDriver::random(rng, horizon, 0.25, 0.25);
    in.b = PiecewiseDriver::random(rng, horizon, 0.25, 0.25);
    return in;
}

inline UniformGronwallInstance random_uniform_instance(CounterRng rng, double horizon) {
    UniformGronwallInstance in;
    in.eta0 = rng.uniform(0.1, 2.0);
    in.g = PiecewiseDriver::random(rng, horizon, 0.25, 1.0);
    in.h = PiecewiseDriver::random(rng, horizon, 0.25, 1.0);
    in.s = PiecewiseDriver::random(rng, horizon, 0.25, 1.0);
    in.c = PiecewiseDriver::random(rng, horizon, 0.25, 0.5);
    return in;
}

/// Aggregate of one lemma's samples at the base and refined resolution.
struct LemmaStudy {
    std::string lemma;
    std::size_t samples = 0;
    std::size_t discarded = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    double refined_max_ratio = 0.0;
    /// refined_max_ratio / max_ratio
    double growth = 0.0;
    std::vector<std::size_t> histogram;
    double bucket_width = 0.0;
    std::size_t violations = 0;
    bool finite = true;
    bool stable = false;
    /// Stability is the hard check for lemmas with an unknown constant,
    /// zero violations for the constant-free one.
    bool constant_free = false;

    bool pass() const { return finite && (constant_free ? violations == 0 : stable); }
};

struct IdentityStudy {
    std::size_t samples = 0;
    IdentityResiduals max_base;
    IdentityResiduals max_refined;
    double tolerance = 1e-11;

    bool pass() const { return max_base.max() <= tolerance && max_refined.max() <= tolerance; }
};

struct LabReport {
    std::uint64_t seed = 0;
    std::vector<LemmaStudy> lemmas;
    IdentityStudy identities;

    bool pass() const {
        for (const auto& l : lemmas)
            if (!l.pass()) return false;
        return identities.pass();
    }
};

namespace detail {

enum LabStream : std::uint64_t { kLadyzhenskaya = 1, kAgmon = 2, kGronwall = 3, kUniform = 4, kIdentity = 5 };

inline CounterRng sample_rng(std::uint64_t seed, LabStream lemma, std::size_t index) {
    return CounterRng(seed).split(lemma).split(index);
}

/// A random field on `grid` drawn from the sample's stream; its size and mean flag vary per draw.
inline SpectralField lab_field(const GridPtr& grid, CounterRng& rng, const LabOptions& opt, bool allow_mean = true) {
    RandomFieldSpec spec;
    spec.seed = rng();
    spec.slope = opt.slope;
    spec.max_mode = opt.max_mode > 0.0 ? opt.max_mode : 1e9;
    spec.rms = std::pow(10.0, rng.uniform(-2.0, 2.0));
    spec.zero_horizontal_mean = !allow_mean || rng.uniform() < 0.5;
    spec.dealiased = true;
    return random_field(grid, spec);
}

inline LemmaStudy summarize(std::string lemma, const std::vector<InequalitySample>& base,
                            const std::vector<InequalitySample>& refined, const LabOptions& opt, bool constant_free) {
    LemmaStudy out;
    out.lemma = std::move(lemma);
    out.constant_free = constant_free;
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& s : base) {
        if (s.discarded) {
            ++out.discarded;
            continue;
        }
        out.finite = out.finite && std::isfinite(s.ratio);
        out.max_ratio = std::max(out.max_ratio, s.ratio);
        sum += s.ratio;
        ++used;
        if (constant_free && s.ratio > 1.0 + opt.violation_tolerance) ++out.violations;
    }
    for (const auto& s : refined) {
        if (s.discarded) continue;
        out.finite = out.finite && std::isfinite(s.ratio);
        out.refined_max_ratio = std::max(out.refined_max_ratio, s.ratio);
        if (constant_free && s.ratio > 1.0 + opt.violation_tolerance) ++out.violations;
    }
    out.samples = base.size();
    out.mean_ratio = used ? sum / static_cast<double>(used) : 0.0;
    out.growth = out.max_ratio > 0.0 ? out.refined_max_ratio / out.max_ratio : 0.0;
    out.stable = out.finite && used > 0 && out.refined_max_ratio <= opt.stability_factor * out.max_ratio;

    constexpr std::size_t kBuckets = 10;
    out.histogram.assign(kBuckets, 0);
    out.bucket_width = out.max_ratio / kBuckets;
    for (const auto& s : base) {
        if (s.discarded) continue;
        std::size_t b = out.bucket_width > 0.0 ? static_cast<std::size_t>(s.ratio / out.bucket_width) : 0;
        ++out.histogram[std::min(b, kBuckets - 1)];
    }
    return out;
}

inline void max_into(IdentityResiduals& acc, const IdentityResiduals& r) {
    acc.antisymmetry = std::max(acc.antisymmetry, r.antisymmetry);
    acc.skew = std::max(acc.skew, r.skew);
    acc.stream = std::max(acc.stream, r.stream);
    acc.vorticity = std::max(acc.vorticity, r.vorticity);
}

} // namespace detail

/// Runs every lemma over opt.samples seeded draws at the base and refined
/// resolutions, plus the identity suite. Sample i of each lemma uses a stream
/// derived from (seed, lemma, i) only, so results do not depend on threads.
inline LabReport run_lab(const LabOptions& opt) {
    if (opt.samples == 0) throw InvalidInput("inequality lab needs at least one sample");
    if (!(opt.dt > 0.0) || !(opt.horizon > 1.0)) throw InvalidInput("inequality lab needs dt > 0 and horizon > 1");
    const double per_unit = 1.0 / opt.dt;
    if (std::abs(per_unit - std::round(per_unit)) > 1e-9 || std::fmod(std::round(per_unit), 4.0) != 0.0)
        throw InvalidInput("inequality lab time step must be 1/(4k)");

    const GridPtr base = SpectralGrid::make(opt.L, opt.n, opt.n, opt.nz);
    const GridPtr refined = SpectralGrid::make(opt.L, 2 * opt.n, 2 * opt.n, 2 * opt.nz);
    const std::size_t N = opt.samples;
    std::vector<InequalitySample> lb(N), lr(N), ab(N), ar(N), gb(N), gr(N), ub(N), ur(N);
    parallel_for(N, opt.threads, [&](std::size_t i) {
        {
            auto draw = [&](const GridPtr& grid) {
                CounterRng rng = detail::sample_rng(opt.seed, detail::kLadyzhenskaya, i);
                const SpectralField f = detail::lab_field(grid, rng, opt);
                const SpectralField g = detail::lab_field(grid, rng, opt);
                const SpectralField h = detail::lab_field(grid, rng, opt);
                return ladyzhenskaya_ratio(f, g, h);
            };
            lb[i] = draw(base);
            lr[i] = draw(refined);
        }
        {
            auto draw = [&](const GridPtr& grid) {
                CounterRng rng = detail::sample_rng(opt.seed, detail::kAgmon, i);
                return agmon_ratio(detail::lab_field(grid, rng, opt));
            };
            ab[i] = draw(base);
            ar[i] = draw(refined);
        }
        {
            const auto in = random_gronwall_instance(detail::sample_rng(opt.seed, detail::kGronwall, i), opt.horizon);
            gb[i] = gronwall_check(integrate(in, opt.horizon, opt.dt));
            gr[i] = gronwall_check(integrate(in, opt.horizon, 0.5 * opt.dt));
        }
        {
            CounterRng rng = detail::sample_rng(opt.seed, detail::kUniform, i);
            const auto in = random_uniform_instance(rng.split(0), opt.horizon);
            const auto last = static_cast<std::size_t>(std::llround((opt.horizon - 1.0) / opt.dt));
            std::vector<std::size_t> starts, starts2;
            for (std::size_t k = 0; k < opt.windows; ++k) {
                const auto s = static_cast<std::size_t>(rng.uniform() * static_cast<double>(last));
                starts.push_back(s);
                starts2.push_back(2 * s);
            }
            ub[i] = uniform_gronwall_check(integrate(in, opt.horizon, opt.dt), starts);
            ur[i] = uniform_gronwall_check(integrate(in, opt.horizon, 0.5 * opt.dt), starts2);
        }
    });

    LabReport rep;
    rep.seed = opt.seed;
    rep.lemmas.push_back(detail::summarize("ladyzhenskaya", lb, lr, opt, false));
    rep.lemmas.push_back(detail::summarize("agmon", ab, ar, opt, false));
    rep.lemmas.push_back(detail::summarize("gronwall", gb, gr, opt, false));
    rep.lemmas.push_back(detail::summarize("uniform_gronwall", ub, ur, opt, true));

    const std::size_t M = opt.identity_samples;
    std::vector<IdentityResiduals> ib(M), ir(M);
    parallel_for(M, opt.threads, [&](std::size_t i) {
        auto draw = [&](const GridPtr& grid) {
            CounterRng rng = detail::sample_rng(opt.seed, detail::kIdentity, i);
            const SpectralField phi = detail::lab_field(grid, rng, opt, false);
            const SpectralField f = detail::lab_field(grid, rng, opt);
            const SpectralField g = detail::lab_field(grid, rng, opt);
            return identity_suite(phi, f, g);
        };
        ib[i] = draw(base);
        ir[i] = draw(refined);
    });
    rep.identities.samples = M;
    rep.identities.tolerance = opt.identity_tolerance;
    for (std::size_t i = 0; i < M; ++i) {
        detail::max_into(rep.identities.max_base, ib[i]);
        detail::max_into(rep.identities.max_refined, ir[i]);
    }
    return rep;
}

inline nlohmann::json to_json(const IdentityResiduals& r) {
    return {{"antisymmetry", r.antisymmetry}, {"skew", r.skew}, {"stream", r.stream}, {"vorticity", r.vorticity}};
}

inline nlohmann::json to_json(const LabReport& r) {
    nlohmann::json lemmas = nlohmann::json::array();
    for (const auto& l : r.lemmas)
        lemmas.push_back({{"lemma", l.lemma},
                          {"samples", l.samples},
                          {"discarded", l.discarded},
                          {"max_ratio", l.max_ratio},
                          {"mean_ratio", l.mean_ratio},
                          {"refined_max_ratio", l.refined_max_ratio},
                          {"growth", l.growth},
                          {"histogram", l.histogram},
                          {"bucket_width", l.bucket_width},
                          {"violations", l.violations},
                          {"finite", l.finite},
                          {"stable", l.stable},
                          {"pass", l.pass()}});
    return {{"seed", r.seed},
            {"lemmas", lemmas},
            {"identities",
             {{"samples", r.identities.samples},
              {"tolerance", r.identities.tolerance},
              {"max_base", to_json(r.identities.max_base)},
              {"max_refined", to_json(r.identities.max_refined)},
              {"pass", r.identities.pass()}}},
            {"pass", r.pass()}};
}

} // namespace rotconv
