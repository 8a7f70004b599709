#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rotconv/lab/study.hpp"

using namespace rotconv;

namespace {

constexpr double kPi = std::numbers::pi;

PiecewiseDriver constant(double v, double horizon = 4.0) {
    PiecewiseDriver d;
    d.pieces.assign(static_cast<std::size_t>(horizon / d.width), {v, 0.0, 0.0, 0.0});
    return d;
}

LabOptions small_lab() {
    LabOptions o;
    o.samples = 24;
    o.identity_samples = 8;
    o.n = 8;
    o.nz = 8;
    return o;
}

} // namespace

TEST(Ladyzhenskaya, ConstantsOnUnitBox) {
    const auto g = SpectralGrid::make(1.0, 8, 8, 8);
    const SpectralField one = SpectralField::mode(g, {0, 0, 0});
    const auto s = ladyzhenskaya_ratio(one, one, one);
    EXPECT_NEAR(s.lhs, 1.0, 1e-13);
    EXPECT_NEAR(s.rhs, 1.0, 1e-13);
    EXPECT_NEAR(s.ratio, 1.0, 1e-13);
}

TEST(Ladyzhenskaya, SingleCosineAgainstClosedForm) {
    const double L = 3.0;
    const auto g = SpectralGrid::make(L, 16, 16, 8);
    const SpectralField c = SpectralField::mode(g, {1, 0, 0});
    const auto s = ladyzhenskaya_ratio(c, c, c);
    // int |cos|^3 over one period is 4L/(3 pi); the box adds a factor L * 1
    const double lhs = L * L * 4.0 / (3.0 * kPi);
    const double a = L / std::sqrt(2.0), k = 2.0 * kPi / L;
    const double rhs = a * a * a * (1.0 + k);
    EXPECT_NEAR(s.rhs, rhs, 1e-12 * rhs);
    // |cos|^3 has a kink in its third derivative, so the 32-point rule is not exact
    EXPECT_NEAR(s.lhs, lhs, 2e-4 * lhs);
    EXPECT_NEAR(s.ratio, lhs / rhs, 2e-4 * lhs / rhs);
}

TEST(Ladyzhenskaya, ZeroInputsGiveZeroRatio) {
    const auto g = SpectralGrid::make(1.0, 8, 8, 8);
    const SpectralField z(g);
    const auto s = ladyzhenskaya_ratio(z, z, z);
    EXPECT_EQ(s.ratio, 0.0);
    EXPECT_FALSE(s.discarded);
}

TEST(Ladyzhenskaya, FineQuadratureMatchesDirectSum) {
    const auto g = SpectralGrid::make(2.0, 8, 8, 8);
    CounterRng rng(5);
    LabOptions o;
    const SpectralField f = detail::lab_field(g, rng, o), h = detail::lab_field(g, rng, o), k = detail::lab_field(g, rng, o);
    // direct evaluation of the Fourier series at the doubled grid's points
    auto eval = [&](const SpectralField& s, double x, double y, double z) {
        double v = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (s[i] == cplx{}) continue;
            const Wavevector j = g->wavevector(i);
            const double ph = 2.0 * kPi * (j[0] * x / g->L() + j[1] * y / g->L() + j[2] * z);
            v += (s[i] * cplx(std::cos(ph), std::sin(ph))).real();
        }
        return v;
    };
    double acc = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int m = 0; m < 16; ++m) {
                const double x = i * g->L() / 16, y = j * g->L() / 16, z = m / 16.0;
                acc += std::abs(eval(f, x, y, z) * eval(h, x, y, z) * eval(k, x, y, z));
            }
    acc *= g->volume() / (16.0 * 16.0 * 16.0);
    EXPECT_NEAR(ladyzhenskaya_ratio(f, h, k).lhs, acc, 1e-11 * acc);
}

TEST(Agmon, ConstantFieldHasRatioOne) {
    for (double L : {1.0, 2.5}) {
        const auto g = SpectralGrid::make(L, 8, 8, 8);
        const auto s = agmon_ratio(SpectralField::mode(g, {0, 0, 0}));
        EXPECT_NEAR(s.lhs, L * L, 1e-13 * L * L);
        EXPECT_NEAR(s.rhs, L * L, 1e-13 * L * L);
        EXPECT_NEAR(s.ratio, 1.0, 1e-13);
    }
}

TEST(Agmon, VerticalSineClosedForm) {
    const auto g = SpectralGrid::make(1.0, 8, 8, 16);
    const auto s = agmon_ratio(SpectralField::mode(g, {0, 0, 1}, 1.0, true));
    EXPECT_NEAR(s.lhs, 1.0, 1e-13);
    const double n = 1.0 / std::sqrt(2.0), nz = 2.0 * kPi / std::sqrt(2.0);
    EXPECT_NEAR(s.rhs, n * (n + nz), 1e-12);
    EXPECT_NEAR(s.ratio, 2.0 / (1.0 + 2.0 * kPi), 1e-12);
    EXPECT_NEAR(s.ratio, 0.2746, 1e-4);
}

TEST(Gronwall, SeparableExampleHasRatioTwo) {
    GronwallInstance in;
    in.eta0 = 0.0;
    in.f = constant(1.0);
    in.g = in.a = in.b = constant(0.0);
    const ScalarSeries s = integrate(in, 4.0, 1.0 / 64);
    for (std::size_t i = 0; i < s.t.size(); ++i) EXPECT_NEAR(s.eta[i] * s.eta[i], 2.0 * s.t[i], 1e-12);
    EXPECT_NEAR(gronwall_check(s).ratio, 2.0, 1e-12);
}

TEST(Gronwall, NoForcingKeepsEtaConstant) {
    GronwallInstance in;
    in.eta0 = 1.3;
    in.f = in.g = in.a = in.b = constant(0.0);
    const ScalarSeries s = integrate(in, 4.0, 1.0 / 64);
    for (double e : s.eta) EXPECT_EQ(e, 1.3);
    EXPECT_NEAR(gronwall_check(s).ratio, 1.0, 1e-15);
}

TEST(Gronwall, ConstructedInstancesSatisfyHypothesis) {
    // eta eta' + h - f - g eta = -slack <= 0, checked by differencing the integrated series
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto in = random_gronwall_instance(CounterRng(k), 4.0);
        const double dt = 1.0 / 256;
        const ScalarSeries s = integrate(in, 4.0, dt);
        for (std::size_t i = 0; i + 1 < s.t.size(); ++i) {
            const double lhs = 0.5 * (s.eta[i + 1] * s.eta[i + 1] - s.eta[i] * s.eta[i]) + (s.H[i + 1] - s.H[i]);
            const double rhs = (s.F[i + 1] - s.F[i]) +
                               0.5 * dt * (in.g(s.t[i], i / 64) * s.eta[i] + in.g(s.t[i + 1], i / 64) * s.eta[i + 1]);
            EXPECT_LE(lhs, rhs + 1e-6 * dt);
        }
    }
}

TEST(Gronwall, NegativeEtaIsDiscarded) {
    ScalarSeries s{{0.0, 1.0}, {1.0, -0.5}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {}};
    const auto r = gronwall_check(s);
    EXPECT_TRUE(r.discarded);
    EXPECT_FALSE(r.flag.empty());
}

TEST(UniformGronwall, NoForcingNeverExceedsOne) {
    UniformGronwallInstance in;
    in.eta0 = 2.0;
    in.g = in.h = in.c = constant(0.0);
    in.s = constant(0.7);
    const ScalarSeries s = integrate(in, 4.0, 1.0 / 64);
    const auto r = uniform_gronwall_check(s, {0, 10, 64, 150, 192});
    EXPECT_LE(r.ratio, 1.0);
    // decreasing eta: eta(t+1) = eta(t) e^{-0.7}, int eta = eta(t)(1 - e^{-0.7})/0.7
    EXPECT_NEAR(r.ratio, 0.7 * std::exp(-0.7) / (1.0 - std::exp(-0.7)), 1e-9);
}

TEST(UniformGronwall, LinearGrowthClosedForm) {
    UniformGronwallInstance in;
    in.eta0 = 0.0;
    in.g = in.s = in.c = constant(0.0);
    in.h = constant(1.0);
    const ScalarSeries s = integrate(in, 4.0, 1.0 / 64);
    for (std::size_t start : {0, 32, 100, 192}) {
        const double t = start / 64.0;
        EXPECT_NEAR(uniform_gronwall_check(s, {start}).ratio, (t + 1.0) / (t + 1.5), 1e-13);
    }
}

TEST(UniformGronwall, RejectsBadWindows) {
    UniformGronwallInstance in;
    in.g = in.h = in.s = in.c = constant(0.0);
    const ScalarSeries s = integrate(in, 2.0, 1.0 / 64);
    EXPECT_THROW(uniform_gronwall_check(s, {65}), InvalidInput);
    const ScalarSeries odd = integrate(in, 2.0, 0.3);
    EXPECT_THROW(uniform_gronwall_check(odd, {0}), InvalidInput);
}

TEST(Identities, ZeroVelocityHasZeroResiduals) {
    const auto g = SpectralGrid::make(2.0, 8, 8, 8);
    CounterRng rng(3);
    LabOptions o;
    const SpectralField f = detail::lab_field(g, rng, o), h = detail::lab_field(g, rng, o);
    const auto r = identity_suite(SpectralField(g), f, h);
    EXPECT_EQ(r.max(), 0.0);
}

TEST(Identities, EqualArgumentsReduceToSkewSymmetry) {
    const auto g = SpectralGrid::make(2.0, 16, 16, 8);
    CounterRng rng(4);
    LabOptions o;
    const SpectralField phi = detail::lab_field(g, rng, o, false), f = detail::lab_field(g, rng, o);
    const auto r = identity_suite(phi, f, f);
    EXPECT_LE(r.antisymmetry, 1e-11);
    EXPECT_LE(r.skew, 1e-11);
}

TEST(Identities, RandomTriplesStayAtRoundoff) {
    const auto g = SpectralGrid::make(2.0 * kPi, 16, 16, 8);
    LabOptions o;
    for (std::uint64_t k = 0; k < 25; ++k) {
        CounterRng rng(100 + k);
        const SpectralField phi = detail::lab_field(g, rng, o, false);
        const SpectralField f = detail::lab_field(g, rng, o), h = detail::lab_field(g, rng, o);
        EXPECT_LE(identity_suite(phi, f, h).max(), 1e-11);
    }
}

TEST(Identities, NonzeroTermsAreNotTrivial) {
    // the normalizers must be nonzero for the residuals to mean anything
    const auto g = SpectralGrid::make(2.0, 16, 16, 8);
    const SpectralField phi = SpectralField::mode(g, {1, 0, 0}) + SpectralField::mode(g, {0, 1, 1}, 0.5, true);
    const SpectralField f = SpectralField::mode(g, {1, 1, 0});
    const SpectralField h = SpectralField::mode(g, {0, 1, 0});
    const SpectralField ux = dy(phi), uy = -dx(phi);
    const double a = inner(multiply(ux, dx(f), Dealias::None) + multiply(uy, dy(f), Dealias::None), h);
    EXPECT_GT(std::abs(a), 1e-3);
    EXPECT_LE(identity_suite(phi, f, h).antisymmetry, 1e-11);
}

TEST(Lab, ThreadCountDoesNotChangeReport) {
    LabOptions o = small_lab();
    o.threads = 1;
    const auto a = to_json(run_lab(o)).dump();
    o.threads = 4;
    EXPECT_EQ(to_json(run_lab(o)).dump(), a);
}

TEST(Lab, SmallStudyPassesAndCountsSamples) {
    const LabReport r = run_lab(small_lab());
    ASSERT_EQ(r.lemmas.size(), 4u);
    for (const auto& l : r.lemmas) {
        EXPECT_EQ(l.samples, 24u) << l.lemma;
        EXPECT_TRUE(l.finite) << l.lemma;
        EXPECT_GT(l.max_ratio, 0.0) << l.lemma;
        std::size_t total = 0;
        for (auto c : l.histogram) total += c;
        EXPECT_EQ(total + l.discarded, l.samples) << l.lemma;
    }
    EXPECT_EQ(r.lemmas[3].violations, 0u);
    EXPECT_TRUE(r.pass());
}

TEST(Lab, SeedChangesSamples) {
    LabOptions o = small_lab();
    const auto a = run_lab(o);
    o.seed = 2;
    const auto b = run_lab(o);
    EXPECT_NE(a.lemmas[0].max_ratio, b.lemmas[0].max_ratio);
}

TEST(Lab, RejectsBadOptions) {
    LabOptions o = small_lab();
    o.samples = 0;
    EXPECT_THROW(run_lab(o), InvalidInput);
    o = small_lab();
    o.dt = 0.3;
    EXPECT_THROW(run_lab(o), InvalidInput);
    o = small_lab();
    o.horizon = 1.0;
    EXPECT_THROW(run_lab(o), InvalidInput);
}
