#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "rotconv/model/initial.hpp"
#include "rotconv/model/simulate.hpp"

using namespace rotconv;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_diff(const SpectralField& a, const SpectralField& b) {
    const double scale = std::max(a.max_amplitude(), b.max_amplitude());
    return scale > 0.0 ? (a - b).max_amplitude() / scale : 0.0;
}

// Every active mode has |j_d| < N_d / 6, so any product of two or three such
// fields stays inside the 2/3 band and pseudo-spectral evaluation is exact.
ModelState low_mode_state(const GridPtr& g, std::uint64_t seed) {
    RandomStateSpec spec;
    spec.seed = seed;
    spec.max_mode = 2.0;
    return random_state(g, spec);
}

GridValues on_grid(const SpectralField& f, const GridPtr& g) { return from_coefficients(resample(f, g)); }

// Independent evaluation on a doubled grid: transform inputs up, form every
// product at collocation points, average planes directly, and come back down.
struct FineOracle {
    GridPtr coarse, fine;

    SpectralField down(const GridValues& v) const { return dealias(resample(to_coefficients(v), coarse)); }

    SpectralField advection(const SpectralField& omega, const SpectralField& f) const {
        const SpectralField phi_f = invert_horizontal_laplacian(resample(omega, fine));
        const GridValues U = from_coefficients(dy(phi_f));
        const GridValues V = from_coefficients(-dx(phi_f));
        const SpectralField ff = resample(f, fine);
        const GridValues fx = from_coefficients(dx(ff));
        const GridValues fy = from_coefficients(dy(ff));
        GridValues out(fine);
        for (std::size_t i = 0; i < out.values().size(); ++i)
            out.values()[i] = U.values()[i] * fx.values()[i] + V.values()[i] * fy.values()[i];
        return down(out);
    }

    SpectralField feedback(const SpectralField& w, const SpectralField& theta) const {
        const GridValues W = on_grid(w, fine);
        const GridValues T = on_grid(theta, fine);
        GridValues out(fine);
        const int nx = fine->nx(), ny = fine->ny(), nz = fine->nz();
        for (int k = 0; k < nz; ++k) {
            double avg = 0.0;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) avg += W(i, j, k) * T(i, j, k);
            avg /= static_cast<double>(nx * ny);
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) out(i, j, k) = W(i, j, k) * avg;
        }
        return down(out);
    }
};

Params small_params() {
    Params p;
    p.nx = p.ny = 16;
    p.nz = 8;
    return p;
}

double state_distance2(const ModelState& a, const ModelState& b) {
    return norm2(a.w - b.w) + norm2(a.omega - b.omega) + norm2(a.theta - b.theta);
}

} // namespace

TEST(Velocity, SingleModeVorticity) {
    const double L = 3.0;
    auto g = SpectralGrid::make(L, 8, 8, 8);
    const Velocity vel = velocity_from_vorticity(SpectralField::mode(g, {1, 0, 0}));
    EXPECT_LT(vel.u.max_amplitude(), 1e-15);
    const SpectralField expected_v = SpectralField::mode(g, {1, 0, 0}, L / (2.0 * kPi), true);
    EXPECT_LT((vel.v - expected_v).max_amplitude(), 1e-15);
}

TEST(Velocity, ZeroVorticityGivesRest) {
    auto g = SpectralGrid::make(1.0, 8, 8, 8);
    const Velocity vel = velocity_from_vorticity(SpectralField(g));
    EXPECT_EQ(vel.u.max_amplitude(), 0.0);
    EXPECT_EQ(vel.v.max_amplitude(), 0.0);
}

TEST(Velocity, CurlAndDivergenceIdentities) {
    auto g = SpectralGrid::make(2.0, 16, 16, 8);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RandomFieldSpec spec;
        spec.seed = seed;
        spec.max_mode = 5;
        const SpectralField omega = random_field(g, spec);
        const Velocity vel = velocity_from_vorticity(omega);
        const double scale = omega.max_amplitude();
        EXPECT_LT((dx(vel.u) + dy(vel.v)).max_amplitude() / scale, 1e-13);
        EXPECT_LT((dx(vel.v) - dy(vel.u) - omega).max_amplitude() / scale, 1e-12);
    }
}

TEST(Velocity, NonzeroMeanVorticityIsRejected) {
    auto g = SpectralGrid::make(1.0, 8, 8, 8);
    EXPECT_THROW(velocity_from_vorticity(SpectralField::mode(g, {0, 0, 1})), PreconditionViolation);
}

TEST(NonlocalFeedback, VanishesForZeroTemperature) {
    auto g = SpectralGrid::make(1.0, 8, 8, 8);
    const SpectralField w = SpectralField::mode(g, {1, 1, 1});
    EXPECT_EQ(nonlocal_feedback(w, SpectralField(g)).max_amplitude(), 0.0);
}

TEST(NonlocalFeedback, HalfAngleExample) {
    auto g = SpectralGrid::make(2.5, 8, 8, 8);
    const SpectralField c = SpectralField::mode(g, {1, 0, 0});
    const ZProfile mean = mean_w_theta(c, c);
    for (double v : mean.values) EXPECT_NEAR(v, 0.5, 1e-15);
    EXPECT_LT((nonlocal_feedback(c, c) - 0.5 * c).max_amplitude(), 1e-15);
}

TEST(NonlocalFeedback, MatchesFineGridQuadrature) {
    auto g = SpectralGrid::make(2.0 * kPi, 16, 16, 16);
    const FineOracle oracle{g, SpectralGrid::make(2.0 * kPi, 32, 32, 32)};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ModelState s = low_mode_state(g, seed);
        EXPECT_LT(rel_diff(nonlocal_feedback(s.w, s.theta), oracle.feedback(s.w, s.theta)), 1e-11);
    }
}

TEST(NonlocalFeedback, GridMismatchThrows) {
    EXPECT_THROW(nonlocal_feedback(SpectralField(SpectralGrid::make(1.0, 8, 8, 8)),
                                   SpectralField(SpectralGrid::make(1.0, 8, 8, 4))),
                 InvalidInput);
}

TEST(Tendency, ZeroStateHasZeroTendency) {
    Params p = small_params();
    const Tendency t = tendency(ModelState::zero(p.make_grid()), p);
    const FieldTriple tot = t.total();
    EXPECT_EQ(tot.w.max_amplitude(), 0.0);
    EXPECT_EQ(tot.omega.max_amplitude(), 0.0);
    EXPECT_EQ(tot.theta.max_amplitude(), 0.0);
}

TEST(Tendency, LinearSingleModeTemperature) {
    Params p = small_params();
    p.L = 3.0;
    p.Pe = 2.5;
    p.Gamma = 0.7;
    auto g = p.make_grid();
    const ModelState s = mode_state(g, {{"theta", {1, 0, 0}, 1.0, false}});
    const Tendency t = tendency(s, p);
    const double a = 4.0 * kPi * kPi / (p.L * p.L) / p.Pe;
    EXPECT_LT((t.total().theta + a * s.theta).max_amplitude(), 1e-14);
    EXPECT_LT((t.total().w - p.Gamma * s.theta).max_amplitude(), 1e-15);
    EXPECT_EQ(t.total().omega.max_amplitude(), 0.0);
}

TEST(Tendency, EachTermMatchesFineGridEvaluation) {
    Params p;
    p.nx = p.ny = 16;
    p.nz = 16;
    p.Re = 0.8;
    p.Pe = 1.7;
    p.Gamma = -1.3;
    p.epsilon = 0.3;
    auto g = p.make_grid();
    const FineOracle oracle{g, SpectralGrid::make(p.L, 32, 32, 32)};
    const ModelState s = low_mode_state(g, 11);
    const Tendency t = tendency(s, p);
    const SpectralField phi = invert_horizontal_laplacian(s.omega);

    const SpectralField ew = -oracle.advection(s.omega, s.w) + vertical_derivative(phi) + p.Gamma * s.theta;
    const SpectralField eo = -oracle.advection(s.omega, s.omega) + vertical_derivative(s.w);
    const SpectralField et = -oracle.advection(s.omega, s.theta) - oracle.feedback(s.w, s.theta);
    EXPECT_LT(rel_diff(t.explicit_part.w, ew), 1e-11);
    EXPECT_LT(rel_diff(t.explicit_part.omega, eo), 1e-11);
    EXPECT_LT(rel_diff(t.explicit_part.theta, et), 1e-11);

    const double eps2 = p.epsilon * p.epsilon;
    const SpectralField lw = horizontal_laplacian(s.w) * (1.0 / p.Re);
    const SpectralField lo =
        horizontal_laplacian(s.omega) * (1.0 / p.Re) + eps2 * vertical_derivative(vertical_derivative(phi));
    const SpectralField lt = horizontal_laplacian(s.theta) * (1.0 / p.Pe);
    EXPECT_LT(rel_diff(t.linear_part.w, lw), 1e-13);
    EXPECT_LT(rel_diff(t.linear_part.omega, lo), 1e-13);
    EXPECT_LT(rel_diff(t.linear_part.theta, lt), 1e-13);
}

TEST(Tendency, OutputsKeepZeroHorizontalMean) {
    Params p = small_params();
    const ModelState s = random_state(p.make_grid(), {.seed = 4});
    const FieldTriple tot = tendency(s, p).total();
    for (const SpectralField* f : {&tot.w, &tot.omega, &tot.theta})
        EXPECT_LE(horizontal_mean_amplitude(*f), 1e-12 * f->max_amplitude());
}

TEST(Tendency, InvalidStateIsRejected) {
    Params p = small_params();
    auto g = p.make_grid();
    ModelState s = ModelState::zero(g);
    s.theta = SpectralField::mode(g, {0, 0, 1});
    EXPECT_THROW(tendency(s, p), InvalidState);
    ModelState mixed = ModelState::zero(g);
    mixed.w = SpectralField(SpectralGrid::make(p.L, 8, 8, 8));
    EXPECT_THROW(tendency(mixed, p), InvalidState);
}

TEST(Tendency, EpsilonZeroSkipsRegularization) {
    Params p = small_params();
    p.epsilon = 0.0;
    const LinearMultipliers m(*p.make_grid(), p);
    for (std::size_t i = 0; i < m.omega.size(); ++i) EXPECT_EQ(m.omega[i], m.w[i]);
}

TEST(Step, SingleModeAmplificationFactor) {
    for (Coupling c : {Coupling::Implicit, Coupling::Explicit}) {
        Params p = small_params();
        p.L = 2.0;
        p.Pe = 0.5;
        p.Gamma = 0.0;
        p.dt = 0.01;
        p.coupling = c;
        auto g = p.make_grid();
        const ModelState s = mode_state(g, {{"theta", {1, 0, 0}, 1.0, false}});
        std::optional<FieldTriple> history;
        const ModelState next = step(s, p, history);
        const double a = 4.0 * kPi * kPi / (p.L * p.L) / p.Pe;
        const double factor = (1.0 - a * p.dt / 2.0) / (1.0 + a * p.dt / 2.0);
        EXPECT_LT((next.theta - factor * s.theta).max_amplitude(), 1e-14);
        EXPECT_EQ(next.w.max_amplitude(), 0.0);
        EXPECT_TRUE(history.has_value());
    }
}

TEST(Step, ZeroStateStaysZero) {
    Params p = small_params();
    ImexStepper stepper(p.make_grid(), p);
    ModelState s = ModelState::zero(p.make_grid());
    for (int n = 0; n < 3; ++n) s = stepper.step(s);
    EXPECT_EQ(s.w.max_amplitude() + s.omega.max_amplitude() + s.theta.max_amplitude(), 0.0);
}

TEST(Step, NonFiniteValuesRaiseBlowUp) {
    Params p = small_params();
    auto g = p.make_grid();
    ImexStepper stepper(g, p);
    const ModelState s = random_state(g, {.seed = 2});
    FieldTriple bad = stepper.explicit_part(s);
    bad.theta[g->flat(1, 1, 1)] = std::numeric_limits<double>::quiet_NaN();
    try {
        stepper.advance(s, bad);
        FAIL() << "expected BlowUp";
    } catch (const BlowUp& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_EQ(e.field(), "theta");
    }
}

TEST(Step, ImplicitCouplingConservesOscillationEnergy) {
    Params p = small_params();
    p.Re = p.Pe = std::numeric_limits<double>::infinity();
    p.epsilon = 0.0;
    p.Gamma = 0.0;
    p.dt = 0.05;
    auto g = p.make_grid();
    ModelState s = mode_state(g, {{"w", {1, 0, 2}, 1.0, false}});
    const DiagnosticsRow r0 = measure(s, p);
    ImexStepper stepper(g, p);
    for (int n = 0; n < 50; ++n) s = stepper.step(s);
    const DiagnosticsRow r1 = measure(s, p);
    EXPECT_GT(r1.u2, 0.1 * r0.w2);  // energy moved into the horizontal flow
    EXPECT_NEAR(r1.w2 + r1.u2, r0.w2, 1e-13 * r0.w2);
}

TEST(Step, RichardsonOrderIsTwo) {
    for (Coupling c : {Coupling::Implicit, Coupling::Explicit}) {
        Params p = small_params();
        p.T = 0.5;
        p.coupling = c;
        auto g = p.make_grid();
        const ModelState init = random_state(g, {.seed = 21, .max_mode = 3.0});
        auto run = [&](double dt) {
            Params q = p;
            q.dt = dt;
            q.sample_every = static_cast<int>(q.steps());
            return simulate(init, q).final_state;
        };
        const double dt = 0.02;
        const ModelState ref = run(dt / 2.0 / 64.0);
        const double e1 = std::sqrt(state_distance2(run(dt), ref));
        const double e2 = std::sqrt(state_distance2(run(dt / 2.0), ref));
        const double order = std::log2(e1 / e2);
        EXPECT_NEAR(order, 2.0, 0.3) << "coupling " << static_cast<int>(c) << " e1=" << e1 << " e2=" << e2;
    }
}

TEST(Simulate, ZeroHorizonReturnsInit) {
    Params p = small_params();
    p.T = 0.0;
    const ModelState init = random_state(p.make_grid(), {.seed = 5});
    const SimulationResult res = simulate(init, p);
    ASSERT_EQ(res.rows.size(), 1u);
    EXPECT_EQ(res.final_state.w.coeffs().size(), init.w.coeffs().size());
    EXPECT_EQ(state_distance2(res.final_state, init), 0.0);
    EXPECT_EQ(res.rows[0].residual, 0.0);
}

TEST(Simulate, SingleModeVerticalVelocityDecays) {
    Params p = small_params();
    p.L = 2.0;
    p.Re = 4.0;
    p.Gamma = 0.0;
    p.T = 1.0;
    p.dt = 1e-3;
    p.sample_every = 100;
    const ModelState init = mode_state(p.make_grid(), {{"w", {1, 0, 0}, 1.0, false}});
    const SimulationResult res = simulate(init, p);
    const double expected = std::exp(-2.0 * (4.0 * kPi * kPi / (p.L * p.L)) * p.T / p.Re);
    const double ratio = res.rows.back().w2 / res.rows.front().w2;
    EXPECT_NEAR(ratio / expected, 1.0, 0.01);
    EXPECT_EQ(res.rows.size(), 11u);
}

TEST(Simulate, InvariantsHoldEverySample) {
    Params p = small_params();
    p.T = 0.2;
    p.sample_every = 10;
    const SimulationResult res = simulate(random_state(p.make_grid(), {.seed = 9}), p);
    for (const auto& r : res.rows) {
        EXPECT_LE(r.mean_defect, 1e-12);
        EXPECT_LE(r.div_defect, 1e-13);
        EXPECT_LE(r.curl_defect, 1e-12);
        EXPECT_LE(r.omega_phi_defect, 1e-11);
        EXPECT_GE(r.phi_z2, 0.0);
    }
}

TEST(Simulate, UnforcedEnergyIsNonIncreasing) {
    for (Coupling c : {Coupling::Implicit, Coupling::Explicit}) {
        Params p = small_params();
        p.Gamma = 0.0;
        p.T = 0.3;
        p.coupling = c;
        const SimulationResult res = simulate(random_state(p.make_grid(), {.seed = 13}), p);
        for (std::size_t n = 1; n < res.rows.size(); ++n) {
            const double prev = 2.0 * res.rows[n - 1].energy, cur = 2.0 * res.rows[n].energy;
            EXPECT_LE(cur, prev + 1e-12 * prev) << "step " << n;
        }
    }
}

TEST(Simulate, TemperatureLawResidualIsSecondOrder) {
    Params p = small_params();
    p.T = 0.5;
    const ModelState init = random_state(p.make_grid(), {.seed = 17});
    auto worst = [&](double dt) {
        Params q = p;
        q.dt = dt;
        double m = 0.0;
        for (const auto& r : simulate(init, q).rows) m = std::max(m, std::abs(r.theta_residual));
        return m;
    };
    const double r1 = worst(4e-3), r2 = worst(2e-3);
    EXPECT_NEAR(r1 / r2, 4.0, 0.6);
}

TEST(Simulate, SinksSeeEveryRowAndFinalSnapshot) {
    Params p = small_params();
    p.T = 0.01;
    p.dt = 1e-3;
    p.sample_every = 3;
    std::size_t rows = 0, steps = 0;
    std::vector<std::size_t> snaps;
    SimulationSinks sinks;
    sinks.on_row = [&](const DiagnosticsRow&) { ++rows; };
    sinks.on_step = [&](const ModelState&, std::size_t) { ++steps; };
    sinks.on_snapshot = [&](const ModelState&, std::size_t n) { snaps.push_back(n); };
    sinks.snapshot_every = 4;
    const SimulationResult res = simulate(random_state(p.make_grid(), {.seed = 1}), p, sinks);
    EXPECT_EQ(rows, res.rows.size());
    EXPECT_EQ(rows, 4u);  // steps 0, 3, 6, 9
    EXPECT_EQ(steps, 11u);
    EXPECT_EQ(snaps, (std::vector<std::size_t>{4, 8, 10}));
}

TEST(Simulate, BlowUpFlushesPartialRows) {
    Params p = small_params();
    p.coupling = Coupling::Explicit;
    p.Re = p.Pe = 1e12;
    p.dt = 1.0;
    p.T = 2000.0;
    p.sample_every = 1;
    std::size_t rows = 0;
    SimulationSinks sinks;
    sinks.on_row = [&](const DiagnosticsRow&) { ++rows; };
    const ModelState init = mode_state(p.make_grid(), {{"w", {1, 0, 2}, 1.0, false}});
    try {
        simulate(init, p, sinks);
        FAIL() << "expected BlowUp";
    } catch (const BlowUp& e) {
        EXPECT_GT(e.step(), 1u);
        EXPECT_EQ(rows, e.step());  // steps 0 .. step-1 were sampled
    }
}

TEST(Simulate, RepeatRunsAreBitIdentical) {
    Params p = small_params();
    p.T = 0.05;
    const ModelState init = random_state(p.make_grid(), {.seed = 3});
    const SimulationResult a = simulate(init, p), b = simulate(init, p);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(row_values(a.rows[i]), row_values(b.rows[i]));
    EXPECT_EQ(a.final_state.theta.coeffs().size(), b.final_state.theta.coeffs().size());
    EXPECT_EQ(state_distance2(a.final_state, b.final_state), 0.0);
}
