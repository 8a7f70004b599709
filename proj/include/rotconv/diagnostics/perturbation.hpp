#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotconv/model/initial.hpp"
#include "rotconv/model/simulate.hpp"
#include "rotconv/util/parallel.hpp"

namespace rotconv {

/// Integrand of the Gronwall exponent for the difference of two solutions,
/// evaluated with both solutions replaced by the reference trajectory:
///   (||grad_h w||^2 + 1)(||w||^2 + ||w_z||^2) + ||omega||^2 (||u||^2 + ||u_z||^2)
///   + (||grad_h theta||^2 + 1)(||theta||^2 + ||theta_z||^2) + 1.
inline double gronwall_integrand(const DiagnosticsRow& r) {
    return (r.grad_w2 + 1.0) * (r.w2 + r.dz_w2) + r.omega2 * (r.u2 + r.dz_u2) +
           (r.grad_theta2 + 1.0) * (r.theta2 + r.dz_theta2) + 1.0;
}

/// K(t_n) = C * trapezoid of the integrand over the rows, one value per row.
inline std::vector<double> gronwall_exponent(const DiagnosticsSeries& rows, double C) {
    std::vector<double> K;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) acc += 0.5 * (rows[i].t - rows[i - 1].t) * (gronwall_integrand(rows[i]) + gronwall_integrand(rows[i - 1]));
        K.push_back(C * acc);
    }
    return K;
}

struct PerturbationSample {
    double delta = 0.0;     // relative to the reference state's norm
    double diff0 = 0.0;     // squared difference norm at t = 0
    double diffT = 0.0;     // squared difference norm at t = T
    double bound = 0.0;     // diff0 * exp(K(T))
    bool bound_pass = true;
    bool blew_up = false;
    std::string flag;
};

struct PerturbationReport {
    double gronwall_C = 1.0;
    double K_T = 0.0;
    std::vector<PerturbationSample> samples;
    /// Difference-norm ratios ||diff_{i+1}(T)|| / ||diff_i(T)|| for consecutive deltas.
    std::vector<double> ratios;
    bool scaling_pass = false;
    bool bound_pass = true;
    bool complete = true;
    DiagnosticsSeries reference_rows;

    bool pass() const { return complete && scaling_pass && bound_pass; }
};

struct PerturbationOptions {
    std::uint64_t direction_seed = 1;
    RandomStateSpec direction{};  // seed is overwritten by direction_seed
    double scaling_tolerance = 0.2;
    unsigned threads = 1;
};

/// Runs the reference trajectory and one perturbed trajectory per delta, all
/// to p.T, and compares final differences with the Gronwall bound and with
/// first-order scaling in delta. The perturbation is delta * ||init|| times a
/// unit-norm random direction.
inline PerturbationReport perturbation_study(const ModelState& init, const std::vector<double>& deltas, const Params& p,
                                             const PerturbationOptions& opt = {}) {
    check_state(init);
    if (deltas.empty()) throw InvalidInput("perturbation_study needs at least one delta");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] >= 0.0) || !std::isfinite(deltas[i]))
            throw InvalidInput("perturbation sizes must be non-negative (got " + std::to_string(deltas[i]) + ")");
        if (i > 0 && !(deltas[i] < deltas[i - 1])) throw InvalidInput("perturbation sizes must be strictly decreasing");
    }

    RandomStateSpec dspec = opt.direction;
    dspec.seed = opt.direction_seed;
    ModelState dir = random_state(init.grid(), dspec);
    const double dn = std::sqrt(state_norm2(dir));
    if (!(dn > 0.0)) throw InvalidInput("perturbation direction is zero");
    const double scale = std::sqrt(state_norm2(init)) / dn;

    PerturbationReport rep;
    rep.gronwall_C = std::max(1.0, std::abs(p.Gamma));
    rep.samples.resize(deltas.size());

    // slot 0 is the reference trajectory, slot i+1 the i-th perturbation
    std::vector<ModelState> finals(deltas.size() + 1);
    std::vector<char> failed(deltas.size() + 1, 0);
    std::vector<std::string> notes(deltas.size() + 1);
    DiagnosticsSeries ref_rows;
    parallel_for(deltas.size() + 1, opt.threads, [&](std::size_t k) {
        ModelState start = init;
        if (k > 0) {
            const double a = deltas[k - 1] * scale;
            start.w.axpy(a, dir.w);
            start.omega.axpy(a, dir.omega);
            start.theta.axpy(a, dir.theta);
            rep.samples[k - 1].delta = deltas[k - 1];
            rep.samples[k - 1].diff0 = difference_norm2(start, init);
        }
        DiagnosticsSeries partial;
        SimulationSinks sinks;
        if (k == 0) sinks.on_row = [&](const DiagnosticsRow& r) { partial.push_back(r); };
        try {
            finals[k] = simulate(start, p, sinks).final_state;
        } catch (const BlowUp& e) {
            failed[k] = 1;
            notes[k] = e.what();
        }
        if (k == 0) ref_rows = std::move(partial);
    });

    rep.reference_rows = ref_rows;
    if (failed[0]) {
        rep.complete = false;
        rep.bound_pass = false;
        for (auto& s : rep.samples) s.flag = "reference trajectory blew up: " + notes[0];
        return rep;
    }
    const std::vector<double> K = gronwall_exponent(ref_rows, rep.gronwall_C);
    rep.K_T = K.empty() ? 0.0 : K.back();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        auto& s = rep.samples[i];
        if (failed[i + 1]) {
            s.blew_up = true;
            s.flag = notes[i + 1];
            rep.complete = false;
            rep.bound_pass = false;
            continue;
        }
        s.diffT = difference_norm2(finals[i + 1], finals[0]);
        s.bound = s.diff0 * std::exp(rep.K_T);
        s.bound_pass = s.diffT <= s.bound;
        rep.bound_pass = rep.bound_pass && s.bound_pass;
    }
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
        const auto &a = rep.samples[i], &b = rep.samples[i + 1];
        rep.ratios.push_back(a.diffT > 0.0 ? std::sqrt(b.diffT / a.diffT) : std::numeric_limits<double>::quiet_NaN());
    }
    // first-order dependence: the last ratio tracks the ratio of the two smallest deltas
    if (!rep.ratios.empty() && rep.complete) {
        const std::size_t n = deltas.size();
        const double expected = deltas[n - 1] / deltas[n - 2];
        const double last = rep.ratios.back();
        rep.scaling_pass = std::isfinite(last) && std::abs(last - expected) <= opt.scaling_tolerance * expected;
    }
    return rep;
}

inline nlohmann::json to_json(const PerturbationReport& r) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"delta", s.delta},
                           {"diff0", s.diff0},
                           {"diffT", s.diffT},
                           {"bound", s.bound},
                           {"bound_pass", s.bound_pass},
                           {"blew_up", s.blew_up},
                           {"flag", s.flag}});
    nlohmann::json ratios = nlohmann::json::array();
    for (double v : r.ratios) ratios.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    return {{"gronwall_C", r.gronwall_C}, {"K_T", r.K_T},           {"samples", samples},
            {"ratios", ratios},          {"scaling_pass", r.scaling_pass}, {"bound_pass", r.bound_pass},
            {"complete", r.complete},     {"pass", r.pass()}};
}

} // namespace rotconv
