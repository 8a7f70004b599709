#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotconv/diagnostics/row.hpp"
#include "rotconv/errors.hpp"

namespace rotconv {

/// Least-squares fit of log(q) = c - rate * t.
struct RateFit {
    std::optional<double> rate;
    double intercept = 0.0;
    std::string flag;  // empty when the fit is clean
};

/// Fits the final `window` fraction of the samples. A series that is zero
/// throughout the window short-circuits to rate 0 with a flag; any other
/// non-positive value leaves the rate unset.
inline RateFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& q, double window = 0.5) {
    if (t.size() != q.size()) throw InvalidInput("fit_decay_rate: time and value series differ in length");
    RateFit fit;
    if (t.empty()) {
        fit.flag = "empty series";
        return fit;
    }
    const std::size_t n = t.size();
    const std::size_t first = n - std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window * n)));
    const bool all_zero = std::all_of(q.begin() + first, q.end(), [](double v) { return v == 0.0; });
    if (all_zero) {
        fit.rate = 0.0;
        fit.flag = "zero series";
        return fit;
    }
    for (std::size_t i = first; i < n; ++i)
        if (!(q[i] > 0.0) || !std::isfinite(q[i])) {
            fit.flag = "non-positive value at t=" + std::to_string(t[i]);
            return fit;
        }
    const std::size_t m = n - first;
    if (m < 2) {
        fit.rate = 0.0;
        fit.intercept = std::log(q.back());
        fit.flag = "single sample";
        return fit;
    }
    double st = 0.0, sy = 0.0;
    for (std::size_t i = first; i < n; ++i) {
        st += t[i];
        sy += std::log(q[i]);
    }
    const double tm = st / m, ym = sy / m;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = first; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (std::log(q[i]) - ym);
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    fit.rate = -slope;
    fit.intercept = ym - slope * tm;
    return fit;
}

/// Sample-wise check of q(t) <= q(0) exp(-rate t).
struct BoundCheck {
    bool checked = false;
    bool pass = true;
    double rate = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min over samples of (bound - q)/bound
    double loosest_margin = 0.0;                                    // max over samples of (bound - q)/bound
    double worst_t = 0.0;
    std::string note;
};

inline constexpr double kBoundSlack = 1e-10;

inline BoundCheck check_exponential_bound(const std::vector<double>& t, const std::vector<double>& q, double rate,
                                          double slack = kBoundSlack) {
    BoundCheck b;
    b.checked = true;
    b.rate = rate;
    if (t.empty()) return b;
    const double q0 = q.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double bound = q0 * std::exp(-rate * (t[i] - t.front()));
        if (!std::isfinite(q[i]) || q[i] > bound * (1.0 + slack)) b.pass = false;
        if (bound > 0.0) {
            const double margin = (bound - q[i]) / bound;
            if (margin < b.worst_margin) {
                b.worst_margin = margin;
                b.worst_t = t[i];
            }
            b.loosest_margin = std::max(b.loosest_margin, margin);
        } else if (q[i] != 0.0) {
            b.pass = false;
        }
    }
    if (!std::isfinite(b.worst_margin)) b.worst_margin = 0.0;
    return b;
}

/// Affine upper envelope a + b t of log(q) with b the least-squares slope over
/// the whole run, plus the sample-to-sample log-slope series.
struct GrowthEnvelope {
    bool finite = true;
    double intercept = 0.0;
    double slope = 0.0;
    std::vector<double> log_slopes;
    std::string flag;
};

inline GrowthEnvelope growth_envelope(const std::vector<double>& t, const std::vector<double>& q) {
    GrowthEnvelope env;
    for (double v : q)
        if (!std::isfinite(v)) env.finite = false;
    if (!env.finite) {
        env.flag = "non-finite value";
        return env;
    }
    if (std::any_of(q.begin(), q.end(), [](double v) { return !(v > 0.0); })) {
        env.flag = "non-positive value; envelope omitted";
        return env;
    }
    const RateFit fit = fit_decay_rate(t, q, 1.0);
    env.slope = fit.rate ? -*fit.rate : 0.0;
    env.intercept = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) env.intercept = std::max(env.intercept, std::log(q[i]) - env.slope * t[i]);
    for (std::size_t i = 1; i < t.size(); ++i)
        env.log_slopes.push_back((std::log(q[i]) - std::log(q[i - 1])) / (t[i] - t[i - 1]));
    return env;
}

/// Observed decay against the three exponential statements for the model:
/// temperature energy at rate 2/(gamma Pe), velocity energy at 1/(kappa gamma Re)
/// when theta(0) = 0, and at most exponential growth of the z-derivatives.
struct DecayReport {
    double kappa = 1.0;
    double theta_bound_rate = 0.0;
    double velocity_bound_rate = 0.0;
    RateFit theta_fit;
    RateFit velocity_fit;
    RateFit gradient_fit;  // ||omega||^2 + ||grad_h w||^2 + ||grad_h theta||^2
    BoundCheck bound_a;
    BoundCheck bound_b;
    bool gradient_pass = true;  // sign of the fitted rate only
    GrowthEnvelope dz_growth;

    bool pass() const { return bound_a.pass && (!bound_b.checked || bound_b.pass) && gradient_pass && dz_growth.finite; }
};

/// Throws InvalidInput unless kappa >= 1 and Pe != 2 kappa Re.
inline void validate_kappa(double kappa, const Params& p) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa))
        throw InvalidInput("kappa must be >= 1 (got " + std::to_string(kappa) + ")");
    if (std::abs(p.Pe - 2.0 * kappa * p.Re) <= 1e-12 * std::max(p.Pe, 2.0 * kappa * p.Re))
        throw InvalidInput("decay bounds need Pe != 2 kappa Re (Pe=" + std::to_string(p.Pe) +
                           ", kappa=" + std::to_string(kappa) + ", Re=" + std::to_string(p.Re) + ")");
}

inline DecayReport decay_rates(const DiagnosticsSeries& rows, const Params& p, double kappa = 1.0) {
    validate_kappa(kappa, p);
    DecayReport r;
    r.kappa = kappa;
    r.theta_bound_rate = 2.0 / (p.gamma() * p.Pe);
    r.velocity_bound_rate = 1.0 / (kappa * p.gamma() * p.Re);

    std::vector<double> t, th, vel, grad, dz;
    for (const auto& row : rows) {
        t.push_back(row.t);
        th.push_back(row.theta2);
        vel.push_back(row.velocity_energy());
        grad.push_back(row.omega2 + row.grad_w2 + row.grad_theta2);
        dz.push_back(row.dz_total());
    }
    r.theta_fit = fit_decay_rate(t, th);
    r.velocity_fit = fit_decay_rate(t, vel);
    r.gradient_fit = fit_decay_rate(t, grad);
    r.gradient_pass = r.gradient_fit.rate && *r.gradient_fit.rate >= 0.0;

    r.bound_a = check_exponential_bound(t, th, r.theta_bound_rate);
    if (!rows.empty() && rows.front().theta2 == 0.0) {
        r.bound_b = check_exponential_bound(t, vel, r.velocity_bound_rate);
    } else {
        r.bound_b.note = "skipped: theta(0) != 0";
    }
    r.dz_growth = growth_envelope(t, dz);
    return r;
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace detail

inline nlohmann::json to_json(const RateFit& f) {
    return {{"rate", detail::optional_json(f.rate)}, {"intercept", f.intercept}, {"flag", f.flag}};
}

inline nlohmann::json to_json(const BoundCheck& b) {
    return {{"checked", b.checked},           {"pass", b.pass},         {"rate", b.rate},
            {"worst_margin", b.worst_margin}, {"worst_t", b.worst_t},   {"loosest_margin", b.loosest_margin},
            {"note", b.note}};
}

inline nlohmann::json to_json(const DecayReport& r) {
    return {{"kappa", r.kappa},
            {"theta_bound_rate", r.theta_bound_rate},
            {"velocity_bound_rate", r.velocity_bound_rate},
            {"theta_fit", to_json(r.theta_fit)},
            {"velocity_fit", to_json(r.velocity_fit)},
            {"gradient_fit", to_json(r.gradient_fit)},
            {"gradient_reference_rate", std::min(r.theta_bound_rate, r.velocity_bound_rate)},
            {"gradient_pass", r.gradient_pass},
            {"bound_a", to_json(r.bound_a)},
            {"bound_b", to_json(r.bound_b)},
            {"dz_growth",
             {{"finite", r.dz_growth.finite},
              {"intercept", r.dz_growth.intercept},
              {"slope", r.dz_growth.slope},
              {"flag", r.dz_growth.flag},
              {"log_slopes", r.dz_growth.log_slopes}}},
            {"pass", r.pass()}};
}

} // namespace rotconv
