#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotconv/diagnostics/ledger.hpp"
#include "rotconv/galerkin/trajectory.hpp"
#include "rotconv/model/simulate.hpp"
#include "rotconv/model/stepper.hpp"

namespace rotconv {

/// Orthogonal projection onto span{e_j : |j| <= m}, |j| the Euclidean norm.
inline SpectralField project(const SpectralField& f, int m) {
    if (m < 0) throw InvalidInput("projection level must be >= 0 (got " + std::to_string(m) + ")");
    return project_level(f, m);
}

/// Largest coefficient outside |j| <= m, relative to the field's largest coefficient.
inline double support_defect(const SpectralField& f, int m) {
    const double scale = f.max_amplitude();
    return scale > 0.0 ? (f - project_level(f, m)).max_amplitude() / scale : 0.0;
}

/// Exact solution of theta_t = Delta_h theta / Pe, one exponential per mode.
class HeatSolution {
  public:
    HeatSolution(SpectralField theta0, double Pe) : theta0_(std::move(theta0)), Pe_(Pe) {
        if (!has_zero_horizontal_mean(theta0_))
            throw PreconditionViolation("initial temperature must have zero horizontal mean");
        if (!(Pe > 0.0)) throw InvalidInput("Pe must be positive");
    }

    SpectralField at(double t) const {
        const SpectralGrid& g = theta0_.g();
        SpectralField out(theta0_.grid());
        for (int p1 = 0; p1 < g.nx(); ++p1)
            for (int p2 = 0; p2 < g.ny(); ++p2) {
                const double decay = std::exp(-g.kh2(p1, p2) * t / Pe_);
                for (int p3 = 0; p3 < g.nz(); ++p3) {
                    const std::size_t i = g.flat(p1, p2, p3);
                    out[i] = decay * theta0_[i];
                }
            }
        return out;
    }

    const SpectralField& initial() const noexcept { return theta0_; }

  private:
    SpectralField theta0_;
    double Pe_;
};

/// theta^(1) sampled at every step time of `p`.
inline TemperatureTrajectory solve_theta1(const SpectralField& theta0, const Params& p) {
    const HeatSolution heat(theta0, p.Pe);
    TemperatureTrajectory traj(theta0.grid(), 0.0, p.dt);
    const std::size_t n = p.steps();
    for (std::size_t k = 0; k <= n; ++k) traj.push(heat.at(static_cast<double>(k) * p.dt));
    return traj;
}

/// One level of the iteration: the sampled rows and theta^(m) at every step
/// for the next level.
struct LevelResult {
    int m = 0;
    DiagnosticsSeries rows;
    TemperatureTrajectory theta;
    double max_support_defect = 0.0;
    double max_mean_defect = 0.0;
    double max_theta_residual = 0.0;     // |theta law residual| / (||theta0||^2 / 2)
    double max_velocity_residual = 0.0;  // |velocity ledger residual| / velocity energy at 0
};

namespace detail {

/// Velocity part of the ledger at level m with the external source:
/// (||w||^2 + ||u||^2)/2 + int[(||grad w||^2 + ||grad u||^2)/Re + eps^2 ||phi_z||^2]
///   - Gamma int (theta_prev, w) - (initial value).
class VelocityLedger {
  public:
    explicit VelocityLedger(const Params& p) : p_(p) {}

    double add(double t, const DiagnosticsRow& r, double source_inner) {
        const double e = 0.5 * (r.w2 + r.u2);
        const double rate = (r.grad_w2 + r.grad_u2) / p_.Re + p_.epsilon * p_.epsilon * r.phi_z2;
        if (!first_) {
            const double dt = t - t_;
            acc_ += 0.5 * dt * (rate + rate_) - 0.5 * dt * p_.Gamma * (source_inner + src_);
        } else {
            e0_ = e;
            first_ = false;
        }
        t_ = t;
        rate_ = rate;
        src_ = source_inner;
        return e + acc_ - e0_;
    }
    double initial() const noexcept { return e0_; }

  private:
    Params p_;
    bool first_ = true;
    double t_ = 0.0, rate_ = 0.0, src_ = 0.0, acc_ = 0.0, e0_ = 0.0;
};

} // namespace detail

/// Level-m system: (w_m, omega_m) stepped inside P_m with projected advection
/// and buoyancy Gamma P_m theta_prev, theta^(m) stepped at full resolution with
/// u_m, w_m. Initial data (P_m w0, P_m omega0, theta0).
/// `on_sample(k, state)` sees the k-th sampled state.
inline LevelResult run_level(const TemperatureTrajectory& theta_prev, int m, const ModelState& init, const Params& p,
                             const std::function<void(std::size_t, const ModelState&)>& on_sample = {}) {
    if (m < 2) throw InvalidInput("Galerkin level must be >= 2 (got " + std::to_string(m) + ")");
    check_state(init);
    const std::size_t nsteps = p.steps();
    if (theta_prev.size() < nsteps + 1)
        throw InvalidInput("input temperature has " + std::to_string(theta_prev.size()) + " samples, level needs " +
                           std::to_string(nsteps + 1));
    if (std::abs(theta_prev.dt() - p.dt) > 1e-12 * p.dt) throw InvalidInput("input temperature step differs from dt");
    if (!same_grid(theta_prev.grid(), init.grid())) throw InvalidInput("input temperature lives on a different grid");

    LevelResult out;
    out.m = m;
    out.theta = TemperatureTrajectory(init.grid(), init.t, p.dt);
    ModelState s{init.t, project(init.w, m), project(init.omega, m), init.theta};
    ImexStepper stepper(init.grid(), p);
    LedgerAccumulator ledger(p);
    detail::VelocityLedger vledger(p);
    const double theta_e0 = 0.5 * norm2(init.theta);

    auto sample = [&](const ModelState& st, const SpectralField& source) {
        DiagnosticsRow r = measure(st, p);
        ledger.add(r);
        const double vres = vledger.add(st.t, r, inner(source, st.w));
        const double ve0 = vledger.initial();
        out.max_velocity_residual = std::max(out.max_velocity_residual, ve0 > 0.0 ? std::abs(vres) / ve0 : std::abs(vres));
        out.max_theta_residual =
            std::max(out.max_theta_residual, theta_e0 > 0.0 ? std::abs(r.theta_residual) / theta_e0 : std::abs(r.theta_residual));
        out.max_support_defect =
            std::max({out.max_support_defect, support_defect(st.w, m), support_defect(st.omega, m)});
        out.max_mean_defect = std::max(out.max_mean_defect, r.mean_defect);
        if (on_sample) on_sample(out.rows.size(), st);
        out.rows.push_back(r);
    };

    const std::size_t every = static_cast<std::size_t>(p.sample_every);
    for (std::size_t n = 0;; ++n) {
        const SpectralField source = theta_prev.at_step(n);
        out.theta.push(s.theta);
        if (n % every == 0) sample(s, source);
        if (n == nsteps) break;
        ExplicitOptions opt;
        opt.buoyancy_source = &source;
        opt.projection_level = m;
        ModelState next = stepper.advance(s, stepper.explicit_part(s, opt));
        next.t = init.t + static_cast<double>(n + 1) * p.dt;
        s = std::move(next);
    }
    return out;
}

struct LevelReport {
    int m = 0;
    double d_m = 0.0;                // ||theta^(m) - theta^(prev)|| in L2(Omega x (0,T))
    std::optional<double> r_m;       // distance to the full solution in L2(Omega x (0,T))
    std::optional<double> r_m_rel;   // r_m / ||full solution|| in the same norm
    double max_support_defect = 0.0;
    double max_mean_defect = 0.0;
    double max_theta_residual = 0.0;
    double max_velocity_residual = 0.0;
    DiagnosticsSeries rows;
};

struct IterationReport {
    std::vector<LevelReport> levels;
    bool complete = true;
    std::string error;
    bool monotone = true;  // r_m strictly decreasing across the schedule
    std::vector<std::string> flags;

    std::optional<double> r_ratio() const {
        if (levels.size() < 2 || !levels.front().r_m || !levels.back().r_m || *levels.front().r_m == 0.0)
            return std::nullopt;
        return *levels.back().r_m / *levels.front().r_m;
    }
};

struct IterationOptions {
    bool with_reference = true;
    /// Called after each level finishes.
    std::function<void(const LevelReport&)> on_level;
};

namespace detail {

/// sqrt of the trapezoidal time integral of the squared distances.
inline double space_time_norm(const std::vector<double>& t, const std::vector<double>& d2) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (d2[i] + d2[i - 1]);
    return std::sqrt(std::max(acc, 0.0));
}

} // namespace detail

inline void validate_schedule(const std::vector<int>& schedule) {
    if (schedule.empty()) throw InvalidInput("m_schedule is empty");
    if (schedule.front() < 2) throw InvalidInput("m_schedule must start at >= 2 (got " + std::to_string(schedule.front()) + ")");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw InvalidInput("m_schedule must be strictly increasing");
}

/// theta^(1) from the heat equation, then one level per schedule entry, each
/// driven by the previous level's temperature. Level errors end the iteration
/// and leave the finished levels in the report.
inline IterationReport iterate_scheme(const ModelState& init, const Params& p, const std::vector<int>& schedule,
                                      const IterationOptions& opt = {}) {
    validate_schedule(schedule);
    check_state(init);
    IterationReport rep;

    FieldStore ref_w(init.grid()), ref_omega(init.grid()), ref_theta(init.grid());
    std::vector<double> ref_norm2;
    if (opt.with_reference) {
        SimulationSinks sinks;
        const std::size_t every = static_cast<std::size_t>(p.sample_every);
        sinks.on_step = [&](const ModelState& s, std::size_t n) {
            if (n % every != 0) return;
            ref_w.push(s.w);
            ref_omega.push(s.omega);
            ref_theta.push(s.theta);
            ref_norm2.push_back(state_norm2(s));
        };
        try {
            simulate(init, p, sinks);
        } catch (const BlowUp& e) {
            rep.complete = false;
            rep.error = std::string("reference run: ") + e.what();
            return rep;
        }
    }

    TemperatureTrajectory prev = solve_theta1(init.theta, p);
    std::optional<double> last_r;
    for (int m : schedule) {
        std::vector<double> t, dd, rr;
        const std::size_t every = static_cast<std::size_t>(p.sample_every);
        auto on_sample = [&](std::size_t k, const ModelState& s) {
            t.push_back(s.t);
            dd.push_back(norm2(s.theta - prev.at_step(k * every)));
            if (opt.with_reference)
                rr.push_back(difference_norm2(s, ModelState{s.t, ref_w.get(k), ref_omega.get(k), ref_theta.get(k)}));
        };
        LevelResult level;
        try {
            level = run_level(prev, m, init, p, on_sample);
        } catch (const BlowUp& e) {
            rep.complete = false;
            rep.error = "level " + std::to_string(m) + ": " + e.what();
            break;
        }
        LevelReport lr;
        lr.m = m;
        lr.max_support_defect = level.max_support_defect;
        lr.max_mean_defect = level.max_mean_defect;
        lr.max_theta_residual = level.max_theta_residual;
        lr.max_velocity_residual = level.max_velocity_residual;

        lr.d_m = detail::space_time_norm(t, dd);
        if (opt.with_reference) {
            lr.r_m = detail::space_time_norm(t, rr);
            const double scale = detail::space_time_norm(t, ref_norm2);
            lr.r_m_rel = scale > 0.0 ? *lr.r_m / scale : 0.0;
            if (last_r && !(*lr.r_m < *last_r)) {
                rep.monotone = false;
                rep.flags.push_back("r_m did not decrease at m=" + std::to_string(m));
            }
            last_r = lr.r_m;
        }
        lr.rows = std::move(level.rows);
        if (opt.on_level) opt.on_level(lr);
        rep.levels.push_back(std::move(lr));
        prev = std::move(level.theta);
    }
    return rep;
}

inline nlohmann::json to_json(const IterationReport& r) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : r.levels) {
        nlohmann::json j = {{"m", l.m},
                            {"d_m", l.d_m},
                            {"max_support_defect", l.max_support_defect},
                            {"max_mean_defect", l.max_mean_defect},
                            {"max_theta_residual", l.max_theta_residual},
                            {"max_velocity_residual", l.max_velocity_residual}};
        j["r_m"] = l.r_m ? nlohmann::json(*l.r_m) : nlohmann::json(nullptr);
        j["r_m_rel"] = l.r_m_rel ? nlohmann::json(*l.r_m_rel) : nlohmann::json(nullptr);
        if (!l.rows.empty()) {
            j["final_w2"] = l.rows.back().w2;
            j["final_u2"] = l.rows.back().u2;
            j["final_theta2"] = l.rows.back().theta2;
        }
        levels.push_back(j);
    }
    const auto ratio = r.r_ratio();
    return {{"levels", levels},
            {"complete", r.complete},
            {"error", r.error},
            {"monotone", r.monotone},
            {"flags", r.flags},
            {"r_last_over_first", ratio ? nlohmann::json(*ratio) : nlohmann::json(nullptr)}};
}

} // namespace rotconv
