#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "rotconv/diagnostics/row.hpp"
#include "rotconv/errors.hpp"

namespace rotconv {

/// Running trapezoidal account of the energy identity
///
///   E(t) + int ||mean(w theta)||^2 + int D = E(0) + Gamma int (theta, w),
///   E = (||w||^2 + ||u||^2 + ||theta||^2) / 2,
///   D = (||grad_h w||^2 + ||grad_h u||^2)/Re + ||grad_h theta||^2/Pe + eps^2 ||phi_z||^2,
///
/// and of the temperature law alone. Rows must arrive at a uniform cadence.
class LedgerAccumulator {
  public:
    explicit LedgerAccumulator(const Params& p) : p_(p) {}

    /// Fills the ledger columns of `r` in place.
    void add(DiagnosticsRow& r) {
        r.energy = 0.5 * (r.w2 + r.u2 + r.theta2);
        if (!has_prev_) {
            e0_ = r.energy;
            th0_ = 0.5 * r.theta2;
        } else {
            const double dt = r.t - prev_.t;
            if (!cadence_) {
                if (!(dt > 0.0)) throw InvalidInput("energy ledger needs increasing sample times");
                cadence_ = dt;
            } else if (std::abs(dt - *cadence_) > 1e-9 * std::max(1.0, std::abs(*cadence_))) {
                throw InvalidInput("energy ledger needs a uniform sampling cadence");
            }
            fb_ += 0.5 * dt * (r.mean_wtheta2 + prev_.mean_wtheta2);
            diss_ += 0.5 * dt * (r.dissipation_rate(p_) + prev_.dissipation_rate(p_));
            buoy_ += 0.5 * dt * p_.Gamma * (r.theta_w + prev_.theta_w);
            th_diss_ += 0.5 * dt * (r.grad_theta2 + prev_.grad_theta2) / p_.Pe;
        }
        r.int_feedback = fb_;
        r.int_dissipation = diss_;
        r.int_buoyancy = buoy_;
        r.residual = r.energy + fb_ + diss_ - e0_ - buoy_;
        r.theta_residual = 0.5 * r.theta2 + th_diss_ + fb_ - th0_;
        prev_ = r;
        has_prev_ = true;
    }

  private:
    Params p_;
    DiagnosticsRow prev_{};
    bool has_prev_ = false;
    std::optional<double> cadence_;
    double e0_ = 0.0, th0_ = 0.0;
    double fb_ = 0.0, diss_ = 0.0, buoy_ = 0.0, th_diss_ = 0.0;
};

/// Ledger terms and residuals for a sampled trajectory.
inline DiagnosticsSeries energy_ledger(DiagnosticsSeries rows, const Params& p) {
    if (rows.size() < 2) throw InvalidInput("energy_ledger needs at least 2 samples, got " + std::to_string(rows.size()));
    LedgerAccumulator acc(p);
    for (auto& r : rows) acc.add(r);
    return rows;
}

/// max_t |residual| / E(0); the raw maximum when E(0) = 0.
inline double max_normalized_residual(const DiagnosticsSeries& rows) {
    if (rows.empty()) return 0.0;
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.residual));
    const double e0 = rows.front().energy;
    return e0 > 0.0 ? m / e0 : m;
}

} // namespace rotconv
