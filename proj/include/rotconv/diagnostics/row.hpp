#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rotconv/model/params.hpp"
#include "rotconv/model/state.hpp"
#include "rotconv/model/tendency.hpp"

namespace rotconv {

/// Norms and energy-ledger terms at one sampling instant. All norms are
/// squared L^2 norms over the box.
struct DiagnosticsRow {
    double t = 0.0;
    double w2 = 0.0, u2 = 0.0, theta2 = 0.0;
    double grad_w2 = 0.0, grad_u2 = 0.0, grad_theta2 = 0.0;
    double omega2 = 0.0;
    double phi_z2 = 0.0;
    double mean_wtheta2 = 0.0;
    double dz_w2 = 0.0, dz_u2 = 0.0, dz_theta2 = 0.0;
    double theta_w = 0.0;
    double omega_phi = 0.0;
    // structural checks
    double mean_defect = 0.0;   // max horizontal-mean amplitude / max amplitude over w, omega, theta
    double div_defect = 0.0;    // max |div_h u| coefficient / max |omega| coefficient
    double curl_defect = 0.0;   // max |curl_h u - omega| / max |omega|
    double omega_phi_defect = 0.0;  // |(omega,phi) - ||u||^2| / ||u||^2
    // energy ledger
    double energy = 0.0;          // (||w||^2 + ||u||^2 + ||theta||^2) / 2
    double int_feedback = 0.0;    // int ||mean(w theta)||^2
    double int_dissipation = 0.0; // int [(||grad w||^2 + ||grad u||^2)/Re + ||grad theta||^2/Pe + eps^2 ||phi_z||^2]
    double int_buoyancy = 0.0;    // Gamma int (theta, w)
    double residual = 0.0;        // energy + int_feedback + int_dissipation - energy(0) - int_buoyancy
    double theta_residual = 0.0;  // ||theta||^2/2 + int(||grad theta||^2/Pe + ||mean(w theta)||^2) - ||theta0||^2/2

    double dissipation_rate(const Params& p) const {
        return (grad_w2 + grad_u2) / p.Re + grad_theta2 / p.Pe + p.epsilon * p.epsilon * phi_z2;
    }
    double velocity_energy() const { return u2 + w2; }
    double dz_total() const { return dz_u2 + dz_w2 + dz_theta2; }
};

using DiagnosticsSeries = std::vector<DiagnosticsRow>;

/// Column names of DiagnosticsRow, in CSV order.
inline const std::vector<std::string>& diagnostics_columns() {
    static const std::vector<std::string> cols = {
        "t",           "w2",          "u2",          "theta2",          "grad_w2",      "grad_u2",
        "grad_theta2", "omega2",      "phi_z2",      "mean_wtheta2",    "dz_w2",        "dz_u2",
        "dz_theta2",   "theta_w",     "omega_phi",   "mean_defect",     "div_defect",   "curl_defect",
        "omega_phi_defect", "energy", "int_feedback", "int_dissipation", "int_buoyancy", "residual",
        "theta_residual"};
    return cols;
}

inline std::vector<double> row_values(const DiagnosticsRow& r) {
    return {r.t,           r.w2,         r.u2,         r.theta2,          r.grad_w2,      r.grad_u2,
            r.grad_theta2, r.omega2,     r.phi_z2,     r.mean_wtheta2,    r.dz_w2,        r.dz_u2,
            r.dz_theta2,   r.theta_w,    r.omega_phi,  r.mean_defect,     r.div_defect,   r.curl_defect,
            r.omega_phi_defect, r.energy, r.int_feedback, r.int_dissipation, r.int_buoyancy, r.residual,
            r.theta_residual};
}

/// Instantaneous norms of a state (ledger integrals left at zero).
inline DiagnosticsRow measure(const ModelState& s, const Params& p) {
    DiagnosticsRow r;
    r.t = s.t;
    const SpectralField phi = s.phi();
    const Velocity vel = velocity_from_stream(phi);
    r.w2 = norm2(s.w);
    r.u2 = norm2(vel.u) + norm2(vel.v);
    r.theta2 = norm2(s.theta);
    r.grad_w2 = grad_h_norm2(s.w);
    r.grad_u2 = grad_h_norm2(vel.u) + grad_h_norm2(vel.v);
    r.grad_theta2 = grad_h_norm2(s.theta);
    r.omega2 = norm2(s.omega);
    r.phi_z2 = dz_norm2(phi);
    r.mean_wtheta2 = profile_norm2(mean_w_theta(s.w, s.theta, p.dealias), p.L);
    r.dz_w2 = dz_norm2(s.w);
    r.dz_u2 = dz_norm2(vel.u) + dz_norm2(vel.v);
    r.dz_theta2 = dz_norm2(s.theta);
    r.theta_w = inner(s.theta, s.w);
    r.omega_phi = inner(s.omega, phi);

    r.mean_defect = relative_mean_defect(s);
    const double omega_scale = s.omega.max_amplitude();
    if (omega_scale > 0.0) {
        const SpectralField div = dx(vel.u) + dy(vel.v);
        const SpectralField curl = dx(vel.v) - dy(vel.u) - s.omega;
        r.div_defect = div.max_amplitude() / omega_scale;
        r.curl_defect = curl.max_amplitude() / omega_scale;
    }
    if (r.u2 > 0.0) r.omega_phi_defect = std::abs(r.omega_phi - r.u2) / r.u2;
    r.energy = 0.5 * (r.w2 + r.u2 + r.theta2);
    return r;
}

} // namespace rotconv
