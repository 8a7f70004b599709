#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "rotconv/errors.hpp"
#include "rotconv/model/tendency.hpp"

namespace rotconv {

/// Crank-Nicolson / Adams-Bashforth 2 stepper.
///
/// Each diffusive operator is diagonal in coefficient space, so its implicit
/// half is a per-coefficient division. With Coupling::Implicit the vertical
/// coupling pair joins the Crank-Nicolson half as a 2x2 block per mode on
/// (w, omega). The explicit history is owned by the stepper; the first step
/// falls back to forward Euler for the explicit part.
class ImexStepper {
  public:
    ImexStepper(const GridPtr& grid, const Params& p) : params_(p), lin_(*grid, p) {
        const std::size_t n = grid->size();
        for (auto* pair : {&cw_, &co_, &ct_}) {
            pair->a.resize(n);
            pair->b.resize(n);
        }
        auto fill = [&](Coeffs& c, const std::vector<double>& lam) {
            for (std::size_t i = 0; i < n; ++i) {
                const double denom = 1.0 - 0.5 * p.dt * lam[i];
                c.a[i] = (1.0 + 0.5 * p.dt * lam[i]) / denom;
                c.b[i] = p.dt / denom;
            }
        };
        fill(cw_, lin_.w);
        fill(co_, lin_.omega);
        fill(ct_, lin_.theta);
        if (p.coupling == Coupling::Implicit) build_blocks(*grid);
    }

    const Params& params() const noexcept { return params_; }
    const LinearMultipliers& multipliers() const noexcept { return lin_; }
    std::size_t steps_taken() const noexcept { return steps_; }
    bool has_history() const noexcept { return history_.has_value(); }
    const std::optional<FieldTriple>& history() const noexcept { return history_; }
    void restore_history(std::optional<FieldTriple> h) { history_ = std::move(h); }
    void reset() noexcept {
        history_.reset();
        steps_ = 0;
    }

    /// Advances by dt using the given explicit tendency.
    ModelState advance(const ModelState& s, FieldTriple explicit_now) {
        ModelState next;
        next.t = s.t + params_.dt;
        const double c1 = history_ ? 1.5 : 1.0;
        const double c0 = history_ ? -0.5 : 0.0;
        if (blocks_.empty()) {
            next.w = update(s.w, explicit_now.w, history_ ? &history_->w : nullptr, cw_, c1, c0);
            next.omega = update(s.omega, explicit_now.omega, history_ ? &history_->omega : nullptr, co_, c1, c0);
        } else {
            update_coupled(s, explicit_now, c1, c0, next);
        }
        next.theta = update(s.theta, explicit_now.theta, history_ ? &history_->theta : nullptr, ct_, c1, c0);
        history_ = std::move(explicit_now);
        ++steps_;
        next.for_each_field([&](const char* name, const SpectralField& f) {
            if (!f.all_finite()) throw BlowUp(steps_, name);
        });
        return next;
    }

    /// Explicit tendency in the form this stepper expects.
    FieldTriple explicit_part(const ModelState& s, ExplicitOptions opt = {}) const {
        opt.skip_coupling = !blocks_.empty();
        return explicit_tendency(s, params_, opt);
    }

    /// Advances the full model by dt.
    ModelState step(const ModelState& s) { return advance(s, explicit_part(s)); }

  private:
    struct Coeffs {
        std::vector<double> a;
        std::vector<double> b;
    };

    // x_{n+1} = A x_n + B r for x = (w, omega), r the extrapolated explicit part
    struct Block {
        cplx a[2][2];
        cplx b[2][2];
    };

    void build_blocks(const SpectralGrid& g) {
        const double h = 0.5 * params_.dt;
        const cplx I(0.0, 1.0);
        blocks_.resize(g.size());
        for (int p1 = 0; p1 < g.nx(); ++p1)
            for (int p2 = 0; p2 < g.ny(); ++p2) {
                const double kh2 = g.kh2(p1, p2);
                for (int p3 = 0; p3 < g.nz(); ++p3) {
                    const std::size_t i = g.flat(p1, p2, p3);
                    const double kz = g.k_deriv(2, p3);
                    // d_z phi = i k_z omega / |k_h|^2,  d_z w = i k_z w
                    const double cw = kh2 == 0.0 ? 0.0 : kz / kh2;
                    const double co = kh2 == 0.0 ? 0.0 : kz;
                    const double lw = lin_.w[i], lo = lin_.omega[i];
                    const double det = (1.0 - h * lw) * (1.0 - h * lo) + h * h * cw * co;
                    const cplx inv[2][2] = {{(1.0 - h * lo) / det, I * h * cw / det},
                                            {I * h * co / det, (1.0 - h * lw) / det}};
                    const cplx fwd[2][2] = {{1.0 + h * lw, I * h * cw}, {I * h * co, 1.0 + h * lo}};
                    Block& bl = blocks_[i];
                    for (int r = 0; r < 2; ++r)
                        for (int c = 0; c < 2; ++c) {
                            bl.a[r][c] = inv[r][0] * fwd[0][c] + inv[r][1] * fwd[1][c];
                            bl.b[r][c] = params_.dt * inv[r][c];
                        }
                }
            }
    }

    void update_coupled(const ModelState& s, const FieldTriple& now, double c1, double c0, ModelState& next) const {
        const SpectralGrid& g = s.w.g();
        next.w = SpectralField(s.w.grid());
        next.omega = SpectralField(s.w.grid());
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx rw = c1 * now.w[i], ro = c1 * now.omega[i];
            if (history_) {
                rw += c0 * history_->w[i];
                ro += c0 * history_->omega[i];
            }
            const Block& bl = blocks_[i];
            const cplx w0 = s.w[i], o0 = s.omega[i];
            next.w[i] = bl.a[0][0] * w0 + bl.a[0][1] * o0 + bl.b[0][0] * rw + bl.b[0][1] * ro;
            next.omega[i] = bl.a[1][0] * w0 + bl.a[1][1] * o0 + bl.b[1][0] * rw + bl.b[1][1] * ro;
        }
        for (int p3 = 0; p3 < g.nz(); ++p3) {
            next.w[g.flat(0, 0, p3)] = 0.0;
            next.omega[g.flat(0, 0, p3)] = 0.0;
        }
    }

    static SpectralField update(const SpectralField& f, const SpectralField& n_now, const SpectralField* n_prev,
                                const Coeffs& c, double c1, double c0) {
        const SpectralGrid& g = f.g();
        SpectralField out(f.grid());
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx rhs = c1 * n_now[i];
            if (n_prev) rhs += c0 * (*n_prev)[i];
            out[i] = c.a[i] * f[i] + c.b[i] * rhs;
        }
        // horizontal means stay pinned to zero
        for (int p3 = 0; p3 < g.nz(); ++p3) out[g.flat(0, 0, p3)] = 0.0;
        return out;
    }

    Params params_;
    LinearMultipliers lin_;
    Coeffs cw_, co_, ct_;
    std::vector<Block> blocks_;
    std::optional<FieldTriple> history_;
    std::size_t steps_ = 0;
};

/// One step of the full model. `history` holds the previous explicit tendency
/// (empty before the first step) and is replaced by the current one.
inline ModelState step(const ModelState& s, const Params& p, std::optional<FieldTriple>& history) {
    ImexStepper stepper(s.grid(), p);
    stepper.restore_history(std::move(history));
    ModelState next = stepper.step(s);
    history = stepper.history();
    return next;
}

} // namespace rotconv
