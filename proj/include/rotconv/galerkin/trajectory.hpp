#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rotconv/errors.hpp"
#include "rotconv/spectral/field.hpp"

namespace rotconv {

/// A sequence of fields on one grid. Band-limited fields are stored as the
/// j3 >= 0 half of the 2/3 band; the rest is recovered by conjugate symmetry.
/// Fields with energy outside the band fall back to full storage.
class FieldStore {
  public:
    FieldStore() = default;
    explicit FieldStore(GridPtr grid) : grid_(std::move(grid)) {}

    const GridPtr& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    bool compact() const noexcept { return compact_; }

    void push(const SpectralField& f) {
        if (!same_grid(f.grid(), grid_)) throw InvalidInput("FieldStore: field lives on a different grid");
        if (values_.empty()) choose_layout(f);
        std::vector<cplx> v(idx_.size());
        for (std::size_t k = 0; k < idx_.size(); ++k) v[k] = f[idx_[k]];
        if (compact_ && !fits(f)) throw InvalidState("FieldStore: field left the 2/3 band after the first sample");
        values_.push_back(std::move(v));
    }

    SpectralField get(std::size_t k) const {
        if (k >= values_.size()) throw InvalidInput("FieldStore: sample " + std::to_string(k) + " out of range");
        SpectralField out(grid_);
        const auto& v = values_[k];
        const SpectralGrid& g = *grid_;
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            out[idx_[i]] = v[i];
            if (compact_ && g.signed_index(2, g.positions(idx_[i])[2]) > 0) out[g.conjugate_index(idx_[i])] = std::conj(v[i]);
        }
        return out;
    }

  private:
    void choose_layout(const SpectralField& f) {
        const SpectralGrid& g = *grid_;
        compact_ = true;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!g.in_dealias_band(i) && f[i] != cplx{}) compact_ = false;
        idx_.clear();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!compact_ || (g.in_dealias_band(i) && g.signed_index(2, g.positions(i)[2]) >= 0)) idx_.push_back(i);
    }

    bool fits(const SpectralField& f) const {
        const SpectralGrid& g = *grid_;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!g.in_dealias_band(i) && f[i] != cplx{}) return false;
        return true;
    }

    GridPtr grid_;
    bool compact_ = true;
    std::vector<std::size_t> idx_;
    std::vector<std::vector<cplx>> values_;
};

/// Temperature samples at t0 + n dt, n = 0, 1, ...
class TemperatureTrajectory {
  public:
    TemperatureTrajectory() = default;
    TemperatureTrajectory(GridPtr grid, double t0, double dt) : store_(std::move(grid)), t0_(t0), dt_(dt) {
        if (!(dt > 0.0)) throw InvalidInput("trajectory step must be positive");
    }

    void push(const SpectralField& f) { store_.push(f); }
    std::size_t size() const noexcept { return store_.size(); }
    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    double time(std::size_t n) const noexcept { return t0_ + static_cast<double>(n) * dt_; }
    const GridPtr& grid() const noexcept { return store_.grid(); }

    SpectralField at_step(std::size_t n) const { return store_.get(n); }

    /// Linear interpolation between stored samples.
    SpectralField at(double t) const {
        if (store_.empty()) throw InvalidState("empty temperature trajectory");
        const double s = (t - t0_) / dt_;
        const double last = static_cast<double>(size() - 1);
        if (s < -1e-9 || s > last + 1e-9)
            throw InvalidInput("time " + std::to_string(t) + " is outside the stored trajectory");
        const double c = std::clamp(s, 0.0, last);
        const std::size_t n = static_cast<std::size_t>(std::floor(c));
        const double frac = c - static_cast<double>(n);
        if (n + 1 >= size() || frac < 1e-12) return at_step(n);
        SpectralField out = at_step(n) * (1.0 - frac);
        out.axpy(frac, at_step(n + 1));
        return out;
    }

  private:
    FieldStore store_;
    double t0_ = 0.0;
    double dt_ = 1.0;
};

} // namespace rotconv
