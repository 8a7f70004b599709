#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rotconv/errors.hpp"
#include "rotconv/spectral/fft.hpp"
#include "rotconv/spectral/grid.hpp"

namespace rotconv {

using cplx = std::complex<double>;

/// Real samples of a periodic field at the grid's collocation points.
class GridValues {
  public:
    GridValues() = default;
    explicit GridValues(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
    GridValues(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->size())
            throw InvalidInput("grid sample count " + std::to_string(values_.size()) + " does not match grid " +
                               grid_->describe());
    }

    /// Samples f(x_i, y_j, z_k).
    static GridValues sample(GridPtr grid, const std::function<double(double, double, double)>& f) {
        GridValues g(grid);
        for (int i = 0; i < grid->nx(); ++i)
            for (int j = 0; j < grid->ny(); ++j)
                for (int k = 0; k < grid->nz(); ++k) g.values_[grid->flat(i, j, k)] = f(grid->x(i), grid->y(j), grid->z(k));
        return g;
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator()(int i, int j, int k) const noexcept { return values_[grid_->flat(i, j, k)]; }
    double& operator()(int i, int j, int k) noexcept { return values_[grid_->flat(i, j, k)]; }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// A real periodic field held as its full Hermitian coefficient array.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(GridPtr grid) : grid_(std::move(grid)), coeffs_(grid_->size(), cplx{}) {}
    SpectralField(GridPtr grid, std::vector<cplx> coeffs) : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != grid_->size())
            throw InvalidInput("coefficient count " + std::to_string(coeffs_.size()) + " does not match grid " +
                               grid_->describe());
    }

    /// A real field with a single Fourier pair: amp * cos(k.x) ("cos") or amp * sin(k.x) ("sin").
    static SpectralField mode(GridPtr grid, const Wavevector& j, double amp = 1.0, bool sine = false) {
        SpectralField f(grid);
        if (!grid->contains(j)) throw InvalidInput("wavevector outside the grid's index set");
        const Wavevector mj{-j[0], -j[1], -j[2]};
        if (!grid->contains(mj)) throw InvalidInput("conjugate wavevector outside the grid's index set (Nyquist mode)");
        const std::size_t a = grid->index_of(j), b = grid->index_of(mj);
        if (a == b) {
            if (!sine) f.coeffs_[a] = amp;
            return f;
        }
        // cos = (e + e*)/2, sin = (e - e*)/(2i)
        const cplx c = sine ? cplx(0.0, -0.5 * amp) : cplx(0.5 * amp, 0.0);
        f.coeffs_[a] += c;
        f.coeffs_[b] += std::conj(c);
        return f;
    }

    bool empty() const noexcept { return !grid_; }
    const GridPtr& grid() const noexcept { return grid_; }
    const SpectralGrid& g() const noexcept { return *grid_; }
    std::span<const cplx> coeffs() const noexcept { return coeffs_; }
    std::span<cplx> coeffs() noexcept { return coeffs_; }
    const cplx& operator[](std::size_t i) const noexcept { return coeffs_[i]; }
    cplx& operator[](std::size_t i) noexcept { return coeffs_[i]; }
    cplx at(const Wavevector& j) const { return coeffs_[grid_->index_of(j)]; }

    double max_amplitude() const noexcept {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }
    bool all_finite() const noexcept {
        return std::all_of(coeffs_.begin(), coeffs_.end(),
                           [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
    }
    /// Largest |c(-j) - conj(c(j))|.
    double hermitian_defect() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            m = std::max(m, std::abs(coeffs_[grid_->conjugate_index(i)] - std::conj(coeffs_[i])));
        return m;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double s) noexcept {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
    SpectralField operator-() const { return -1.0 * *this; }

    /// this += s * o
    SpectralField& axpy(double s, const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
        return *this;
    }

    void check_same(const SpectralField& o) const {
        if (!same_grid(grid_, o.grid_)) throw InvalidInput("fields live on different grids");
    }

  private:
    GridPtr grid_;
    std::vector<cplx> coeffs_;
};

/// A function of z only, sampled at the Nz vertical collocation points.
struct ZProfile {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t k) const noexcept { return values[k]; }
    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline SpectralField to_coefficients(const GridValues& v) {
    if (!v.grid()) throw InvalidInput("grid samples carry no grid");
    SpectralField f(v.grid());
    fft::forward(*v.grid(), v.values(), f.coeffs());
    return f;
}

/// Checked variant for raw sample arrays.
inline SpectralField to_coefficients(const GridPtr& grid, std::span<const double> values) {
    if (values.size() != grid->size())
        throw InvalidInput("grid sample count " + std::to_string(values.size()) + " does not match grid " +
                           grid->describe());
    SpectralField f(grid);
    fft::forward(*grid, values, f.coeffs());
    return f;
}

inline GridValues from_coefficients(const SpectralField& f) {
    GridValues v(f.grid());
    fft::backward(f.g(), f.coeffs(), v.values());
    return v;
}

} // namespace rotconv
