#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "rotconv/errors.hpp"

namespace rotconv {

/// Integer wavevector j = (j1, j2, j3).
using Wavevector = std::array<int, 3>;

/// Fourier mode grid for periodic fields on [0,L]^2 x [0,1].
///
/// Coefficients are stored over the full index set j_d in [-N_d/2, N_d/2) in
/// FFT order (non-negative indices first), flattened row-major with j3 the
/// fastest-varying index. Collocation points are x_i = i L / Nx, y_i = i L / Ny,
/// z_k = k / Nz, with the same row-major layout.
class SpectralGrid {
  public:
    SpectralGrid(double L, int nx, int ny, int nz) : L_(L), n_{nx, ny, nz} {
        if (!(L > 0.0) || !std::isfinite(L))
            throw InvalidInput("grid period L must be positive and finite, got " + std::to_string(L));
        for (int d = 0; d < 3; ++d) {
            if (n_[d] < 4 || n_[d] % 2 != 0)
                throw InvalidInput("grid mode counts must be even and >= 4, got N" + std::string(1, "xyz"[d]) + "=" +
                                   std::to_string(n_[d]));
        }
        const double two_pi = 2.0 * std::numbers::pi;
        for (int d = 0; d < 3; ++d) {
            const double period = d < 2 ? L_ : 1.0;
            k_[d].resize(n_[d]);
            kd_[d].resize(n_[d]);
            for (int p = 0; p < n_[d]; ++p) {
                const int j = signed_index(d, p);
                k_[d][p] = two_pi * j / period;
                kd_[d][p] = (j == -n_[d] / 2) ? 0.0 : k_[d][p];
            }
        }
    }

    static std::shared_ptr<const SpectralGrid> make(double L, int nx, int ny, int nz) {
        return std::make_shared<const SpectralGrid>(L, nx, ny, nz);
    }

    double L() const noexcept { return L_; }
    int nx() const noexcept { return n_[0]; }
    int ny() const noexcept { return n_[1]; }
    int nz() const noexcept { return n_[2]; }
    int n(int dim) const noexcept { return n_[dim]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]; }

    /// Poincare constant L^2 / (4 pi^2).
    double gamma() const noexcept { return L_ * L_ / (4.0 * std::numbers::pi * std::numbers::pi); }
    double volume() const noexcept { return L_ * L_; }
    double cell_volume() const noexcept { return volume() / static_cast<double>(size()); }
    double dx() const noexcept { return L_ / n_[0]; }
    double dy() const noexcept { return L_ / n_[1]; }
    double dz() const noexcept { return 1.0 / n_[2]; }

    int signed_index(int dim, int pos) const noexcept { return pos < n_[dim] / 2 ? pos : pos - n_[dim]; }
    int position(int dim, int j) const noexcept { return j >= 0 ? j : j + n_[dim]; }

    std::size_t flat(int p1, int p2, int p3) const noexcept {
        return (static_cast<std::size_t>(p1) * n_[1] + p2) * n_[2] + p3;
    }
    std::array<int, 3> positions(std::size_t idx) const noexcept {
        const int p3 = static_cast<int>(idx % n_[2]);
        const std::size_t r = idx / n_[2];
        return {static_cast<int>(r / n_[1]), static_cast<int>(r % n_[1]), p3};
    }
    Wavevector wavevector(std::size_t idx) const noexcept {
        const auto p = positions(idx);
        return {signed_index(0, p[0]), signed_index(1, p[1]), signed_index(2, p[2])};
    }
    /// True if j lies in the stored index set.
    bool contains(const Wavevector& j) const noexcept {
        for (int d = 0; d < 3; ++d)
            if (j[d] < -n_[d] / 2 || j[d] >= n_[d] / 2) return false;
        return true;
    }
    std::size_t index_of(const Wavevector& j) const noexcept {
        return flat(position(0, j[0]), position(1, j[1]), position(2, j[2]));
    }
    /// Flat index of -j (mod N in each direction).
    std::size_t conjugate_index(std::size_t idx) const noexcept {
        const auto p = positions(idx);
        return flat((n_[0] - p[0]) % n_[0], (n_[1] - p[1]) % n_[1], (n_[2] - p[2]) % n_[2]);
    }

    /// Wavenumber 2 pi j / period, exact per index.
    double k(int dim, int pos) const noexcept { return k_[dim][pos]; }
    /// Wavenumber used by first derivatives: zero on the Nyquist index.
    double k_deriv(int dim, int pos) const noexcept { return kd_[dim][pos]; }
    double kh2(int p1, int p2) const noexcept { return k_[0][p1] * k_[0][p1] + k_[1][p2] * k_[1][p2]; }

    /// Two-thirds rule: retained iff 3|j_d| < N_d in every direction.
    bool in_dealias_band(int dim, int pos) const noexcept { return 3 * std::abs(signed_index(dim, pos)) < n_[dim]; }
    bool in_dealias_band(std::size_t idx) const noexcept {
        const auto p = positions(idx);
        return in_dealias_band(0, p[0]) && in_dealias_band(1, p[1]) && in_dealias_band(2, p[2]);
    }
    bool is_nyquist(int dim, int pos) const noexcept { return signed_index(dim, pos) == -n_[dim] / 2; }

    double x(int i) const noexcept { return i * dx(); }
    double y(int i) const noexcept { return i * dy(); }
    double z(int i) const noexcept { return i * dz(); }

    bool operator==(const SpectralGrid& o) const noexcept { return L_ == o.L_ && n_ == o.n_; }

    std::string describe() const {
        return std::to_string(n_[0]) + "x" + std::to_string(n_[1]) + "x" + std::to_string(n_[2]) +
               " (L=" + std::to_string(L_) + ")";
    }

  private:
    double L_;
    std::array<int, 3> n_;
    std::array<std::vector<double>, 3> k_;
    std::array<std::vector<double>, 3> kd_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline bool same_grid(const GridPtr& a, const GridPtr& b) noexcept { return a == b || (a && b && *a == *b); }

} // namespace rotconv
