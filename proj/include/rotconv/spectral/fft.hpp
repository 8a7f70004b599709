#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "rotconv/spectral/grid.hpp"

namespace rotconv::fft {

using cplx = std::complex<double>;

/// Real-to-complex / complex-to-real 3D plans for one grid shape.
///
/// Plans are created with FFTW_ESTIMATE so the chosen algorithm, and hence the
/// floating-point result, does not depend on timing measurements. Execution
/// uses the new-array interface and is safe from multiple threads.
class Plan {
  public:
    Plan(int nx, int ny, int nz) : nx_(nx), ny_(ny), nz_(nz) {
        const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
        std::vector<double> real(n);
        std::vector<cplx> half(static_cast<std::size_t>(nx) * ny * (nz / 2 + 1));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft_r2c_3d(nx, ny, nz, real.data(), reinterpret_cast<fftw_complex*>(half.data()), flags);
        backward_ = fftw_plan_dft_c2r_3d(nx, ny, nz, reinterpret_cast<fftw_complex*>(half.data()), real.data(), flags);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    std::size_t half_size() const noexcept { return static_cast<std::size_t>(nx_) * ny_ * (nz_ / 2 + 1); }

    /// Unnormalized forward transform of real samples into the half spectrum.
    void forward(std::span<const double> in, std::span<cplx> half) const {
        // r2c does not modify its input with FFTW_ESTIMATE on out-of-place plans
        fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(half.data()));
    }
    /// Unnormalized backward transform; destroys `half`.
    void backward(std::span<cplx> half, std::span<double> out) const {
        fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(half.data()), out.data());
    }

  private:
    int nx_, ny_, nz_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

/// Process-wide plan cache; FFTW's planner is not thread-safe so creation is
/// serialized.
inline const Plan& plan_for(const SpectralGrid& grid) {
    static std::mutex mutex;
    static std::map<std::array<int, 3>, std::unique_ptr<Plan>> cache;
    const std::array<int, 3> key{grid.nx(), grid.ny(), grid.nz()};
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Plan>(key[0], key[1], key[2])).first;
    return *it->second;
}

/// Physical samples -> full Hermitian coefficient array (FFT order), normalized
/// so that f(x) = sum_j c_j e_j(x).
inline void forward(const SpectralGrid& grid, std::span<const double> values, std::span<cplx> coeffs) {
    const Plan& plan = plan_for(grid);
    const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz(), nzh = nz / 2 + 1;
    std::vector<cplx> half(plan.half_size());
    plan.forward(values, half);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (int p1 = 0; p1 < nx; ++p1)
        for (int p2 = 0; p2 < ny; ++p2) {
            const cplx* src = half.data() + (static_cast<std::size_t>(p1) * ny + p2) * nzh;
            cplx* dst = coeffs.data() + grid.flat(p1, p2, 0);
            for (int p3 = 0; p3 < nzh; ++p3) dst[p3] = src[p3] * scale;
        }
    // upper half of j3 from conjugate symmetry
    for (int p1 = 0; p1 < nx; ++p1)
        for (int p2 = 0; p2 < ny; ++p2) {
            const int q1 = (nx - p1) % nx, q2 = (ny - p2) % ny;
            for (int p3 = nzh; p3 < nz; ++p3)
                coeffs[grid.flat(p1, p2, p3)] = std::conj(coeffs[grid.flat(q1, q2, nz - p3)]);
        }
    // the j3 = 0 and Nyquist planes are self-conjugate; symmetrize them exactly
    for (int p3 : {0, nz / 2})
        for (int p1 = 0; p1 < nx; ++p1)
            for (int p2 = 0; p2 < ny; ++p2) {
                const int q1 = (nx - p1) % nx, q2 = (ny - p2) % ny;
                const std::size_t a = grid.flat(p1, p2, p3), b = grid.flat(q1, q2, p3);
                if (a > b) continue;
                const cplx avg = 0.5 * (coeffs[a] + std::conj(coeffs[b]));
                coeffs[a] = avg;
                coeffs[b] = std::conj(avg);
            }
}

/// Full coefficient array -> physical samples. Only the j3 >= 0 half is read;
/// the field is assumed Hermitian.
inline void backward(const SpectralGrid& grid, std::span<const cplx> coeffs, std::span<double> values) {
    const Plan& plan = plan_for(grid);
    const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz(), nzh = nz / 2 + 1;
    std::vector<cplx> half(plan.half_size());
    for (int p1 = 0; p1 < nx; ++p1)
        for (int p2 = 0; p2 < ny; ++p2) {
            const cplx* src = coeffs.data() + grid.flat(p1, p2, 0);
            cplx* dst = half.data() + (static_cast<std::size_t>(p1) * ny + p2) * nzh;
            for (int p3 = 0; p3 < nzh; ++p3) dst[p3] = src[p3];
        }
    plan.backward(half, values);
}

} // namespace rotconv::fft
