#pragma once

// Uniform periodic position grid, two-component wave functions on it, and
// an FFTW-backed spectral transform.

#include <ehcs/fock.hpp>

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <string>
#include <vector>

namespace ehcs {

struct Grid1D {
    double q_min = -32.0;
    double q_max = 32.0;
    std::size_t n_points = 1024;

    double length() const { return q_max - q_min; }
    double dq() const { return length() / static_cast<double>(n_points); }
    double q(std::size_t j) const { return q_min + dq() * static_cast<double>(j); }

    /// Angular wavenumber of FFT bin j.
    double k(std::size_t j) const
    {
        const auto n = static_cast<long>(n_points);
        const long jj = static_cast<long>(j) < n / 2 ? static_cast<long>(j) : static_cast<long>(j) - n;
        return 2.0 * M_PI * static_cast<double>(jj) / length();
    }
    double k_nyquist() const { return M_PI / dq(); }

    void validate() const
    {
        if (n_points < 256 || (n_points & (n_points - 1)) != 0)
            throw ValidationError("grid n_points must be a power of two and at least 256, got " +
                                  std::to_string(n_points));
        if (!(q_max > q_min)) throw ValidationError("grid needs q_max > q_min");
    }

    /// Index of the grid point nearest to q (clamped).
    std::size_t index_of(double x) const
    {
        const double j = std::round((x - q_min) / dq());
        if (j <= 0.0) return 0;
        if (j >= static_cast<double>(n_points - 1)) return n_points - 1;
        return static_cast<std::size_t>(j);
    }
};

struct GridSpinor {
    Grid1D grid;
    std::vector<cplx> e; // electron component psi_e(q_j)
    std::vector<cplx> h; // hole component psi_h(q_j)

    GridSpinor() = default;
    explicit GridSpinor(const Grid1D& g) : grid(g), e(g.n_points, 0.0), h(g.n_points, 0.0) {}

    double norm2() const
    {
        double s = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) s += std::norm(e[j]) + std::norm(h[j]);
        return s * grid.dq();
    }

    void normalize()
    {
        const double n = std::sqrt(norm2());
        if (n == 0.0) throw ValidationError("cannot normalize a zero grid state");
        for (auto& c : e) c /= n;
        for (auto& c : h) c /= n;
    }
};

/// In-place forward/backward complex DFT of a fixed length. Not copyable.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n)
    {
        buf_ = fftw_alloc_complex(n);
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    std::size_t size() const { return n_; }

    /// x_k = sum_j x_j e^{-2 pi i jk/n}.
    void forward(std::vector<cplx>& x) { run(fwd_, x, 1.0); }
    /// Inverse of forward (includes the 1/n).
    void backward(std::vector<cplx>& x) { run(bwd_, x, 1.0 / static_cast<double>(n_)); }

private:
    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    void run(fftw_plan p, std::vector<cplx>& x, double scale)
    {
        if (x.size() != n_) throw ValidationError("FFT length mismatch");
        auto* raw = reinterpret_cast<fftw_complex*>(x.data());
        for (std::size_t j = 0; j < n_; ++j) {
            buf_[j][0] = raw[j][0];
            buf_[j][1] = raw[j][1];
        }
        fftw_execute(p);
        for (std::size_t j = 0; j < n_; ++j) x[j] = cplx(buf_[j][0], buf_[j][1]) * scale;
    }

    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// <x|alpha> = pi^{-1/4} exp(-(x - q)^2/2 + i v x - i q v / 2), alpha = (q + i v)/sqrt2.
inline cplx coherent_wavefunction(cplx alpha, double x)
{
    const double q = std::sqrt(2.0) * alpha.real();
    const double v = std::sqrt(2.0) * alpha.imag();
    const double d = x - q;
    return std::pow(M_PI, -0.25) * std::exp(cplx(-0.5 * d * d, v * x - 0.5 * q * v));
}

/// Samples sum_n c_n <x|n> on the grid with the Hermite-function recurrence.
inline std::vector<cplx> fock_to_grid(const FockVector& c, const Grid1D& grid)
{
    std::vector<cplx> out(grid.n_points, 0.0);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double x = grid.q(j);
        double prev = 0.0;
        double cur = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
        cplx s = c[0] * cur;
        for (std::size_t n = 0; n < c.cutoff(); ++n) {
            const double next = std::sqrt(2.0 / (n + 1.0)) * x * cur - std::sqrt(n / (n + 1.0)) * prev;
            prev = cur;
            cur = next;
            s += c[n + 1] * cur;
        }
        out[j] = s;
    }
    return out;
}

inline GridSpinor fock_to_grid(const SpinorFockState& x, const Grid1D& grid)
{
    grid.validate();
    GridSpinor g(grid);
    g.e = fock_to_grid(x.e, grid);
    g.h = fock_to_grid(x.h, grid);
    return g;
}

} // namespace ehcs
