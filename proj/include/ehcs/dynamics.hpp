#pragma once

// Time evolution under H = (P^2/2 - mu) sigma3 + Delta(Q) sigma1 on a grid,
// Strang split into a pointwise pairing rotation and a diagonal kinetic
// phase in momentum space.

#include <ehcs/closed_forms.hpp>
#include <ehcs/grid.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

namespace ehcs {

struct PairPotential {
    enum class Kind { constant, step, linear };

    Kind kind = Kind::constant;
    double delta0 = 0.0;
    double nu = 0.0; // slope for the linear kind

    static PairPotential constant(double d) { return {Kind::constant, d, 0.0}; }
    static PairPotential step(double d) { return {Kind::step, d, 0.0}; }
    static PairPotential linear(double slope) { return {Kind::linear, 0.0, slope}; }

    double operator()(double q) const
    {
        switch (kind) {
        case Kind::constant: return delta0;
        case Kind::step: return q > 0.0 ? delta0 : 0.0;
        case Kind::linear: return q > 0.0 ? nu * q : 0.0;
        }
        return 0.0;
    }
};

/// Initial grid state for an eh, product or standard label.
/// eh: psi_e = c+ <x|alpha>, psi_h = c- <x|alpha*>; product: both carry <x|alpha>.
inline GridSpinor init_wavepacket(const CoherentLabel& L, const Grid1D& grid, double edge_margin = 6.0)
{
    grid.validate();
    if (!L.normalized) throw ValidationError("init_wavepacket needs a normalized label");
    if (L.flavor == Flavor::spin) throw ValidationError("spin labels carry no spatial wave packet");
    const double q = L.q();
    const double v = L.v();
    if (q - grid.q_min < edge_margin || grid.q_max - q < edge_margin)
        throw ValidationError("wave packet centre q = " + std::to_string(q) + " is closer than " +
                              std::to_string(edge_margin) + " to the grid edge");
    if (std::abs(v) + edge_margin > grid.k_nyquist())
        throw ValidationError("velocity " + std::to_string(v) + " is not resolved by the grid spacing");

    const Beta beta = (L.flavor == Flavor::standard) ? Beta(0.0) : L.beta;
    GridSpinor psi(grid);
    if (L.flavor == Flavor::eh) {
        const auto [cp, cm] = beta.conj().spin_weights();
        for (std::size_t j = 0; j < grid.n_points; ++j) {
            const cplx phi = coherent_wavefunction(L.alpha, grid.q(j));
            psi.e[j] = cp * phi;
            psi.h[j] = cm * std::conj(phi);
        }
    } else {
        const auto [cp, cm] = beta.spin_weights();
        for (std::size_t j = 0; j < grid.n_points; ++j) {
            const cplx phi = coherent_wavefunction(L.alpha, grid.q(j));
            psi.e[j] = cp * phi;
            psi.h[j] = cm * phi;
        }
    }
    psi.normalize();
    return psi;
}

struct GridObservables {
    double norm2 = 0.0;
    double Q = 0.0, P = 0.0, V = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0;
    double varQ = 0.0;
    double P_sigma2 = 0.0; // <P sigma2>
    double energy = 0.0;   // <H>
};

/// Expectation values on the grid. P acts spectrally.
class ObservableProbe {
public:
    ObservableProbe(const Grid1D& grid, PairPotential pot, double mu) : grid_(grid), pot_(pot), mu_(mu), fft_(grid.n_points)
    {
    }

    GridObservables operator()(const GridSpinor& psi)
    {
        const std::size_t n = grid_.n_points;
        const double dq = grid_.dq();
        GridObservables o;
        double q1 = 0.0, q2 = 0.0, pair = 0.0;
        cplx eh = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = grid_.q(j);
            const double w = std::norm(psi.e[j]) + std::norm(psi.h[j]);
            o.norm2 += w;
            q1 += x * w;
            q2 += x * x * w;
            o.sigma3 += std::norm(psi.e[j]) - std::norm(psi.h[j]);
            const cplx c = std::conj(psi.e[j]) * psi.h[j];
            eh += c;
            pair += pot_(x) * 2.0 * c.real();
        }
        o.norm2 *= dq;
        o.Q = q1 * dq;
        o.varQ = q2 * dq - o.Q * o.Q;
        o.sigma3 *= dq;
        o.sigma1 = 2.0 * eh.real() * dq;
        o.sigma2 = 2.0 * eh.imag() * dq;

        // Momentum space: <f|g> = (dq / n) sum_k f_k* g_k for unnormalized forward transforms.
        std::vector<cplx> ek = psi.e;
        std::vector<cplx> hk = psi.h;
        fft_.forward(ek);
        fft_.forward(hk);
        const double wk = dq / static_cast<double>(n);
        double pe = 0.0, ph = 0.0, kin = 0.0;
        cplx ps2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double k = grid_.k(j);
            pe += k * std::norm(ek[j]);
            ph += k * std::norm(hk[j]);
            kin += (0.5 * k * k - mu_) * (std::norm(ek[j]) - std::norm(hk[j]));
            // sigma2 = [[0, -i], [i, 0]]: <P sigma2> = sum k (-i e* h + i h* e)
            ps2 += k * (cplx(0.0, -1.0) * std::conj(ek[j]) * hk[j] + cplx(0.0, 1.0) * std::conj(hk[j]) * ek[j]);
        }
        o.P = (pe + ph) * wk;
        o.V = (pe - ph) * wk;
        o.P_sigma2 = ps2.real() * wk;
        o.energy = kin * wk + pair * dq;
        return o;
    }

private:
    Grid1D grid_;
    PairPotential pot_;
    double mu_;
    Fft fft_;
};

/// Strang-split propagator for a fixed time step.
class SplitStepEvolver {
public:
    SplitStepEvolver(const Grid1D& grid, PairPotential pot, double mu, double dt)
        : grid_(grid), fft_(grid.n_points), dt_(dt)
    {
        grid.validate();
        if (!(dt > 0.0)) throw ValidationError("dt must be positive");
        const std::size_t n = grid.n_points;
        half_cos_.resize(n);
        half_sin_.resize(n);
        kin_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double theta = 0.5 * dt * pot(grid.q(j));
            half_cos_[j] = std::cos(theta);
            half_sin_[j] = std::sin(theta);
            const double k = grid.k(j);
            kin_[j] = std::exp(cplx(0.0, -dt * (0.5 * k * k - mu)));
        }
    }

    double dt() const { return dt_; }

    void step(GridSpinor& psi)
    {
        pairing(psi);
        fft_.forward(psi.e);
        fft_.forward(psi.h);
        for (std::size_t j = 0; j < psi.e.size(); ++j) {
            psi.e[j] *= kin_[j];
            psi.h[j] *= std::conj(kin_[j]);
        }
        fft_.backward(psi.e);
        fft_.backward(psi.h);
        pairing(psi);
    }

    /// Fraction of |psi|^2 in the outer eighth of the spectrum on each side.
    double edge_spectral_weight(const GridSpinor& psi)
    {
        std::vector<cplx> ek = psi.e, hk = psi.h;
        fft_.forward(ek);
        fft_.forward(hk);
        double edge = 0.0, total = 0.0;
        const double kcut = 0.75 * grid_.k_nyquist();
        for (std::size_t j = 0; j < ek.size(); ++j) {
            const double w = std::norm(ek[j]) + std::norm(hk[j]);
            total += w;
            if (std::abs(grid_.k(j)) > kcut) edge += w;
        }
        return total > 0.0 ? edge / total : 0.0;
    }

private:
    // exp(-i dt/2 Delta sigma1) = cos - i sin sigma1
    void pairing(GridSpinor& psi) const
    {
        const cplx mi(0.0, -1.0);
        for (std::size_t j = 0; j < psi.e.size(); ++j) {
            const cplx e = psi.e[j];
            const cplx h = psi.h[j];
            psi.e[j] = half_cos_[j] * e + mi * half_sin_[j] * h;
            psi.h[j] = half_cos_[j] * h + mi * half_sin_[j] * e;
        }
    }

    Grid1D grid_;
    Fft fft_;
    double dt_;
    std::vector<double> half_cos_, half_sin_;
    std::vector<cplx> kin_;
};

inline constexpr double kSpectralEdgeTol = 1e-10;

inline GridSpinor evolve(GridSpinor psi, PairPotential pot, double mu, double dt, std::size_t n_steps,
                         Diagnostics* diag = nullptr)
{
    SplitStepEvolver ev(psi.grid, pot, mu, dt);
    if (ev.edge_spectral_weight(psi) > kSpectralEdgeTol)
        warn(diag, "initial state has spectral weight near the grid Nyquist wavenumber");
    for (std::size_t s = 0; s < n_steps; ++s) ev.step(psi);
    if (ev.edge_spectral_weight(psi) > kSpectralEdgeTol)
        warn(diag, "evolved state reaches the grid Nyquist wavenumber");
    return psi;
}

struct ObservableTrace {
    std::vector<double> times, Q, P, V, sigma1, sigma2, sigma3, varQ;
    std::vector<double> energy, P_sigma2, norm2;

    void push(double t, const GridObservables& o)
    {
        times.push_back(t);
        Q.push_back(o.Q);
        P.push_back(o.P);
        V.push_back(o.V);
        sigma1.push_back(o.sigma1);
        sigma2.push_back(o.sigma2);
        sigma3.push_back(o.sigma3);
        varQ.push_back(o.varQ);
        energy.push_back(o.energy);
        P_sigma2.push_back(o.P_sigma2);
        norm2.push_back(o.norm2);
    }

    std::size_t size() const { return times.size(); }
};

/// Records grid expectations at t = 0 and after every step.
inline ObservableTrace observable_trace(GridSpinor psi, PairPotential pot, double mu, double dt,
                                        std::size_t n_steps, Diagnostics* diag = nullptr)
{
    SplitStepEvolver ev(psi.grid, pot, mu, dt);
    ObservableProbe probe(psi.grid, pot, mu);
    if (ev.edge_spectral_weight(psi) > kSpectralEdgeTol)
        warn(diag, "initial state has spectral weight near the grid Nyquist wavenumber");
    ObservableTrace tr;
    tr.push(0.0, probe(psi));
    for (std::size_t s = 1; s <= n_steps; ++s) {
        ev.step(psi);
        tr.push(dt * static_cast<double>(s), probe(psi));
    }
    return tr;
}

inline void write_csv(std::ostream& os, const ObservableTrace& tr)
{
    os << "t,Q,P,V,s1,s2,s3,varQ\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < tr.size(); ++i)
        os << tr.times[i] << ',' << tr.Q[i] << ',' << tr.P[i] << ',' << tr.V[i] << ',' << tr.sigma1[i] << ','
           << tr.sigma2[i] << ',' << tr.sigma3[i] << ',' << tr.varQ[i] << '\n';
}

// ---------------------------------------------------------------------------
// Short-time analysis

/// Least-squares fit of y(t) - intercept = sum_p c_p t^p over t <= t_max.
/// Returns the coefficients in the order of `powers`.
inline std::vector<double> fit_powers(const std::vector<double>& t, const std::vector<double>& y, double t_max,
                                      double intercept, const std::vector<int>& powers)
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] <= t_max + 1e-12) rows.push_back(i);
    if (rows.size() < powers.size() + 1) throw ValidationError("not enough samples for the short-time fit");
    Eigen::MatrixXd A(rows.size(), powers.size());
    Eigen::VectorXd b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < powers.size(); ++c) A(r, c) = std::pow(t[rows[r]], powers[c]);
        b(r) = y[rows[r]] - intercept;
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    return {x.data(), x.data() + x.size()};
}

struct DispersionFit {
    double quadratic = 0.0; // coefficient of t^2 in Var[Q](t)
    double linear = 0.0;
    double dQdt0 = 0.0;     // one-sided second-order difference at t = 0
    double V0 = 0.0;
};

/// Fits Var[Q](t) = 1/2 + sum_{p=1..6} c_p t^p on [0, t_max]. The higher powers
/// absorb the quasi-spin rotation, which is not slow on this window when
/// |P^2/2 - mu| is of order one.
inline DispersionFit dispersion_fit(const ObservableTrace& tr, double t_max = 0.2)
{
    if (tr.size() < 3) throw ValidationError("trace too short");
    const auto c = fit_powers(tr.times, tr.varQ, t_max, 0.5, {1, 2, 3, 4, 5, 6});
    DispersionFit f;
    f.linear = c[0];
    f.quadratic = c[1];
    const double dt = tr.times[1] - tr.times[0];
    f.dQdt0 = (-3.0 * tr.Q[0] + 4.0 * tr.Q[1] - tr.Q[2]) / (2.0 * dt);
    f.V0 = tr.V[0];
    return f;
}

/// Predicted t^2 coefficient of Var[Q]: Var[V] of the initial label.
inline double predicted_dispersion(const CoherentLabel& L)
{
    if (L.flavor == Flavor::eh) return 0.5;
    const double v = L.v();
    const Beta beta = (L.flavor == Flavor::standard) ? Beta(0.0) : L.beta;
    return 0.5 * (1.0 + 2.0 * v * v * beta.mixing());
}

} // namespace ehcs
