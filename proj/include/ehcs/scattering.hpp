#pragma once

// Stationary BdG scattering off a normal/superconductor interface at q = 0.
// Normal side (q < 0): incoming electron e^{i k_e q}, reflected electron
// r_ee e^{-i k_e q}, Andreev hole r_eh e^{i k_h q}. Superconducting side:
// two bounded (or outgoing) modes. Solutions carry unit incoming amplitude
// and are not normalized.

#include <ehcs/dynamics.hpp>
#include <ehcs/errors.hpp>
#include <ehcs/grid.hpp>
#include <ehcs/parallel.hpp>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace ehcs {

inline constexpr double kSingularCondition = 1e12;

/// Null vector of [[xi - E, d], [d, -xi - E]], i.e. the (e, h) spinor of a
/// mode with kinetic energy xi; unit norm.
inline Eigen::Vector2cd bdg_spinor(cplx xi, double E, double d)
{
    Eigen::Vector2cd a(d, E - xi);
    Eigen::Vector2cd b(E + xi, d);
    if (std::max(a.norm(), b.norm()) == 0.0) throw SingularMatching("degenerate modes at E = delta0 = 0", std::numeric_limits<double>::infinity());
    return (a.norm() >= b.norm() ? a : b).normalized();
}

struct ModeSet {
    double E = 0.0, mu = 0.0, delta0 = 0.0;
    double k_e = 0.0;
    cplx k_h;                   // real below mu, -i sqrt(2(E - mu)) above
    cplx kappa_plus, kappa_minus;
    Eigen::Vector2cd spinor_plus, spinor_minus;
    bool propagating_plus = false, propagating_minus = false;

    bool subgap() const { return E < delta0; }
    bool hole_propagates() const { return k_h.imag() == 0.0; }
};

inline cplx normal_hole_wavevector(double E, double mu)
{
    return E < mu ? cplx(std::sqrt(2.0 * (mu - E)), 0.0) : cplx(0.0, -std::sqrt(2.0 * (E - mu)));
}

inline ModeSet step_modes(double E, double mu, double delta0)
{
    if (!(E >= 0.0)) throw ValidationError("scattering energy must be >= 0");
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    if (!(delta0 >= 0.0)) throw ValidationError("delta0 must be >= 0");
    ModeSet m;
    m.E = E;
    m.mu = mu;
    m.delta0 = delta0;
    m.k_e = std::sqrt(2.0 * (mu + E));
    m.k_h = normal_hole_wavevector(E, mu);
    cplx xi_p, xi_m;
    if (E < delta0) {
        const double w = std::sqrt(delta0 * delta0 - E * E);
        m.kappa_plus = std::sqrt(cplx(2.0 * mu, 2.0 * w));
        m.kappa_minus = -std::conj(m.kappa_plus);
        xi_p = cplx(0.0, w);
        xi_m = cplx(0.0, -w);
    } else {
        // positive group velocity xi k / E for the propagating branches
        const double w = std::sqrt(E * E - delta0 * delta0);
        m.kappa_plus = std::sqrt(2.0 * (mu + w));
        m.propagating_plus = true;
        if (w < mu) {
            m.kappa_minus = -std::sqrt(2.0 * (mu - w));
            m.propagating_minus = true;
        } else {
            m.kappa_minus = cplx(0.0, std::sqrt(2.0 * (w - mu)));
        }
        xi_p = w;
        xi_m = -w;
    }
    m.spinor_plus = bdg_spinor(xi_p, E, delta0);
    m.spinor_minus = bdg_spinor(xi_m, E, delta0);
    return m;
}

/// delta^{-1} = 2 Im sqrt(2(mu + i sqrt(delta0^2 - E^2))), for 0 <= E < delta0.
inline double delta_formula(double E, double mu, double delta0)
{
    if (!(E >= 0.0 && E < delta0)) throw ValidationError("penetration depth needs 0 <= E < delta0");
    return 1.0 / (2.0 * std::sqrt(cplx(2.0 * mu, 2.0 * std::sqrt(delta0 * delta0 - E * E))).imag());
}

struct MatchResult {
    cplx r_ee, r_eh;
    std::array<cplx, 2> c;
    double condition_number = 0.0;
};

/// Solves continuity of (psi_e, psi_e', psi_h, psi_h') at q = 0 given the two
/// superconducting-side solutions y1, y2 evaluated at 0+.
inline MatchResult match_at_origin(double k_e, cplx k_h, const Eigen::Vector4cd& y1, const Eigen::Vector4cd& y2)
{
    const cplx I(0.0, 1.0);
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
    M(0, 0) = 1.0;
    M(1, 0) = -I * k_e;
    M(2, 1) = 1.0;
    M(3, 1) = I * k_h;
    M.col(2) = -y1;
    M.col(3) = -y2;
    Eigen::Vector4cd b(-1.0, -I * k_e, 0.0, 0.0);

    // equilibrate: derivative rows by 1/k_e, then unit columns
    const double rs = 1.0 / std::max(k_e, 1.0);
    M.row(1) *= rs;
    M.row(3) *= rs;
    b(1) *= rs;
    Eigen::Vector4d cs;
    for (int j = 0; j < 4; ++j) {
        cs(j) = M.col(j).norm();
        if (cs(j) == 0.0) throw SingularMatching("zero column in matching matrix", std::numeric_limits<double>::infinity());
        M.col(j) /= cs(j);
    }
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(M);
    const auto& sv = svd.singularValues();
    const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (!(cond < kSingularCondition)) throw SingularMatching("singular matching matrix", cond);
    Eigen::Vector4cd x = M.fullPivLu().solve(b);
    for (int j = 0; j < 4; ++j) x(j) /= cs(j);
    return {x(0), x(1), {x(2), x(3)}, cond};
}

enum class PotentialKind { step, linear };

struct ScatteringSolution {
    PotentialKind kind = PotentialKind::step;
    double E = 0.0, mu = 0.0;
    double delta0 = 0.0; // step height
    double nu = 0.0;     // linear slope
    double k_e = 0.0;
    cplx k_h;
    cplx r_ee, r_eh;
    std::vector<cplx> t;                // superconducting mode amplitudes (step only)
    double current_in = 0.0;
    double current_reflected = 0.0;
    double current_transmitted = 0.0;
    double current_out = 0.0;
    double condition_number = 0.0;
    double q_max_used = 0.0;            // linear only: start of the backward integration
    GridSpinor state;

    double current_error() const { return std::abs(current_in - current_out) / current_in; }
    double parameter() const { return kind == PotentialKind::step ? delta0 : nu; }
};

inline double reflected_current(double k_e, cplx k_h, cplx r_ee, cplx r_eh)
{
    double j = k_e * std::norm(r_ee);
    if (k_h.imag() == 0.0) j += k_h.real() * std::norm(r_eh);
    return j;
}

inline void fill_normal_side(GridSpinor& psi, double k_e, cplx k_h, cplx r_ee, cplx r_eh)
{
    const cplx I(0.0, 1.0);
    for (std::size_t j = 0; j < psi.grid.n_points; ++j) {
        const double q = psi.grid.q(j);
        if (q >= 0.0) continue;
        psi.e[j] = std::exp(I * k_e * q) + r_ee * std::exp(-I * k_e * q);
        psi.h[j] = r_eh * std::exp(I * k_h * q);
    }
}

/// Step pair potential Delta(q) = delta0 theta(q); exact mode matching.
inline ScatteringSolution solve_step(double E, double mu, double delta0, const Grid1D& grid)
{
    grid.validate();
    if (!(grid.q_min < 0.0 && grid.q_max > 0.0)) throw ValidationError("scattering grid must straddle q = 0");
    const ModeSet m = step_modes(E, mu, delta0);
    const double kmax = std::max({m.k_e, std::abs(m.kappa_plus.real()), std::abs(m.kappa_minus.real())});
    if (grid.k_nyquist() < 2.0 * kmax)
        throw ValidationError("grid too coarse for the Fermi wavevector (need k_nyquist >= 2 k_max)");
    if (m.subgap() && grid.dq() > 0.1 * delta_formula(E, mu, delta0))
        throw ValidationError("grid spacing does not resolve the penetration depth");

    const cplx I(0.0, 1.0);
    auto boundary = [&](cplx k, const Eigen::Vector2cd& s) {
        return Eigen::Vector4cd(s(0), I * k * s(0), s(1), I * k * s(1));
    };
    const MatchResult mr =
        match_at_origin(m.k_e, m.k_h, boundary(m.kappa_plus, m.spinor_plus), boundary(m.kappa_minus, m.spinor_minus));

    ScatteringSolution sol;
    sol.kind = PotentialKind::step;
    sol.E = E;
    sol.mu = mu;
    sol.delta0 = delta0;
    sol.k_e = m.k_e;
    sol.k_h = m.k_h;
    sol.r_ee = mr.r_ee;
    sol.r_eh = mr.r_eh;
    sol.t = {mr.c[0], mr.c[1]};
    sol.condition_number = mr.condition_number;
    sol.current_in = m.k_e;
    sol.current_reflected = reflected_current(m.k_e, m.k_h, mr.r_ee, mr.r_eh);
    auto flux = [](cplx k, const Eigen::Vector2cd& s, cplx t) {
        return k.real() * (std::norm(s(0)) - std::norm(s(1))) * std::norm(t);
    };
    if (m.propagating_plus) sol.current_transmitted += flux(m.kappa_plus, m.spinor_plus, mr.c[0]);
    if (m.propagating_minus) sol.current_transmitted += flux(m.kappa_minus, m.spinor_minus, mr.c[1]);
    sol.current_out = sol.current_reflected + sol.current_transmitted;

    sol.state = GridSpinor(grid);
    fill_normal_side(sol.state, m.k_e, m.k_h, mr.r_ee, mr.r_eh);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double q = grid.q(j);
        if (q < 0.0) continue;
        const cplx p = mr.c[0] * std::exp(I * m.kappa_plus * q);
        const cplx n = mr.c[1] * std::exp(I * m.kappa_minus * q);
        sol.state.e[j] = p * m.spinor_plus(0) + n * m.spinor_minus(0);
        sol.state.h[j] = p * m.spinor_plus(1) + n * m.spinor_minus(1);
    }
    return sol;
}

/// Step solves for many energies, run concurrently; results in input order.
inline std::vector<ScatteringSolution> solve_step_sweep(const std::vector<double>& energies, double mu, double delta0,
                                                        const Grid1D& grid)
{
    std::vector<ScatteringSolution> out(energies.size());
    parallel_for(energies.size(), [&](std::size_t i) { out[i] = solve_step(energies[i], mu, delta0, grid); });
    return out;
}

inline std::vector<double> density(const GridSpinor& psi)
{
    std::vector<double> rho(psi.e.size());
    for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(psi.e[j]) + std::norm(psi.h[j]);
    return rho;
}

/// Decay length from a least-squares fit of log density on [2 delta, 6 delta].
/// log density is a line plus a periodic beat. Starting from the plain line
/// fit, the extrema of the detrended samples are refitted with a shared slope
/// (maxima and minima get separate intercepts) until the correction vanishes;
/// at the true slope those extrema values are exactly level.
inline double penetration_depth_fit(const ScatteringSolution& sol)
{
    if (sol.kind != PotentialKind::step) throw ValidationError("penetration depth fit needs a step solution");
    const double delta = delta_formula(sol.E, sol.mu, sol.delta0);
    const Grid1D& g = sol.state.grid;
    const double lo = 2.0 * delta, hi = 6.0 * delta;
    if (hi > g.q_max - g.dq()) throw ValidationError("penetration fit window [2 delta, 6 delta] lies outside the grid");
    const auto rho = density(sol.state);
    const std::size_t j0 = static_cast<std::size_t>(std::ceil((lo - g.q_min) / g.dq()));
    const std::size_t j1 = static_cast<std::size_t>(std::floor((hi - g.q_min) / g.dq()));
    const std::size_t n = j1 - j0 + 1;
    std::vector<double> q(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = g.q(j0 + i);
        y[i] = std::log(rho[j0 + i]);
    }

    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = q[i];
        A(i, 1) = 1.0;
        b(i) = y[i];
    }
    double slope = A.colPivHouseholderQr().solve(b)(0);

    for (int it = 0; it < 50; ++it) {
        std::vector<std::array<double, 3>> ext; // q, value, 1 for a minimum
        int n_max = 0, n_min = 0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double l = y[i - 1] - slope * q[i - 1], c = y[i] - slope * q[i], r = y[i + 1] - slope * q[i + 1];
            const bool is_max = c > l && c >= r, is_min = c < l && c <= r;
            if (!is_max && !is_min) continue;
            const double den = l - 2.0 * c + r;
            const double s = den != 0.0 ? 0.5 * (l - r) / den : 0.0;
            ext.push_back({q[i] + s * g.dq(), c - 0.25 * (l - r) * s, is_min ? 1.0 : 0.0});
            (is_min ? n_min : n_max) += 1;
        }
        if (n_max < 2 && n_min < 2) break;
        // columns: q, then one intercept per extremum kind present
        const int kinds = (n_max > 0) + (n_min > 0);
        Eigen::MatrixXd E(ext.size(), 1 + kinds);
        Eigen::VectorXd v(ext.size());
        for (std::size_t k = 0; k < ext.size(); ++k) {
            E(k, 0) = ext[k][0];
            if (kinds == 2) {
                E(k, 1) = 1.0 - ext[k][2];
                E(k, 2) = ext[k][2];
            } else {
                E(k, 1) = 1.0;
            }
            v(k) = ext[k][1];
        }
        const double c = E.colPivHouseholderQr().solve(v)(0);
        slope += c;
        if (std::abs(c) < 1e-13 * std::abs(slope)) break;
    }
    if (!(slope < 0.0)) throw ValidationError("density does not decay in the fit window");
    return -1.0 / slope;
}

// ---------------------------------------------------------------- linear

struct LinearOptions {
    double q_max = 0.0;          // 0: choose from decay_target
    double decay_target = 30.0;  // integral of the local decay rate beyond the turning point
    double segment = 0.0;        // renormalization interval; 0: automatic
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
};

namespace detail {

/// Local 2x2 coefficient matrix of psi'' = M psi.
inline Eigen::Matrix2cd bdg_ode_matrix(double E, double mu, double d)
{
    Eigen::Matrix2cd M;
    M << -2.0 * (E + mu), 2.0 * d, -2.0 * d, 2.0 * (E - mu);
    return M;
}

/// Real part of the local decay exponent, zero where |E| > |Delta|.
inline double local_decay_rate(double E, double mu, double d)
{
    const double w2 = d * d - E * E;
    if (w2 <= 0.0) return 0.0;
    return std::sqrt(cplx(-2.0 * mu, 2.0 * std::sqrt(w2))).real();
}

inline double auto_q_max(double E, double mu, double nu, double target)
{
    const double qt = E / nu;
    double q = qt, acc = 0.0;
    for (long it = 0; acc < target; ++it) {
        if (it > 10000000L) throw ValidationError("linear potential too weak to bound the solution");
        const double hh = std::clamp(0.01 * (q + 1.0), 1e-3, 0.5);
        acc += 0.5 * hh * (local_decay_rate(E, mu, nu * q) + local_decay_rate(E, mu, nu * (q + hh)));
        q += hh;
    }
    return q;
}

using OdeState = std::array<double, 16>; // two solutions x (psi_e, psi_e', psi_h, psi_h'), re/im

inline cplx get(const OdeState& x, int s, int i) { return {x[8 * s + 2 * i], x[8 * s + 2 * i + 1]}; }
inline void put(OdeState& x, int s, int i, cplx v)
{
    x[8 * s + 2 * i] = v.real();
    x[8 * s + 2 * i + 1] = v.imag();
}

struct BdgOde {
    double E, mu, nu;
    void operator()(const OdeState& x, OdeState& dx, double q) const
    {
        const double d = q > 0.0 ? nu * q : 0.0;
        for (int s = 0; s < 2; ++s) {
            const cplx pe = get(x, s, 0), dpe = get(x, s, 1), ph = get(x, s, 2), dph = get(x, s, 3);
            put(dx, s, 0, dpe);
            put(dx, s, 1, -2.0 * (E + mu) * pe + 2.0 * d * ph);
            put(dx, s, 2, dph);
            put(dx, s, 3, 2.0 * (E - mu) * ph - 2.0 * d * pe);
        }
    }
};

inline Eigen::Matrix<cplx, 4, 2> unpack(const OdeState& x)
{
    Eigen::Matrix<cplx, 4, 2> Y;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 4; ++i) Y(i, s) = get(x, s, i);
    return Y;
}

inline OdeState pack(const Eigen::Matrix<cplx, 4, 2>& Y)
{
    OdeState x{};
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 4; ++i) put(x, s, i, Y(i, s));
    return x;
}

} // namespace detail

/// Linear pair potential Delta(q) = nu q theta(q). The two solutions bounded at
/// large q come from backward integration with QR renormalization every segment.
inline ScatteringSolution solve_linear(double E, double mu, double nu, const Grid1D& grid, LinearOptions opt = {})
{
    namespace odeint = boost::numeric::odeint;
    grid.validate();
    if (!(E > 0.0)) throw ValidationError("linear-potential scattering needs E > 0");
    if (!(nu > 0.0)) throw ValidationError("linear-potential scattering needs nu > 0");
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    if (!(grid.q_min < 0.0 && grid.q_max > 0.0)) throw ValidationError("scattering grid must straddle q = 0");
    const double k_e = std::sqrt(2.0 * (mu + E));
    if (grid.k_nyquist() < 2.0 * k_e) throw ValidationError("grid too coarse for the Fermi wavevector");
    const cplx k_h = normal_hole_wavevector(E, mu);

    double q_start = opt.q_max > 0.0 ? opt.q_max : detail::auto_q_max(E, mu, nu, opt.decay_target);
    q_start = std::max(q_start, grid.q_max);

    // recessive local modes at q_start
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(detail::bdg_ode_matrix(E, mu, nu * q_start));
    Eigen::Matrix<cplx, 4, 2> Y0;
    for (int s = 0; s < 2; ++s) {
        const cplx rate = -std::sqrt(es.eigenvalues()(s));
        const Eigen::Vector2cd phi = es.eigenvectors().col(s).normalized();
        Y0.col(s) << phi(0), rate * phi(0), phi(1), rate * phi(1);
    }

    const double rate_max = std::max(detail::local_decay_rate(E, mu, nu * q_start), 1e-6);
    double seg = opt.segment > 0.0 ? opt.segment : std::min(1.0, 2.0 / rate_max);

    // grid indices with q >= 0, descending
    std::vector<std::size_t> idx;
    for (std::size_t j = grid.n_points; j-- > 0;)
        if (grid.q(j) >= 0.0) idx.push_back(j);

    for (int attempt = 0; attempt < 5; ++attempt, seg *= 0.5) {
        std::vector<Eigen::Matrix2cd> Rs;                 // R of each segment end
        std::vector<std::size_t> seg_of(grid.n_points, 0);
        std::vector<Eigen::Matrix<cplx, 2, 2>> Zg(grid.n_points); // (e, h) x (sol1, sol2)
        Eigen::HouseholderQR<Eigen::Matrix<cplx, 4, 2>> qr0(Y0);
        Eigen::Matrix<cplx, 4, 2> Q = qr0.householderQ() * Eigen::Matrix<cplx, 4, 2>::Identity();
        bool collapsed = false;
        std::size_t next = 0;
        double a = q_start;
        std::size_t segment_index = 0;
        while (a > 0.0) {
            const double b = std::max(0.0, a - seg);
            std::vector<double> times{a};
            std::vector<std::size_t> tidx;
            while (next < idx.size() && grid.q(idx[next]) > b) {
                const double q = grid.q(idx[next]);
                if (q < a) {
                    times.push_back(q);
                    tidx.push_back(idx[next]);
                } else {
                    seg_of[idx[next]] = segment_index;
                    Zg[idx[next]] = (Eigen::Matrix2cd() << Q(0, 0), Q(0, 1), Q(2, 0), Q(2, 1)).finished();
                }
                ++next;
            }
            times.push_back(b);
            detail::OdeState x = detail::pack(Q);
            std::size_t k = 0;
            auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<detail::OdeState>());
            odeint::integrate_times(stepper, detail::BdgOde{E, mu, nu}, x, times.begin(), times.end(), -1e-3,
                                    [&](const detail::OdeState& s, double) {
                                        if (k >= 1 && k <= tidx.size()) {
                                            const auto Y = detail::unpack(s);
                                            seg_of[tidx[k - 1]] = segment_index;
                                            Zg[tidx[k - 1]] << Y(0, 0), Y(0, 1), Y(2, 0), Y(2, 1);
                                        }
                                        ++k;
                                    });
            const auto Y = detail::unpack(x);
            Eigen::HouseholderQR<Eigen::Matrix<cplx, 4, 2>> qr(Y);
            Eigen::Matrix2cd R = qr.matrixQR().topRows<2>().triangularView<Eigen::Upper>();
            Q = qr.householderQ() * Eigen::Matrix<cplx, 4, 2>::Identity();
            if (std::abs(R(1, 1)) < 1e-12 * std::abs(R(0, 0))) {
                collapsed = true;
                break;
            }
            Rs.push_back(R);
            a = b;
            ++segment_index;
        }
        if (collapsed) continue;
        while (next < idx.size()) { // the point q = 0 itself
            seg_of[idx[next]] = segment_index;
            Zg[idx[next]] << Q(0, 0), Q(0, 1), Q(2, 0), Q(2, 1);
            ++next;
        }

        const MatchResult mr = match_at_origin(k_e, k_h, Q.col(0), Q.col(1));
        // coefficients per segment, from q = 0 outward
        std::vector<Eigen::Vector2cd> c(Rs.size() + 1);
        Eigen::Vector2cd cur(mr.c[0], mr.c[1]);
        c[Rs.size()] = cur;
        for (std::size_t s = Rs.size(); s-- > 0;) {
            cur = Rs[s].triangularView<Eigen::Upper>().solve(cur);
            c[s] = cur;
        }

        ScatteringSolution sol;
        sol.kind = PotentialKind::linear;
        sol.E = E;
        sol.mu = mu;
        sol.nu = nu;
        sol.k_e = k_e;
        sol.k_h = k_h;
        sol.r_ee = mr.r_ee;
        sol.r_eh = mr.r_eh;
        sol.condition_number = mr.condition_number;
        sol.current_in = k_e;
        sol.current_reflected = reflected_current(k_e, k_h, mr.r_ee, mr.r_eh);
        sol.current_out = sol.current_reflected;
        sol.q_max_used = q_start;
        sol.state = GridSpinor(grid);
        fill_normal_side(sol.state, k_e, k_h, mr.r_ee, mr.r_eh);
        for (std::size_t j : idx) {
            const Eigen::Vector2cd v = Zg[j] * c[seg_of[j]];
            sol.state.e[j] = v(0);
            sol.state.h[j] = v(1);
        }
        return sol;
    }
    throw SingularMatching("recessive solutions lost independence under renormalization", std::numeric_limits<double>::infinity());
}

/// Where the density envelope of a linear-potential solution turns from flat
/// to decaying, next to the two candidate turning points E/nu and nu/E.
struct RegimeReport {
    double q_boundary = 0.0;       // last q where the envelope reaches half its maximum
    double q_energy_over_slope = 0.0;
    double q_slope_over_energy = 0.0;
    double log_env_at_energy_over_slope = 0.0; // ln(envelope / max) at E/nu
    double log_env_at_slope_over_energy = 0.0; // same at nu/E (NaN if off grid)
    double window = 0.0;
    // Airy scale of the crossover, (v_F^2 / (8 E nu))^{1/3}
    double crossover_width = 0.0;
};

inline RegimeReport locate_regime_boundary(const ScatteringSolution& sol)
{
    if (sol.kind != PotentialKind::linear) throw ValidationError("regime boundary needs a linear-potential solution");
    const Grid1D& g = sol.state.grid;
    const auto rho = density(sol.state);
    RegimeReport r;
    r.q_energy_over_slope = sol.E / sol.nu;
    r.q_slope_over_energy = sol.nu / sol.E;
    // one Fermi wavelength spans two periods of the 2 k_F interference
    r.window = 2.0 * M_PI / std::sqrt(2.0 * sol.mu);
    r.crossover_width = std::cbrt(2.0 * sol.mu / (8.0 * sol.E * sol.nu));
    const auto half = static_cast<std::size_t>(std::ceil(0.5 * r.window / g.dq()));
    const std::size_t j0 = g.index_of(0.0);
    std::vector<double> env(g.n_points, 0.0);
    double peak = 0.0;
    for (std::size_t j = j0; j < g.n_points; ++j) {
        double m = 0.0;
        for (std::size_t i = (j > half ? j - half : 0); i <= std::min(g.n_points - 1, j + half); ++i)
            if (g.q(i) >= 0.0) m = std::max(m, rho[i]);
        env[j] = m;
        peak = std::max(peak, m);
    }
    // beats between electron- and hole-like waves modulate the flat region, so
    // the boundary is the last crossing rather than the first
    r.q_boundary = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = g.n_points; j-- > j0;) {
        if (env[j] >= 0.5 * peak) {
            if (j + 1 < g.n_points) r.q_boundary = g.q(j);
            break;
        }
    }
    auto log_at = [&](double q) {
        if (q < 0.0 || q > g.q_max) return std::numeric_limits<double>::quiet_NaN();
        return std::log(env[g.index_of(q)] / peak);
    };
    r.log_env_at_energy_over_slope = log_at(r.q_energy_over_slope);
    r.log_env_at_slope_over_energy = log_at(r.q_slope_over_energy);
    return r;
}

/// q,Re_psi_e,Im_psi_e,Re_psi_h,Im_psi_h
inline void write_csv(std::ostream& os, const ScatteringSolution& sol)
{
    os << "q,Re_psi_e,Im_psi_e,Re_psi_h,Im_psi_h\n" << std::setprecision(17);
    const auto& s = sol.state;
    for (std::size_t j = 0; j < s.grid.n_points; ++j)
        os << s.grid.q(j) << ',' << s.e[j].real() << ',' << s.e[j].imag() << ',' << s.h[j].real() << ','
           << s.h[j].imag() << '\n';
}

} // namespace ehcs
