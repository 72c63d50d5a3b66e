#pragma once

// Closed-form overlaps, expectation values and phase-space kernels for the
// standard, spin, product and electron-hole coherent-state families.

#include <ehcs/fock.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace ehcs {

namespace detail {

// A coherent state of any flavor is c_plus |a_plus>|+> + c_minus |a_minus>|->
// with |.> the normalized or the analytic oscillator coherent state.
struct Channels {
    cplx c_plus, a_plus, c_minus, a_minus;
};

inline Channels channels(const CoherentLabel& L)
{
    const cplx alpha = (L.flavor == Flavor::spin) ? cplx(0.0) : L.alpha;
    const Beta beta = (L.flavor == Flavor::standard) ? Beta(0.0) : L.beta;
    if (!L.normalized && beta.is_infinite())
        throw ValidationError("the analytic variant has no beta = infinity point");

    if (L.flavor == Flavor::eh) {
        const auto [cp, cm] =
            L.normalized ? beta.conj().spin_weights() : std::pair<cplx, cplx>{1.0, std::conj(beta.value())};
        return {cp, alpha, cm, std::conj(alpha)};
    }
    const auto [cp, cm] = L.normalized ? beta.spin_weights() : std::pair<cplx, cplx>{1.0, beta.value()};
    return {cp, alpha, cm, alpha};
}

inline cplx oscillator_overlap(cplx a, cplx b, bool normalized)
{
    cplx x = std::conj(a) * b;
    if (normalized) x -= 0.5 * (std::norm(a) + std::norm(b));
    return std::exp(x);
}

} // namespace detail

/// (L1|L2) for analytic labels, <L1|L2> for normalized ones. Both labels must use the same variant.
inline cplx overlap(const CoherentLabel& L1, const CoherentLabel& L2)
{
    if (L1.normalized != L2.normalized)
        throw ValidationError("overlap between a normalized and an analytic label is not defined");
    const auto c1 = detail::channels(L1);
    const auto c2 = detail::channels(L2);
    const bool nz = L1.normalized;
    cplx s = 0.0;
    if (c1.c_plus != 0.0 && c2.c_plus != 0.0)
        s += std::conj(c1.c_plus) * c2.c_plus * detail::oscillator_overlap(c1.a_plus, c2.a_plus, nz);
    if (c1.c_minus != 0.0 && c2.c_minus != 0.0)
        s += std::conj(c1.c_minus) * c2.c_minus * detail::oscillator_overlap(c1.a_minus, c2.a_minus, nz);
    return s;
}

/// Squared norm of the analytic variant, e^{|alpha|^2} (1 + |beta|^2) for product and eh labels.
inline double analytic_norm2(const CoherentLabel& L)
{
    CoherentLabel a = L;
    a.normalized = false;
    return overlap(a, a).real();
}

struct ExpectationTable {
    cplx a, a_dag;
    double Q, P, V;
    cplx sigma_plus, sigma_minus;
    double sigma1, sigma2, sigma3;
};

/// Expectation values of the fundamental operators in a normalized coherent state.
inline ExpectationTable expectation_table(const CoherentLabel& L)
{
    if (!L.normalized) throw ValidationError("expectation_table needs a normalized label");
    const double r2 = std::sqrt(2.0);
    ExpectationTable t{};

    if (L.flavor == Flavor::eh) {
        const double q = L.q();
        const double v = L.v();
        const double s3 = L.beta.polarization();
        t.a = cplx(q / r2, s3 * v / r2);
        t.a_dag = std::conj(t.a);
        t.Q = q;
        t.P = s3 * v;
        t.V = v;
        t.sigma3 = s3;
        if (L.beta.is_infinite()) {
            t.sigma_plus = t.sigma_minus = 0.0;
            t.sigma1 = t.sigma2 = 0.0;
        } else {
            const cplx b = L.beta.value();
            const double d = 1.0 + std::norm(b);
            const double g = std::exp(-v * v);
            const cplx phase = std::exp(cplx(0.0, q * v));
            t.sigma_plus = std::conj(b) * g / phase / d;
            t.sigma_minus = b * g * phase / d;
            t.sigma1 = 2.0 * g * (b * phase).real() / d;
            t.sigma2 = -2.0 * g * (b * phase).imag() / d;
        }
        return t;
    }

    // Separable families: oscillator part |alpha>, spin part |beta>.
    const cplx alpha = (L.flavor == Flavor::spin) ? cplx(0.0) : L.alpha;
    const Beta beta = (L.flavor == Flavor::standard) ? Beta(0.0) : L.beta;
    const double s3 = beta.polarization();
    t.a = alpha;
    t.a_dag = std::conj(alpha);
    t.Q = r2 * alpha.real();
    t.P = r2 * alpha.imag();
    t.V = t.P * s3;
    t.sigma3 = s3;
    if (beta.is_infinite()) {
        t.sigma_plus = t.sigma_minus = 0.0;
    } else {
        const cplx b = beta.value();
        t.sigma_plus = b / (1.0 + std::norm(b));
        t.sigma_minus = std::conj(t.sigma_plus);
    }
    t.sigma1 = 2.0 * t.sigma_plus.real();
    t.sigma2 = 2.0 * t.sigma_plus.imag();
    return t;
}

/// Sum of squared quasi-spin expectations. Equals 1 exactly for separable states.
inline double entanglement_R2(const CoherentLabel& L)
{
    if (L.flavor != Flavor::eh) return 1.0;
    const double v = L.v();
    return 1.0 - (1.0 - std::exp(-2.0 * v * v)) * L.beta.mixing();
}

/// e^{2v^2}(<s1>^2 + <s2>^2) + <s3>^2 - 1 from the closed-form table.
inline double ellipsoid_residual(const CoherentLabel& L)
{
    const auto t = expectation_table(L);
    const double v = L.v();
    return std::exp(2.0 * v * v) * (t.sigma1 * t.sigma1 + t.sigma2 * t.sigma2) + t.sigma3 * t.sigma3 - 1.0;
}

struct UncertaintyReport {
    double varQ = 0.0;
    double varP = 0.0;
    double varV = 0.0;
    double productQV = 0.0;
};

/// Variances of Q, P and V = P sigma3. The state is embedded one level higher
/// first, so the second moments are those of the untruncated operators.
inline UncertaintyReport uncertainty_report(const SpinorFockState& x)
{
    const SpinorFockState y = pad(x, 1);
    const OpResult qy = apply_op(FundamentalOp::Q, y);
    const OpResult py = apply_op(FundamentalOp::P, y);
    const OpResult vy = apply_op(FundamentalOp::V, y);
    const double q = inner(y, qy.state).real();
    const double p = inner(y, py.state).real();
    const double v = inner(y, vy.state).real();
    UncertaintyReport r;
    r.varQ = qy.state.norm2() - q * q;
    r.varP = py.state.norm2() - p * p;
    r.varV = vy.state.norm2() - v * v;
    r.productQV = r.varQ * r.varV;
    return r;
}

// ---------------------------------------------------------------------------
// Density operators and reduced Husimi kernels

struct WeightedState {
    double weight;
    SpinorFockState state;
};

/// rho = sum_k w_k |psi_k><psi_k|.
using Ensemble = std::vector<WeightedState>;

inline Ensemble pure(SpinorFockState psi) { return {WeightedState{1.0, std::move(psi)}}; }

inline void validate_density(const Ensemble& rho, double tol = 1e-10)
{
    if (rho.empty()) throw ValidationError("empty ensemble");
    double total = 0.0;
    for (const auto& w : rho) {
        if (w.weight < 0.0) throw ValidationError("negative ensemble weight");
        if (std::abs(w.state.norm2() - 1.0) > tol) throw ValidationError("ensemble member is not normalized");
        total += w.weight;
    }
    if (std::abs(total - 1.0) > tol)
        throw ValidationError("ensemble weights sum to " + std::to_string(total) + ", not 1");
}

/// Which coherent-state family defines the phase-space function.
enum class Convention { product, eh };

inline std::string_view to_string(Convention c) { return c == Convention::eh ? "eh" : "product"; }

/// Quasi-spin-integrated Husimi function at alpha, normalized with (1/pi) d^2 alpha.
///   product: <alpha|rho_ee|alpha> + <alpha|rho_hh|alpha>
///   eh:      <alpha|rho_ee|alpha> + <alpha*|rho_hh|alpha*>
inline double reduced_husimi_kernel(const Ensemble& rho, cplx alpha, Convention convention)
{
    validate_density(rho);
    const cplx alpha_h = (convention == Convention::eh) ? std::conj(alpha) : alpha;
    double s = 0.0;
    for (const auto& w : rho)
        s += w.weight * (std::norm(coherent_projection(alpha, w.state.e)) +
                         std::norm(coherent_projection(alpha_h, w.state.h)));
    return s;
}

/// Full Husimi function <L|rho|L> for a normalized label.
inline double husimi(const Ensemble& rho, const CoherentLabel& L)
{
    double s = 0.0;
    for (const auto& w : rho) {
        const SpinorFockState ket = build_state(L, w.state.cutoff(), TailCheck::ignore);
        s += w.weight * std::norm(inner(ket, w.state));
    }
    return s;
}

} // namespace ehcs
