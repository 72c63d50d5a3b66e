#pragma once

// Truncated number-basis representation of (oscillator) x (quasi-spin).
//
// A SpinorFockState holds amplitudes a_{n,+} (electron, e) and a_{n,-}
// (hole, h) for n = 0..N. Everything else in the library is checked
// against this representation.

#include <ehcs/errors.hpp>

#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ehcs {

using cplx = std::complex<double>;

inline constexpr std::size_t kDefaultCutoff = 64;
inline constexpr double kTailTol = 1e-14;
inline constexpr double kTruncTol = 1e-12;

/// Label alpha from position q and velocity (or momentum) v.
inline cplx alpha_from_qv(double q, double v) { return cplx(q, v) / std::sqrt(2.0); }

/// Quasi-spin label in C u {infinity}.
class Beta {
public:
    Beta() = default;
    Beta(cplx value) : value_(value) {}
    Beta(double value) : value_(value) {}

    static Beta infinity()
    {
        Beta b;
        b.infinite_ = true;
        return b;
    }

    bool is_infinite() const { return infinite_; }

    /// Finite value; throws for beta = infinity.
    cplx value() const
    {
        if (infinite_) throw ValidationError("beta = infinity has no finite value");
        return value_;
    }

    Beta conj() const { return infinite_ ? *this : Beta(std::conj(value_)); }

    /// Weights (c_plus, c_minus) of |+>, |-> in the normalized spin state (1, beta)/sqrt(1+|beta|^2).
    std::pair<cplx, cplx> spin_weights() const
    {
        if (infinite_) return {0.0, 1.0};
        const double s = 1.0 / std::sqrt(1.0 + std::norm(value_));
        return {s, value_ * s};
    }

    /// (1 - |beta|^2) / (1 + |beta|^2), the sigma_3 polarization.
    double polarization() const
    {
        if (infinite_) return -1.0;
        const double b2 = std::norm(value_);
        return (1.0 - b2) / (1.0 + b2);
    }

    /// 4|beta|^2 / (1 + |beta|^2)^2, vanishing at beta = 0 and beta = infinity.
    double mixing() const
    {
        if (infinite_) return 0.0;
        const double b2 = std::norm(value_);
        return 4.0 * b2 / ((1.0 + b2) * (1.0 + b2));
    }

private:
    cplx value_{0.0};
    bool infinite_ = false;
};

enum class Flavor { standard, spin, product, eh };

inline std::string_view to_string(Flavor f)
{
    switch (f) {
    case Flavor::standard: return "standard";
    case Flavor::spin: return "spin";
    case Flavor::product: return "product";
    case Flavor::eh: return "eh";
    }
    return "?";
}

inline Flavor parse_flavor(std::string_view s)
{
    if (s == "standard") return Flavor::standard;
    if (s == "spin") return Flavor::spin;
    if (s == "product") return Flavor::product;
    if (s == "eh") return Flavor::eh;
    throw ValidationError("unknown coherent-state flavor '" + std::string(s) + "'");
}

struct CoherentLabel {
    cplx alpha{0.0};
    Beta beta{};
    Flavor flavor = Flavor::eh;
    bool normalized = true;

    static CoherentLabel eh(cplx alpha, Beta beta, bool normalized = true)
    {
        return {alpha, beta, Flavor::eh, normalized};
    }
    static CoherentLabel product(cplx alpha, Beta beta, bool normalized = true)
    {
        return {alpha, beta, Flavor::product, normalized};
    }
    static CoherentLabel standard(cplx alpha, bool normalized = true)
    {
        return {alpha, Beta(0.0), Flavor::standard, normalized};
    }
    static CoherentLabel spin(Beta beta, bool normalized = true)
    {
        return {0.0, beta, Flavor::spin, normalized};
    }

    double q() const { return std::sqrt(2.0) * alpha.real(); }
    double v() const { return std::sqrt(2.0) * alpha.imag(); }
};

/// Amplitudes c_0..c_N of a vector in the (truncated) number basis.
struct FockVector {
    std::vector<cplx> amps;

    FockVector() : amps(1, 0.0) {}
    explicit FockVector(std::size_t cutoff) : amps(cutoff + 1, 0.0) {}
    explicit FockVector(std::vector<cplx> a) : amps(std::move(a))
    {
        if (amps.empty()) throw ValidationError("FockVector needs at least one amplitude");
    }

    std::size_t cutoff() const { return amps.size() - 1; }
    cplx& operator[](std::size_t n) { return amps[n]; }
    const cplx& operator[](std::size_t n) const { return amps[n]; }

    double norm2() const
    {
        double s = 0.0;
        for (const auto& c : amps) s += std::norm(c);
        return s;
    }
};

/// Element of the truncated H_inf (x) C^2; e is the |+> block, h the |-> block.
struct SpinorFockState {
    FockVector e;
    FockVector h;

    SpinorFockState() = default;
    explicit SpinorFockState(std::size_t cutoff) : e(cutoff), h(cutoff) {}
    SpinorFockState(FockVector electron, FockVector hole) : e(std::move(electron)), h(std::move(hole))
    {
        if (e.cutoff() != h.cutoff())
            throw CutoffMismatch("electron and hole blocks have different cutoffs");
    }

    std::size_t cutoff() const { return e.cutoff(); }
    double norm2() const { return e.norm2() + h.norm2(); }

    SpinorFockState& operator+=(const SpinorFockState& o)
    {
        require_same_cutoff(o);
        for (std::size_t n = 0; n <= cutoff(); ++n) {
            e[n] += o.e[n];
            h[n] += o.h[n];
        }
        return *this;
    }
    SpinorFockState& operator-=(const SpinorFockState& o)
    {
        require_same_cutoff(o);
        for (std::size_t n = 0; n <= cutoff(); ++n) {
            e[n] -= o.e[n];
            h[n] -= o.h[n];
        }
        return *this;
    }
    SpinorFockState& operator*=(cplx s)
    {
        for (auto& c : e.amps) c *= s;
        for (auto& c : h.amps) c *= s;
        return *this;
    }

    void require_same_cutoff(const SpinorFockState& o) const
    {
        if (o.cutoff() != cutoff()) throw CutoffMismatch("states have different Fock cutoffs");
    }
};

inline SpinorFockState operator+(SpinorFockState a, const SpinorFockState& b) { return a += b; }
inline SpinorFockState operator-(SpinorFockState a, const SpinorFockState& b) { return a -= b; }
inline SpinorFockState operator*(cplx s, SpinorFockState a) { return a *= s; }

/// Poisson tail sum_{n>N} |alpha|^{2n} e^{-|alpha|^2} / n!.
inline double coherent_tail(double alpha_abs2, std::size_t cutoff)
{
    if (alpha_abs2 <= 0.0) return 0.0;
    return gsl_sf_gamma_inc_P(static_cast<double>(cutoff) + 1.0, alpha_abs2);
}

enum class TailCheck { enforce, ignore };

/// Number-state expansion of |alpha> (normalized) or |alpha) (analytic).
inline FockVector coherent_fock(cplx alpha, std::size_t cutoff, bool normalized,
                                TailCheck check = TailCheck::enforce)
{
    if (check == TailCheck::enforce) {
        const double tail = coherent_tail(std::norm(alpha), cutoff);
        if (tail >= kTailTol)
            throw CutoffTooSmall("cutoff " + std::to_string(cutoff) + " leaves Poisson tail " +
                                 std::to_string(tail) + " for |alpha|^2 = " +
                                 std::to_string(std::norm(alpha)));
    }
    FockVector out(cutoff);
    cplx c = normalized ? std::exp(-0.5 * std::norm(alpha)) : 1.0;
    out[0] = c;
    for (std::size_t n = 1; n <= cutoff; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        out[n] = c;
    }
    return out;
}

/// Coherent-state vector for any flavor. Standard puts |alpha> on |+>; spin puts |0> (x) |beta>.
inline SpinorFockState build_state(const CoherentLabel& label, std::size_t cutoff = kDefaultCutoff,
                                   TailCheck check = TailCheck::enforce)
{
    const bool nz = label.normalized;
    if (!nz && label.beta.is_infinite())
        throw ValidationError("the analytic variant has no beta = infinity point");

    switch (label.flavor) {
    case Flavor::standard:
        return {coherent_fock(label.alpha, cutoff, nz, check), FockVector(cutoff)};
    case Flavor::spin: {
        const auto [cp, cm] = nz ? label.beta.spin_weights() : std::pair<cplx, cplx>{1.0, label.beta.value()};
        SpinorFockState s(cutoff);
        s.e[0] = cp;
        s.h[0] = cm;
        return s;
    }
    case Flavor::product: {
        const auto [cp, cm] = nz ? label.beta.spin_weights() : std::pair<cplx, cplx>{1.0, label.beta.value()};
        const FockVector base = coherent_fock(label.alpha, cutoff, nz, check);
        SpinorFockState s(cutoff);
        for (std::size_t n = 0; n <= cutoff; ++n) {
            s.e[n] = cp * base[n];
            s.h[n] = cm * base[n];
        }
        return s;
    }
    case Flavor::eh: {
        // (|alpha> |+> + beta* |alpha*> |->) / sqrt(1 + |beta|^2)
        const auto [cp, cm] = nz ? label.beta.conj().spin_weights()
                                 : std::pair<cplx, cplx>{1.0, std::conj(label.beta.value())};
        const FockVector plus = coherent_fock(label.alpha, cutoff, nz, check);
        SpinorFockState s(cutoff);
        for (std::size_t n = 0; n <= cutoff; ++n) {
            s.e[n] = cp * plus[n];
            s.h[n] = cm * std::conj(plus[n]); // coefficients of |alpha*> are the conjugates
        }
        return s;
    }
    }
    throw ValidationError("unsupported flavor");
}

inline cplx inner(const FockVector& x, const FockVector& y)
{
    if (x.cutoff() != y.cutoff()) throw CutoffMismatch("inner product of different cutoffs");
    cplx s = 0.0;
    for (std::size_t n = 0; n < x.amps.size(); ++n) s += std::conj(x[n]) * y[n];
    return s;
}

/// <x|y>, antilinear in x.
inline cplx inner(const SpinorFockState& x, const SpinorFockState& y)
{
    if (x.cutoff() != y.cutoff()) throw CutoffMismatch("inner product of different cutoffs");
    return inner(x.e, y.e) + inner(x.h, y.h);
}

inline double distance(const SpinorFockState& x, const SpinorFockState& y)
{
    return std::sqrt((x - y).norm2());
}

inline SpinorFockState normalized(SpinorFockState x)
{
    const double n = std::sqrt(x.norm2());
    if (n == 0.0) throw ValidationError("cannot normalize the zero vector");
    x *= 1.0 / n;
    return x;
}

/// Embeds x into a larger cutoff with zero amplitudes above the old one.
inline SpinorFockState pad(const SpinorFockState& x, std::size_t extra)
{
    SpinorFockState out(x.cutoff() + extra);
    for (std::size_t n = 0; n <= x.cutoff(); ++n) {
        out.e[n] = x.e[n];
        out.h[n] = x.h[n];
    }
    return out;
}

/// <alpha|psi> for the normalized coherent bra, exact on the truncated space.
inline cplx coherent_projection(cplx alpha, const FockVector& psi)
{
    cplx c = std::exp(-0.5 * std::norm(alpha));
    const cplx ac = std::conj(alpha);
    cplx s = c * psi[0];
    for (std::size_t n = 1; n <= psi.cutoff(); ++n) {
        c *= ac / std::sqrt(static_cast<double>(n));
        s += c * psi[n];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Fundamental operators

enum class FundamentalOp {
    a,
    a_dagger,
    Q,
    P,
    V,
    Nhat,
    sigma1,
    sigma2,
    sigma3,
    sigma_plus,
    sigma_minus,
    identity
};

inline bool is_hermitian(FundamentalOp op)
{
    switch (op) {
    case FundamentalOp::a:
    case FundamentalOp::a_dagger:
    case FundamentalOp::sigma_plus:
    case FundamentalOp::sigma_minus: return false;
    default: return true;
    }
}

/// Result of an operator application. truncation_loss is the squared norm
/// that a_dagger pushed above the cutoff and that was dropped.
struct OpResult {
    SpinorFockState state;
    double truncation_loss = 0.0;

    bool flagged() const { return truncation_loss > kTruncTol; }
};

namespace detail {

inline FockVector lower(const FockVector& x)
{
    FockVector out(x.cutoff());
    for (std::size_t n = 0; n < x.cutoff(); ++n)
        out[n] = std::sqrt(static_cast<double>(n + 1)) * x[n + 1];
    return out;
}

inline FockVector raise(const FockVector& x, double& loss)
{
    const std::size_t N = x.cutoff();
    FockVector out(N);
    for (std::size_t n = 1; n <= N; ++n) out[n] = std::sqrt(static_cast<double>(n)) * x[n - 1];
    loss += static_cast<double>(N + 1) * std::norm(x[N]);
    return out;
}

inline FockVector scaled(cplx c, FockVector x)
{
    for (auto& v : x.amps) v *= c;
    return x;
}

inline FockVector combine(cplx ca, const FockVector& a, cplx cb, const FockVector& b)
{
    FockVector out(a.cutoff());
    for (std::size_t n = 0; n <= a.cutoff(); ++n) out[n] = ca * a[n] + cb * b[n];
    return out;
}

} // namespace detail

inline OpResult apply_op(FundamentalOp op, const SpinorFockState& x)
{
    using detail::combine;
    using detail::lower;
    using detail::raise;
    const std::size_t N = x.cutoff();
    const double r2 = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    OpResult r;
    switch (op) {
    case FundamentalOp::identity: r.state = x; break;
    case FundamentalOp::a: r.state = {lower(x.e), lower(x.h)}; break;
    case FundamentalOp::a_dagger: {
        auto e = raise(x.e, r.truncation_loss);
        auto h = raise(x.h, r.truncation_loss);
        r.state = {std::move(e), std::move(h)};
        break;
    }
    case FundamentalOp::Q: {
        double lost = 0.0;
        auto e = combine(r2, lower(x.e), r2, raise(x.e, lost));
        auto h = combine(r2, lower(x.h), r2, raise(x.h, lost));
        r.truncation_loss = 0.5 * lost;
        r.state = {std::move(e), std::move(h)};
        break;
    }
    case FundamentalOp::P:
    case FundamentalOp::V: {
        // P = (a - a^dagger) / (sqrt2 i); V = sigma3 P.
        double lost = 0.0;
        const cplx c = r2 / i;
        auto e = combine(c, lower(x.e), -c, raise(x.e, lost));
        auto h = combine(c, lower(x.h), -c, raise(x.h, lost));
        if (op == FundamentalOp::V)
            for (auto& v : h.amps) v = -v;
        r.truncation_loss = 0.5 * lost;
        r.state = {std::move(e), std::move(h)};
        break;
    }
    case FundamentalOp::Nhat: {
        r.state = x;
        for (std::size_t n = 0; n <= N; ++n) {
            r.state.e[n] *= static_cast<double>(n);
            r.state.h[n] *= static_cast<double>(n);
        }
        break;
    }
    case FundamentalOp::sigma1: r.state = {x.h, x.e}; break;
    case FundamentalOp::sigma2:
        r.state = {detail::scaled(-i, x.h), detail::scaled(i, x.e)};
        break;
    case FundamentalOp::sigma3: r.state = {x.e, detail::scaled(-1.0, x.h)}; break;
    case FundamentalOp::sigma_plus: r.state = {x.h, FockVector(N)}; break;
    case FundamentalOp::sigma_minus: r.state = {FockVector(N), x.e}; break;
    }
    return r;
}

/// Applies an operator product as written: word {A, B, C} acts as A B C (C first).
inline OpResult apply_word(std::span<const FundamentalOp> word, const SpinorFockState& x)
{
    OpResult r{x, 0.0};
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        OpResult step = apply_op(*it, r.state);
        r.state = std::move(step.state);
        r.truncation_loss += step.truncation_loss;
    }
    return r;
}

inline OpResult apply_word(std::initializer_list<FundamentalOp> word, const SpinorFockState& x)
{
    return apply_word(std::span<const FundamentalOp>(word.begin(), word.size()), x);
}

inline cplx expectation(FundamentalOp op, const SpinorFockState& x, double* truncation_loss = nullptr)
{
    OpResult r = apply_op(op, x);
    if (truncation_loss) *truncation_loss += r.truncation_loss;
    return inner(x, r.state);
}

inline cplx expectation(std::initializer_list<FundamentalOp> word, const SpinorFockState& x,
                        double* truncation_loss = nullptr)
{
    OpResult r = apply_word(word, x);
    if (truncation_loss) *truncation_loss += r.truncation_loss;
    return inner(x, r.state);
}

// ---------------------------------------------------------------------------
// Time reversal and the electron-hole switch

/// Anti-unitary conjugation of every number-basis amplitude.
inline SpinorFockState time_reversal(SpinorFockState x)
{
    for (auto& c : x.e.amps) c = std::conj(c);
    for (auto& c : x.h.amps) c = std::conj(c);
    return x;
}

/// Linear on the |+> block, time reversal on the |-> block. Maps product
/// coherent states onto electron-hole coherent states and back.
inline SpinorFockState z_map(SpinorFockState x)
{
    for (auto& c : x.h.amps) c = std::conj(c);
    return x;
}

// ---------------------------------------------------------------------------

/// Random normalized state with amplitudes on n <= support (support <= cutoff).
inline SpinorFockState random_state(std::mt19937_64& rng, std::size_t cutoff, std::size_t support)
{
    if (support > cutoff) support = cutoff;
    std::normal_distribution<double> g(0.0, 1.0);
    SpinorFockState s(cutoff);
    for (std::size_t n = 0; n <= support; ++n) {
        s.e[n] = cplx(g(rng), g(rng));
        s.h[n] = cplx(g(rng), g(rng));
    }
    return normalized(std::move(s));
}

/// Random label with |alpha| <= alpha_max and |beta| <= beta_max (uniform in the discs).
inline CoherentLabel random_label(std::mt19937_64& rng, Flavor flavor, double alpha_max, double beta_max,
                                  bool normalized = true)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double two_pi = 2.0 * M_PI;
    const cplx alpha = std::polar(alpha_max * std::sqrt(u(rng)), two_pi * u(rng));
    const cplx beta = std::polar(beta_max * std::sqrt(u(rng)), two_pi * u(rng));
    return {alpha, Beta(beta), flavor, normalized};
}

} // namespace ehcs
