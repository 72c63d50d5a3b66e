#pragma once

// Electron-hole coherent-state representation.
//
// With the analytic bra (alpha ⋈ beta|, a state maps to
//   f(alpha, alpha*, beta) = u(alpha*) + beta v(alpha),
// u(z) = sum_n e_n z^n / sqrt(n!), v(z) = sum_n h_n z^n / sqrt(n!).
// Operators act on f as differential operators in alpha, alpha*, beta; the
// quasi-spin flips additionally swap alpha <-> alpha*. PhaseFunction holds
// the general polynomial such expressions produce, so each action can be
// evaluated literally and then projected back onto the (u, v) form.

#include <ehcs/fock.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace ehcs {

struct UVRep {
    std::vector<cplx> u; // coefficients of alpha*^n / sqrt(n!)
    std::vector<cplx> v; // coefficients of alpha^n / sqrt(n!)

    UVRep() : u(1, 0.0), v(1, 0.0) {}
    explicit UVRep(std::size_t cutoff) : u(cutoff + 1, 0.0), v(cutoff + 1, 0.0) {}

    std::size_t cutoff() const { return u.size() - 1; }

    /// u(alpha*) for the given alpha.
    cplx u_at(cplx alpha) const { return series(u, std::conj(alpha)); }
    /// v(alpha).
    cplx v_at(cplx alpha) const { return series(v, alpha); }
    /// f(alpha, alpha*, beta) = u(alpha*) + beta v(alpha).
    cplx f_at(cplx alpha, cplx beta) const { return u_at(alpha) + beta * v_at(alpha); }

private:
    static cplx series(const std::vector<cplx>& c, cplx z)
    {
        cplx s = 0.0;
        cplx p = 1.0;
        for (std::size_t n = 0; n < c.size(); ++n) {
            s += c[n] * p;
            p *= z / std::sqrt(static_cast<double>(n + 1));
        }
        return s;
    }
};

inline UVRep to_uv(const SpinorFockState& x)
{
    UVRep r;
    r.u = x.e.amps;
    r.v = x.h.amps;
    return r;
}

inline SpinorFockState from_uv(const UVRep& r)
{
    return {FockVector(r.u), FockVector(r.v)};
}

inline double distance(const UVRep& a, const UVRep& b)
{
    if (a.cutoff() != b.cutoff()) throw CutoffMismatch("UV representations of different cutoffs");
    double s = 0.0;
    for (std::size_t n = 0; n <= a.cutoff(); ++n) s += std::norm(a.u[n] - b.u[n]) + std::norm(a.v[n] - b.v[n]);
    return std::sqrt(s);
}

/// <alpha ⋈ beta|Psi> with the normalized bra:
/// e^{-|alpha|^2/2} (u(alpha*) + beta v(alpha)) / sqrt(1 + |beta|^2).
inline cplx cs_amplitude(const UVRep& r, cplx alpha, cplx beta)
{
    return std::exp(-0.5 * std::norm(alpha)) / std::sqrt(1.0 + std::norm(beta)) * r.f_at(alpha, beta);
}

// ---------------------------------------------------------------------------

/// Polynomial sum_{k<=2} beta^k sum_{m,n} c_k[m][n] alpha^m/sqrt(m!) alpha*^n/sqrt(n!),
/// truncated at degree N in alpha and in alpha*.
class PhaseFunction {
public:
    static constexpr int kBetaSlots = 3;

    explicit PhaseFunction(std::size_t cutoff) : N_(cutoff)
    {
        for (auto& s : slots_) s.assign((N_ + 1) * (N_ + 1), 0.0);
    }

    static PhaseFunction from(const UVRep& r)
    {
        PhaseFunction f(r.cutoff());
        for (std::size_t n = 0; n <= f.N_; ++n) {
            f.at(0, 0, n) = r.u[n];
            f.at(1, n, 0) = r.v[n];
        }
        return f;
    }

    std::size_t cutoff() const { return N_; }
    double truncation_loss() const { return loss_; }

    cplx& at(int k, std::size_t m, std::size_t n) { return slots_[k][m * (N_ + 1) + n]; }
    const cplx& at(int k, std::size_t m, std::size_t n) const { return slots_[k][m * (N_ + 1) + n]; }

    PhaseFunction& operator+=(const PhaseFunction& o)
    {
        for (int k = 0; k < kBetaSlots; ++k)
            for (std::size_t i = 0; i < slots_[k].size(); ++i) slots_[k][i] += o.slots_[k][i];
        loss_ += o.loss_;
        return *this;
    }
    friend PhaseFunction operator+(PhaseFunction a, const PhaseFunction& b) { return a += b; }
    friend PhaseFunction operator-(PhaseFunction a, const PhaseFunction& b) { return a += cplx(-1.0) * b; }
    friend PhaseFunction operator*(cplx s, PhaseFunction a)
    {
        for (auto& sl : a.slots_)
            for (auto& c : sl) c *= s;
        return a;
    }

    PhaseFunction d_alpha() const { return ladder(true, false); }
    PhaseFunction d_alpha_conj() const { return ladder(false, false); }
    PhaseFunction times_alpha() const { return ladder(true, true); }
    PhaseFunction times_alpha_conj() const { return ladder(false, true); }

    /// f(alpha, alpha*, beta) -> f(alpha*, alpha, beta).
    PhaseFunction swap_alpha() const
    {
        PhaseFunction out(N_);
        out.loss_ = loss_;
        for (int k = 0; k < kBetaSlots; ++k)
            for (std::size_t m = 0; m <= N_; ++m)
                for (std::size_t n = 0; n <= N_; ++n) out.at(k, n, m) = at(k, m, n);
        return out;
    }

    PhaseFunction times_beta() const
    {
        for (std::size_t i = 0; i < slots_[kBetaSlots - 1].size(); ++i)
            if (slots_[kBetaSlots - 1][i] != 0.0) throw ValidationError("beta degree exceeds the supported range");
        PhaseFunction out(N_);
        out.loss_ = loss_;
        for (int k = kBetaSlots - 1; k > 0; --k) out.slots_[k] = slots_[k - 1];
        return out;
    }

    PhaseFunction d_beta() const
    {
        PhaseFunction out(N_);
        out.loss_ = loss_;
        for (int k = 1; k < kBetaSlots; ++k) {
            out.slots_[k - 1] = slots_[k];
            for (auto& c : out.slots_[k - 1]) c *= static_cast<double>(k);
        }
        return out;
    }

    PhaseFunction beta_d_beta() const
    {
        PhaseFunction out = *this;
        for (int k = 0; k < kBetaSlots; ++k)
            for (auto& c : out.slots_[k]) c *= static_cast<double>(k);
        return out;
    }

    /// Squared norm of the coefficients outside the u(alpha*) + beta v(alpha) pattern.
    double off_form_norm2() const
    {
        double s = 0.0;
        for (std::size_t m = 0; m <= N_; ++m)
            for (std::size_t n = 0; n <= N_; ++n) {
                if (m != 0) s += std::norm(at(0, m, n));
                if (n != 0) s += std::norm(at(1, m, n));
                s += std::norm(at(2, m, n));
            }
        return s;
    }

    UVRep project() const
    {
        UVRep r(N_);
        for (std::size_t n = 0; n <= N_; ++n) {
            r.u[n] = at(0, 0, n);
            r.v[n] = at(1, n, 0);
        }
        return r;
    }

private:
    // Derivative or multiplication in alpha (first index) or alpha* (second).
    PhaseFunction ladder(bool in_alpha, bool raise) const
    {
        PhaseFunction out(N_);
        out.loss_ = loss_;
        for (int k = 0; k < kBetaSlots; ++k)
            for (std::size_t m = 0; m <= N_; ++m)
                for (std::size_t n = 0; n <= N_; ++n) {
                    const cplx c = at(k, m, n);
                    if (c == 0.0) continue;
                    const std::size_t j = in_alpha ? m : n;
                    if (raise) {
                        const double w = std::sqrt(static_cast<double>(j + 1));
                        if (j == N_) {
                            out.loss_ += w * w * std::norm(c);
                            continue;
                        }
                        (in_alpha ? out.at(k, m + 1, n) : out.at(k, m, n + 1)) += w * c;
                    } else if (j > 0) {
                        const double w = std::sqrt(static_cast<double>(j));
                        (in_alpha ? out.at(k, m - 1, n) : out.at(k, m, n - 1)) += w * c;
                    }
                }
        return out;
    }

    std::size_t N_;
    std::array<std::vector<cplx>, kBetaSlots> slots_;
    double loss_ = 0.0;
};

// ---------------------------------------------------------------------------

struct UVOpResult {
    UVRep rep;
    double truncation_loss = 0.0;
    double off_form = 0.0; // norm of the part outside the representation space

    bool flagged() const { return truncation_loss > kTruncTol; }
};

namespace detail {

inline UVOpResult finish(const PhaseFunction& f)
{
    return {f.project(), f.truncation_loss(), std::sqrt(f.off_form_norm2())};
}

// Differential-operator actions on f = u(alpha*) + beta v(alpha).
inline PhaseFunction act(FundamentalOp op, const PhaseFunction& f)
{
    const cplx i(0.0, 1.0);
    switch (op) {
    case FundamentalOp::a: // d/dalpha + d/dalpha*
        return f.d_alpha() + f.d_alpha_conj();
    case FundamentalOp::a_dagger: { // alpha* (1 - beta d_beta) + alpha beta d_beta
        const PhaseFunction bd = f.beta_d_beta();
        return (f - bd).times_alpha_conj() + bd.times_alpha();
    }
    case FundamentalOp::sigma1: { // [beta (1 - beta d_beta) + d_beta] after alpha <-> alpha*
        const PhaseFunction g = f.swap_alpha();
        return (g - g.beta_d_beta()).times_beta() + g.d_beta();
    }
    case FundamentalOp::sigma2: { // [i beta (1 - beta d_beta) - i d_beta] after alpha <-> alpha*
        const PhaseFunction g = f.swap_alpha();
        return i * (g - g.beta_d_beta()).times_beta() - i * g.d_beta();
    }
    case FundamentalOp::sigma3: // (1 - beta d_beta) - beta d_beta
        return f - cplx(2.0) * f.beta_d_beta();
    default:
        throw ValidationError("no coherent-state differential action for this operator");
    }
}

} // namespace detail

inline UVOpResult apply_op_uv(FundamentalOp op, const UVRep& r)
{
    return detail::finish(detail::act(op, PhaseFunction::from(r)));
}

/// Applies a word of supported operators, last one first.
inline UVOpResult apply_word_uv(std::initializer_list<FundamentalOp> word, const UVRep& r)
{
    PhaseFunction f = PhaseFunction::from(r);
    for (auto it = std::rbegin(word); it != std::rend(word); ++it) f = detail::act(*it, f);
    return detail::finish(f);
}

// ---------------------------------------------------------------------------
// BdG right-hand side with constant pair potential

/// Coefficient placed on the hole kinetic line of the nonlocal PDE form.
enum class HoleKineticCoefficient { one, quarter };

namespace detail {

// (1 - z^2 + 2 z d_z - d_z^2) with z = alpha or alpha*.
inline PhaseFunction kinetic_poly(const PhaseFunction& f, bool in_alpha)
{
    auto times = [&](const PhaseFunction& g) { return in_alpha ? g.times_alpha() : g.times_alpha_conj(); };
    auto deriv = [&](const PhaseFunction& g) { return in_alpha ? g.d_alpha() : g.d_alpha_conj(); };
    return f - times(times(f)) + cplx(2.0) * times(deriv(f)) - deriv(deriv(f));
}

} // namespace detail

/// Right-hand side of i d/dt f in the nonlocal PDE form:
///   (1/4)(1 - beta d_beta)(1 - a*^2 + 2 a* d_a* - d_a*^2) f
///   - c beta d_beta (1 - a^2 + 2 a d_a - d_a^2) f
///   - mu (1 - 2 beta d_beta) f + delta0 [beta (1 - beta d_beta) + d_beta] f(a*, a, beta)
/// with c = 1 or 1/4.
inline UVOpResult bdg_pde_rhs(const UVRep& r, double mu, double delta0, HoleKineticCoefficient c)
{
    const PhaseFunction f = PhaseFunction::from(r);
    const PhaseFunction bd = f.beta_d_beta();
    const double hole = (c == HoleKineticCoefficient::quarter) ? 0.25 : 1.0;
    PhaseFunction out = cplx(0.25) * detail::kinetic_poly(f - bd, false);
    out = out - cplx(hole) * detail::kinetic_poly(bd, true);
    out = out - cplx(mu) * (f - cplx(2.0) * bd);
    const PhaseFunction g = f.swap_alpha();
    out = out + cplx(delta0) * ((g - g.beta_d_beta()).times_beta() + g.d_beta());
    return detail::finish(out);
}

struct BdgRhsReport {
    UVRep rhs;                // H r built from the operator actions
    double truncation_loss = 0.0;
    double pde_deviation = 0.0;         // |pde(one) - rhs| / |rhs|
    double pde_quarter_deviation = 0.0; // |pde(quarter) - rhs| / |rhs|
};

/// H = (P^2/2 - mu) sigma3 + delta0 sigma1 composed from the operator
/// actions, P = (a - a^dagger)/(sqrt2 i). Also evaluates the nonlocal PDE form
/// with both hole kinetic coefficients and reports their relative deviations.
inline BdgRhsReport bdg_rhs_uv(const UVRep& r, double mu, double delta0)
{
    using Op = FundamentalOp;
    // P^2 / 2 = -(a - a^dagger)^2 / 4
    const PhaseFunction f = PhaseFunction::from(r);
    auto A = [](Op op, const PhaseFunction& g) { return detail::act(op, g); };
    const PhaseFunction s3 = A(Op::sigma3, f);
    const PhaseFunction d = A(Op::a, s3) - A(Op::a_dagger, s3);
    const PhaseFunction d2 = A(Op::a, d) - A(Op::a_dagger, d);
    const PhaseFunction h = cplx(-0.25) * d2 - cplx(mu) * s3 + cplx(delta0) * A(Op::sigma1, f);
    const UVOpResult composed = detail::finish(h);

    BdgRhsReport rep;
    rep.rhs = composed.rep;
    rep.truncation_loss = composed.truncation_loss;
    double scale = 0.0;
    for (std::size_t n = 0; n <= r.cutoff(); ++n) scale += std::norm(rep.rhs.u[n]) + std::norm(rep.rhs.v[n]);
    scale = std::max(std::sqrt(scale), 1e-300);
    rep.pde_deviation = distance(bdg_pde_rhs(r, mu, delta0, HoleKineticCoefficient::one).rep, rep.rhs) / scale;
    rep.pde_quarter_deviation =
        distance(bdg_pde_rhs(r, mu, delta0, HoleKineticCoefficient::quarter).rep, rep.rhs) / scale;
    return rep;
}

} // namespace ehcs
