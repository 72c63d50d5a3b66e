#pragma once

// Fixed-order quadrature over the alpha plane and the beta sphere.
//
// alpha plane: Gauss-Legendre in |alpha| on [0, R], trapezoid in arg(alpha).
// beta sphere: beta = tan(theta/2) e^{i phi}; the measure d^2beta/(1+|beta|^2)^2
// becomes (1/4) d(cos theta) d phi, Gauss-Legendre in cos theta, trapezoid in phi.

#include <ehcs/closed_forms.hpp>
#include <ehcs/fock.hpp>

#include <Eigen/Dense>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ehcs {

struct QuadratureSpec {
    int radial_nodes = 64;
    int angular_nodes = 64;
    double alpha_radius = 8.0;
    int beta_polar_nodes = 16;
    int beta_azimuth_nodes = 16;

    QuadratureSpec doubled() const
    {
        return {2 * radial_nodes, 2 * angular_nodes, alpha_radius, 2 * beta_polar_nodes,
                2 * beta_azimuth_nodes};
    }
};

/// Default tolerances for resolution checks: 2-D families and the 4-D eh family.
inline constexpr double kResolutionTol2D = 1e-8;
inline constexpr double kResolutionTolEh = 1e-6;

struct QuadNode {
    cplx point;
    double weight;
};

namespace detail {

struct GlTableDeleter {
    void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};

/// Gauss-Legendre nodes and weights on [a, b].
inline std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b)
{
    std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter> table(
        gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)));
    std::vector<std::pair<double, double>> out(n);
    for (int i = 0; i < n; ++i)
        gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &out[i].first, &out[i].second,
                                      table.get());
    return out;
}

inline void check_nodes(const QuadratureSpec& spec)
{
    if (spec.radial_nodes < 8 || spec.angular_nodes < 8 || spec.beta_polar_nodes < 8 ||
        spec.beta_azimuth_nodes < 8)
        throw SpecInsufficient("quadrature node counts must be at least 8");
    if (!(spec.alpha_radius > 0.0)) throw SpecInsufficient("alpha_radius must be positive");
}

/// Rejects specs that cannot resolve number states up to probe_cutoff.
inline void check_probe(const QuadratureSpec& spec, std::size_t probe_cutoff)
{
    if (spec.angular_nodes <= static_cast<int>(2 * probe_cutoff))
        throw SpecInsufficient("angular_nodes = " + std::to_string(spec.angular_nodes) +
                               " cannot integrate phases up to order " + std::to_string(2 * probe_cutoff));
    const double tail = gsl_sf_gamma_inc_Q(static_cast<double>(probe_cutoff) + 1.0,
                                           spec.alpha_radius * spec.alpha_radius);
    if (tail > 1e-3)
        throw SpecInsufficient("alpha_radius = " + std::to_string(spec.alpha_radius) +
                               " truncates the radial weight of level " + std::to_string(probe_cutoff) +
                               " by " + std::to_string(tail));
}

} // namespace detail

/// Nodes for the plain area element d^2alpha on |alpha| <= R.
inline std::vector<QuadNode> alpha_rule(const QuadratureSpec& spec)
{
    detail::check_nodes(spec);
    const auto radial = detail::gauss_legendre(spec.radial_nodes, 0.0, spec.alpha_radius);
    const double dphi = 2.0 * M_PI / spec.angular_nodes;
    std::vector<QuadNode> out;
    out.reserve(radial.size() * spec.angular_nodes);
    for (const auto& [r, w] : radial)
        for (int j = 0; j < spec.angular_nodes; ++j)
            out.push_back({std::polar(r, dphi * j), w * r * dphi});
    return out;
}

/// Nodes for d^2beta / (1 + |beta|^2)^2 over the whole plane (total mass pi).
inline std::vector<QuadNode> beta_rule(const QuadratureSpec& spec)
{
    detail::check_nodes(spec);
    const auto polar = detail::gauss_legendre(spec.beta_polar_nodes, -1.0, 1.0);
    const double dphi = 2.0 * M_PI / spec.beta_azimuth_nodes;
    std::vector<QuadNode> out;
    out.reserve(polar.size() * spec.beta_azimuth_nodes);
    for (const auto& [x, w] : polar) {
        const double t = std::sqrt((1.0 - x) / (1.0 + x));
        for (int j = 0; j < spec.beta_azimuth_nodes; ++j) out.push_back({std::polar(t, dphi * j), 0.25 * w * dphi});
    }
    return out;
}

/// (1/pi) int d^2beta f(beta) / (1 + |beta|^2)^power, the normalized sphere
/// measure for power = 2. The result is recomputed on a doubled chart and a
/// disagreement above rel_tol is reported as divergence.
inline cplx beta_sphere_integral(const std::function<cplx(cplx)>& f, int power,
                                 const QuadratureSpec& spec = {}, double rel_tol = 1e-8)
{
    auto integrate = [&](const QuadratureSpec& s) {
        cplx sum = 0.0;
        for (const auto& node : beta_rule(s))
            sum += node.weight * f(node.point) * std::pow(1.0 + std::norm(node.point), 2 - power);
        return sum / M_PI;
    };
    const cplx coarse = integrate(spec);
    const cplx fine = integrate(spec.doubled());
    if (!std::isfinite(std::abs(fine)) || std::abs(fine - coarse) > rel_tol * std::max(1.0, std::abs(fine)))
        throw SpecInsufficient("beta integral does not converge under chart refinement (" +
                               std::to_string(std::abs(coarse)) + " vs " + std::to_string(std::abs(fine)) + ")");
    return fine;
}

namespace detail {

/// Coordinates <n,s|L> on the probe block, electron block first.
inline Eigen::VectorXcd probe_coordinates(const CoherentLabel& L, std::size_t probe_cutoff)
{
    const SpinorFockState s = build_state(L, probe_cutoff, TailCheck::ignore);
    const std::size_t d = probe_cutoff + 1;
    Eigen::VectorXcd u(2 * d);
    for (std::size_t n = 0; n < d; ++n) {
        u(n) = s.e[n];
        u(d + n) = s.h[n];
    }
    return u;
}

} // namespace detail

/// Max |M - 1| over the probe block, where M = int dmu |L><L| with the
/// family's measure:
///   standard (1/pi) d^2alpha,  spin (2/pi) d^2beta/(1+|beta|^2)^2,
///   product and eh (2/pi^2) d^2alpha d^2beta/(1+|beta|^2)^2.
inline double verify_resolution(Flavor flavor, const QuadratureSpec& spec, std::size_t probe_cutoff)
{
    detail::check_nodes(spec);
    if (flavor == Flavor::spin) {
        Eigen::Matrix2cd M = Eigen::Matrix2cd::Zero();
        for (const auto& b : beta_rule(spec)) {
            const auto [cp, cm] = Beta(b.point).spin_weights();
            Eigen::Vector2cd u(cp, cm);
            M += (2.0 / M_PI) * b.weight * u * u.adjoint();
        }
        return (M - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    }

    detail::check_probe(spec, probe_cutoff);
    const std::size_t d = probe_cutoff + 1;
    const auto alphas = alpha_rule(spec);

    if (flavor == Flavor::standard) {
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& a : alphas) {
            const FockVector c = coherent_fock(a.point, probe_cutoff, true, TailCheck::ignore);
            Eigen::Map<const Eigen::VectorXcd> u(c.amps.data(), static_cast<Eigen::Index>(d));
            M.noalias() += (a.weight / M_PI) * u * u.adjoint();
        }
        return (M - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    }

    const auto betas = beta_rule(spec);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    Eigen::VectorXcd u(2 * d);
    for (const auto& a : alphas) {
        const FockVector c = coherent_fock(a.point, probe_cutoff, true, TailCheck::ignore);
        Eigen::MatrixXcd Ma = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
        for (const auto& b : betas) {
            const Beta beta(b.point);
            const auto [cp, cm] = (flavor == Flavor::eh) ? beta.conj().spin_weights() : beta.spin_weights();
            for (std::size_t n = 0; n < d; ++n) {
                u(n) = cp * c[n];
                u(d + n) = cm * ((flavor == Flavor::eh) ? std::conj(c[n]) : c[n]);
            }
            Ma.noalias() += b.weight * u * u.adjoint();
        }
        M += (2.0 / (M_PI * M_PI)) * a.weight * Ma;
    }
    return (M - Eigen::MatrixXcd::Identity(2 * d, 2 * d)).cwiseAbs().maxCoeff();
}

/// Linear operator on truncated states.
using LinearMap = std::function<SpinorFockState(const SpinorFockState&)>;

/// tr O computed as the phase-space integral of <L|O|L> over the family's measure.
/// Coherent states are truncated at probe_cutoff; O acts on that truncation.
inline cplx trace_via_cs(const LinearMap& op, Flavor flavor, const QuadratureSpec& spec, std::size_t probe_cutoff)
{
    detail::check_nodes(spec);
    if (flavor != Flavor::spin) detail::check_probe(spec, probe_cutoff);
    const std::size_t d = probe_cutoff + 1;

    // Matrix of O on the probe block, columns are images of basis vectors.
    Eigen::MatrixXcd O(2 * d, 2 * d);
    for (std::size_t k = 0; k < 2 * d; ++k) {
        SpinorFockState basis(probe_cutoff);
        (k < d ? basis.e[k] : basis.h[k - d]) = 1.0;
        const SpinorFockState img = op(basis);
        if (img.cutoff() != probe_cutoff) throw CutoffMismatch("operator changed the cutoff");
        for (std::size_t n = 0; n < d; ++n) {
            O(n, k) = img.e[n];
            O(d + n, k) = img.h[n];
        }
    }
    auto symbol = [&](const CoherentLabel& L) {
        const Eigen::VectorXcd u = detail::probe_coordinates(L, probe_cutoff);
        return u.dot(O * u); // conj(u)^T O u
    };

    cplx sum = 0.0;
    switch (flavor) {
    case Flavor::standard:
        for (const auto& a : alpha_rule(spec)) sum += a.weight / M_PI * symbol(CoherentLabel::standard(a.point));
        break;
    case Flavor::spin:
        for (const auto& b : beta_rule(spec)) sum += 2.0 * b.weight / M_PI * symbol(CoherentLabel::spin(b.point));
        break;
    case Flavor::product:
    case Flavor::eh: {
        const auto betas = beta_rule(spec);
        for (const auto& a : alpha_rule(spec)) {
            cplx inner_sum = 0.0;
            for (const auto& b : betas) inner_sum += b.weight * symbol({a.point, Beta(b.point), flavor, true});
            sum += 2.0 / (M_PI * M_PI) * a.weight * inner_sum;
        }
        break;
    }
    }
    return sum;
}

} // namespace ehcs
