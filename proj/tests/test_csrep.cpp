#include <ehcs/csrep.hpp>
#include <ehcs/quadrature.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ehcs;
using Op = FundamentalOp;

namespace {

constexpr std::size_t kN = 64;

// Fock-side H = -(a - a^dagger)^2 sigma3 / 4 - mu sigma3 + delta0 sigma1.
SpinorFockState fock_bdg(const SpinorFockState& x, double mu, double delta0)
{
    SpinorFockState s3 = apply_op(Op::sigma3, x).state;
    auto diff = [](const SpinorFockState& y) {
        return apply_op(Op::a, y).state - apply_op(Op::a_dagger, y).state;
    };
    SpinorFockState out = cplx(-0.25) * diff(diff(s3));
    out -= cplx(mu) * s3;
    out += cplx(delta0) * apply_op(Op::sigma1, x).state;
    return out;
}

} // namespace

TEST(UV, Vacuum)
{
    SpinorFockState x(8);
    x.e[0] = 1.0;
    const UVRep r = to_uv(x);
    EXPECT_EQ(r.u[0], cplx(1.0));
    for (std::size_t n = 1; n <= 8; ++n) EXPECT_EQ(r.u[n], cplx(0.0));
    for (auto c : r.v) EXPECT_EQ(c, cplx(0.0));
}

TEST(UV, RoundTrip)
{
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
        const auto x = random_state(rng, kN, kN);
        EXPECT_EQ(distance(from_uv(to_uv(x)), x), 0.0);
    }
}

TEST(UV, AnalyticEhCoefficients)
{
    const cplx a0(0.6, -0.9);
    const cplx b0(1.2, 0.5);
    const UVRep r = to_uv(build_state(CoherentLabel::eh(a0, b0, false), kN));
    // u(alpha*) = exp(a0 alpha*), v(alpha) = b0* exp(a0* alpha)
    double fact = 1.0;
    for (std::size_t n = 0; n < 30; ++n) {
        if (n > 0) fact *= static_cast<double>(n);
        const double s = std::sqrt(fact);
        EXPECT_LT(std::abs(r.u[n] - std::pow(a0, double(n)) / s), 1e-12);
        EXPECT_LT(std::abs(r.v[n] - std::conj(b0) * std::pow(std::conj(a0), double(n)) / s), 1e-12);
    }
    const cplx alpha(0.3, 0.2);
    EXPECT_LT(std::abs(r.u_at(alpha) - std::exp(a0 * std::conj(alpha))), 1e-12);
    EXPECT_LT(std::abs(r.v_at(alpha) - std::conj(b0) * std::exp(std::conj(a0) * alpha)), 1e-12);
}

TEST(UV, AmplitudePrefactor)
{
    std::mt19937_64 rng(2);
    const auto x = random_state(rng, 24, 24);
    const UVRep r = to_uv(x);
    int mismatched = 0;
    for (int k = 0; k < 20; ++k) {
        const auto L = random_label(rng, Flavor::eh, 1.5, 3.0);
        const cplx b = L.beta.value();
        const cplx oracle = inner(build_state(L, 24, TailCheck::ignore), x);
        EXPECT_LT(std::abs(cs_amplitude(r, L.alpha, b) - oracle), 1e-12);
        // a prefactor 1/(1 + |beta|^2) instead of its square root
        const cplx other = std::exp(-0.5 * std::norm(L.alpha)) / (1.0 + std::norm(b)) * r.f_at(L.alpha, b);
        if (std::abs(other - oracle) > 1e-6 * std::abs(oracle)) ++mismatched;
    }
    EXPECT_EQ(mismatched, 20);
}

TEST(UV, ScalarProductByQuadrature)
{
    std::mt19937_64 rng(3);
    QuadratureSpec spec;
    spec.alpha_radius = 9.0;
    const auto nodes = alpha_rule(spec);
    for (int k = 0; k < 20; ++k) {
        const auto x1 = random_state(rng, 12, 12);
        const auto x2 = random_state(rng, 12, 12);
        const UVRep r1 = to_uv(x1), r2 = to_uv(x2);
        cplx s = 0.0;
        for (const auto& n : nodes)
            s += n.weight / M_PI * std::exp(-std::norm(n.point)) *
                 (std::conj(r1.u_at(n.point)) * r2.u_at(n.point) + std::conj(r1.v_at(n.point)) * r2.v_at(n.point));
        EXPECT_LT(std::abs(s - inner(x1, x2)), 1e-8);
    }
}

TEST(UVOps, Sigma3)
{
    std::mt19937_64 rng(4);
    const UVRep r = to_uv(random_state(rng, 16, 16));
    const UVOpResult s = apply_op_uv(Op::sigma3, r);
    for (std::size_t n = 0; n <= 16; ++n) {
        EXPECT_EQ(s.rep.u[n], r.u[n]);
        EXPECT_EQ(s.rep.v[n], -r.v[n]);
    }
}

TEST(UVOps, CommutingSquare)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const auto x = random_state(rng, kN, kN - 4);
        const UVRep r = to_uv(x);
        for (auto op : {Op::a, Op::a_dagger, Op::sigma1, Op::sigma2, Op::sigma3}) {
            const UVOpResult got = apply_op_uv(op, r);
            const OpResult want = apply_op(op, x);
            EXPECT_LT(distance(from_uv(got.rep), want.state), 1e-10);
            EXPECT_EQ(got.off_form, 0.0);
            EXPECT_FALSE(got.flagged());
        }
    }
}

TEST(UVOps, TruncationMatchesFock)
{
    SpinorFockState x(6);
    x.e[6] = 1.0;
    x.h[6] = 0.5;
    const UVOpResult got = apply_op_uv(Op::a_dagger, to_uv(x));
    EXPECT_NEAR(got.truncation_loss, apply_op(Op::a_dagger, x).truncation_loss, 1e-14);
    EXPECT_TRUE(got.flagged());
}

TEST(UVOps, UnsupportedOperator)
{
    EXPECT_THROW(apply_op_uv(Op::Q, UVRep(4)), ValidationError);
}

TEST(UVOps, WordsCompose)
{
    std::mt19937_64 rng(6);
    const auto x = random_state(rng, 32, 20);
    const auto got = apply_word_uv({Op::sigma1, Op::a_dagger, Op::a}, to_uv(x));
    const auto want = apply_word({Op::sigma1, Op::a_dagger, Op::a}, x);
    EXPECT_LT(distance(from_uv(got.rep), want.state), 1e-10);
}

TEST(Bdg, FreeKinetic)
{
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        const auto x = random_state(rng, kN, kN - 4);
        const BdgRhsReport rep = bdg_rhs_uv(to_uv(x), 0.0, 0.0);
        EXPECT_LT(distance(from_uv(rep.rhs), fock_bdg(x, 0.0, 0.0)), 1e-10);
    }
}

TEST(Bdg, MatchesFockWithPairing)
{
    std::mt19937_64 rng(8);
    for (int k = 0; k < 10; ++k) {
        const auto x = random_state(rng, kN, kN - 4);
        const BdgRhsReport rep = bdg_rhs_uv(to_uv(x), 1.3, 0.7);
        EXPECT_LT(distance(from_uv(rep.rhs), fock_bdg(x, 1.3, 0.7)), 1e-10);
        EXPECT_FALSE(rep.truncation_loss > kTruncTol);
    }
}

TEST(Bdg, Eigencheck)
{
    const std::size_t N = 24;
    const double mu = 2.0, delta0 = 0.5;
    const std::size_t dim = 2 * (N + 1);
    Eigen::MatrixXcd H(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        SpinorFockState b(N);
        (j <= N ? b.e[j] : b.h[j - N - 1]) = 1.0;
        const auto col = fock_bdg(b, mu, delta0);
        for (std::size_t n = 0; n <= N; ++n) {
            H(n, j) = col.e[n];
            H(N + 1 + n, j) = col.h[n];
        }
    }
    ASSERT_LT((H - H.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    for (Eigen::Index k : {Eigen::Index(0), Eigen::Index(7), Eigen::Index(dim - 1)}) {
        SpinorFockState x(N);
        for (std::size_t n = 0; n <= N; ++n) {
            x.e[n] = es.eigenvectors()(n, k);
            x.h[n] = es.eigenvectors()(N + 1 + n, k);
        }
        const BdgRhsReport rep = bdg_rhs_uv(to_uv(x), mu, delta0);
        UVRep expect = to_uv(x);
        for (auto& c : expect.u) c *= es.eigenvalues()(k);
        for (auto& c : expect.v) c *= es.eigenvalues()(k);
        EXPECT_LT(distance(rep.rhs, expect), 1e-9 * std::max(1.0, std::abs(es.eigenvalues()(k))));
    }
}

TEST(Bdg, PdeFormDeviation)
{
    std::mt19937_64 rng(9);
    double worst_quarter = 0.0, best_one = 1e300;
    for (int k = 0; k < 100; ++k) {
        const auto x = random_state(rng, kN, kN - 4);
        const BdgRhsReport rep = bdg_rhs_uv(to_uv(x), 1.0, 0.8);
        worst_quarter = std::max(worst_quarter, rep.pde_quarter_deviation);
        best_one = std::min(best_one, rep.pde_deviation);
    }
    EXPECT_LT(worst_quarter, 1e-12);
    EXPECT_GT(best_one, 0.1);
}

TEST(Bdg, PdeFormAgreesOnElectronOnlyStates)
{
    // The hole kinetic line only acts on v; with v = 0 and no pairing both forms agree.
    std::mt19937_64 rng(10);
    auto x = random_state(rng, kN, kN - 4);
    for (auto& c : x.h.amps) c = 0.0;
    const BdgRhsReport rep = bdg_rhs_uv(to_uv(x), 0.4, 0.0);
    EXPECT_LT(rep.pde_deviation, 1e-12);
}
