#include <ehcs/scattering.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ehcs;

namespace {

const Grid1D kStepGrid{-64.0, 64.0, 16384};

struct Row {
    double delta0, mu;
};
const Row kRows[] = {{2.0, 10.0}, {8.0, 10.0}, {20.0, 100.0}};
const double kFractions[] = {0.0, 0.25, 0.5, 0.99, 1.5};

// Analytic superconducting-side solution and derivative.
std::array<cplx, 4> step_right(const ScatteringSolution& s, double q)
{
    const ModeSet m = step_modes(s.E, s.mu, s.delta0);
    const cplx I(0.0, 1.0);
    const cplx p = s.t[0] * std::exp(I * m.kappa_plus * q), n = s.t[1] * std::exp(I * m.kappa_minus * q);
    return {p * m.spinor_plus(0) + n * m.spinor_minus(0), I * m.kappa_plus * p * m.spinor_plus(0) + I * m.kappa_minus * n * m.spinor_minus(0),
            p * m.spinor_plus(1) + n * m.spinor_minus(1), I * m.kappa_plus * p * m.spinor_plus(1) + I * m.kappa_minus * n * m.spinor_minus(1)};
}

// Classical RK4 on (psi_e, psi_e', psi_h, psi_h') with constant pairing d.
std::array<cplx, 4> rk4(std::array<cplx, 4> y, double E, double mu, double d, double q1, int steps)
{
    auto f = [&](const std::array<cplx, 4>& x) {
        return std::array<cplx, 4>{x[1], -2.0 * (E + mu) * x[0] + 2.0 * d * x[2], x[3], 2.0 * (E - mu) * x[2] - 2.0 * d * x[0]};
    };
    const double h = q1 / steps;
    for (int s = 0; s < steps; ++s) {
        auto add = [](std::array<cplx, 4> a, const std::array<cplx, 4>& b, double c) {
            for (int i = 0; i < 4; ++i) a[i] += c * b[i];
            return a;
        };
        const auto k1 = f(y), k2 = f(add(y, k1, h / 2)), k3 = f(add(y, k2, h / 2)), k4 = f(add(y, k3, h));
        for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

// Im sqrt(z) = sqrt((|z| - Re z)/2), written out to stay independent of the library branch handling.
double delta_oracle(double E, double mu, double d0)
{
    const double re = 2.0 * mu, im = 2.0 * std::sqrt(d0 * d0 - E * E);
    return 1.0 / (2.0 * std::sqrt(0.5 * (std::hypot(re, im) - re)));
}

} // namespace

TEST(Step, DeltaFormulaValue)
{
    EXPECT_NEAR(delta_formula(0.0, 10.0, 2.0), delta_oracle(0.0, 10.0, 2.0), 1e-13);
    EXPECT_NEAR(delta_formula(0.0, 10.0, 2.0), 1.1236, 1e-4);
    EXPECT_THROW(delta_formula(2.0, 10.0, 2.0), ValidationError);
}

TEST(Step, CurrentConservation)
{
    for (const auto& r : kRows)
        for (double f : kFractions) {
            const auto s = solve_step(f * r.delta0, r.mu, r.delta0, kStepGrid);
            EXPECT_LT(s.current_error(), 1e-8) << r.delta0 << ' ' << r.mu << ' ' << f;
            if (f < 1.0) EXPECT_EQ(s.current_transmitted, 0.0);
        }
}

TEST(Step, MiddleRowReflectionSum)
{
    const auto s = solve_step(5.0, 10.0, 8.0, kStepGrid);
    const double sum = std::norm(s.r_ee) + s.k_h.real() / s.k_e * std::norm(s.r_eh);
    EXPECT_NEAR(sum, 1.0, 1e-8);
    EXPECT_GT(std::abs(s.r_eh), 0.5);
}

TEST(Step, SweepMatchesSingleSolves)
{
    const std::vector<double> es{0.0, 0.5, 1.0, 3.0};
    const auto sweep = solve_step_sweep(es, 10.0, 2.0, kStepGrid);
    for (std::size_t i = 0; i < es.size(); ++i) EXPECT_EQ(sweep[i].r_eh, solve_step(es[i], 10.0, 2.0, kStepGrid).r_eh);
}

TEST(Step, AboveMuHoleIsEvanescent)
{
    const auto s = solve_step(12.0, 10.0, 8.0, kStepGrid);
    EXPECT_GT(s.k_h.imag(), -1e300);
    EXPECT_LT(s.k_h.imag(), 0.0);
    EXPECT_LT(s.current_error(), 1e-8);
    EXPECT_LT(std::abs(s.state.h[0]), 1e-20);
}

TEST(Step, OdeOracle)
{
    for (const auto& r : kRows)
        for (double f : {0.0, 0.5, 1.5}) {
            const auto s = solve_step(f * r.delta0, r.mu, r.delta0, kStepGrid);
            const auto y = rk4(step_right(s, 0.0), s.E, s.mu, s.delta0, 2.0, 20000);
            const auto want = step_right(s, 2.0);
            double scale = 0.0, err = 0.0;
            for (int i = 0; i < 4; ++i) {
                scale = std::max(scale, std::abs(step_right(s, 0.0)[i]));
                err = std::max(err, std::abs(y[i] - want[i]));
            }
            EXPECT_LT(err / scale, 1e-6) << r.delta0 << ' ' << r.mu << ' ' << f;
            // the grid state is the same function
            const std::size_t j = kStepGrid.index_of(2.0);
            const auto at = step_right(s, kStepGrid.q(j));
            EXPECT_EQ(s.state.e[j], at[0]);
        }
}

TEST(Step, NormalSideMatchesOdeOracle)
{
    // integrate from 0 into the normal region and compare with the plane-wave ansatz
    const auto s = solve_step(3.0, 10.0, 8.0, kStepGrid);
    const auto y = rk4(step_right(s, 0.0), s.E, s.mu, 0.0, -1.5, 15000);
    const cplx I(0.0, 1.0);
    const double q = -1.5;
    const cplx pe = std::exp(I * s.k_e * q) + s.r_ee * std::exp(-I * s.k_e * q);
    const cplx ph = s.r_eh * std::exp(I * s.k_h * q);
    EXPECT_LT(std::abs(y[0] - pe), 1e-6);
    EXPECT_LT(std::abs(y[2] - ph), 1e-6);
}

TEST(Step, FiniteDifferenceResidual)
{
    const Grid1D g{-8.0, 8.0, 16384};
    for (const auto& r : kRows)
        for (double f : {0.25, 1.5}) {
            const auto s = solve_step(f * r.delta0, r.mu, r.delta0, g);
            const double h = g.dq();
            double worst = 0.0;
            for (std::size_t j = 2; j + 2 < g.n_points; ++j) {
                const double q = g.q(j);
                if (std::abs(q) < 0.1 || std::abs(q) > 3.0) continue;
                auto d2 = [&](const std::vector<cplx>& x) {
                    return (-x[j + 2] + 16.0 * x[j + 1] - 30.0 * x[j] + 16.0 * x[j - 1] - x[j - 2]) / (12.0 * h * h);
                };
                const double d = q > 0.0 ? s.delta0 : 0.0;
                const cplx re = -0.5 * d2(s.state.e) - s.mu * s.state.e[j] + d * s.state.h[j] - s.E * s.state.e[j];
                const cplx rh = 0.5 * d2(s.state.h) + s.mu * s.state.h[j] + d * s.state.e[j] - s.E * s.state.h[j];
                const double scale = s.mu * (std::abs(s.state.e[j]) + std::abs(s.state.h[j])) + 1e-300;
                if (std::abs(s.state.e[j]) + std::abs(s.state.h[j]) < 1e-6) continue;
                worst = std::max(worst, (std::abs(re) + std::abs(rh)) / scale);
            }
            EXPECT_LT(worst, 1e-6) << r.delta0 << ' ' << r.mu << ' ' << f;
        }
}

TEST(Step, VanishingPairPotential)
{
    const auto s = solve_step(1.0, 10.0, 1e-9, kStepGrid);
    EXPECT_LT(std::abs(s.r_eh), 1e-8);
    EXPECT_LT(std::abs(s.r_ee), 1e-8);
}

TEST(Step, SingularMatchingReported)
{
    const Eigen::Vector4cd y(1.0, cplx(0.0, 2.0), 0.5, cplx(0.0, 1.0));
    try {
        match_at_origin(4.0, 3.0, y, y);
        FAIL() << "expected SingularMatching";
    } catch (const SingularMatching& e) {
        EXPECT_GT(e.condition_number, kSingularCondition);
    }
    EXPECT_THROW(solve_step(0.0, 10.0, 0.0, kStepGrid), SingularMatching);
}

TEST(Step, GapEdgeIsRegular)
{
    const auto s = solve_step(2.0, 10.0, 2.0, kStepGrid);
    EXPECT_LT(s.current_error(), 1e-8);
}

TEST(Step, GridPreconditions)
{
    EXPECT_THROW(solve_step(0.0, 10.0, 2.0, Grid1D{-64.0, 64.0, 256}), ValidationError);
    EXPECT_THROW(solve_step(0.0, 10.0, 2.0, Grid1D{1.0, 64.0, 16384}), ValidationError);
    EXPECT_THROW(solve_step(-1.0, 10.0, 2.0, kStepGrid), ValidationError);
}

TEST(Step, ZeroEnergyParticleHoleEnvelopes)
{
    for (const auto& r : kRows) {
        const auto s = solve_step(0.0, r.mu, r.delta0, kStepGrid);
        const ModeSet m = step_modes(0.0, r.mu, r.delta0);
        const double env_e = std::abs(s.t[0] * m.spinor_plus(0)) + std::abs(s.t[1] * m.spinor_minus(0));
        const double env_h = std::abs(s.t[0] * m.spinor_plus(1)) + std::abs(s.t[1] * m.spinor_minus(1));
        EXPECT_NEAR(env_e, env_h, 1e-6 * env_e);
    }
}

TEST(Step, PenetrationDepthFit)
{
    for (const auto& r : kRows)
        for (double f : {0.0, 0.25, 0.5, 0.99}) {
            const double E = f * r.delta0;
            const auto s = solve_step(E, r.mu, r.delta0, kStepGrid);
            const double want = delta_oracle(E, r.mu, r.delta0);
            EXPECT_NEAR(penetration_depth_fit(s), want, 0.01 * want) << r.delta0 << ' ' << r.mu << ' ' << f;
        }
    const auto s = solve_step(0.0, 10.0, 2.0, kStepGrid);
    EXPECT_NEAR(penetration_depth_fit(s), 1.1236, 0.01 * 1.1236);
}

TEST(Step, PenetrationWindowOutsideGrid)
{
    const auto s = solve_step(1.98, 10.0, 2.0, Grid1D{-16.0, 16.0, 8192});
    EXPECT_THROW(penetration_depth_fit(s), ValidationError);
}

TEST(Step, DepthTrends)
{
    double prev = 0.0;
    for (double E = 0.0; E < 2.0; E += 0.1) {
        const double d = delta_formula(E, 10.0, 2.0);
        EXPECT_GT(d, prev);
        prev = d;
    }
    // fixed delta0^2 - E^2, doubled mu: the depth grows
    for (double mu : {1.0, 10.0, 100.0}) EXPECT_GT(delta_formula(0.0, 2.0 * mu, 2.0), delta_formula(0.0, mu, 2.0));
}

TEST(Step, CsvExport)
{
    const auto s = solve_step(0.0, 10.0, 2.0, Grid1D{-8.0, 8.0, 1024});
    std::ostringstream os;
    write_csv(os, s);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "q,Re_psi_e,Im_psi_e,Re_psi_h,Im_psi_h");
}

namespace {

struct LinRow {
    double E, mu, nu;
    Grid1D grid;
};
const LinRow kLinRows[] = {{0.1, 1.0, 0.75, {-32.0, 32.0, 2048}},
                           {50.0, 100.0, 10.0, {-16.0, 16.0, 4096}},
                           {0.1, 10.0, 0.002, {-64.0, 448.0, 8192}},
                           {0.3, 10.0, 0.002, {-64.0, 448.0, 8192}}};

} // namespace

TEST(Linear, CurrentAndAsymptoticIndependence)
{
    for (const auto& r : kLinRows) {
        const auto s = solve_linear(r.E, r.mu, r.nu, r.grid);
        EXPECT_LT(s.current_error(), 1e-6) << r.E << ' ' << r.mu << ' ' << r.nu;
        EXPECT_GT(std::abs(s.r_eh), 0.0);
        LinearOptions opt;
        opt.q_max = 2.0 * s.q_max_used;
        const auto d = solve_linear(r.E, r.mu, r.nu, r.grid, opt);
        EXPECT_LT(std::abs(d.r_ee - s.r_ee), 1e-6);
        EXPECT_LT(std::abs(d.r_eh - s.r_eh), 1e-6);
    }
}

TEST(Linear, StateIsContinuousAndDecays)
{
    const auto& r = kLinRows[1];
    const auto s = solve_linear(r.E, r.mu, r.nu, r.grid);
    const std::size_t j = r.grid.index_of(0.0);
    EXPECT_LT(std::abs(s.state.e[j] - s.state.e[j - 1]), 0.2 * std::abs(s.state.e[j]) + 0.2);
    EXPECT_LT(std::abs(s.state.e.back()) + std::abs(s.state.h.back()), 1e-10);
}

TEST(Linear, MatchesOdeOracle)
{
    // integrate the assembled boundary data forward with RK4 where Delta = nu q
    const auto& r = kLinRows[0];
    const auto s = solve_linear(r.E, r.mu, r.nu, r.grid);
    const Grid1D& g = r.grid;
    const std::size_t j0 = g.index_of(0.0);
    const std::size_t j1 = g.index_of(2.0);
    const double h = g.dq();
    auto d1 = [&](const std::vector<cplx>& x, std::size_t j) {
        return (-x[j + 2] + 8.0 * x[j + 1] - 8.0 * x[j - 1] + x[j - 2]) / (12.0 * h);
    };
    std::array<cplx, 4> y{s.state.e[j0 + 2], d1(s.state.e, j0 + 2), s.state.h[j0 + 2], d1(s.state.h, j0 + 2)};
    const double q0 = g.q(j0 + 2);
    const int steps = 4000;
    const double hh = (g.q(j1) - q0) / steps;
    double q = q0;
    for (int k = 0; k < steps; ++k) {
        auto f = [&](const std::array<cplx, 4>& x, double qq) {
            const double d = r.nu * qq;
            return std::array<cplx, 4>{x[1], -2.0 * (r.E + r.mu) * x[0] + 2.0 * d * x[2], x[3],
                                       2.0 * (r.E - r.mu) * x[2] - 2.0 * d * x[0]};
        };
        auto add = [](std::array<cplx, 4> a, const std::array<cplx, 4>& b, double c) {
            for (int i = 0; i < 4; ++i) a[i] += c * b[i];
            return a;
        };
        const auto k1 = f(y, q), k2 = f(add(y, k1, hh / 2), q + hh / 2), k3 = f(add(y, k2, hh / 2), q + hh / 2),
                   k4 = f(add(y, k3, hh), q + hh);
        for (int i = 0; i < 4; ++i) y[i] += hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        q += hh;
    }
    // limited by the finite-difference starting derivative
    EXPECT_LT(std::abs(y[0] - s.state.e[j1]), 1e-6);
    EXPECT_LT(std::abs(y[2] - s.state.h[j1]), 1e-6);
}

TEST(Linear, VanishingSlopeIsAdiabatic)
{
    // Delta = nu q still exceeds E beyond q = E/nu, so a gentle ramp Andreev
    // reflects everything rather than letting the electron through
    double prev = 1.0;
    for (double nu : {0.1, 0.01, 1e-3}) {
        const auto s = solve_linear(0.1, 1.0, nu, Grid1D{-32.0, 32.0, 2048});
        EXPECT_LT(s.current_error(), 1e-6);
        EXPECT_LT(std::abs(s.r_ee), prev);
        prev = std::abs(s.r_ee);
        EXPECT_NEAR(s.k_h.real() / s.k_e * std::norm(s.r_eh), 1.0 - std::norm(s.r_ee), 1e-6);
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Linear, RegimeBoundaryFollowsEnergyOverSlope)
{
    for (std::size_t i = 1; i < 4; ++i) {
        const auto& r = kLinRows[i];
        const auto rep = locate_regime_boundary(solve_linear(r.E, r.mu, r.nu, r.grid));
        ASSERT_TRUE(std::isfinite(rep.q_boundary));
        // the envelope is still flat at E/nu and has decayed by half shortly after
        EXPECT_GT(rep.q_boundary, 0.9 * rep.q_energy_over_slope);
        EXPECT_LT(rep.q_boundary, 1.6 * rep.q_energy_over_slope);
        // nu/E lies far below the boundary
        EXPECT_LT(rep.q_slope_over_energy, 0.1 * rep.q_boundary);
    }
}

TEST(Linear, Preconditions)
{
    EXPECT_THROW(solve_linear(0.0, 1.0, 0.75, kLinRows[0].grid), ValidationError);
    EXPECT_THROW(solve_linear(0.1, 1.0, 0.0, kLinRows[0].grid), ValidationError);
}
