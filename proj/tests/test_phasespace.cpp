#include <ehcs/phasespace.hpp>
#include <ehcs/scattering.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

using namespace ehcs;

namespace {

const Grid1D kGrid{-16.0, 16.0, 1024};
const FieldWindow kWindow{{-6.0, 6.0, 97}, {-8.0, 8.0, 81}};

double max_abs_diff(const PhaseSpaceField& a, const PhaseSpaceField& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

// Kernel from number-basis projections, sampled on the window.
PhaseSpaceField kernel_field(const Ensemble& rho, Convention c, const FieldWindow& w)
{
    PhaseSpaceField f;
    f.q_axis = w.q;
    f.second_axis = w.second;
    f.convention = c;
    f.values.resize(w.q.n * w.second.n);
    for (std::size_t r = 0; r < w.second.n; ++r)
        for (std::size_t i = 0; i < w.q.n; ++i)
            f.at(r, i) = reduced_husimi_kernel(rho, alpha_from_qv(w.q.value(i), w.second.value(r)), c);
    return f;
}

} // namespace

TEST(HusimiFull, ProjectorOnItself)
{
    const cplx a0 = alpha_from_qv(0.3, -1.2);
    const Beta b0(cplx(0.5, 0.2));
    const auto eh = pure(build_state(CoherentLabel{a0, b0, Flavor::eh, true}));
    const auto pr = pure(build_state(CoherentLabel{a0, b0, Flavor::product, true}));
    EXPECT_NEAR(husimi_full(eh, {{a0, b0}}, Convention::eh)[0], 1.0, 1e-12);
    EXPECT_NEAR(husimi_full(pr, {{a0, b0}}, Convention::product)[0], 1.0, 1e-12);
    const double cross = husimi_full(pr, {{a0, b0}}, Convention::eh)[0];
    const cplx ov = overlap(CoherentLabel{a0, b0, Flavor::eh, true}, CoherentLabel{a0, b0, Flavor::product, true});
    EXPECT_NEAR(cross, std::norm(ov), 1e-10);
    for (double h : husimi_full(pr, {{0.0, Beta(0.0)}, {cplx(1, 1), Beta::infinity()}}, Convention::eh)) {
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
    }
}

TEST(ReducedField, MatchesKernel)
{
    std::mt19937_64 rng(21);
    const Ensemble mixed{{0.3, random_state(rng, 12, 12)},
                         {0.7, build_state(CoherentLabel::eh(alpha_from_qv(1.0, 2.0), cplx(0.6, -0.3)))}};
    for (auto c : {Convention::eh, Convention::product}) {
        const auto got = reduced_field(mixed, c, kWindow, kGrid);
        EXPECT_LT(max_abs_diff(got, kernel_field(mixed, c, kWindow)), 1e-8);
    }
}

TEST(ReducedField, OffGridColumns)
{
    const FieldWindow w{{-5.99, 6.01, 41}, {-8.0, 8.0, 33}};
    const auto rho = pure(build_state(CoherentLabel::product(alpha_from_qv(-1.0, 3.0), cplx(0.4, 0.1))));
    for (auto c : {Convention::eh, Convention::product})
        EXPECT_LT(max_abs_diff(reduced_field(rho, c, w, kGrid), kernel_field(rho, c, w)), 1e-8);
}

TEST(ReducedField, FigureOneIdentity)
{
    const cplx a0 = alpha_from_qv(0.0, 4.0);
    const auto product_state = pure(build_state(CoherentLabel::product(a0, 0.5)));
    const auto eh_state = pure(build_state(CoherentLabel::eh(a0, 0.5)));
    const auto pp = reduced_field(product_state, Convention::product, kWindow, kGrid);
    const auto ee = reduced_field(eh_state, Convention::eh, kWindow, kGrid);
    const auto pe = reduced_field(product_state, Convention::eh, kWindow, kGrid);
    const auto ep = reduced_field(eh_state, Convention::product, kWindow, kGrid);
    EXPECT_LT(max_abs_diff(pp, ee), 1e-10);
    EXPECT_LT(max_abs_diff(pe, ep), 1e-10);
    // the two-blob pair really differs from the single-blob pair
    EXPECT_GT(max_abs_diff(pp, pe), 0.1);
}

TEST(ReducedField, ElectronOnlyConventionsAgree)
{
    const auto rho = pure(build_state(CoherentLabel::eh(alpha_from_qv(0.5, -2.0), 0.0)));
    EXPECT_EQ(max_abs_diff(reduced_field(rho, Convention::eh, kWindow, kGrid),
                           reduced_field(rho, Convention::product, kWindow, kGrid)),
              0.0);
}

TEST(ReducedField, NormalizationAndSign)
{
    const FieldWindow w{{-10.0, 10.0, 321}, {-10.0, 10.0, 321}};
    std::mt19937_64 rng(22);
    const auto rho = pure(random_state(rng, 10, 10));
    Diagnostics diag;
    const auto f = reduced_field(rho, Convention::eh, w, Grid1D{-24.0, 24.0, 1024}, &diag);
    EXPECT_NEAR(f.integral(), 1.0, 1e-3);
    EXPECT_TRUE(diag.empty());
    for (double v : f.values) EXPECT_GE(v, -1e-12);
}

TEST(ReducedField, ClippingWarned)
{
    Diagnostics diag;
    const auto rho = pure(build_state(CoherentLabel::eh(alpha_from_qv(5.0, 0.0), 0.3)));
    reduced_field(rho, Convention::eh, FieldWindow{{-2.0, 2.0, 33}, {-3.0, 3.0, 33}}, kGrid, &diag);
    EXPECT_FALSE(diag.empty());
}

TEST(FieldFiles, CsvRoundTripIsExact)
{
    const auto rho = pure(build_state(CoherentLabel::eh(alpha_from_qv(0.1, 0.7), cplx(0.3, 0.9))));
    const auto f = reduced_field(rho, Convention::product, kWindow, kGrid);
    std::stringstream ss;
    write_field_csv(ss, f);
    const auto g = read_field_csv(ss);
    EXPECT_EQ(g.convention, Convention::product);
    EXPECT_EQ(g.q_axis.n, f.q_axis.n);
    EXPECT_EQ(g.second_axis.max, f.second_axis.max);
    ASSERT_EQ(g.values.size(), f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) ASSERT_EQ(g.values[i], f.values[i]);
    std::string first;
    std::stringstream again;
    write_field_csv(again, f);
    std::getline(again, first);
    EXPECT_EQ(first, "# q: -6 6 97");
}

TEST(FieldFiles, CsvRejectsGarbage)
{
    std::stringstream ss("# q: 0 1 2\n# v: 0 1 2\n1,2\n1,x\n");
    EXPECT_THROW(read_field_csv(ss), ValidationError);
}

TEST(FieldFiles, PngDeterministic)
{
    const auto rho = pure(build_state(CoherentLabel::product(alpha_from_qv(0.0, 4.0), 0.5)));
    const auto f = reduced_field(rho, Convention::eh, kWindow, kGrid);
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = (dir / "ehcs_png_a.png").string(), b = (dir / "ehcs_png_b.png").string();
    render_png(f, a);
    render_png(f, b);
    auto slurp = [](const std::string& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    const auto sa = slurp(a);
    EXPECT_GT(sa.size(), 100u);
    EXPECT_EQ(sa.substr(1, 3), "PNG");
    EXPECT_EQ(sa, slurp(b));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(ScatteringFields, UpperRowRidgesAtFermiVelocity)
{
    const auto s = solve_step(0.0, 10.0, 2.0, Grid1D{-32.0, 32.0, 4096});
    const double vf = std::sqrt(20.0);
    const auto f = reduced_field(s.state, Convention::eh, FieldWindow{{-12.0, 12.0, 97}, {-2 * vf, 2 * vf, 129}});
    const auto prof = second_axis_profile(f, -12.0, -2.0);
    EXPECT_NEAR(ridge_centroid(f, prof, 0.0, 2 * vf), vf, 0.05 * vf);
    EXPECT_NEAR(ridge_centroid(f, prof, -2 * vf, 0.0), -vf, 0.05 * vf);
}

TEST(ScatteringFields, MiddleRowWeakStripe)
{
    const auto s = solve_step(5.0, 10.0, 8.0, Grid1D{-32.0, 32.0, 4096});
    const double pf = std::sqrt(20.0);
    const auto f = reduced_field(s.state, Convention::product, FieldWindow{{-12.0, 12.0, 97}, {-2 * pf, 2 * pf, 257}});
    const auto prof = second_axis_profile(f, -12.0, -2.0);
    // normally reflected electron at p = -k_e
    EXPECT_NEAR(ridge_centroid(f, prof, -1.25 * pf, -0.75 * pf), -s.k_e, 0.05 * s.k_e);
    auto sorted = prof;
    std::sort(sorted.begin(), sorted.end());
    const double background = sorted[sorted.size() / 2];
    double peak = 0.0;
    for (std::size_t r = 1; r + 1 < prof.size(); ++r) {
        const double p = f.second_axis.value(r);
        if (p > -1.25 * pf && p < -0.75 * pf && prof[r] > prof[r - 1] && prof[r] >= prof[r + 1]) peak = std::max(peak, prof[r]);
    }
    EXPECT_GT(peak, 3.0 * background);
}
