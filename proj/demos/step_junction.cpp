// Sweep the energy across the gap of a step junction and print reflection
// probabilities, penetration depths and the reflected-hole ridge position.

#include <ehcs/phasespace.hpp>
#include <ehcs/scattering.hpp>

#include <cstdio>

int main()
{
    using namespace ehcs;
    const double mu = 10.0, d0 = 2.0;
    const Grid1D grid{-64.0, 64.0, 16384};

    std::vector<double> energies;
    for (int i = 0; i <= 12; ++i) energies.push_back(0.25 * i);
    const auto sols = solve_step_sweep(energies, mu, d0, grid);

    std::printf("%6s %10s %10s %10s %10s\n", "E", "|r_ee|^2", "R_andreev", "depth", "formula");
    for (const auto& s : sols) {
        const double andreev = s.k_h.imag() == 0.0 ? s.k_h.real() * std::norm(s.r_eh) / s.k_e : 0.0;
        if (s.E < d0)
            std::printf("%6.2f %10.6f %10.6f %10.5f %10.5f\n", s.E, std::norm(s.r_ee), andreev, penetration_depth_fit(s),
                        delta_formula(s.E, mu, d0));
        else
            std::printf("%6.2f %10.6f %10.6f %10s %10s\n", s.E, std::norm(s.r_ee), andreev, "-", "-");
    }

    // the reflected hole shows up at v = -k_h in the eh field, the electron at +k_e
    const auto& s = sols[4];
    const double vf = std::sqrt(2.0 * mu);
    const auto f = reduced_field(s.state, Convention::eh, FieldWindow{{-12.0, 12.0, 97}, {-2 * vf, 2 * vf, 257}});
    const auto prof = second_axis_profile(f, -12.0, -2.0);
    std::printf("\nE = %.2f: ridges at v = %+.4f and %+.4f (k_e = %.4f, k_h = %.4f)\n", s.E,
                ridge_centroid(f, prof, 0.0, 2 * vf), ridge_centroid(f, prof, -2 * vf, 0.0), s.k_e, s.k_h.real());
    write_field_csv("step_junction_eh.csv", f);
    render_png(f, "step_junction_eh.png");
}
