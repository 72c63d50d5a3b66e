#pragma once

// Command implementations behind the ehcs executable: verification suites and
// JSON-configured scatter / evolve / phasespace runs.

#include <ehcs/closed_forms.hpp>
#include <ehcs/csrep.hpp>
#include <ehcs/dynamics.hpp>
#include <ehcs/fock.hpp>
#include <ehcs/parallel.hpp>
#include <ehcs/phasespace.hpp>
#include <ehcs/quadrature.hpp>
#include <ehcs/scattering.hpp>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iomanip>
#include <iterator>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace ehcs::cli {

using json = nlohmann::json;

enum ExitCode { kOk = 0, kToleranceFailure = 1, kUsage = 2 };

/// A numerical check that missed its tolerance.
class ToleranceFailure : public Error {
public:
    using Error::Error;
};

struct Check {
    enum class Kind { at_most, at_least };
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    Kind kind = Kind::at_most;

    bool pass() const { return kind == Kind::at_most ? value <= limit : value >= limit; }
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;

    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
    void add(std::string name, double value, double limit, Check::Kind kind = Check::Kind::at_most)
    {
        checks.push_back({std::move(name), value, limit, kind});
    }
};

inline void print(std::ostream& os, const SuiteReport& r)
{
    for (const auto& c : r.checks)
        os << (c.pass() ? "ok    " : "FAIL  ") << r.suite << '.' << c.name << "  " << std::scientific
           << std::setprecision(3) << c.value << (c.kind == Check::Kind::at_most ? " <= " : " >= ") << c.limit
           << std::defaultfloat << '\n';
}

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"overlaps",  "resolutions", "expectations", "uncertainty",
                                                "zmap",      "csrep",       "symbols"};
    return names;
}

namespace detail {

using Op = FundamentalOp;

inline SuiteReport suite_overlaps(std::mt19937_64& rng, double s)
{
    SuiteReport r{"overlaps", {}};
    const Flavor flavors[] = {Flavor::standard, Flavor::spin, Flavor::product, Flavor::eh};
    double worst = 0.0, printed = 0.0;
    for (int k = 0; k < 500; ++k) {
        const bool nz = k % 2 == 0;
        const auto L1 = random_label(rng, flavors[k % 4], 2.0, 4.0, nz);
        const auto L2 = random_label(rng, flavors[(k / 4) % 4], 2.0, 4.0, nz);
        const cplx oracle = inner(build_state(L1), build_state(L2));
        worst = std::max(worst, std::abs(overlap(L1, L2) - oracle) / std::max(1.0, std::abs(oracle)));
    }
    for (int k = 0; k < 50; ++k) {
        const auto L1 = random_label(rng, Flavor::eh, 2.0, 4.0, false);
        const auto L2 = random_label(rng, Flavor::eh, 2.0, 4.0, false);
        const cplx a1 = L1.alpha, a2 = L2.alpha, b1 = L1.beta.value(), b2 = L2.beta.value();
        const cplx f = std::exp(std::conj(a1) * a2) + b1 * std::conj(b2) * std::exp(a1 * std::conj(a2));
        printed = std::max(printed, std::abs(overlap(L1, L2) - f) / std::abs(f));
    }
    r.add("closed_form_vs_fock", worst, 1e-10 * s);
    r.add("eh_formula_vs_closed_form", printed, 1e-10 * s);
    return r;
}

inline SuiteReport suite_resolutions(double s)
{
    SuiteReport r{"resolutions", {}};
    const QuadratureSpec spec;
    r.add("standard", verify_resolution(Flavor::standard, spec, 8), kResolutionTol2D * s);
    r.add("spin", verify_resolution(Flavor::spin, spec, 0), kResolutionTol2D * s);
    r.add("eh", verify_resolution(Flavor::eh, spec, 8), kResolutionTolEh * s);
    r.add("product", verify_resolution(Flavor::product, spec, 8), kResolutionTolEh * s);
    return r;
}

inline double table_deviation(const CoherentLabel& L)
{
    const auto s = build_state(L);
    const auto t = expectation_table(L);
    auto ex = [&](Op op) { return expectation(op, s); };
    double d = 0.0;
    d = std::max(d, std::abs(t.a - ex(Op::a)));
    d = std::max(d, std::abs(t.a_dag - ex(Op::a_dagger)));
    d = std::max(d, std::abs(t.Q - ex(Op::Q)));
    d = std::max(d, std::abs(t.P - ex(Op::P)));
    d = std::max(d, std::abs(t.V - ex(Op::V)));
    d = std::max(d, std::abs(t.sigma_plus - ex(Op::sigma_plus)));
    d = std::max(d, std::abs(t.sigma_minus - ex(Op::sigma_minus)));
    d = std::max(d, std::abs(t.sigma1 - ex(Op::sigma1)));
    d = std::max(d, std::abs(t.sigma2 - ex(Op::sigma2)));
    d = std::max(d, std::abs(t.sigma3 - ex(Op::sigma3)));
    return d;
}

inline SuiteReport suite_expectations(std::mt19937_64& rng, double s)
{
    SuiteReport r{"expectations", {}};
    double table = 0.0, r2 = 0.0, ell = 0.0;
    for (auto flavor : {Flavor::eh, Flavor::product}) {
        for (int k = 0; k < 250; ++k) {
            auto L = random_label(rng, flavor, 2.0, 4.0);
            if (k == 0) L.beta = 0.0;
            if (k == 1) L.beta = Beta::infinity();
            table = std::max(table, table_deviation(L));
            if (flavor != Flavor::eh) continue;
            const auto st = build_state(L);
            double sum = 0.0;
            for (auto op : {Op::sigma1, Op::sigma2, Op::sigma3}) sum += std::pow(expectation(op, st).real(), 2);
            r2 = std::max(r2, std::abs(entanglement_R2(L) - sum));
            ell = std::max(ell, std::abs(ellipsoid_residual(L)));
        }
    }
    r.add("table_vs_fock", table, 1e-10 * s);
    r.add("R2_vs_fock", r2, 1e-10 * s);
    r.add("ellipsoid_residual", ell, 1e-10 * s);
    return r;
}

inline SuiteReport suite_uncertainty(std::mt19937_64& rng, double s)
{
    SuiteReport r{"uncertainty", {}};
    double dq = 0.0, dv = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto u = uncertainty_report(build_state(random_label(rng, Flavor::eh, 2.0, 4.0)));
        dq = std::max(dq, std::abs(u.varQ - 0.5));
        dv = std::max(dv, std::abs(u.varV - 0.5));
    }
    double lowest = 1e300;
    // small-support states come close to the bound; eh labels sit on it
    for (int k = 0; k < 1000; ++k) lowest = std::min(lowest, uncertainty_report(random_state(rng, 16, 1 + k % 3)).productQV);
    for (int k = 0; k < 20; ++k)
        lowest = std::min(lowest, uncertainty_report(build_state(random_label(rng, Flavor::eh, 2.0, 4.0))).productQV);
    r.add("eh_varQ_minus_half", dq, 1e-10 * s);
    r.add("eh_varV_minus_half", dv, 1e-10 * s);
    r.add("min_varQ_varV_random", lowest, 0.25 - 1e-12, Check::Kind::at_least);
    return r;
}

inline SuiteReport suite_zmap(std::mt19937_64& rng, double s)
{
    SuiteReport r{"zmap", {}};
    double inv = 0.0, nrm = 0.0, prod = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto x = random_state(rng, 32, 32);
        inv = std::max(inv, distance(z_map(z_map(x)), x));
        nrm = std::max(nrm, std::abs(z_map(x).norm2() - x.norm2()));
        const auto L = random_label(rng, Flavor::product, 2.0, 4.0);
        prod = std::max(prod, distance(z_map(build_state(L)), build_state(CoherentLabel{L.alpha, L.beta, Flavor::eh, true})));
    }
    SpinorFockState x(4), y(4);
    x.e[0] = x.h[0] = 1.0 / std::sqrt(2.0);
    y.e[0] = 1.0 / std::sqrt(2.0);
    y.h[0] = cplx(0.0, 1.0 / std::sqrt(2.0));
    r.add("involution", inv, 1e-12 * s);
    r.add("norm", nrm, 1e-12 * s);
    r.add("product_to_eh", prod, 1e-12 * s);
    r.add("inner_product_witness", std::abs(inner(z_map(x), z_map(y)) - inner(x, y)), 0.1, Check::Kind::at_least);
    return r;
}

inline SuiteReport suite_csrep(std::mt19937_64& rng, double s)
{
    SuiteReport r{"csrep", {}};
    double worst = 0.0, quarter = 0.0, printed = 1e300;
    for (int k = 0; k < 100; ++k) {
        const auto x = random_state(rng, kDefaultCutoff, kDefaultCutoff - 4);
        const UVRep u = to_uv(x);
        for (auto op : {Op::a, Op::a_dagger, Op::sigma1, Op::sigma2, Op::sigma3})
            worst = std::max(worst, distance(from_uv(apply_op_uv(op, u).rep), apply_op(op, x).state));
        if (k < 20) {
            const auto rep = bdg_rhs_uv(u, 1.0, 0.8);
            quarter = std::max(quarter, rep.pde_quarter_deviation);
            printed = std::min(printed, rep.pde_deviation);
        }
    }
    r.add("commuting_square", worst, 1e-10 * s);
    r.add("pde_hole_kinetic_quarter", quarter, 1e-12 * s);
    // the printed hole kinetic coefficient is off; its deviation is reported, not hidden
    r.add("pde_printed_form_deviation", printed, 0.1, Check::Kind::at_least);
    return r;
}

/// eh symbols <L|s1 a^dagger a|L> and <L|s1 (a^2 + a^dagger^2)/2|L> on a 20 x 20 (q, v) grid.
inline double symbol_collision(const std::vector<Beta>& betas)
{
    double worst = 0.0;
    for (const auto& b : betas)
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                const double q = -2.0 + 4.0 * i / 19.0, v = -2.0 + 4.0 * j / 19.0;
                const auto st = build_state(CoherentLabel{alpha_from_qv(q, v), b, Flavor::eh, true});
                const cplx lhs = expectation({Op::sigma1, Op::a_dagger, Op::a}, st);
                const cplx rhs = 0.5 * (expectation({Op::sigma1, Op::a, Op::a}, st) +
                                        expectation({Op::sigma1, Op::a_dagger, Op::a_dagger}, st));
                worst = std::max(worst, std::abs(lhs - rhs));
            }
    return worst;
}

inline SuiteReport suite_symbols(double s)
{
    SuiteReport r{"symbols", {}};
    r.add("sigma1_number_vs_quadratic", symbol_collision({Beta(0.5), Beta(cplx(1.0, -2.0))}), 1e-10 * s);
    return r;
}

} // namespace detail

inline SuiteReport run_suite(const std::string& name, double tolerance_scale = 1.0, std::uint64_t seed = 1)
{
    std::mt19937_64 rng(seed);
    if (name == "overlaps") return detail::suite_overlaps(rng, tolerance_scale);
    if (name == "resolutions") return detail::suite_resolutions(tolerance_scale);
    if (name == "expectations") return detail::suite_expectations(rng, tolerance_scale);
    if (name == "uncertainty") return detail::suite_uncertainty(rng, tolerance_scale);
    if (name == "zmap") return detail::suite_zmap(rng, tolerance_scale);
    if (name == "csrep") return detail::suite_csrep(rng, tolerance_scale);
    if (name == "symbols") return detail::suite_symbols(tolerance_scale);
    throw ValidationError("unknown suite '" + name + "'");
}

// ---------------------------------------------------------------- configs

/// Rejects keys outside `allowed` and requires `required`.
inline void expect_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> required,
                        std::initializer_list<std::string_view> optional = {})
{
    if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
    std::set<std::string_view> ok(required);
    ok.insert(optional.begin(), optional.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + std::string(where));
    for (auto k : required)
        if (!j.contains(std::string(k))) throw ValidationError("missing key '" + std::string(k) + "' in " + std::string(where));
}

inline double number(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback)
{
    return j.contains(key) ? number(j, key) : fallback;
}

inline Grid1D parse_grid(const json& j)
{
    expect_keys(j, "grid", {"q_min", "q_max", "n_points"});
    Grid1D g{number(j, "q_min"), number(j, "q_max"), j.at("n_points").get<std::size_t>()};
    g.validate();
    return g;
}

inline Axis parse_axis(const json& j, std::string_view where)
{
    expect_keys(j, where, {"min", "max", "n"});
    Axis a{number(j, "min"), number(j, "max"), j.at("n").get<std::size_t>()};
    a.validate();
    return a;
}

inline FieldWindow parse_window(const json& j)
{
    expect_keys(j, "field", {"q", "second"});
    return {parse_axis(j.at("q"), "field.q"), parse_axis(j.at("second"), "field.second")};
}

inline Beta parse_beta(const json& j)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return Beta::infinity();
        throw ValidationError("beta must be a number, [re, im] or \"inf\"");
    }
    if (j.is_number()) return Beta(j.get<double>());
    if (j.is_array() && j.size() == 2) return Beta(cplx(j[0].get<double>(), j[1].get<double>()));
    throw ValidationError("beta must be a number, [re, im] or \"inf\"");
}

inline CoherentLabel parse_label(const json& j)
{
    expect_keys(j, "label", {"flavor", "q", "v"}, {"beta", "name"});
    const Flavor f = parse_flavor(j.at("flavor").get<std::string>());
    const Beta b = j.contains("beta") ? parse_beta(j.at("beta")) : Beta(0.0);
    return {alpha_from_qv(number(j, "q"), number(j, "v")), b, f, true};
}

inline PairPotential parse_potential(const json& j)
{
    expect_keys(j, "potential", {"kind"}, {"delta0", "nu"});
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") return PairPotential::constant(number_or(j, "delta0", 0.0));
    if (kind == "step") return PairPotential::step(number_or(j, "delta0", 0.0));
    if (kind == "linear") return PairPotential::linear(number(j, "nu"));
    throw ValidationError("potential kind must be constant, step or linear");
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline void write_json(const std::filesystem::path& p, const json& j)
{
    std::ofstream os(p);
    if (!os) throw Error("cannot open " + p.string());
    os << std::setw(2) << j << '\n';
}

inline void write_text(const std::filesystem::path& p, const std::function<void(std::ostream&)>& fill)
{
    std::ofstream os(p);
    if (!os) throw Error("cannot open " + p.string());
    fill(os);
    if (!os) throw Error("write failed for " + p.string());
}

inline void write_field(const std::filesystem::path& base, const PhaseSpaceField& f)
{
    write_field_csv(base.string() + ".csv", f);
    render_png(f, base.string() + ".png");
}

struct RunContext {
    std::filesystem::path out_dir = ".";
    double tolerance_scale = 1.0;
    std::ostream* log = nullptr;

    std::ostream& os() const { return *log; }
};

// ---------------------------------------------------------------- scatter

inline json scatter_one(const json& cfg, const std::string& name, double E, const RunContext& ctx, bool& ok)
{
    const auto kind = cfg.at("potential").get<std::string>();
    const double mu = number(cfg, "mu");
    const Grid1D grid = parse_grid(cfg.at("grid"));
    json side;
    side["E"] = E;
    side["mu"] = mu;
    ScatteringSolution sol;
    double limit = 0.0;
    if (kind == "step") {
        const double d0 = number(cfg, "delta0");
        side["delta0"] = d0;
        sol = solve_step(E, mu, d0, grid);
        limit = 1e-8;
        if (E < d0) {
            const double fit = penetration_depth_fit(sol), want = delta_formula(E, mu, d0);
            side["delta_fit"] = fit;
            side["delta_formula"] = want;
            const bool good = std::abs(fit - want) <= 0.01 * ctx.tolerance_scale * want;
            ok = ok && good;
            ctx.os() << (good ? "ok    " : "FAIL  ") << name << " penetration depth " << fit << " vs " << want << '\n';
        } else {
            side["delta_fit"] = nullptr;
        }
    } else {
        const double nu = number(cfg, "nu");
        side["nu"] = nu;
        LinearOptions opt;
        opt.q_max = number_or(cfg, "q_max", 0.0);
        sol = solve_linear(E, mu, nu, grid, opt);
        limit = 1e-6;
        const auto reg = locate_regime_boundary(sol);
        side["delta_fit"] = nullptr;
        side["q_max_used"] = sol.q_max_used;
        side["regime"] = {{"boundary", reg.q_boundary},
                          {"E_over_nu", reg.q_energy_over_slope},
                          {"nu_over_E", reg.q_slope_over_energy},
                          {"log_envelope_at_nu_over_E", reg.log_env_at_slope_over_energy},
                          {"crossover_width", reg.crossover_width}};
    }
    side["r_ee"] = complex_json(sol.r_ee);
    side["r_eh"] = complex_json(sol.r_eh);
    side["currents"] = {{"in", sol.current_in},
                        {"out", sol.current_out},
                        {"reflected", sol.current_reflected},
                        {"transmitted", sol.current_transmitted},
                        {"relative_error", sol.current_error()}};
    side["condition_number"] = sol.condition_number;
    const bool cons = sol.current_error() <= limit * ctx.tolerance_scale;
    ok = ok && cons;
    ctx.os() << (cons ? "ok    " : "FAIL  ") << name << " current conservation " << sol.current_error() << '\n';

    const auto base = ctx.out_dir / name;
    write_text(base.string() + ".csv", [&](std::ostream& os) { write_csv(os, sol); });
    write_text(base.string() + "_density.csv", [&](std::ostream& os) {
        os << "q,psi_e2,psi_h2\n" << std::setprecision(17);
        for (std::size_t j = 0; j < grid.n_points; ++j)
            os << grid.q(j) << ',' << std::norm(sol.state.e[j]) << ',' << std::norm(sol.state.h[j]) << '\n';
    });
    if (cfg.contains("field")) {
        const FieldWindow w = parse_window(cfg.at("field"));
        Diagnostics diag;
        write_field(base.string() + "_eh", reduced_field(sol.state, Convention::eh, w, &diag));
        write_field(base.string() + "_product", reduced_field(sol.state, Convention::product, w, &diag));
        for (const auto& m : diag.warnings) ctx.os() << "warn  " << name << ": " << m << '\n';
    }
    write_json(base.string() + ".json", side);
    return side;
}

inline int cmd_scatter(const json& cfg, const RunContext& ctx)
{
    expect_keys(cfg, "scatter config", {"potential", "mu", "grid"},
                {"command", "name", "E", "energies", "delta0", "nu", "q_max", "field", "seed"});
    const auto kind = cfg.at("potential").get<std::string>();
    if (kind != "step" && kind != "linear") throw ValidationError("potential must be \"step\" or \"linear\"");
    const double mu = number(cfg, "mu");
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    std::vector<double> energies;
    if (cfg.contains("energies")) energies = cfg.at("energies").get<std::vector<double>>();
    if (cfg.contains("E")) energies.insert(energies.begin(), number(cfg, "E"));
    if (energies.empty()) throw ValidationError("scatter config needs E or energies");
    for (double E : energies) {
        if (!(E >= 0.0 && E < mu)) throw ValidationError("energy " + std::to_string(E) + " outside [0, mu)");
        if (kind == "linear" && !(E > 0.0)) throw ValidationError("linear potential needs E > 0");
    }
    if (kind == "step" && !(number(cfg, "delta0") >= 0.0)) throw ValidationError("delta0 must be >= 0");
    if (kind == "linear" && !(number(cfg, "nu") > 0.0)) throw ValidationError("nu must be positive");
    parse_grid(cfg.at("grid"));
    if (cfg.contains("field")) parse_window(cfg.at("field"));

    const std::string name = cfg.value("name", std::string("scatter"));
    std::filesystem::create_directories(ctx.out_dir);
    bool ok = true;
    json summary = json::array();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const std::string tag = energies.size() == 1 ? name : name + "_E" + std::to_string(i);
        summary.push_back(scatter_one(cfg, tag, energies[i], ctx, ok));
    }
    if (energies.size() > 1) write_json(ctx.out_dir / (name + "_sweep.json"), summary);
    return ok ? kOk : kToleranceFailure;
}

// ---------------------------------------------------------------- evolve

inline int cmd_evolve(const json& cfg, const RunContext& ctx)
{
    expect_keys(cfg, "evolve config", {"labels", "potential", "mu", "dt", "steps", "grid"},
                {"command", "name", "fit_window", "seed"});
    const auto pot = parse_potential(cfg.at("potential"));
    const double mu = number(cfg, "mu"), dt = number(cfg, "dt");
    const auto steps = cfg.at("steps").get<std::size_t>();
    if (!(dt > 0.0) || steps < 3) throw ValidationError("evolve needs dt > 0 and at least 3 steps");
    const Grid1D grid = parse_grid(cfg.at("grid"));
    const double window = number_or(cfg, "fit_window", 0.2);
    std::vector<CoherentLabel> labels;
    std::vector<std::string> names;
    for (const auto& lj : cfg.at("labels")) {
        labels.push_back(parse_label(lj));
        names.push_back(lj.value("name", "label" + std::to_string(names.size())));
        init_wavepacket(labels.back(), grid); // validates placement before any work
    }
    const std::string name = cfg.value("name", std::string("evolve"));
    std::filesystem::create_directories(ctx.out_dir);

    std::vector<ObservableTrace> traces(labels.size());
    std::vector<std::string> warnings(labels.size());
    parallel_for(labels.size(), [&](std::size_t i) {
        Diagnostics diag;
        traces[i] = observable_trace(init_wavepacket(labels[i], grid), pot, mu, dt, steps, &diag);
        for (const auto& w : diag.warnings) warnings[i] += w + "; ";
    });

    bool ok = true;
    json report = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!warnings[i].empty()) ctx.os() << "warn  " << names[i] << ": " << warnings[i] << '\n';
        write_text(ctx.out_dir / (name + "_" + names[i] + ".csv"), [&](std::ostream& os) { write_csv(os, traces[i]); });
        json r{{"name", names[i]}, {"flavor", std::string(to_string(labels[i].flavor))}, {"q", labels[i].q()},
               {"v", labels[i].v()}};
        if (pot.kind == PairPotential::Kind::constant) {
            const auto fit = dispersion_fit(traces[i], window);
            const double want = predicted_dispersion(labels[i]);
            const bool good_q = std::abs(fit.quadratic - want) <= 0.01 * ctx.tolerance_scale * want;
            const bool good_v = std::abs(fit.dQdt0 - fit.V0) <= 0.01 * ctx.tolerance_scale * std::max(std::abs(fit.V0), 0.1);
            ok = ok && good_q && good_v;
            r["quadratic_fit"] = fit.quadratic;
            r["quadratic_predicted"] = want;
            r["dQdt0"] = fit.dQdt0;
            r["V0"] = fit.V0;
            ctx.os() << (good_q ? "ok    " : "FAIL  ") << names[i] << " Var[Q] t^2 coefficient " << fit.quadratic
                     << " vs " << want << '\n';
            ctx.os() << (good_v ? "ok    " : "FAIL  ") << names[i] << " dQ/dt(0) " << fit.dQdt0 << " vs <V> "
                     << fit.V0 << '\n';
        }
        report.push_back(r);
    }
    write_json(ctx.out_dir / (name + "_report.json"), report);
    return ok ? kOk : kToleranceFailure;
}

// ---------------------------------------------------------------- phasespace

inline int cmd_phasespace(const json& cfg, const RunContext& ctx)
{
    expect_keys(cfg, "phasespace config", {"states", "grid", "field"}, {"command", "name", "conventions", "identities", "seed"});
    const Grid1D grid = parse_grid(cfg.at("grid"));
    const FieldWindow w = parse_window(cfg.at("field"));
    std::vector<Convention> convs{Convention::product, Convention::eh};
    if (cfg.contains("conventions")) {
        convs.clear();
        for (const auto& c : cfg.at("conventions")) {
            const auto s = c.get<std::string>();
            if (s == "eh") convs.push_back(Convention::eh);
            else if (s == "product") convs.push_back(Convention::product);
            else throw ValidationError("convention must be eh or product");
        }
    }
    std::vector<CoherentLabel> labels;
    std::vector<std::string> names;
    for (const auto& sj : cfg.at("states")) {
        labels.push_back(parse_label(sj));
        if (labels.back().flavor == Flavor::spin) throw ValidationError("spin labels have no phase-space field");
        names.push_back(sj.value("name", "state" + std::to_string(names.size())));
    }
    const std::string name = cfg.value("name", std::string("phasespace"));
    std::filesystem::create_directories(ctx.out_dir);

    std::map<std::pair<std::string, int>, PhaseSpaceField> fields;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (auto c : convs) {
            Diagnostics diag;
            auto f = reduced_field(pure(build_state(labels[i])), c, w, grid, &diag);
            for (const auto& m : diag.warnings) ctx.os() << "warn  " << names[i] << ": " << m << '\n';
            write_field(ctx.out_dir / (name + "_" + names[i] + "_" + std::string(to_string(c))), f);
            fields[{names[i], static_cast<int>(c)}] = std::move(f);
        }

    json report;
    bool ok = true;
    // identities: [[state, convention, state, convention], ...] compared as matrices
    if (cfg.contains("identities")) {
        report["identities"] = json::array();
        for (const auto& id : cfg.at("identities")) {
            if (!id.is_array() || id.size() != 4) throw ValidationError("identities entries are [state, conv, state, conv]");
            auto conv_of = [](const std::string& s) { return s == "eh" ? Convention::eh : Convention::product; };
            const auto a = fields.find({id[0].get<std::string>(), static_cast<int>(conv_of(id[1].get<std::string>()))});
            const auto b = fields.find({id[2].get<std::string>(), static_cast<int>(conv_of(id[3].get<std::string>()))});
            if (a == fields.end() || b == fields.end()) throw ValidationError("identity refers to a field that was not computed");
            double d = 0.0;
            for (std::size_t k = 0; k < a->second.values.size(); ++k)
                d = std::max(d, std::abs(a->second.values[k] - b->second.values[k]));
            const bool good = d <= 1e-10 * ctx.tolerance_scale;
            ok = ok && good;
            ctx.os() << (good ? "ok    " : "FAIL  ") << "identity " << id.dump() << " max deviation " << d << '\n';
            report["identities"].push_back({{"fields", id}, {"max_deviation", d}});
        }
    }
    report["integrals"] = json::object();
    for (const auto& [key, f] : fields)
        report["integrals"][key.first + "_" + std::string(to_string(static_cast<Convention>(key.second)))] = f.integral();
    write_json(ctx.out_dir / (name + "_report.json"), report);
    return ok ? kOk : kToleranceFailure;
}

// ---------------------------------------------------------------- verify

inline int cmd_verify(const std::string& suite, const RunContext& ctx, std::uint64_t seed)
{
    std::vector<std::string> todo;
    if (suite == "all") todo = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end()) todo = {suite};
    else throw ValidationError("unknown suite '" + suite + "'");
    bool ok = true;
    for (const auto& s : todo) {
        const auto r = run_suite(s, ctx.tolerance_scale, seed);
        print(ctx.os(), r);
        ok = ok && r.pass();
    }
    return ok ? kOk : kToleranceFailure;
}

/// Loads a config file; an empty document (no bytes, or {}) yields null.
inline json load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config " + path);
    std::string text((std::istreambuf_iterator<char>(is)), {});
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return nullptr;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (j.is_object() && j.empty()) return nullptr;
    return j;
}

} // namespace ehcs::cli
