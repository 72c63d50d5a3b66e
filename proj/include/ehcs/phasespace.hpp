#pragma once

// Husimi functions and quasi-spin-reduced phase-space fields. A field value
// at (q, s) is |<alpha|psi_e>|^2 + |<alpha'|psi_h>|^2 with alpha = (q + i s)/sqrt2
// and alpha' = alpha (product, s = p) or alpha* (eh, s = v).

#include <ehcs/closed_forms.hpp>
#include <ehcs/grid.hpp>
#include <ehcs/parallel.hpp>

#include <png.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace ehcs {

struct Axis {
    double min = 0.0;
    double max = 1.0;
    std::size_t n = 2;

    double step() const { return n > 1 ? (max - min) / static_cast<double>(n - 1) : 0.0; }
    double value(std::size_t i) const { return min + step() * static_cast<double>(i); }
    void validate() const
    {
        if (n < 2 || !(max > min)) throw ValidationError("axis needs n >= 2 and max > min");
    }
};

struct FieldWindow {
    Axis q;
    Axis second; // v (eh) or p (product)
};

struct PhaseSpaceField {
    Axis q_axis;
    Axis second_axis;
    Convention convention = Convention::eh;
    std::vector<double> values; // row-major, one row per second-axis value
    // Riemann sums of values times norm_measure dq ds approximate the state norm,
    // i.e. (1/pi) d^2 alpha with d^2 alpha = dq ds / 2
    double norm_measure = 1.0 / (2.0 * M_PI);

    double& at(std::size_t row, std::size_t col) { return values[row * q_axis.n + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * q_axis.n + col]; }

    double integral() const
    {
        double s = 0.0;
        for (double v : values) s += v;
        return s * norm_measure * q_axis.step() * second_axis.step();
    }
    double max_value() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
    std::string_view second_name() const { return convention == Convention::eh ? "v" : "p"; }
};

/// <L|rho|L> at each (alpha, beta) for eh or product labels.
inline std::vector<double> husimi_full(const Ensemble& rho, const std::vector<std::pair<cplx, Beta>>& labels,
                                       Convention convention)
{
    validate_density(rho);
    std::vector<double> out(labels.size());
    const Flavor f = convention == Convention::eh ? Flavor::eh : Flavor::product;
    parallel_for(labels.size(), [&](std::size_t i) {
        out[i] = husimi(rho, CoherentLabel{labels[i].first, labels[i].second, f, true});
    });
    return out;
}

namespace detail {

inline constexpr double kWindowReach = 13.0; // exp(-13^2/2) ~ 1e-37

/// |<alpha(q, s)|f>|^2 on the window for one grid component. For each s the
/// q-dependence is a convolution of exp(-x^2/2) with e^{-isx} f, done by FFT;
/// q values off the grid use the windowed sum directly.
inline std::vector<double> spectrogram(const std::vector<cplx>& f, const Grid1D& g, const FieldWindow& w, bool reflect)
{
    const std::size_t n = g.n_points;
    const double dq = g.dq();
    std::vector<cplx> G(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double x = (d < n / 2 ? static_cast<double>(d) : static_cast<double>(d) - static_cast<double>(n)) * dq;
        G[d] = std::exp(-0.5 * x * x);
    }
    {
        Fft fft(n);
        fft.forward(G);
    }
    // per column: nearest grid index, or npos when the window point is off the grid
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> on_grid(w.q.n, npos);
    for (std::size_t i = 0; i < w.q.n; ++i) {
        const double pos = (w.q.value(i) - g.q_min) / dq;
        const double r = std::round(pos);
        if (std::abs(pos - r) < 1e-9 && r >= 0.0 && r < static_cast<double>(n)) on_grid[i] = static_cast<std::size_t>(r);
    }
    const double pref = 1.0 / std::sqrt(M_PI);
    std::vector<double> out(w.q.n * w.second.n, 0.0);
    parallel_for(w.second.n, [&](std::size_t row) {
        const double s = reflect ? -w.second.value(row) : w.second.value(row);
        std::vector<cplx> fv(n);
        for (std::size_t j = 0; j < n; ++j) fv[j] = std::exp(cplx(0.0, -s * g.q(j))) * f[j];
        std::vector<cplx> conv = fv;
        Fft fft(n);
        fft.forward(conv);
        for (std::size_t k = 0; k < n; ++k) conv[k] *= G[k];
        fft.backward(conv);
        for (std::size_t i = 0; i < w.q.n; ++i) {
            cplx c;
            if (on_grid[i] != npos) {
                c = conv[on_grid[i]];
            } else {
                const double q = w.q.value(i);
                const double lo = std::max(0.0, std::ceil((q - kWindowReach - g.q_min) / dq));
                const double hi = std::min(static_cast<double>(n - 1), std::floor((q + kWindowReach - g.q_min) / dq));
                for (auto j = static_cast<std::size_t>(lo); j <= static_cast<std::size_t>(hi); ++j) {
                    const double x = g.q(j) - q;
                    c += std::exp(-0.5 * x * x) * fv[j];
                }
            }
            out[row * w.q.n + i] = pref * std::norm(c * dq);
        }
    });
    return out;
}

inline void check_window(const Grid1D& g, const FieldWindow& w, Diagnostics* diag)
{
    w.q.validate();
    w.second.validate();
    if (w.q.min - g.q_min < kWindowReach || g.q_max - w.q.max < kWindowReach)
        warn(diag, "field window q range comes within the Gaussian reach of the grid edge; values near the edge see the periodic wrap");
    const double smax = std::max(std::abs(w.second.min), std::abs(w.second.max));
    if (smax + 8.0 > g.k_nyquist()) warn(diag, "field window second axis approaches the grid Nyquist wavenumber");
}

} // namespace detail

/// Reduced field of a grid state.
inline PhaseSpaceField reduced_field(const GridSpinor& psi, Convention convention, const FieldWindow& w,
                                     Diagnostics* diag = nullptr)
{
    psi.grid.validate();
    detail::check_window(psi.grid, w, diag);
    PhaseSpaceField f;
    f.q_axis = w.q;
    f.second_axis = w.second;
    f.convention = convention;
    f.values = detail::spectrogram(psi.e, psi.grid, w, false);
    const auto h = detail::spectrogram(psi.h, psi.grid, w, convention == Convention::eh);
    for (std::size_t k = 0; k < h.size(); ++k) f.values[k] += h[k];
    return f;
}

/// Reduced field of a density operator given in the number basis; members are
/// sampled on `grid` first.
inline PhaseSpaceField reduced_field(const Ensemble& rho, Convention convention, const FieldWindow& w,
                                     const Grid1D& grid, Diagnostics* diag = nullptr)
{
    validate_density(rho);
    PhaseSpaceField f;
    for (std::size_t k = 0; k < rho.size(); ++k) {
        auto part = reduced_field(fock_to_grid(rho[k].state, grid), convention, w, k == 0 ? diag : nullptr);
        for (auto& v : part.values) v *= rho[k].weight;
        if (k == 0) {
            f = std::move(part);
        } else {
            for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += part.values[i];
        }
    }
    if (std::abs(f.integral() - 1.0) > 1e-3)
        warn(diag, "field integral " + std::to_string(f.integral()) + " differs from 1; the window clips the state");
    return f;
}

// ---------------------------------------------------------------- files

namespace detail {

inline std::string format_double(double x)
{
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return {buf.data(), r.ptr};
}

inline double parse_double(std::string_view s)
{
    double x = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError("bad number in field CSV: '" + std::string(s) + "'");
    return x;
}

inline Axis parse_axis_line(const std::string& line, std::string_view name)
{
    std::istringstream is(line);
    std::string hash, tag, lo, hi;
    std::size_t n = 0;
    if (!(is >> hash >> tag >> lo >> hi >> n) || hash != "#" || tag.empty() || tag.back() != ':')
        throw ValidationError("bad axis header in field CSV: '" + line + "'");
    tag.pop_back();
    if (name != "*" && tag != name) throw ValidationError("expected axis '" + std::string(name) + "' in field CSV");
    return {parse_double(lo), parse_double(hi), n};
}

} // namespace detail

/// Header `# q: min max n`, `# v: min max n` (or p), then one row per second-axis value.
inline void write_field_csv(std::ostream& os, const PhaseSpaceField& f)
{
    using detail::format_double;
    os << "# q: " << format_double(f.q_axis.min) << ' ' << format_double(f.q_axis.max) << ' ' << f.q_axis.n << '\n';
    os << "# " << f.second_name() << ": " << format_double(f.second_axis.min) << ' '
       << format_double(f.second_axis.max) << ' ' << f.second_axis.n << '\n';
    for (std::size_t r = 0; r < f.second_axis.n; ++r) {
        for (std::size_t c = 0; c < f.q_axis.n; ++c) {
            if (c) os << ',';
            os << format_double(f.at(r, c));
        }
        os << '\n';
    }
}

inline PhaseSpaceField read_field_csv(std::istream& is)
{
    PhaseSpaceField f;
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty field CSV");
    f.q_axis = detail::parse_axis_line(line, "q");
    if (!std::getline(is, line)) throw ValidationError("field CSV lacks the second axis header");
    f.convention = line.rfind("# p:", 0) == 0 ? Convention::product : Convention::eh;
    f.second_axis = detail::parse_axis_line(line, f.convention == Convention::eh ? "v" : "p");
    f.values.reserve(f.q_axis.n * f.second_axis.n);
    for (std::size_t r = 0; r < f.second_axis.n; ++r) {
        if (!std::getline(is, line)) throw ValidationError("field CSV has too few rows");
        std::size_t start = 0, count = 0;
        while (start <= line.size()) {
            const std::size_t end = std::min(line.find(',', start), line.size());
            f.values.push_back(detail::parse_double(std::string_view(line).substr(start, end - start)));
            ++count;
            start = end + 1;
        }
        if (count != f.q_axis.n) throw ValidationError("field CSV row has the wrong number of columns");
    }
    return f;
}

inline void write_field_csv(const std::string& path, const PhaseSpaceField& f)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path);
    write_field_csv(os, f);
    if (!os) throw Error("write failed for " + path);
}

/// Colormap: black, purple, red, orange, pale yellow at 0, .25, .5, .75, 1.
inline std::array<unsigned char, 3> colormap(double t)
{
    static const double stops[5][3] = {
        {0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double u = t - i;
    std::array<unsigned char, 3> c{};
    for (int k = 0; k < 3; ++k) c[k] = static_cast<unsigned char>(std::lround(stops[i][k] + u * (stops[i + 1][k] - stops[i][k])));
    return c;
}

/// Heat map with per-field max normalization; second axis increases upward.
inline void render_png(const PhaseSpaceField& f, const std::string& path)
{
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw Error("cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng write failed for " + path);
    }
    const auto width = static_cast<png_uint_32>(f.q_axis.n);
    const auto height = static_cast<png_uint_32>(f.second_axis.n);
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const double top = f.max_value() > 0.0 ? f.max_value() : 1.0;
    std::vector<unsigned char> row(3 * width);
    for (png_uint_32 y = 0; y < height; ++y) {
        const std::size_t r = height - 1 - y;
        for (png_uint_32 x = 0; x < width; ++x) {
            const auto c = colormap(f.at(r, x) / top);
            std::copy(c.begin(), c.end(), row.begin() + 3 * x);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------- ridges

/// Mean of the field over the columns with q in [q_lo, q_hi], as a function of
/// the second axis.
inline std::vector<double> second_axis_profile(const PhaseSpaceField& f, double q_lo, double q_hi)
{
    std::vector<double> prof(f.second_axis.n, 0.0);
    std::size_t cols = 0;
    for (std::size_t c = 0; c < f.q_axis.n; ++c) {
        const double q = f.q_axis.value(c);
        if (q < q_lo || q > q_hi) continue;
        ++cols;
        for (std::size_t r = 0; r < f.second_axis.n; ++r) prof[r] += f.at(r, c);
    }
    if (cols == 0) throw ValidationError("profile range holds no field columns");
    for (auto& v : prof) v /= static_cast<double>(cols);
    return prof;
}

/// Weighted mean of the second axis over the rows with s in [s_lo, s_hi].
inline double profile_centroid(const PhaseSpaceField& f, const std::vector<double>& prof, double s_lo, double s_hi)
{
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < prof.size(); ++r) {
        const double s = f.second_axis.value(r);
        if (s < s_lo || s > s_hi) continue;
        num += s * prof[r];
        den += prof[r];
    }
    if (den <= 0.0) throw ValidationError("no field weight in the centroid range");
    return num / den;
}

/// Centroid of the strongest ridge in [s_lo, s_hi]: weighted mean over the
/// rows within `half_width` of the profile maximum.
inline double ridge_centroid(const PhaseSpaceField& f, const std::vector<double>& prof, double s_lo, double s_hi,
                             double half_width = 1.5)
{
    double best = -1.0, at = 0.0;
    for (std::size_t r = 0; r < prof.size(); ++r) {
        const double s = f.second_axis.value(r);
        if (s >= s_lo && s <= s_hi && prof[r] > best) {
            best = prof[r];
            at = s;
        }
    }
    if (best <= 0.0) throw ValidationError("no ridge in the requested range");
    return profile_centroid(f, prof, at - half_width, at + half_width);
}

} // namespace ehcs
