#include "shapekit/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace shapekit {

// ===========================================================================
// DFT
// ===========================================================================

namespace {

int smallest_prime_factor(int n) {
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) return p;
    return n;
}

// Direct DFT for prime sizes. Twiddles advance by multiplication, which keeps
// this numerically distinct from a per-term polar() evaluation while staying
// well under 1e-9 drift for the sizes we use.
std::vector<Complex> dft_prime(const std::vector<Complex>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<Complex> out(n);
    for (int k = 0; k < n; ++k) {
        const Complex w = std::polar(1.0, -kTwoPi * k / n);
        Complex twiddle{1.0, 0.0};
        Complex acc{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            acc += x[j] * twiddle;
            twiddle *= w;
        }
        out[k] = acc;
    }
    return out;
}

// Recursive mixed-radix Cooley-Tukey: split size n = p*q into p interleaved
// sub-transforms of size q.
std::vector<Complex> dft_recursive(const std::vector<Complex>& x) {
    const int n = static_cast<int>(x.size());
    if (n == 1) return x;
    const int p = smallest_prime_factor(n);
    if (p == n) return dft_prime(x);
    const int q = n / p;

    std::vector<std::vector<Complex>> sub(p);
    for (int j = 0; j < p; ++j) {
        sub[j].resize(q);
        for (int t = 0; t < q; ++t) sub[j][t] = x[static_cast<std::size_t>(t) * p + j];
        sub[j] = dft_recursive(sub[j]);
    }

    std::vector<Complex> out(n);
    for (int k = 0; k < n; ++k) {
        Complex acc{0.0, 0.0};
        for (int j = 0; j < p; ++j)
            acc += sub[j][k % q] * std::polar(1.0, -kTwoPi * j * k / n);
        out[k] = acc;
    }
    return out;
}

}  // namespace

Spectrum1D dft1d(const std::vector<Complex>& signal) {
    if (signal.empty()) fail(Errc::InvalidParams, "empty signal");
    return Spectrum1D{dft_recursive(signal)};
}

Spectrum1D dft1d(const std::vector<double>& signal) {
    std::vector<Complex> x(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) x[i] = {signal[i], 0.0};
    return dft1d(x);
}

std::vector<Complex> idft1d(const Spectrum1D& spectrum) {
    std::vector<Complex> conj(spectrum.coefficients.size());
    for (std::size_t i = 0; i < conj.size(); ++i) conj[i] = std::conj(spectrum.coefficients[i]);
    std::vector<Complex> y = dft_recursive(conj);
    const double inv_n = 1.0 / static_cast<double>(y.size());
    for (Complex& v : y) v = std::conj(v) * inv_n;
    return y;
}

// ===========================================================================
// 2-D polar Fourier transform
// ===========================================================================

Spectrum2D polar_ft_2d(const PolarGrid& grid) {
    if (grid.r_bins < 1 || grid.t_bins < 1) fail(Errc::InvalidParams, "empty polar grid");
    const int R = grid.r_bins, T = grid.t_bins;

    // DFT along theta for each radial row, then along r for each column.
    std::vector<Complex> stage(static_cast<std::size_t>(R) * T);
    std::vector<Complex> row(T);
    for (int r = 0; r < R; ++r) {
        for (int t = 0; t < T; ++t) row[t] = grid.cells[static_cast<std::size_t>(r) * T + t];
        Spectrum1D spec = dft1d(row);
        for (int mu = 0; mu < T; ++mu)
            stage[static_cast<std::size_t>(r) * T + mu] = spec.coefficients[mu];
    }

    Spectrum2D out;
    out.radial_size = R;
    out.angular_size = T;
    out.mass = grid.occupied();
    out.coefficients.assign(stage.size(), {0.0, 0.0});
    std::vector<Complex> col(R);
    for (int mu = 0; mu < T; ++mu) {
        for (int r = 0; r < R; ++r) col[r] = stage[static_cast<std::size_t>(r) * T + mu];
        Spectrum1D spec = dft1d(col);
        for (int lambda = 0; lambda < R; ++lambda)
            out.coefficients[static_cast<std::size_t>(lambda) * T + mu] = spec.coefficients[lambda];
    }
    return out;
}

// ===========================================================================
// Descriptor normalization
// ===========================================================================

std::vector<double> normalize_fd_1d(const Spectrum1D& spectrum, int keep, FdReference ref) {
    const int n = static_cast<int>(spectrum.coefficients.size());
    if (keep < 1 || keep >= n) fail(Errc::InvalidParams, "keep must be in [1, length)");
    const double reference =
        std::abs(spectrum.coefficients[ref == FdReference::FirstHarmonic ? 1 : 0]);
    if (!(reference > 1e-300)) fail(Errc::ZeroReference, "reference coefficient is zero");
    std::vector<double> out(keep);
    for (int i = 0; i < keep; ++i) out[i] = std::abs(spectrum.coefficients[i + 1]) / reference;
    return out;
}

std::vector<double> normalize_fd_2d(const Spectrum2D& spectrum, int n_radial, int n_angular) {
    if (n_radial < 1 || n_angular < 1 || n_radial > spectrum.radial_size ||
        n_angular > spectrum.angular_size)
        fail(Errc::InvalidParams, "requested frequency block exceeds spectrum");
    const double dc = std::abs(spectrum.at(0, 0));
    if (!(dc > 1e-300)) fail(Errc::ZeroDc, "zero DC coefficient");
    if (spectrum.mass < 1) fail(Errc::ZeroDc, "spectrum has no occupied source cells");
    std::vector<double> out(static_cast<std::size_t>(n_radial) * n_angular);
    for (int lambda = 0; lambda < n_radial; ++lambda)
        for (int mu = 0; mu < n_angular; ++mu)
            out[static_cast<std::size_t>(lambda) * n_angular + mu] =
                std::abs(spectrum.at(lambda, mu)) / dc;
    out[0] = dc / static_cast<double>(spectrum.mass);
    return out;
}

// ===========================================================================
// Elliptic Fourier coefficients (Kuhl & Giardina formulation)
// ===========================================================================

EllipticCoeffs elliptic_coeffs(const Contour& contour, int harmonics) {
    if (harmonics < 1) fail(Errc::InvalidParams, "harmonics must be >= 1");
    // Drop consecutive duplicates; zero-length links break the line integrals.
    std::vector<Vec2> pts;
    pts.reserve(contour.points.size());
    for (const Vec2& p : contour.points) {
        if (pts.empty() || std::hypot(p.x - pts.back().x, p.y - pts.back().y) > 1e-12)
            pts.push_back(p);
    }
    if (pts.size() > 1 && std::hypot(pts.front().x - pts.back().x, pts.front().y - pts.back().y) <= 1e-12)
        pts.pop_back();
    const std::size_t n = pts.size();
    if (n < 4) fail(Errc::DegenerateContour, "contour has fewer than 4 distinct points");

    std::vector<double> dx(n), dy(n), dt(n), t(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % n];
        dx[i] = b.x - a.x;
        dy[i] = b.y - a.y;
        dt[i] = std::hypot(dx[i], dy[i]);
        t[i + 1] = t[i] + dt[i];
    }
    const double total = t[n];

    EllipticCoeffs out;
    out.harmonics.resize(harmonics);
    for (int h = 1; h <= harmonics; ++h) {
        const double wn = kTwoPi * h / total;
        const double scale = total / (2.0 * h * h * kPi * kPi);
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double cos1 = std::cos(wn * t[i + 1]) - std::cos(wn * t[i]);
            const double sin1 = std::sin(wn * t[i + 1]) - std::sin(wn * t[i]);
            a += dx[i] / dt[i] * cos1;
            b += dx[i] / dt[i] * sin1;
            c += dy[i] / dt[i] * cos1;
            d += dy[i] / dt[i] * sin1;
        }
        out.harmonics[h - 1] = {scale * a, scale * b, scale * c, scale * d};
    }

    // DC terms: average of the piecewise-linear x(t), y(t) over one period.
    double a0 = 0.0, c0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        a0 += dt[i] * (p.x + q.x) / 2.0;
        c0 += dt[i] * (p.y + q.y) / 2.0;
    }
    out.a0 = a0 / total;
    out.c0 = c0 / total;
    return out;
}

Vec2 elliptic_reconstruct(const EllipticCoeffs& coeffs, double t) {
    double x = coeffs.a0, y = coeffs.c0;
    for (std::size_t h = 0; h < coeffs.harmonics.size(); ++h) {
        const double w = kTwoPi * static_cast<double>(h + 1) * t;
        const EllipticHarmonic& e = coeffs.harmonics[h];
        x += e.a * std::cos(w) + e.b * std::sin(w);
        y += e.c * std::cos(w) + e.d * std::sin(w);
    }
    return {x, y};
}

}  // namespace shapekit
