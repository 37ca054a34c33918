#pragma once

#include <complex>
#include <vector>

#include "shapekit/geometry.hpp"

namespace shapekit {

using Complex = std::complex<double>;

// Forward DFT coefficients, index = frequency, coefficient 0 = DC.
struct Spectrum1D {
    std::vector<Complex> coefficients;
};

// 2-D spectrum of a polar grid, indexed (lambda, mu) = (radial, angular).
// `mass` carries the occupied-cell count of the source grid forward for
// descriptor normalization.
struct Spectrum2D {
    int radial_size = 0;
    int angular_size = 0;
    std::vector<Complex> coefficients;  // row-major, lambda * angular_size + mu
    int mass = 0;

    Complex at(int lambda, int mu) const {
        return coefficients[static_cast<std::size_t>(lambda) * angular_size + mu];
    }
};

struct EllipticHarmonic {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

struct EllipticCoeffs {
    std::vector<EllipticHarmonic> harmonics;
    double a0 = 0.0;  // DC of x(t)
    double c0 = 0.0;  // DC of y(t)
};

// X[k] = sum_n x[n] * exp(-j*2*pi*k*n/N). Mixed-radix Cooley-Tukey for
// composite sizes, direct summation at prime base cases.
Spectrum1D dft1d(const std::vector<Complex>& signal);
Spectrum1D dft1d(const std::vector<double>& signal);

std::vector<Complex> idft1d(const Spectrum1D& spectrum);

// f_hat(lambda, mu) = sum_r sum_t cell(r,t) * exp(-j*2*pi*(r*lambda/R + t*mu/T)),
// evaluated separably with 1-D DFTs along each axis.
Spectrum2D polar_ft_2d(const PolarGrid& grid);

enum class FdReference {
    FirstHarmonic,  // divide by |X[1]| (contour signatures)
    Dc,             // divide by |X[0]| (positive-valued signatures)
};

// output[i] = |X[i+1]| / |X[ref]| for i in [0, keep): DC dropped for
// translation invariance, reference division for scale invariance,
// magnitudes for rotation/start-point invariance.
std::vector<double> normalize_fd_1d(const Spectrum1D& spectrum, int keep,
                                    FdReference ref = FdReference::FirstHarmonic);

// Row-major (lambda-major) grid of |f_hat(lambda, mu)| / |f_hat(0, 0)|; the
// (0,0) slot itself stores |f_hat(0,0)| / mass.
std::vector<double> normalize_fd_2d(const Spectrum2D& spectrum, int n_radial, int n_angular);

// Kuhl-Giardina elliptic Fourier coefficients of a closed polygonal contour,
// arc-length parameterized.
EllipticCoeffs elliptic_coeffs(const Contour& contour, int harmonics);

// Truncated-series reconstruction at parameter t in [0, 1); used for
// round-trip checks.
Vec2 elliptic_reconstruct(const EllipticCoeffs& coeffs, double t);

}  // namespace shapekit
