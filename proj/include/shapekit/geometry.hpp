#pragma once

#include <array>
#include <complex>
#include <vector>

#include "shapekit/imgproc.hpp"

namespace shapekit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Ordered closed boundary with the region centroid of the traced component.
// Traced contours have integer-valued, 8-connected consecutive points.
struct Contour {
    std::vector<Vec2> points;
    double cx = 0.0;
    double cy = 0.0;
};

struct PolarPoint {
    double r = 0.0;      // pixels, >= 0
    double theta = 0.0;  // [0, 2*pi)
};

// Normalized corner radii: r_bar = R_n / Max(R), so max(r_bar) == 1.
struct RadialSample {
    double theta = 0.0;
    double r_bar = 0.0;
};

struct RadialSignature {
    std::vector<RadialSample> samples;
    double normalizer = 0.0;  // Max(R)
};

// Per boundary point: the maximum steered-response magnitude over all
// (scale, direction) pairs, the direction attaining it, and the point's
// polar coordinates about the region centroid. `direction_continuous` is the
// exact orientation of the maximum response (atan2 of the basis responses at
// the best scale, mod pi); unlike the M-quantized f_d it cannot flip a whole
// edge into the neighboring bin under resampling.
struct GradientSignature {
    std::vector<double> magnitude;             // f(k) >= 0
    std::vector<double> direction;             // f_d(k), one of m*pi/M for m in [0, M)
    std::vector<double> direction_continuous;  // [0, pi)
    std::vector<PolarPoint> polar;             // (r_k, theta_k)
    int num_directions = 0;
    std::vector<double> scales;
};

// Complex-valued polar raster; deposits landing in one cell are averaged.
struct PolarGrid {
    int r_bins = 0;
    int t_bins = 0;
    std::vector<std::complex<double>> cells;  // row-major, index r * t_bins + t
    std::vector<int> occupancy;

    int occupied() const;
};

// ---------------------------------------------------------------------------

// Moore-neighbor trace of the largest 8-connected foreground component.
// The centroid is the mean of that component's pixels (region centroid).
Contour trace_boundary(const BinaryImage& mask);

// r = hypot, theta = atan2(y - cy, x - cx) mapped to [0, 2*pi); order kept.
std::vector<PolarPoint> to_polar(const Contour& contour);

// Contour resampled to num_samples points equidistant by arc length;
// output is the centroid distance of each sample.
std::vector<double> centroid_distance_signature(const Contour& contour, int num_samples);

// Uniform arc-length resampling of the (lightly smoothed) contour polygon to
// a fixed point count. Sampling density along the boundary then no longer
// depends on the raster resolution the contour was traced at.
Contour resample_contour(const Contour& contour, int num_points);

// Radial signature of a corner set about the corner centroid.
RadialSignature corner_radial_signature(const CornerSet& corners);

// Nearest-neighbor interpolation of the radial signature onto integer
// degrees 0..359 (circular distance; ties resolved counterclockwise, which
// keeps the map equivariant under rotations of the corner set).
std::array<double, 360> interpolate_signature(const RadialSignature& sig);

// Maximum absolute steered response over all scales and M uniform directions
// m*pi/M, evaluated at every boundary point of the contour.
GradientSignature multiscale_gradient_signature(const GrayImage& img, const Contour& contour,
                                                const std::vector<double>& scales,
                                                int num_directions);

// Deposits f(k) + i*f_d(k) of each boundary point into the cell indexed by
// its normalized radius and angle; cell values are deposit averages.
PolarGrid rasterize_polar(const GradientSignature& sig, int r_bins, int t_bins);

// Density-weighted variant for uniformly resampled boundaries: cells
// accumulate deposit / point_count, so a cell's value carries the arc length
// passing through it. Averaging instead would quantize the boundary ring to
// a binary indicator and make the spectrum jitter under rotation/rescaling.
// A positive max_r_override replaces the signature's own maximum radius as
// the normalizer (radii beyond it land in the outermost ring).
PolarGrid rasterize_polar_density(const GradientSignature& sig, int r_bins, int t_bins,
                                  double max_r_override = 0.0);

// Region variant used by the 2-D Fourier region descriptor: every foreground
// pixel deposits 1+0i, radius normalized by the maximum region radius about
// the region centroid.
PolarGrid rasterize_region_polar(const BinaryImage& mask, int r_bins, int t_bins);

}  // namespace shapekit
