#pragma once

#include <vector>

#include "shapekit/image.hpp"

namespace shapekit {

// ---------------------------------------------------------------------------
// Binarization
// ---------------------------------------------------------------------------

// Threshold maximizing between-class variance of the 256-bin histogram over
// [0, 1]. Ties go to the smaller threshold. The returned value is the largest
// intensity assigned to the background class, so `intensity > t` reproduces
// the histogram split exactly on the input image.
// Throws DegenerateHistogram when all pixels share one intensity.
double otsu_threshold(const GrayImage& img);

BinaryImage binarize(const GrayImage& img, double threshold);

// ---------------------------------------------------------------------------
// Convolution and steerable Gaussian derivatives
// ---------------------------------------------------------------------------

// Square kernel, entries indexed (dy + radius) * (2*radius + 1) + (dx + radius).
struct Kernel2D {
    int radius = 0;
    std::vector<double> weights;
};

// True convolution (kernel flipped), mirror-reflected borders.
GrayImage convolve(const GrayImage& img, const Kernel2D& kernel);

// Sum-normalized Gaussian smoothing kernel, radius ceil(3*sigma).
Kernel2D gaussian_kernel(double sigma);

// First directional derivatives of a Gaussian at scale sigma, sampled on a
// (2*ceil(3*sigma)+1)^2 grid. g0 differentiates along x, g90 along y
// (g90 is g0 with the axes exchanged). Each kernel is L1-normalized so its
// positive lobe sums to 1; antisymmetry makes the total sum zero.
struct DerivKernelPair {
    double sigma = 0.0;
    int radius = 0;
    Kernel2D g0;
    Kernel2D g90;
};

DerivKernelPair gaussian_deriv_kernels(double sigma);

// Basis responses r0 = g0 * I and r90 = g90 * I at one scale.
struct ResponsePair {
    GrayImage r0;
    GrayImage r90;
    double sigma = 0.0;
};

ResponsePair compute_responses(const GrayImage& img, double sigma);
ResponsePair compute_responses(const GrayImage& img, const DerivKernelPair& kernels);

// Steered response cos(theta)*r0 + sin(theta)*r90, pointwise.
GrayImage steer_response(const ResponsePair& pair, double theta);

inline double steer_at(const ResponsePair& pair, int x, int y, double cos_t, double sin_t) {
    return cos_t * pair.r0.at(x, y) + sin_t * pair.r90.at(x, y);
}

// ---------------------------------------------------------------------------
// Canny edges
// ---------------------------------------------------------------------------

struct CannyParams {
    double sigma = 1.0;          // gradient scale
    double low_ratio = 0.4;      // low threshold = low_ratio * high
    double high_quantile = 0.9;  // high threshold = quantile of nonzero magnitudes
};

// Gaussian-derivative gradients, non-maximum suppression along the quantized
// gradient direction, double-threshold hysteresis. A constant image yields an
// empty mask.
BinaryImage canny_edges(const GrayImage& img, const CannyParams& params = {});

// ---------------------------------------------------------------------------
// Harris-Stephens corners
// ---------------------------------------------------------------------------

struct HarrisParams {
    double k = 0.04;             // response coefficient, valid range [0.02, 0.1]
    double window_sigma = 1.5;   // structure-tensor window scale
    double rel_threshold = 0.05; // keep responses > rel_threshold * max response;
                                 // raster stair corners on silhouettes stay
                                 // below a few percent of a true vertex
    int nms_radius = 8;          // Euclidean suppression radius; a polygon vertex
                                 // on a binary silhouette peaks 3-6 px wide
    int max_count = 40;          // strongest corners kept
};

struct Corner {
    double x = 0.0;
    double y = 0.0;
    double strength = 0.0;
};

// Points sorted by descending strength, |points| <= max_count.
struct CornerSet {
    std::vector<Corner> points;
    int max_count = 0;
};

// Raw corner response det(M) - k*trace(M)^2 on the Gaussian-windowed
// structure tensor; exposed so tests can compare peak picking against an
// independent eigenvalue oracle.
GrayImage harris_response(const GrayImage& img, double k, double window_sigma);

// Throws TooFewCorners when fewer than 3 corners survive thresholding and
// non-maximum suppression.
CornerSet harris_corners(const GrayImage& img, const HarrisParams& params = {});

}  // namespace shapekit
