#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapekit/common.hpp"

namespace shapekit {

// Row-major raster of scalar intensities. Loaded images hold values in
// [0, 1]; filter responses reuse the same container with unbounded values.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t pixel_count() const { return data.size(); }
};

// Foreground mask with the dimensions of its source image.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // nonzero = foreground

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), mask(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return mask[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t foreground_count() const;
};

GrayImage to_gray(const BinaryImage& mask);

// ---------------------------------------------------------------------------
// File ingestion. PNG, PGM (P2/P5) and GIF (87a/89a, first frame) silhouettes
// are decoded to 8-bit gray and scaled to [0, 1].
// ---------------------------------------------------------------------------

GrayImage load_image(const std::string& path);
GrayImage load_png(const std::string& path);
GrayImage load_pgm(const std::string& path);
GrayImage load_gif(const std::string& path);

void save_pgm(const GrayImage& img, const std::string& path);

// ---------------------------------------------------------------------------
// Geometric transforms used by the invariance harness and tests.
// ---------------------------------------------------------------------------

// Quarter-turn counterclockwise (exact pixel permutation).
GrayImage rotate90(const GrayImage& img);

// Rotation about the image center by arbitrary degrees, nearest-neighbor
// sampled onto a canvas large enough to hold the rotated bounding box.
GrayImage rotate_nn(const GrayImage& img, double degrees);

// Nearest-neighbor rescale by a positive factor.
GrayImage scale_nn(const GrayImage& img, double factor);

// Shift content by integer offsets onto a canvas grown by the padding margin;
// vacated pixels are background (0).
GrayImage translate(const GrayImage& img, int dx, int dy, int pad = 0);

// Flips `fraction` of boundary-adjacent pixels (both sides of the 0.5 level
// set), chosen by a seeded shuffle. Models contour noise on silhouettes.
GrayImage flip_boundary_noise(const GrayImage& img, double fraction, std::uint64_t seed);

}  // namespace shapekit
