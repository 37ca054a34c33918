#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "shapekit/common.hpp"
#include "shapekit/image.hpp"

namespace testutil {

using shapekit::GrayImage;

inline double max_abs_diff(const std::vector<std::complex<double>>& a,
                           const std::vector<std::complex<double>>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline std::vector<std::complex<double>> random_complex(std::size_t n, std::uint64_t seed) {
    shapekit::SplitMix64 rng(seed);
    std::vector<std::complex<double>> out(n);
    for (auto& v : out) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return out;
}

inline std::vector<double> random_reals(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                        double hi = 1.0) {
    shapekit::SplitMix64 rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.uniform(lo, hi);
    return out;
}

inline GrayImage random_image(int w, int h, std::uint64_t seed) {
    shapekit::SplitMix64 rng(seed);
    GrayImage img(w, h);
    for (double& v : img.data) v = rng.uniform01();
    return img;
}

// Smooth synthetic test images for convolution identities.
inline GrayImage ramp_image(int w, int h, double ax, double ay) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = (ax * x + ay * y) / (ax * w + ay * h + 1.0);
    return img;
}

inline GrayImage gaussian_blob_image(int w, int h, double cx, double cy, double sigma) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * sigma * sigma));
    return img;
}

inline GrayImage sinusoid_image(int w, int h, double fx, double fy) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = 0.5 + 0.5 * std::sin(fx * x + fy * y);
    return img;
}

// Unique scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("shapekit-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
