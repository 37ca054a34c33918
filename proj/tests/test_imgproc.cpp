#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>

#include "oracles.hpp"
#include "shapekit/imgproc.hpp"
#include "shapekit/synth.hpp"
#include "testutil.hpp"

using namespace shapekit;
namespace tu = testutil;

// ===========================================================================
// Otsu
// ===========================================================================

namespace {

// image whose pixels realize the given 256-bin histogram (values at bin centers)
GrayImage image_from_histogram(const std::vector<int>& hist) {
    std::vector<double> pixels;
    for (int b = 0; b < static_cast<int>(hist.size()); ++b)
        for (int i = 0; i < hist[b]; ++i) pixels.push_back((b + 0.5) / 256.0);
    GrayImage img(static_cast<int>(pixels.size()), 1);
    img.data = pixels;
    return img;
}

void check_otsu_against_oracle(const GrayImage& img) {
    const double t = otsu_threshold(img);
    const oracle::OtsuSplit split = oracle::otsu_exhaustive(img);
    std::int64_t n0 = 0;
    for (double v : img.data) n0 += v <= t;
    CHECK(n0 == split.n0);  // identical class partition
}

}  // namespace

TEST_CASE("otsu separates a half-black half-white image") {
    GrayImage img(16, 16);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = i < 128 ? 0.0 : 1.0;
    const double t = otsu_threshold(img);
    CHECK(t >= 0.0);
    CHECK(t < 1.0);
    BinaryImage mask = binarize(img, t);
    CHECK(mask.foreground_count() == 128);
    check_otsu_against_oracle(img);
}

TEST_CASE("otsu rejects a constant image") {
    GrayImage img(8, 8, 0.5);
    CHECK_THROWS_AS((void)otsu_threshold(img), Error);
    try {
        (void)otsu_threshold(img);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateHistogram);
    }
}

TEST_CASE("otsu two-level image: threshold lies between the levels") {
    GrayImage img(20, 10);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = i % 2 == 0 ? 10.0 / 255.0 : 200.0 / 255.0;
    const double t = otsu_threshold(img);
    CHECK(t >= 10.0 / 255.0);
    CHECK(t < 200.0 / 255.0);
    check_otsu_against_oracle(img);
}

TEST_CASE("otsu equals exhaustive search on 200 random histograms") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> hist(256, 0);
        const int modes = 1 + static_cast<int>(rng.below(4));
        for (int m = 0; m < modes; ++m) {
            const int center = static_cast<int>(rng.below(256));
            const int spread = 1 + static_cast<int>(rng.below(40));
            const int mass = 20 + static_cast<int>(rng.below(200));
            for (int i = 0; i < mass; ++i) {
                int b = center + static_cast<int>(rng.below(2 * spread + 1)) - spread;
                hist[std::clamp(b, 0, 255)]++;
            }
        }
        int occupied = 0;
        for (int h : hist) occupied += h > 0;
        if (occupied < 2) continue;
        check_otsu_against_oracle(image_from_histogram(hist));
    }
}

// ===========================================================================
// Gaussian derivative kernels and steering
// ===========================================================================

TEST_CASE("derivative kernel parity at sigma=1") {
    DerivKernelPair pair = gaussian_deriv_kernels(1.0);
    const int r = pair.radius;
    const int side = 2 * r + 1;
    double sum = 0.0, pos = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = pair.g0.weights[static_cast<std::size_t>(dy + r) * side + (dx + r)];
            const double mirrored_x =
                pair.g0.weights[static_cast<std::size_t>(dy + r) * side + (-dx + r)];
            const double mirrored_y =
                pair.g0.weights[static_cast<std::size_t>(-dy + r) * side + (dx + r)];
            CHECK(std::abs(v + mirrored_x) < 1e-12);  // antisymmetric in x
            CHECK(std::abs(v - mirrored_y) < 1e-12);  // symmetric in y
            // g90 is g0 with axes exchanged
            CHECK(pair.g90.weights[static_cast<std::size_t>(dx + r) * side + (dy + r)] == v);
            sum += v;
            if (v > 0.0) pos += v;
        }
    CHECK(std::abs(sum) < 1e-12);
    CHECK(pos == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r == 3);  // ceil(3 * sigma)
}

TEST_CASE("x-derivative of a ramp is a positive constant in the interior") {
    GrayImage ramp(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) ramp.at(x, y) = x / 32.0;
    DerivKernelPair pair = gaussian_deriv_kernels(1.0);
    GrayImage resp = oracle::convolve_direct(ramp, pair.g0.weights, pair.radius);
    const double center = resp.at(16, 16);
    CHECK(center > 0.0);
    for (int y = 8; y < 24; ++y)
        for (int x = 8; x < 24; ++x) CHECK(resp.at(x, y) == doctest::Approx(center).epsilon(1e-9));
}

TEST_CASE("invalid scale is rejected") {
    CHECK_THROWS_AS((void)gaussian_deriv_kernels(0.0), Error);
    CHECK_THROWS_AS((void)gaussian_deriv_kernels(-1.0), Error);
}

TEST_CASE("steer_response at 0 and pi/2 returns the basis responses") {
    GrayImage img = tu::random_image(24, 20, 7);
    ResponsePair pair = compute_responses(img, 1.0);
    CHECK(tu::max_abs_diff(steer_response(pair, 0.0), pair.r0) < 1e-15);
    GrayImage at90 = steer_response(pair, kPi / 2.0);
    for (std::size_t i = 0; i < at90.data.size(); ++i)
        CHECK(at90.data[i] == doctest::Approx(pair.r90.data[i]).epsilon(1e-12));
}

TEST_CASE("steering equals direct convolution with the rotated kernel") {
    const GrayImage images[] = {
        tu::ramp_image(40, 40, 1.0, 0.5),
        tu::gaussian_blob_image(40, 40, 19.0, 21.0, 6.0),
        tu::sinusoid_image(40, 40, 0.3, 0.2),
    };
    for (const GrayImage& img : images) {
        ResponsePair pair = compute_responses(img, 1.0);
        for (double theta : {kPi / 4.0, kPi / 3.0, 1.1, 2.7}) {
            GrayImage steered = steer_response(pair, theta);
            int radius;
            auto kernel = oracle::rotated_deriv_kernel(1.0, theta, radius);
            GrayImage direct = oracle::convolve_direct(img, kernel, radius);
            CHECK(tu::max_abs_diff(steered, direct) < 1e-6);
        }
    }
}

TEST_CASE("steering identity holds pointwise for random images") {
    GrayImage img = tu::random_image(16, 16, 77);
    ResponsePair pair = compute_responses(img, 1.4);
    for (double theta : {0.3, 1.0, 2.5, 4.0, 5.9}) {
        GrayImage steered = steer_response(pair, theta);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                CHECK(steered.at(x, y) ==
                      doctest::Approx(std::cos(theta) * pair.r0.at(x, y) +
                                      std::sin(theta) * pair.r90.at(x, y))
                          .epsilon(1e-12));
    }
}

// ===========================================================================
// Canny
// ===========================================================================

namespace {

// 8-connected component count of a mask
int component_count(const BinaryImage& mask) {
    std::vector<int> label(mask.mask.size(), -1);
    int count = 0;
    for (int y0 = 0; y0 < mask.height; ++y0)
        for (int x0 = 0; x0 < mask.width; ++x0) {
            const std::size_t i0 = static_cast<std::size_t>(y0) * mask.width + x0;
            if (!mask.mask[i0] || label[i0] >= 0) continue;
            ++count;
            std::deque<std::pair<int, int>> q{{x0, y0}};
            label[i0] = count;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * mask.width + nx;
                        if (mask.mask[j] && label[j] < 0) {
                            label[j] = count;
                            q.emplace_back(nx, ny);
                        }
                    }
            }
        }
    return count;
}

// true if a flood fill from (sx, sy) through non-edge pixels reaches the border
bool leaks_to_border(const BinaryImage& edges, int sx, int sy) {
    std::vector<char> seen(edges.mask.size(), 0);
    std::deque<std::pair<int, int>> q{{sx, sy}};
    seen[static_cast<std::size_t>(sy) * edges.width + sx] = 1;
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        if (x == 0 || y == 0 || x == edges.width - 1 || y == edges.height - 1) return true;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const int nx = x + dx, ny = y + dy;
            const std::size_t j = static_cast<std::size_t>(ny) * edges.width + nx;
            if (!seen[j] && !edges.mask[j]) {
                seen[j] = 1;
                q.emplace_back(nx, ny);
            }
        }
    }
    return false;
}

}  // namespace

TEST_CASE("canny of a constant image is empty") {
    GrayImage img(32, 32, 0.7);
    BinaryImage edges = canny_edges(img);
    CHECK(edges.foreground_count() == 0);
}

TEST_CASE("canny rejects out-of-range parameters") {
    GrayImage img = tu::random_image(8, 8, 1);
    CHECK_THROWS_AS((void)canny_edges(img, {1.0, 1.5, 0.9}), Error);
    CHECK_THROWS_AS((void)canny_edges(img, {1.0, 0.4, 0.0}), Error);
    CHECK_THROWS_AS((void)canny_edges(img, {0.0, 0.4, 0.9}), Error);
}

TEST_CASE("canny localizes a filled square within one pixel and closes the loop") {
    // 20x20 square in a 64x64 field, top-left corner at (22, 22)
    GrayImage img(64, 64, 0.0);
    for (int y = 22; y < 42; ++y)
        for (int x = 22; x < 42; ++x) img.at(x, y) = 1.0;
    BinaryImage edges = canny_edges(img);
    CHECK(edges.foreground_count() > 0);

    // every edge pixel within 1 px of the analytic boundary (the outline of
    // the foreground pixel block)
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            if (!edges.at(x, y)) continue;
            const double dx = std::max({21.5 - x, x - 41.5, 0.0});
            const double dy = std::max({21.5 - y, y - 41.5, 0.0});
            double dist;
            if (dx > 0.0 || dy > 0.0)
                dist = std::hypot(dx, dy);
            else
                dist = std::min({x - 21.5, 41.5 - x, y - 21.5, 41.5 - y});
            CHECK(dist <= 1.0);
        }
    // single 8-connected closed loop: one component that encloses the center
    CHECK(component_count(edges) == 1);
    CHECK_FALSE(leaks_to_border(edges, 32, 32));
}

TEST_CASE("canny commutes with quarter turns") {
    GrayImage img = synth::star(64, 5, 24.0, 12.0);
    BinaryImage edges = canny_edges(img);
    BinaryImage rotated_edges = canny_edges(rotate90(img));
    REQUIRE(rotated_edges.width == edges.height);
    REQUIRE(rotated_edges.height == edges.width);
    int mismatches = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            mismatches += rotated_edges.at(y, img.width - 1 - x) != edges.at(x, y);
    CHECK(mismatches == 0);
}

// ===========================================================================
// Harris
// ===========================================================================

TEST_CASE("harris finds exactly the four vertices of a filled square") {
    GrayImage img = synth::square(96, 48.0);
    const double lo = (96 - 1) / 2.0 - 24.0, hi = (96 - 1) / 2.0 + 24.0;
    CornerSet corners = harris_corners(img, {});
    REQUIRE(corners.points.size() == 4);
    const double vx[4] = {lo, hi, hi, lo};
    const double vy[4] = {lo, lo, hi, hi};
    for (int v = 0; v < 4; ++v) {
        double best = 1e9;
        for (const Corner& c : corners.points)
            best = std::min(best, std::hypot(c.x - vx[v], c.y - vy[v]));
        CHECK(best <= 2.0);
    }
    // descending strength ordering
    for (std::size_t i = 1; i < corners.points.size(); ++i)
        CHECK(corners.points[i - 1].strength >= corners.points[i].strength);
}

TEST_CASE("harris response field matches the eigenvalue oracle") {
    GrayImage img = synth::square(64, 30.0);
    GrayImage resp = harris_response(img, 0.04, 1.5);
    GrayImage ref = oracle::harris_eigen_response(img, 0.04, 1.5);
    double scale = 0.0;
    for (double v : ref.data) scale = std::max(scale, std::abs(v));
    CHECK(tu::max_abs_diff(resp, ref) < 1e-9 * scale);
}

TEST_CASE("harris on a filled disk yields too few corners") {
    GrayImage img = synth::disk(96, 36.0);
    // oracle shows a near-uniform, non-positive peak response along the rim
    GrayImage ref = oracle::harris_eigen_response(img, 0.04, 1.5);
    GrayImage sq_ref = oracle::harris_eigen_response(synth::square(96, 48.0), 0.04, 1.5);
    double disk_max = 0.0, square_max = 0.0;
    for (double v : ref.data) disk_max = std::max(disk_max, v);
    for (double v : sq_ref.data) square_max = std::max(square_max, v);
    CHECK(disk_max < 0.05 * square_max);

    CHECK_THROWS_AS((void)harris_corners(img, {}), Error);
    try {
        (void)harris_corners(img, {});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewCorners);
    }
}

TEST_CASE("harris caps a 50-vertex star at max_count") {
    GrayImage img = synth::star(256, 50, 110.0, 80.0);
    HarrisParams p;
    p.max_count = 40;
    p.nms_radius = 3;  // vertices are a few pixels apart on this star
    CornerSet corners = harris_corners(img, p);
    CHECK(corners.points.size() == 40);
}

TEST_CASE("harris corners rotate with the image") {
    GrayImage img = synth::rectangle(96, 56.0, 30.0);
    CornerSet base = harris_corners(img, {});
    CornerSet rotated = harris_corners(rotate90(img), {});
    REQUIRE(base.points.size() == rotated.points.size());
    for (const Corner& c : base.points) {
        // (x, y) -> (y, W-1-x) under the library's quarter turn
        const double rx = c.y, ry = img.width - 1 - c.x;
        double best = 1e9;
        for (const Corner& r : rotated.points) best = std::min(best, std::hypot(r.x - rx, r.y - ry));
        CHECK(best <= 2.0);
    }
}

TEST_CASE("harris validates parameters") {
    GrayImage img = synth::square(64, 32.0);
    HarrisParams bad_k;
    bad_k.k = 0.2;
    CHECK_THROWS_AS((void)harris_corners(img, bad_k), Error);
    HarrisParams bad_count;
    bad_count.max_count = 2;
    CHECK_THROWS_AS((void)harris_corners(img, bad_count), Error);
}
