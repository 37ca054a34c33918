#include "shapekit/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace shapekit {

// ===========================================================================
// Otsu
// ===========================================================================

double otsu_threshold(const GrayImage& img) {
    if (img.pixel_count() == 0) fail(Errc::EmptyMask, "empty image");
    constexpr int kBins = 256;
    std::array<std::int64_t, kBins> hist{};
    std::array<double, kBins> bin_max{};
    bin_max.fill(-1.0);
    for (double v : img.data) {
        int b = static_cast<int>(v * kBins);
        b = std::clamp(b, 0, kBins - 1);
        ++hist[b];
        bin_max[b] = std::max(bin_max[b], v);
    }

    int occupied = 0;
    for (int b = 0; b < kBins; ++b) occupied += hist[b] > 0;
    if (occupied < 2) fail(Errc::DegenerateHistogram, "all pixels share one intensity bin");

    const double total = static_cast<double>(img.pixel_count());
    double total_mean = 0.0;
    for (int b = 0; b < kBins; ++b) total_mean += hist[b] * (b + 0.5) / kBins;
    total_mean /= total;

    // Split after bin k: class 0 = bins [0, k], class 1 = bins (k, 255].
    double best_var = -1.0;
    int best_k = -1;
    double w0 = 0.0, sum0 = 0.0;
    for (int k = 0; k < kBins - 1; ++k) {
        w0 += hist[k];
        sum0 += hist[k] * (k + 0.5) / kBins;
        const double w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (total_mean * total - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {  // strict: ties keep the smaller k
            best_var = var;
            best_k = k;
        }
    }
    if (best_k < 0) fail(Errc::DegenerateHistogram, "no separating threshold");

    // Largest intensity actually present in the background class, so that
    // (intensity > t) reproduces the chosen histogram split.
    double t = 0.0;
    for (int b = best_k; b >= 0; --b) {
        if (hist[b] > 0) {
            t = bin_max[b];
            break;
        }
    }
    return t;
}

BinaryImage binarize(const GrayImage& img, double threshold) {
    BinaryImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.mask[i] = img.data[i] > threshold ? 1 : 0;
    return out;
}

// ===========================================================================
// Convolution
// ===========================================================================

namespace {

// Mirror-without-repeat reflection: -1 -> 1, n -> n-2.
inline int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

}  // namespace

GrayImage convolve(const GrayImage& img, const Kernel2D& kernel) {
    const int r = kernel.radius;
    const int side = 2 * r + 1;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const bool y_interior = y >= r && y + r < img.height;
        for (int x = 0; x < img.width; ++x) {
            const bool interior = y_interior && x >= r && x + r < img.width;
            double acc = 0.0;
            if (interior) {
                for (int dy = -r; dy <= r; ++dy) {
                    const double* row = &img.data[static_cast<std::size_t>(y - dy) * img.width];
                    const double* w = &kernel.weights[static_cast<std::size_t>(dy + r) * side];
                    for (int dx = -r; dx <= r; ++dx) acc += w[dx + r] * row[x - dx];
                }
            } else {
                for (int dy = -r; dy <= r; ++dy) {
                    const int sy = reflect(y - dy, img.height);
                    const double* w = &kernel.weights[static_cast<std::size_t>(dy + r) * side];
                    for (int dx = -r; dx <= r; ++dx)
                        acc += w[dx + r] * img.at(reflect(x - dx, img.width), sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

Kernel2D gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) fail(Errc::InvalidScale, "sigma must be positive");
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * r + 1;
    Kernel2D k{r, std::vector<double>(static_cast<std::size_t>(side) * side)};
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k.weights[static_cast<std::size_t>(dy + r) * side + (dx + r)] = v;
            sum += v;
        }
    for (double& w : k.weights) w /= sum;
    return k;
}

DerivKernelPair gaussian_deriv_kernels(double sigma) {
    if (!(sigma > 0.0)) fail(Errc::InvalidScale, "sigma must be positive");
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * r + 1;
    DerivKernelPair pair;
    pair.sigma = sigma;
    pair.radius = r;
    pair.g0.radius = pair.g90.radius = r;
    pair.g0.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
    pair.g90.weights.assign(pair.g0.weights.size(), 0.0);

    double pos_sum = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            const double v = -dx / (sigma * sigma) * g;  // d/dx of the Gaussian
            pair.g0.weights[static_cast<std::size_t>(dy + r) * side + (dx + r)] = v;
            if (v > 0.0) pos_sum += v;
        }
    }
    for (double& w : pair.g0.weights) w /= pos_sum;
    // g90 = g0 with axes exchanged
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            pair.g90.weights[static_cast<std::size_t>(dy + r) * side + (dx + r)] =
                pair.g0.weights[static_cast<std::size_t>(dx + r) * side + (dy + r)];
    return pair;
}

ResponsePair compute_responses(const GrayImage& img, const DerivKernelPair& kernels) {
    return ResponsePair{convolve(img, kernels.g0), convolve(img, kernels.g90), kernels.sigma};
}

ResponsePair compute_responses(const GrayImage& img, double sigma) {
    return compute_responses(img, gaussian_deriv_kernels(sigma));
}

GrayImage steer_response(const ResponsePair& pair, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    GrayImage out(pair.r0.width, pair.r0.height);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = c * pair.r0.data[i] + s * pair.r90.data[i];
    return out;
}

// ===========================================================================
// Canny
// ===========================================================================

namespace {

inline bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

BinaryImage canny_edges(const GrayImage& img, const CannyParams& p) {
    if (!(p.sigma > 0.0)) fail(Errc::InvalidScale, "canny sigma must be positive");
    if (!(p.low_ratio > 0.0 && p.low_ratio < 1.0))
        fail(Errc::InvalidParams, "low_ratio must be in (0,1)");
    if (!(p.high_quantile > 0.0 && p.high_quantile < 1.0))
        fail(Errc::InvalidParams, "high_quantile must be in (0,1)");

    const ResponsePair grad = compute_responses(img, p.sigma);
    const int w = img.width, h = img.height;
    std::vector<double> mag(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::hypot(grad.r0.data[i], grad.r90.data[i]);

    std::vector<double> nonzero;
    nonzero.reserve(mag.size() / 4);
    for (double m : mag)
        if (m > 1e-12) nonzero.push_back(m);
    BinaryImage edges(w, h);
    if (nonzero.empty()) return edges;  // constant image

    std::sort(nonzero.begin(), nonzero.end());
    const std::size_t qi = static_cast<std::size_t>(
        std::llround(p.high_quantile * static_cast<double>(nonzero.size() - 1)));
    const double high = nonzero[qi];
    const double low = p.low_ratio * high;

    // Non-maximum suppression along the quantized gradient direction. The
    // keep rule depends only on neighbor values (>= the larger, > the
    // smaller, with a relative tolerance for float noise), so it commutes
    // with axis-aligned image rotations.
    const double t_low = std::tan(22.5 * kPi / 180.0);
    const double t_high = std::tan(67.5 * kPi / 180.0);
    std::vector<std::uint8_t> keep(mag.size(), 0);
    auto mag_at = [&](int x, int y) -> double {
        if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
        return mag[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double m = mag[i];
            if (m <= 1e-12) continue;
            const double gx = grad.r0.data[i], gy = grad.r90.data[i];
            const double ax = std::abs(gx), ay = std::abs(gy);
            double n1, n2;
            if (ay <= t_low * ax) {
                n1 = mag_at(x - 1, y);
                n2 = mag_at(x + 1, y);
            } else if (ay >= t_high * ax) {
                n1 = mag_at(x, y - 1);
                n2 = mag_at(x, y + 1);
            } else if ((gx > 0) == (gy > 0)) {
                n1 = mag_at(x - 1, y - 1);
                n2 = mag_at(x + 1, y + 1);
            } else {
                n1 = mag_at(x - 1, y + 1);
                n2 = mag_at(x + 1, y - 1);
            }
            const double hi = std::max(n1, n2);
            const double lo = std::min(n1, n2);
            if ((m > hi || nearly_equal(m, hi)) && m > lo && !nearly_equal(m, lo)) keep[i] = 1;
        }
    }

    // Hysteresis: BFS from strong survivors through weak ones.
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        if (keep[i] && mag[i] >= high) {
            edges.mask[i] = 1;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (edges.mask[j] || !keep[j] || mag[j] < low) continue;
                edges.mask[j] = 1;
                queue.push_back(j);
            }
        }
    }
    return edges;
}

// ===========================================================================
// Harris-Stephens
// ===========================================================================

GrayImage harris_response(const GrayImage& img, double k, double window_sigma) {
    const ResponsePair grad = compute_responses(img, 1.0);
    const std::size_t n = img.pixel_count();
    GrayImage xx(img.width, img.height), yy(img.width, img.height), xy(img.width, img.height);
    for (std::size_t i = 0; i < n; ++i) {
        const double gx = grad.r0.data[i], gy = grad.r90.data[i];
        xx.data[i] = gx * gx;
        yy.data[i] = gy * gy;
        xy.data[i] = gx * gy;
    }
    const Kernel2D window = gaussian_kernel(window_sigma);
    const GrayImage sxx = convolve(xx, window);
    const GrayImage syy = convolve(yy, window);
    const GrayImage sxy = convolve(xy, window);
    GrayImage resp(img.width, img.height);
    for (std::size_t i = 0; i < n; ++i) {
        const double det = sxx.data[i] * syy.data[i] - sxy.data[i] * sxy.data[i];
        const double tr = sxx.data[i] + syy.data[i];
        resp.data[i] = det - k * tr * tr;
    }
    return resp;
}

CornerSet harris_corners(const GrayImage& img, const HarrisParams& p) {
    if (!(p.k >= 0.02 && p.k <= 0.1)) fail(Errc::InvalidParams, "harris k outside [0.02, 0.1]");
    if (p.max_count < 3) fail(Errc::InvalidParams, "max_count must be >= 3");
    if (!(p.window_sigma > 0.0)) fail(Errc::InvalidScale, "window_sigma must be positive");
    if (!(p.rel_threshold > 0.0) || p.nms_radius < 1)
        fail(Errc::InvalidParams, "bad harris threshold or nms radius");

    const GrayImage resp = harris_response(img, p.k, p.window_sigma);
    const double max_resp = *std::max_element(resp.data.begin(), resp.data.end());
    if (!(max_resp > 0.0)) fail(Errc::TooFewCorners, "no positive corner response");
    const double threshold = p.rel_threshold * max_resp;

    struct Candidate {
        double strength;
        int x, y;
    };
    std::vector<Candidate> cands;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double v = resp.at(x, y);
            if (v > threshold) cands.push_back({v, x, y});
        }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    // Greedy peak picking: strongest first, reject anything within the
    // suppression radius of an accepted corner.
    CornerSet out;
    out.max_count = p.max_count;
    const double r2 = static_cast<double>(p.nms_radius) * p.nms_radius;
    for (const Candidate& c : cands) {
        bool suppressed = false;
        for (const Corner& a : out.points) {
            const double dx = a.x - c.x, dy = a.y - c.y;
            if (dx * dx + dy * dy <= r2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) out.points.push_back({static_cast<double>(c.x), static_cast<double>(c.y), c.strength});
    }
    if (static_cast<int>(out.points.size()) > p.max_count) out.points.resize(p.max_count);
    if (out.points.size() < 3) fail(Errc::TooFewCorners, "fewer than 3 corners detected");
    return out;
}

}  // namespace shapekit
