#include "shapekit/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace shapekit {

int descriptor_dims(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Gfd: return 36;
        case DescriptorKind::Msgbd: return 36;
        case DescriptorKind::Cbid: return 10;
        case DescriptorKind::Efd: return 36;
        case DescriptorKind::Cbfd: return 36;
        case DescriptorKind::Isd: return 72;
    }
    return 0;
}

const char* kind_name(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Gfd: return "gfd";
        case DescriptorKind::Msgbd: return "msgbd";
        case DescriptorKind::Cbid: return "cbid";
        case DescriptorKind::Efd: return "efd";
        case DescriptorKind::Cbfd: return "cbfd";
        case DescriptorKind::Isd: return "isd";
    }
    return "?";
}

std::optional<DescriptorKind> kind_from_name(const std::string& name) {
    for (DescriptorKind k : {DescriptorKind::Gfd, DescriptorKind::Msgbd, DescriptorKind::Cbid,
                             DescriptorKind::Efd, DescriptorKind::Cbfd, DescriptorKind::Isd})
        if (name == kind_name(k)) return k;
    return std::nullopt;
}

std::vector<double> ExtractionConfig::msgbd_scales() const {
    std::vector<double> scales(msgbd_levels);
    double s = msgbd_sigma0;
    for (int i = 0; i < msgbd_levels; ++i) {
        scales[i] = s;
        s *= msgbd_factor;
    }
    return scales;
}

// ===========================================================================
// Extraction helpers
// ===========================================================================

namespace {

BinaryImage binarize_shape(const GrayImage& img) {
    double t;
    try {
        t = otsu_threshold(img);
    } catch (const Error& e) {
        if (e.code() == Errc::DegenerateHistogram)
            fail(Errc::EmptyShape, "image has no separable foreground");
        throw;
    }
    BinaryImage mask = binarize(img, t);
    if (mask.foreground_count() == 0) fail(Errc::EmptyShape, "empty foreground after binarization");
    return mask;
}

Contour trace_shape(const BinaryImage& mask) {
    try {
        return trace_boundary(mask);
    } catch (const Error& e) {
        if (e.code() == Errc::EmptyMask) fail(Errc::EmptyShape, "no traceable boundary");
        throw;
    }
}

void region_centroid(const BinaryImage& mask, double& cx, double& cy) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    // dyadic snap, same rationale as the geometry module's centroids
    cx = std::round(sx / static_cast<double>(n) * 1024.0) / 1024.0;
    cy = std::round(sy / static_cast<double>(n) * 1024.0) / 1024.0;
}

}  // namespace

// ===========================================================================
// Extractors
// ===========================================================================

Descriptor extract_gfd(const GrayImage& img, const ExtractionConfig& cfg) {
    const BinaryImage mask = binarize_shape(img);
    const PolarGrid grid = rasterize_region_polar(mask, cfg.gfd_r_bins, cfg.gfd_t_bins);
    const Spectrum2D spec = polar_ft_2d(grid);
    return Descriptor{DescriptorKind::Gfd, normalize_fd_2d(spec, cfg.gfd_radial, cfg.gfd_angular)};
}

Descriptor extract_msgbd(const GrayImage& img, const ExtractionConfig& cfg) {
    const BinaryImage mask = binarize_shape(img);
    // The boundary comes from the traced silhouette: it is closed by
    // construction, whereas tracing the thin Canny ring doubles back on
    // itself wherever hysteresis leaves a gap (sharp tips do this). The
    // steered responses are still measured on the image along that boundary.
    Contour contour = trace_shape(mask);
    // Polar coordinates are taken about the region centroid of the silhouette,
    // not the centroid of the boundary pixels. The boundary is resampled to a
    // fixed point count so the grid deposit density is resolution independent.
    region_centroid(mask, contour.cx, contour.cy);
    contour = resample_contour(contour, 2048);

    // Anti-alias the raster before sampling responses: the scale schedule
    // starts well below one pixel, where raw 0/1 stairs modulate the response
    // with the stair phase instead of the underlying edge.
    const GrayImage conditioned = convolve(img, gaussian_kernel(0.8));
    GradientSignature sig =
        multiscale_gradient_signature(conditioned, contour, cfg.msgbd_scales(),
                                      cfg.msgbd_directions);

    // Make the deposit rotation-covariant and dimensionless: magnitudes are
    // scaled to [0,1] by their maximum, and the response direction is taken
    // relative to the point's own radial angle (mod pi) before the /pi
    // squeeze. An absolute direction would wrap differently after a global
    // rotation and break the descriptor's rotation invariance. Both channels
    // are smoothed along the boundary (angles via their doubled-angle vector)
    // to suppress raster stair noise; the retained low frequencies live far
    // below the smoothing window.
    const std::size_t n_pts = sig.magnitude.size();
    std::vector<double> f(n_pts), cs(n_pts), sn(n_pts);
    for (std::size_t k = 0; k < n_pts; ++k) {
        f[k] = sig.magnitude[k];
        double rel = std::fmod(sig.direction_continuous[k] - sig.polar[k].theta, kPi);
        if (rel < 0.0) rel += kPi;
        cs[k] = std::cos(2.0 * rel);
        sn[k] = std::sin(2.0 * rel);
    }
    const std::size_t half = static_cast<std::size_t>(std::lround(0.015 * static_cast<double>(n_pts)));
    if (half > 0) {
        auto circ_smooth = [half](std::vector<double>& v) {
            const std::size_t n = v.size();
            std::vector<double> out(n);
            const double inv = 1.0 / static_cast<double>(2 * half + 1);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = i + n - half; k <= i + n + half; ++k) s += v[k % n];
                out[i] = s * inv;
            }
            v = std::move(out);
        };
        circ_smooth(f);
        circ_smooth(cs);
        circ_smooth(sn);
    }
    double max_f = 0.0;
    for (double v : f) max_f = std::max(max_f, v);
    if (!(max_f > 0.0)) fail(Errc::EmptyShape, "flat gradient response along boundary");
    for (std::size_t k = 0; k < n_pts; ++k) {
        sig.magnitude[k] = f[k] / max_f;
        double rel = 0.5 * std::atan2(sn[k], cs[k]);
        if (rel < 0.0) rel += kPi;
        sig.direction[k] = rel / kPi;
    }

    // Radii are normalized by the region's own maximum radius: the Canny ring
    // sits a fixed sub-pixel offset outside the silhouette, and against a
    // ring-derived maximum that offset would warp the radial axis instead of
    // shifting it uniformly (magnitudes are invariant to a uniform shift).
    double region_max_r = 0.0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y))
                region_max_r =
                    std::max(region_max_r, std::hypot(x - contour.cx, y - contour.cy));

    const PolarGrid grid =
        rasterize_polar_density(sig, cfg.msgbd_r_bins, cfg.msgbd_t_bins, region_max_r);
    const Spectrum2D spec = polar_ft_2d(grid);
    return Descriptor{DescriptorKind::Msgbd,
                      normalize_fd_2d(spec, cfg.msgbd_keep_radial, cfg.msgbd_keep_angular)};
}

Descriptor extract_cbid(const GrayImage& img, const ExtractionConfig& cfg) {
    const BinaryImage mask = binarize_shape(img);
    GrayImage silhouette = to_gray(mask);

    // Corner detection happens at a canonical working scale (max region
    // radius snapped near 100 px by a power-of-two resample): the detector's
    // internal scales are all fixed in pixels, so different input resolutions
    // would otherwise yield different corner sets. Snapping to powers of two
    // keeps the nearest-neighbor resample artifact-free, and cropping to the
    // foreground bounding box first phase-locks the resample grid to the
    // shape so integer translations cannot change the decimation parity.
    double cx, cy;
    region_centroid(mask, cx, cy);
    double region_max_r = 0.0;
    int bx0 = mask.width, by0 = mask.height, bx1 = -1, by1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                region_max_r = std::max(region_max_r, std::hypot(x - cx, y - cy));
                bx0 = std::min(bx0, x);
                by0 = std::min(by0, y);
                bx1 = std::max(bx1, x);
                by1 = std::max(by1, y);
            }
    if (!(region_max_r > 0.0)) fail(Errc::EmptyShape, "degenerate region");
    const double factor = std::pow(2.0, std::round(std::log2(100.0 / region_max_r)));
    {
        const int margin = static_cast<int>(std::ceil(12.0 / factor));
        const int cx0 = std::max(0, bx0 - margin), cy0 = std::max(0, by0 - margin);
        const int cx1 = std::min(mask.width - 1, bx1 + margin);
        const int cy1 = std::min(mask.height - 1, by1 + margin);
        GrayImage cropped(cx1 - cx0 + 1, cy1 - cy0 + 1);
        for (int y = cy0; y <= cy1; ++y)
            for (int x = cx0; x <= cx1; ++x) cropped.at(x - cx0, y - cy0) = silhouette.at(x, y);
        silhouette = factor == 1.0 ? std::move(cropped) : scale_nn(cropped, factor);
    }

    const BinaryImage edges = canny_edges(silhouette, cfg.canny);
    HarrisParams hp = cfg.harris;
    hp.max_count = cfg.cbid_max_corners;
    // anti-aliased input; raw 0/1 stairs on slanted edges fire pixel-scale
    // corner responses of their own
    CornerSet corners = harris_corners(convolve(silhouette, gaussian_kernel(1.0)), hp);

    // Keep only corners sitting on (or next to) the Canny edge set; Harris on
    // a flat silhouette occasionally fires just inside the boundary.
    const int tol = cfg.cbid_edge_tolerance;
    std::vector<Corner> filtered;
    for (const Corner& c : corners.points) {
        const int cx = static_cast<int>(std::lround(c.x));
        const int cy = static_cast<int>(std::lround(c.y));
        bool on_edge = false;
        for (int dy = -tol; dy <= tol && !on_edge; ++dy)
            for (int dx = -tol; dx <= tol && !on_edge; ++dx)
                if (edges.in_bounds(cx + dx, cy + dy) && edges.at(cx + dx, cy + dy)) on_edge = true;
        if (on_edge) filtered.push_back(c);
    }
    if (filtered.size() < 3) fail(Errc::TooFewCorners, "fewer than 3 corners on the edge set");
    corners.points = std::move(filtered);

    const RadialSignature radial = corner_radial_signature(corners);
    const std::array<double, 360> interpolated = interpolate_signature(radial);
    const Spectrum1D spec = dft1d(std::vector<double>(interpolated.begin(), interpolated.end()));
    // The interpolated signature is positive and already scale-normalized by
    // Max(R), so the DC coefficient is the safe normalizer here.
    return Descriptor{DescriptorKind::Cbid, normalize_fd_1d(spec, cfg.cbid_fds, FdReference::Dc)};
}

Descriptor extract_efd(const GrayImage& img, const ExtractionConfig& cfg) {
    const BinaryImage mask = binarize_shape(img);
    const Contour contour = trace_shape(mask);
    const EllipticCoeffs coeffs = elliptic_coeffs(contour, cfg.efd_harmonics);
    const EllipticHarmonic& h1 = coeffs.harmonics[0];
    const double e1 = std::sqrt(h1.a * h1.a + h1.b * h1.b + h1.c * h1.c + h1.d * h1.d);
    if (!(e1 > 1e-300)) fail(Errc::ZeroReference, "first elliptic harmonic is zero");
    Descriptor out{DescriptorKind::Efd, {}};
    out.values.reserve(static_cast<std::size_t>(cfg.efd_harmonics) * 4);
    for (const EllipticHarmonic& h : coeffs.harmonics) {
        out.values.push_back(h.a / e1);
        out.values.push_back(h.b / e1);
        out.values.push_back(h.c / e1);
        out.values.push_back(h.d / e1);
    }
    return out;
}

Descriptor extract_cbfd(const GrayImage& img, const ExtractionConfig& cfg) {
    const BinaryImage mask = binarize_shape(img);
    const Contour contour = trace_shape(mask);
    const std::vector<double> sig = centroid_distance_signature(contour, cfg.cbfd_samples);
    const Spectrum1D spec = dft1d(sig);
    // Centroid distances are positive, so DC is nonzero for any valid shape;
    // dividing by it keeps the circle's descriptor at (near) zero instead of
    // amplifying discretization noise the way a first-harmonic reference would.
    return Descriptor{DescriptorKind::Cbfd, normalize_fd_1d(spec, cfg.cbfd_fds, FdReference::Dc)};
}

Descriptor combine_isd(const Descriptor& gfd, const Descriptor& msgbd, const IsdWeights& weights) {
    if (gfd.kind != DescriptorKind::Gfd || msgbd.kind != DescriptorKind::Msgbd)
        fail(Errc::KindMismatch, "combine_isd expects (GFD, MSGBD)");
    if (!(weights.alpha >= 0.0 && weights.beta >= 0.0 && weights.alpha + weights.beta > 0.0))
        fail(Errc::InvalidParams, "ISD weights must be nonnegative and not both zero");
    Descriptor out{DescriptorKind::Isd, {}};
    out.values.reserve(gfd.values.size() + msgbd.values.size());
    for (double v : gfd.values) out.values.push_back(weights.alpha * v);
    for (double v : msgbd.values) out.values.push_back(weights.beta * v);
    return out;
}

Descriptor extract_isd(const GrayImage& img, const IsdWeights& weights, const ExtractionConfig& cfg) {
    return combine_isd(extract_gfd(img, cfg), extract_msgbd(img, cfg), weights);
}

Descriptor extract_descriptor(const GrayImage& img, DescriptorKind kind, const IsdWeights& weights,
                              const ExtractionConfig& cfg) {
    switch (kind) {
        case DescriptorKind::Gfd: return extract_gfd(img, cfg);
        case DescriptorKind::Msgbd: return extract_msgbd(img, cfg);
        case DescriptorKind::Cbid: return extract_cbid(img, cfg);
        case DescriptorKind::Efd: return extract_efd(img, cfg);
        case DescriptorKind::Cbfd: return extract_cbfd(img, cfg);
        case DescriptorKind::Isd: return extract_isd(img, weights, cfg);
    }
    fail(Errc::InvalidParams, "unknown descriptor kind");
}

double cityblock(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail(Errc::KindMismatch, "vector length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

double cityblock(const Descriptor& a, const Descriptor& b) {
    if (a.kind != b.kind) fail(Errc::KindMismatch, "descriptor kinds differ");
    return cityblock(a.values, b.values);
}

// ===========================================================================
// Persistence
// ===========================================================================

void save_descriptor_records(const std::string& path, const std::vector<DescriptorRecord>& records) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    char buf[64];
    for (const DescriptorRecord& rec : records) {
        out << rec.path << '\t' << rec.label << '\t' << kind_name(rec.desc.kind) << '\t'
            << rec.desc.values.size() << '\t';
        for (std::size_t i = 0; i < rec.desc.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", rec.desc.values[i]);
            if (i) out << ' ';
            out << buf;
        }
        out << '\n';
    }
    if (!out) fail(Errc::IoError, "short write to " + path);
}

std::vector<DescriptorRecord> load_descriptor_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::vector<DescriptorRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        DescriptorRecord rec;
        std::string kind_str, dims_str;
        if (!std::getline(ls, rec.path, '\t') || !std::getline(ls, rec.label, '\t') ||
            !std::getline(ls, kind_str, '\t') || !std::getline(ls, dims_str, '\t'))
            fail(Errc::ParseError, path + ": malformed record at line " + std::to_string(line_no));
        const auto kind = kind_from_name(kind_str);
        if (!kind) fail(Errc::ParseError, path + ": unknown kind '" + kind_str + "'");
        rec.desc.kind = *kind;
        const int dims = std::stoi(dims_str);
        rec.desc.values.resize(dims);
        for (int i = 0; i < dims; ++i)
            if (!(ls >> rec.desc.values[i]))
                fail(Errc::ParseError, path + ": truncated values at line " + std::to_string(line_no));
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace shapekit
