#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shapekit/spectral.hpp"

namespace shapekit {

enum class DescriptorKind { Gfd, Msgbd, Cbid, Efd, Cbfd, Isd };

// Fixed vector length per kind: GFD 36, MSGBD 36, CBID 10, EFD 36, CBFD 36,
// ISD 72.
int descriptor_dims(DescriptorKind kind);
const char* kind_name(DescriptorKind kind);
std::optional<DescriptorKind> kind_from_name(const std::string& name);

struct Descriptor {
    DescriptorKind kind = DescriptorKind::Gfd;
    std::vector<double> values;
};

// Mixing weights of the integrated descriptor; alpha scales the region
// block, beta the contour block.
struct IsdWeights {
    double alpha = 1.0;
    double beta = 1.0;
};

struct ExtractionConfig {
    // region 2-D Fourier descriptor
    int gfd_radial = 9;
    int gfd_angular = 4;
    int gfd_r_bins = 32;
    int gfd_t_bins = 36;

    // multi-scale gradient descriptor
    double msgbd_sigma0 = 0.1;
    double msgbd_factor = 1.4;
    int msgbd_levels = 5;
    int msgbd_directions = 10;
    int msgbd_keep_radial = 6;
    int msgbd_keep_angular = 6;
    int msgbd_r_bins = 32;
    int msgbd_t_bins = 36;

    // corner-based interpolated descriptor
    int cbid_max_corners = 40;
    int cbid_fds = 10;
    int cbid_edge_tolerance = 2;  // corner must have a Canny edge pixel this close

    // baselines
    int cbfd_samples = 128;
    int cbfd_fds = 36;
    int efd_harmonics = 9;

    CannyParams canny;    // sigma 1.0, low_ratio 0.4, high_quantile 0.9
    HarrisParams harris;  // k 0.04, window 1.5, rel_threshold 0.01, nms 3

    // sigma0 * factor^i for i in [0, levels)
    std::vector<double> msgbd_scales() const;
};

// ---------------------------------------------------------------------------
// Extractors. All are pure functions of (image, config); a shape that cannot
// be binarized or traced raises EmptyShape, corner starvation raises
// TooFewCorners (callers may fall back to the integrated descriptor).
// ---------------------------------------------------------------------------

Descriptor extract_gfd(const GrayImage& img, const ExtractionConfig& cfg = {});
Descriptor extract_msgbd(const GrayImage& img, const ExtractionConfig& cfg = {});
Descriptor extract_cbid(const GrayImage& img, const ExtractionConfig& cfg = {});
Descriptor extract_efd(const GrayImage& img, const ExtractionConfig& cfg = {});
Descriptor extract_cbfd(const GrayImage& img, const ExtractionConfig& cfg = {});
Descriptor extract_isd(const GrayImage& img, const IsdWeights& weights = {},
                       const ExtractionConfig& cfg = {});

// [alpha * gfd, beta * msgbd] concatenated, length 72.
Descriptor combine_isd(const Descriptor& gfd, const Descriptor& msgbd, const IsdWeights& weights);

Descriptor extract_descriptor(const GrayImage& img, DescriptorKind kind,
                              const IsdWeights& weights = {}, const ExtractionConfig& cfg = {});

// City-block (L1) distance; requires matching kind and length.
double cityblock(const Descriptor& a, const Descriptor& b);
double cityblock(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Persistence: one record per line -- path, class label, kind, dims, then
// dims decimal floats at 17 significant digits (exact double round-trip).
// ---------------------------------------------------------------------------

struct DescriptorRecord {
    std::string path;
    std::string label;
    Descriptor desc;
};

void save_descriptor_records(const std::string& path, const std::vector<DescriptorRecord>& records);
std::vector<DescriptorRecord> load_descriptor_records(const std::string& path);

}  // namespace shapekit
