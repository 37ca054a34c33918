#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shapekit/descriptors.hpp"
#include "shapekit/synth.hpp"
#include "testutil.hpp"

using namespace shapekit;
namespace tu = testutil;

TEST_CASE("descriptor dimensions per kind") {
    CHECK(descriptor_dims(DescriptorKind::Gfd) == 36);
    CHECK(descriptor_dims(DescriptorKind::Msgbd) == 36);
    CHECK(descriptor_dims(DescriptorKind::Cbid) == 10);
    CHECK(descriptor_dims(DescriptorKind::Efd) == 36);
    CHECK(descriptor_dims(DescriptorKind::Cbfd) == 36);
    CHECK(descriptor_dims(DescriptorKind::Isd) == 72);

    const GrayImage img = synth::star(256, 5, 90.0, 42.0);
    CHECK(extract_gfd(img).values.size() == 36);
    CHECK(extract_msgbd(img).values.size() == 36);
    CHECK(extract_cbid(img).values.size() == 10);
    CHECK(extract_efd(img).values.size() == 36);
    CHECK(extract_cbfd(img).values.size() == 36);
    CHECK(extract_isd(img).values.size() == 72);
}

TEST_CASE("default MSGBD scale schedule") {
    ExtractionConfig cfg;
    const auto scales = cfg.msgbd_scales();
    REQUIRE(scales.size() == 5);
    const double expected[] = {0.1, 0.14, 0.196, 0.2744, 0.38416};
    for (int i = 0; i < 5; ++i) CHECK(scales[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("extractors are deterministic, bit for bit") {
    const GrayImage img = synth::cross(256, 140.0, 46.0);
    for (DescriptorKind kind : {DescriptorKind::Gfd, DescriptorKind::Msgbd, DescriptorKind::Cbid,
                                DescriptorKind::Efd, DescriptorKind::Cbfd}) {
        Descriptor a = extract_descriptor(img, kind);
        Descriptor b = extract_descriptor(img, kind);
        REQUIRE(a.values.size() == b.values.size());
        for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
        CHECK(cityblock(a, b) == 0.0);
    }
}

TEST_CASE("brightness scaling leaves descriptors unchanged") {
    const GrayImage img = synth::star(256, 7, 96.0, 55.0);
    GrayImage dim = img;
    for (double& v : dim.data) v /= 3.0;
    CHECK(cityblock(extract_gfd(img), extract_gfd(dim)) < 1e-12);
    CHECK(cityblock(extract_msgbd(img), extract_msgbd(dim)) < 1e-9);
    CHECK(cityblock(extract_cbfd(img), extract_cbfd(dim)) < 1e-12);
}

TEST_CASE("CBID of a square silhouette is near zero") {
    // the interpolated corner signature of a square is constant 1, so all
    // non-DC Fourier magnitudes vanish
    const GrayImage img = synth::square(192, 100.0);
    Descriptor d = extract_cbid(img);
    for (double v : d.values) CHECK(v < 1e-9);
}

TEST_CASE("CBID is invariant to quarter turns") {
    const GrayImage img = synth::l_shape(256, 130.0, 48.0);
    Descriptor a = extract_cbid(img);
    Descriptor b = extract_cbid(rotate90(img));
    CHECK(cityblock(a, b) < 1e-9);
}

TEST_CASE("CBID is invariant to doubling the image size") {
    const GrayImage img = synth::star(200, 5, 78.0, 36.0);
    Descriptor a = extract_cbid(img);
    Descriptor b = extract_cbid(scale_nn(img, 2.0));
    // the canonical working scale makes the 2x input collapse to the same
    // raster, so this is exact up to the corner detector's float noise
    CHECK(cityblock(a, b) < 1e-6);
}

TEST_CASE("CBID throws TooFewCorners on a disk") {
    const GrayImage img = synth::disk(192, 70.0);
    CHECK_THROWS_AS((void)extract_cbid(img), Error);
    try {
        (void)extract_cbid(img);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewCorners);
    }
}

TEST_CASE("EFD translation and scale invariance") {
    const GrayImage img = synth::triangle(256, 96.0);
    Descriptor base = extract_efd(img);
    CHECK(cityblock(base, extract_efd(translate(img, 9, 5, 16))) < 1e-9);

    // coordinate scaling cancels through the harmonic-1 normalization; use
    // the exact pixel-doubling so the traced contour scales exactly
    Descriptor doubled = extract_efd(scale_nn(img, 2.0));
    CHECK(cityblock(base, doubled) < 0.05);
}

TEST_CASE("CBFD of a circle is near zero at all kept frequencies") {
    const GrayImage img = synth::disk(256, 100.0);
    Descriptor d = extract_cbfd(img);
    for (double v : d.values) CHECK(v < 5e-3);  // discretized circle
}

TEST_CASE("CBFD is invariant to quarter turns") {
    const GrayImage img = synth::star(256, 6, 100.0, 52.0);
    CHECK(cityblock(extract_cbfd(img), extract_cbfd(rotate90(img))) < 1e-6);
}

TEST_CASE("GFD rotation drift is small against inter-shape distances") {
    auto shapes = synth::polygon_suite(288);
    std::vector<Descriptor> descs;
    for (auto& [name, img] : shapes) descs.push_back(extract_gfd(img));
    double inter = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < descs.size(); ++i)
        for (std::size_t j = i + 1; j < descs.size(); ++j) {
            inter += cityblock(descs[i], descs[j]);
            ++pairs;
        }
    inter /= pairs;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const double drift = cityblock(descs[i], extract_gfd(rotate_nn(shapes[i].second, 36.0)));
        CHECK(drift < 0.05 * inter * 10.0 / 3.0);  // generous per-shape bound
    }
    // mean drift obeys the example's tighter bound
    double total = 0.0;
    for (std::size_t i = 0; i < shapes.size(); ++i)
        total += cityblock(descs[i], extract_gfd(rotate_nn(shapes[i].second, 36.0)));
    CHECK(total / shapes.size() < 0.05 * inter);
}

TEST_CASE("combine_isd blocks and weights") {
    const GrayImage img = synth::square(192, 90.0);
    Descriptor gfd = extract_gfd(img);
    Descriptor msgbd = extract_msgbd(img);

    Descriptor only_region = combine_isd(gfd, msgbd, {1.0, 0.0});
    REQUIRE(only_region.values.size() == 72);
    for (int i = 0; i < 36; ++i) {
        CHECK(only_region.values[i] == gfd.values[i]);
        CHECK(only_region.values[36 + i] == 0.0);
    }

    // homogeneity: halving both weights exactly halves pairwise distances
    const GrayImage other = synth::triangle(192, 80.0);
    Descriptor g2 = extract_gfd(other), m2 = extract_msgbd(other);
    const double full = cityblock(combine_isd(gfd, msgbd, {1.0, 1.0}),
                                  combine_isd(g2, m2, {1.0, 1.0}));
    const double half = cityblock(combine_isd(gfd, msgbd, {0.5, 0.5}),
                                  combine_isd(g2, m2, {0.5, 0.5}));
    CHECK(half == doctest::Approx(0.5 * full).epsilon(1e-12));
}

TEST_CASE("combine_isd rejects wrong kinds") {
    const GrayImage img = synth::square(160, 70.0);
    Descriptor gfd = extract_gfd(img);
    CHECK_THROWS_AS((void)combine_isd(gfd, gfd, {}), Error);
}

TEST_CASE("cityblock basics and the triangle inequality") {
    Descriptor a{DescriptorKind::Gfd, {1.0, 2.0}};
    Descriptor b{DescriptorKind::Gfd, {0.0, 0.0}};
    CHECK(cityblock(a, b) == 3.0);
    CHECK(cityblock(a, a) == 0.0);
    Descriptor c{DescriptorKind::Cbid, {1.0, 2.0}};
    CHECK_THROWS_AS((void)cityblock(a, c), Error);

    SplitMix64 rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(6), y(6), z(6);
        for (int i = 0; i < 6; ++i) {
            x[i] = rng.uniform(-5, 5);
            y[i] = rng.uniform(-5, 5);
            z[i] = rng.uniform(-5, 5);
        }
        CHECK(cityblock(x, z) <= cityblock(x, y) + cityblock(y, z) + 1e-12);
    }
}

TEST_CASE("descriptor records round-trip exactly") {
    tu::TempDir dir("records");
    const GrayImage img = synth::star(192, 5, 70.0, 34.0);
    std::vector<DescriptorRecord> records{
        {"shapes/star5-1.pgm", "star5", extract_gfd(img)},
        {"shapes/star5-2.pgm", "star5", extract_cbid(img)},
        {"shapes/other-1.pgm", "other", extract_cbfd(img)},
    };
    const std::string path = (dir.path() / "records.tsv").string();
    save_descriptor_records(path, records);
    auto loaded = load_descriptor_records(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].path == records[i].path);
        CHECK(loaded[i].label == records[i].label);
        CHECK(loaded[i].desc.kind == records[i].desc.kind);
        REQUIRE(loaded[i].desc.values.size() == records[i].desc.values.size());
        for (std::size_t j = 0; j < records[i].desc.values.size(); ++j)
            CHECK(loaded[i].desc.values[j] == records[i].desc.values[j]);  // bitwise
    }
}

TEST_CASE("extractors reject shapeless images") {
    GrayImage flat(32, 32, 0.4);
    CHECK_THROWS_AS((void)extract_gfd(flat), Error);
    try {
        (void)extract_gfd(flat);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyShape);
    }
    CHECK_THROWS_AS((void)extract_msgbd(flat), Error);
    CHECK_THROWS_AS((void)extract_cbfd(flat), Error);
}
