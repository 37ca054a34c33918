#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shapekit/learn.hpp"
#include "testutil.hpp"

using namespace shapekit;
namespace tu = testutil;

namespace {

// two separable 2-D blobs
LabeledSet make_blobs(int per_class, std::uint64_t seed, double separation = 4.0) {
    SplitMix64 rng(seed);
    LabeledSet set;
    set.class_names = {"a", "b"};
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < per_class; ++i) {
            set.rows.push_back({c * separation + rng.uniform(-1.0, 1.0),
                                c * separation + rng.uniform(-1.0, 1.0)});
            set.labels.push_back(c);
        }
    return set;
}

LabeledSet make_xor(int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    LabeledSet set;
    set.class_names = {"even", "odd"};
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0), y = rng.uniform(-1.0, 1.0);
        set.rows.push_back({x, y});
        set.labels.push_back((x > 0.0) != (y > 0.0) ? 1 : 0);
    }
    return set;
}

}  // namespace

TEST_CASE("training rejects single-class data") {
    LabeledSet set;
    set.class_names = {"apple"};
    for (int i = 0; i < 10; ++i) {
        set.rows.push_back({static_cast<double>(i)});
        set.labels.push_back(0);
    }
    CHECK_THROWS_AS((void)train_forest(set, 10, 1, 42), Error);
    try {
        (void)train_forest(set, 10, 1, 42);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SingleClass);
    }
}

TEST_CASE("training rejects empty data") {
    LabeledSet set;
    CHECK_THROWS_AS((void)train_forest(set, 10, 1, 42), Error);
}

TEST_CASE("same data and seed train byte-identical forests") {
    LabeledSet set = make_blobs(40, 7);
    ForestModel a = train_forest(set, 10, 2, 42);
    ForestModel b = train_forest(set, 10, 2, 42);
    CHECK(forest_to_string(a) == forest_to_string(b));

    LabeledSet probes = make_blobs(20, 8);
    for (const auto& row : probes.rows)
        CHECK(predict_proba(a, row).argmax() == predict_proba(b, row).argmax());

    // a different seed generally trains a different forest
    ForestModel c = train_forest(set, 10, 2, 43);
    CHECK(forest_to_string(a) != forest_to_string(c));
}

TEST_CASE("XOR pattern is learned by deep axis-aligned trees") {
    LabeledSet set = make_xor(200, 11);
    ForestModel model = train_forest(set, 10, 1, 42);
    int correct = 0;
    for (std::size_t i = 0; i < set.rows.size(); ++i)
        correct += predict_proba(model, set.rows[i]).argmax() == set.labels[i];
    CHECK(static_cast<double>(correct) / set.rows.size() >= 0.95);
}

TEST_CASE("pure single-leaf trees give probability one") {
    LabeledSet set;
    set.class_names = {"a", "b"};
    set.rows = {{0.0}, {0.1}, {5.0}, {5.1}};
    set.labels = {0, 0, 1, 1};
    ForestModel model = train_forest(set, 10, 1, 42);
    ClassProbs p = predict_proba(model, {0.05});
    CHECK(p.p[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.p[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("probabilities are a distribution for random probes") {
    LabeledSet set = make_blobs(60, 3);
    ForestModel model = train_forest(set, 10, 2, 1);
    SplitMix64 rng(99);
    for (int i = 0; i < 1000; ++i) {
        ClassProbs p = predict_proba(model, {rng.uniform(-3, 8), rng.uniform(-3, 8)});
        double sum = 0.0;
        for (double v : p.p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("deep-inside-a-blob probes are confidently classified") {
    LabeledSet set = make_blobs(100, 21);
    ForestModel model = train_forest(set, 10, 1, 42);
    ClassProbs p = predict_proba(model, {0.0, 0.0});
    CHECK(p.p[0] >= 0.9);
}

TEST_CASE("predict_proba validates dimensionality") {
    LabeledSet set = make_blobs(20, 2);
    ForestModel model = train_forest(set, 5, 1, 42);
    CHECK_THROWS_AS((void)predict_proba(model, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("restricted prediction equals zero-and-renormalize") {
    SplitMix64 rng(5);
    LabeledSet set;
    set.class_names = {"a", "b", "c", "d"};
    for (int i = 0; i < 120; ++i) {
        const int c = static_cast<int>(rng.below(4));
        set.rows.push_back({c + rng.uniform(-0.8, 0.8), 2.0 * c + rng.uniform(-0.8, 0.8)});
        set.labels.push_back(c);
    }
    ForestModel model = train_forest(set, 10, 1, 7);
    const std::vector<int> subset{1, 3};
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{rng.uniform(-1, 4), rng.uniform(-1, 7)};
        ClassProbs full = predict_proba(model, x);
        ClassProbs restricted = predict_proba_subset(model, x, subset);
        double mass = full.p[1] + full.p[3];
        if (mass > 0.0) {
            CHECK(restricted.p[1] == doctest::Approx(full.p[1] / mass).epsilon(1e-9));
            CHECK(restricted.p[3] == doctest::Approx(full.p[3] / mass).epsilon(1e-9));
        }
        CHECK(restricted.p[0] == 0.0);
        CHECK(restricted.p[2] == 0.0);
    }
}

TEST_CASE("gini splits match exhaustive enumeration on small datasets") {
    SplitMix64 rng(1234);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(19));
        const int classes = 2 + static_cast<int>(rng.below(2));
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            // small integer alphabet forces plenty of ties
            rows.push_back({static_cast<double>(rng.below(6))});
            labels.push_back(static_cast<int>(rng.below(classes)));
        }
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        SplitChoice mine = find_best_split(rows, labels, idx, {0}, classes);
        oracle::GiniBest ref = oracle::gini_exhaustive(rows, labels, classes);
        REQUIRE(mine.valid == ref.valid);
        if (mine.valid) {
            CHECK(mine.feature == ref.feature);
            CHECK(mine.threshold == ref.threshold);
            CHECK(mine.impurity == ref.impurity);
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("multi-feature split tie-breaking prefers the lowest feature") {
    // identical columns: both features admit the same best split
    std::vector<std::vector<double>> rows{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
    std::vector<int> labels{0, 0, 1, 1};
    SplitChoice s = find_best_split(rows, labels, {0, 1, 2, 3}, {0, 1}, 2);
    CHECK(s.valid);
    CHECK(s.feature == 0);
    CHECK(s.threshold == doctest::Approx(1.5));
}

TEST_CASE("ensembles do not underperform single trees on average") {
    double acc1 = 0.0, acc10 = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LabeledSet train = make_blobs(40, 100 + seed, 2.0);
        LabeledSet test = make_blobs(40, 200 + seed, 2.0);
        ForestModel one = train_forest(train, 1, 1, seed);
        ForestModel ten = train_forest(train, 10, 1, seed);
        int c1 = 0, c10 = 0;
        for (std::size_t i = 0; i < test.rows.size(); ++i) {
            c1 += predict_proba(one, test.rows[i]).argmax() == test.labels[i];
            c10 += predict_proba(ten, test.rows[i]).argmax() == test.labels[i];
        }
        acc1 += c1;
        acc10 += c10;
    }
    CHECK(acc10 >= acc1);
}

TEST_CASE("knn basics") {
    LabeledSet set;
    set.class_names = {"a", "b"};
    set.rows = {{0.0, 0.0}, {1.0, 0.0}, {5.0, 5.0}, {6.0, 5.0}};
    set.labels = {0, 0, 1, 1};

    CHECK(knn_classify(set, {1.0, 0.0}, 1) == 0);   // exact training row
    CHECK(knn_classify(set, {5.5, 5.0}, 3) == 1);   // majority {b, b, a}
    CHECK(knn_classify(set, {3.0, 2.5}, 4) == 0);   // full tie -> class index 0
    CHECK_THROWS_AS((void)knn_classify(set, {0.0, 0.0}, 5), Error);
    LabeledSet empty;
    CHECK_THROWS_AS((void)knn_classify(empty, {0.0}, 1), Error);
}

TEST_CASE("metrics on hand-computed confusion matrices") {
    Metrics all_right = compute_metrics({0, 1, 0, 1}, {0, 1, 0, 1}, 2);
    CHECK(all_right.accuracy == 1.0);
    CHECK(all_right.macro_precision == 1.0);
    CHECK(all_right.macro_recall == 1.0);

    Metrics all_wrong = compute_metrics({1, 0, 1, 0}, {0, 1, 0, 1}, 2);
    CHECK(all_wrong.accuracy == 0.0);
    CHECK(all_wrong.macro_precision == 0.0);
    CHECK(all_wrong.macro_recall == 0.0);

    // truth (a,a,b,b), predicted (a,b,b,b)
    Metrics m = compute_metrics({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.macro_precision == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    CHECK(m.macro_recall == doctest::Approx((0.5 + 1.0) / 2.0));

    CHECK_THROWS_AS((void)compute_metrics({0, 1}, {0}, 2), Error);
}

TEST_CASE("forest serialization round-trips byte-exactly") {
    tu::TempDir dir("forest");
    LabeledSet set = make_blobs(50, 77);
    ForestModel model = train_forest(set, 10, 2, 42);
    model.feature_kind = "gfd";
    const std::string path = (dir.path() / "model.txt").string();
    save_forest(path, model);
    ForestModel loaded = load_forest(path);
    CHECK(forest_to_string(loaded) == forest_to_string(model));
    CHECK(loaded.feature_kind == "gfd");
    CHECK(loaded.seed == 42);

    SplitMix64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.uniform(-2, 6), rng.uniform(-2, 6)};
        ClassProbs a = predict_proba(model, x), b = predict_proba(loaded, x);
        for (std::size_t c = 0; c < a.p.size(); ++c) CHECK(a.p[c] == b.p[c]);
    }
}
