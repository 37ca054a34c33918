#include "shapekit/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace shapekit {

// ===========================================================================
// Dataset loading and splitting
// ===========================================================================

namespace {

bool image_extension(std::string ext) {
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".gif" || ext == ".png" || ext == ".pgm";
}

}  // namespace

DatasetIndex load_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) fail(Errc::IoError, dir + " is not a directory");
    DatasetIndex index;
    for (const fs::directory_entry& de : fs::directory_iterator(dir)) {
        if (!de.is_regular_file() || !image_extension(de.path().extension().string())) continue;
        const std::string stem = de.path().stem().string();
        const std::size_t hyphen = stem.rfind('-');
        bool ok = hyphen != std::string::npos && hyphen > 0 && hyphen + 1 < stem.size();
        long file_index = 0;
        if (ok) {
            const std::string suffix = stem.substr(hyphen + 1);
            ok = std::all_of(suffix.begin(), suffix.end(),
                             [](unsigned char c) { return std::isdigit(c); });
            if (ok) file_index = std::strtol(suffix.c_str(), nullptr, 10);
        }
        if (!ok) {
            std::cerr << "shapekit: skipping unparseable file name: " << de.path().filename()
                      << "\n";
            ++index.skipped;
            continue;
        }
        index.entries.push_back({de.path().string(), stem.substr(0, hyphen), -1, file_index});
    }
    if (index.entries.empty()) fail(Errc::EmptyDirectory, dir + " holds no dataset images");

    std::sort(index.entries.begin(), index.entries.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) {
                  if (a.label != b.label) return a.label < b.label;
                  if (a.file_index != b.file_index) return a.file_index < b.file_index;
                  return a.path < b.path;
              });
    for (const DatasetEntry& e : index.entries)
        if (index.class_names.empty() || index.class_names.back() != e.label)
            index.class_names.push_back(e.label);
    index.per_class_count.assign(index.class_names.size(), 0);
    std::size_t c = 0;
    for (DatasetEntry& e : index.entries) {
        while (index.class_names[c] != e.label) ++c;
        e.class_index = static_cast<int>(c);
        ++index.per_class_count[c];
    }
    return index;
}

std::pair<DatasetIndex, DatasetIndex> split(const DatasetIndex& index, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        fail(Errc::InvalidParams, "train_fraction must be in (0,1)");
    DatasetIndex train, test;
    train.class_names = test.class_names = index.class_names;
    train.per_class_count.assign(index.class_names.size(), 0);
    test.per_class_count.assign(index.class_names.size(), 0);

    SplitMix64 rng(spec.seed);
    for (std::size_t c = 0; c < index.class_names.size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < index.entries.size(); ++i)
            if (index.entries[i].class_index == static_cast<int>(c)) members.push_back(i);
        const std::size_t n = members.size();
        const std::size_t n_train =
            static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n)));
        if (n_train < 1 || n_train >= n)
            fail(Errc::ClassTooSmall,
                 "class '" + index.class_names[c] + "' cannot be split " +
                     std::to_string(n_train) + "/" + std::to_string(n - n_train));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + rng.below(n - i);
            std::swap(members[i], members[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            DatasetIndex& side = i < n_train ? train : test;
            side.entries.push_back(index.entries[members[i]]);
            ++side.per_class_count[c];
        }
    }
    auto by_order = [](const DatasetEntry& a, const DatasetEntry& b) {
        if (a.label != b.label) return a.label < b.label;
        if (a.file_index != b.file_index) return a.file_index < b.file_index;
        return a.path < b.path;
    };
    std::sort(train.entries.begin(), train.entries.end(), by_order);
    std::sort(test.entries.begin(), test.entries.end(), by_order);
    return {std::move(train), std::move(test)};
}

// ===========================================================================
// Parallel batch extraction
// ===========================================================================

namespace {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    workers = std::min<unsigned>(workers == 0 ? 1 : workers, 8);
    if (workers <= 1 || n < 4) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

ExtractedSet extract_all(const DatasetIndex& index, DescriptorKind kind, const IsdWeights& weights,
                         const ExtractionConfig& cfg) {
    const std::size_t n = index.entries.size();
    std::vector<std::optional<std::vector<double>>> staged(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            const GrayImage img = load_image(index.entries[i].path);
            staged[i] = extract_descriptor(img, kind, weights, cfg).values;
        } catch (const Error&) {
            staged[i] = std::nullopt;  // recorded as a failure below
        }
    });

    ExtractedSet out;
    out.features.class_names = index.class_names;
    for (std::size_t i = 0; i < n; ++i) {
        if (!staged[i]) {
            ++out.failures;
            continue;
        }
        out.features.rows.push_back(std::move(*staged[i]));
        out.features.labels.push_back(index.entries[i].class_index);
        out.source.push_back(static_cast<int>(i));
    }
    return out;
}

// ===========================================================================
// Two-stage recognition
// ===========================================================================

namespace {

std::vector<int> top_n_classes(const ClassProbs& probs, int n) {
    std::vector<int> order(probs.p.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (probs.p[a] != probs.p[b]) return probs.p[a] > probs.p[b];
        return a < b;  // probability ties in class-index order
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n)));
    std::sort(order.begin(), order.end());  // ascending for deterministic accumulation
    return order;
}

TwoStageResult two_stage_decide(const TwoStageModel& model,
                                const std::vector<double>* cbid_values,
                                const std::vector<double>& isd_values) {
    TwoStageResult result;
    if (cbid_values && model.cbid_available) {
        const ClassProbs stage1 = predict_proba(model.cbid_forest, *cbid_values);
        result.shortlist = top_n_classes(stage1, model.shortlist_n);
        result.used_shortlist = true;
    }
    if (result.used_shortlist) {
        result.probs = predict_proba_subset(model.isd_forest, isd_values, result.shortlist);
        double mass = 0.0;
        for (int c : result.shortlist) mass += result.probs.p[c];
        if (!(mass > 0.0)) {
            // shortlist classes absent from every reached leaf; fall back
            result.used_shortlist = false;
            result.shortlist.clear();
        }
    }
    if (!result.used_shortlist) result.probs = predict_proba(model.isd_forest, isd_values);
    result.class_index = result.probs.argmax();
    return result;
}

}  // namespace

TwoStageModel train_two_stage(const DatasetIndex& train, const ExtractionConfig& cfg,
                              const IsdWeights& weights, const ForestParams& params,
                              int shortlist_n) {
    if (train.entries.empty()) fail(Errc::EmptyData, "empty training index");
    const int num_classes = static_cast<int>(train.class_names.size());
    if (shortlist_n < 1 || shortlist_n > num_classes)
        fail(Errc::InvalidParams, "shortlist_n must be in [1, classes]");

    TwoStageModel model;
    model.shortlist_n = shortlist_n;
    model.weights = weights;
    model.config = cfg;
    model.shortlist_noop = shortlist_n == num_classes;

    ExtractedSet isd = extract_all(train, DescriptorKind::Isd, weights, cfg);
    if (isd.features.rows.empty()) fail(Errc::EmptyData, "no training image yielded an ISD");
    ExtractedSet cbid = extract_all(train, DescriptorKind::Cbid, weights, cfg);

    model.isd_forest = train_forest(isd.features, params.trees,
                                    std::min(params.mtry, isd.features.dims()), params.seed);
    model.isd_forest.feature_kind = kind_name(DescriptorKind::Isd);
    model.isd_train = std::move(isd.features);

    int cbid_classes = 0;
    {
        std::vector<bool> seen(num_classes, false);
        for (int label : cbid.features.labels)
            if (!seen[label]) {
                seen[label] = true;
                ++cbid_classes;
            }
    }
    if (cbid_classes >= 2) {
        model.cbid_forest = train_forest(cbid.features, params.trees,
                                         std::min(params.mtry, cbid.features.dims()), params.seed);
        model.cbid_forest.feature_kind = kind_name(DescriptorKind::Cbid);
        model.cbid_train = std::move(cbid.features);
    } else {
        model.cbid_available = false;  // stage 1 disabled, every query takes the full path
    }
    return model;
}

TwoStageResult classify_two_stage(const TwoStageModel& model, const GrayImage& img) {
    std::optional<std::vector<double>> cbid_values;
    try {
        cbid_values = extract_cbid(img, model.config).values;
    } catch (const Error&) {
        cbid_values = std::nullopt;  // stage 1 skipped, full-class ISD search
    }
    const std::vector<double> isd_values = extract_isd(img, model.weights, model.config).values;
    return two_stage_decide(model, cbid_values ? &*cbid_values : nullptr, isd_values);
}

// ---------------------------------------------------------------------------
// Two-stage model persistence (forests and parameters; the retained training
// descriptors are an in-memory concern).
// ---------------------------------------------------------------------------

namespace {

void write_config(std::ostream& out, const ExtractionConfig& c) {
    char buf[64];
    auto g = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ' ' << buf;
    };
    out << "config " << c.gfd_radial << ' ' << c.gfd_angular << ' ' << c.gfd_r_bins << ' '
        << c.gfd_t_bins;
    g(c.msgbd_sigma0);
    g(c.msgbd_factor);
    out << ' ' << c.msgbd_levels << ' ' << c.msgbd_directions << ' ' << c.msgbd_keep_radial << ' '
        << c.msgbd_keep_angular << ' ' << c.msgbd_r_bins << ' ' << c.msgbd_t_bins << ' '
        << c.cbid_max_corners << ' ' << c.cbid_fds << ' ' << c.cbid_edge_tolerance << ' '
        << c.cbfd_samples << ' ' << c.cbfd_fds << ' ' << c.efd_harmonics;
    g(c.canny.sigma);
    g(c.canny.low_ratio);
    g(c.canny.high_quantile);
    g(c.harris.k);
    g(c.harris.window_sigma);
    g(c.harris.rel_threshold);
    out << ' ' << c.harris.nms_radius << ' ' << c.harris.max_count << '\n';
}

ExtractionConfig read_config(std::istream& in) {
    std::string word;
    in >> word;
    if (word != "config") fail(Errc::ParseError, "expected config line");
    ExtractionConfig c;
    in >> c.gfd_radial >> c.gfd_angular >> c.gfd_r_bins >> c.gfd_t_bins >> c.msgbd_sigma0 >>
        c.msgbd_factor >> c.msgbd_levels >> c.msgbd_directions >> c.msgbd_keep_radial >>
        c.msgbd_keep_angular >> c.msgbd_r_bins >> c.msgbd_t_bins >> c.cbid_max_corners >>
        c.cbid_fds >> c.cbid_edge_tolerance >> c.cbfd_samples >> c.cbfd_fds >> c.efd_harmonics >>
        c.canny.sigma >> c.canny.low_ratio >> c.canny.high_quantile >> c.harris.k >>
        c.harris.window_sigma >> c.harris.rel_threshold >> c.harris.nms_radius >>
        c.harris.max_count;
    if (!in) fail(Errc::ParseError, "truncated config line");
    return c;
}

}  // namespace

void save_two_stage(const std::string& path, const TwoStageModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    char buf[64];
    out << "shapekit-two-stage v1\n";
    std::snprintf(buf, sizeof buf, "%.17g", model.weights.alpha);
    out << "shortlist " << model.shortlist_n << " alpha " << buf;
    std::snprintf(buf, sizeof buf, "%.17g", model.weights.beta);
    out << " beta " << buf << " noop " << (model.shortlist_noop ? 1 : 0) << " cbid "
        << (model.cbid_available ? 1 : 0) << '\n';
    write_config(out, model.config);
    if (model.cbid_available) write_forest(out, model.cbid_forest);
    write_forest(out, model.isd_forest);
    if (!out) fail(Errc::IoError, "short write to " + path);
}

TwoStageModel load_two_stage(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::string word, version;
    in >> word >> version;
    if (word != "shapekit-two-stage" || version != "v1")
        fail(Errc::ParseError, "not a shapekit two-stage model file");
    TwoStageModel model;
    int noop = 0, cbid = 0;
    in >> word >> model.shortlist_n >> word >> model.weights.alpha >> word >> model.weights.beta >>
        word >> noop >> word >> cbid;
    if (!in) fail(Errc::ParseError, "bad two-stage parameter line");
    model.shortlist_noop = noop != 0;
    model.cbid_available = cbid != 0;
    model.config = read_config(in);
    if (model.cbid_available) model.cbid_forest = read_forest(in);
    model.isd_forest = read_forest(in);
    return model;
}

// ===========================================================================
// Benchmark
// ===========================================================================

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Median of three timed executions, per the latency measurement policy.
template <typename Fn>
double median_of_three_seconds(Fn&& fn) {
    std::array<double, 3> runs{};
    for (double& r : runs) {
        const auto t0 = Clock::now();
        fn();
        r = seconds_since(t0);
    }
    std::sort(runs.begin(), runs.end());
    return runs[1];
}

int majority_class(const std::vector<int>& labels, int num_classes) {
    std::vector<int> counts(num_classes, 0);
    for (int l : labels) ++counts[l];
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// 1-NN by city-block distance over the rows of the given class subset
// (empty subset = all rows).
int nn_classify_subset(const LabeledSet& train, const std::vector<std::vector<int>>& rows_by_class,
                       const std::vector<double>& x, const std::vector<int>& class_subset) {
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    auto consider = [&](int row) {
        const std::vector<double>& r = train.rows[row];
        double d = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            d += std::abs(r[j] - x[j]);
            if (d >= best) return;  // early exit once the row cannot win
        }
        if (d < best) {
            best = d;
            best_label = train.labels[row];
        }
    };
    if (class_subset.empty()) {
        for (std::size_t i = 0; i < train.rows.size(); ++i) consider(static_cast<int>(i));
    } else {
        for (int c : class_subset)
            for (int row : rows_by_class[c]) consider(row);
    }
    return best_label;
}

std::string render_table(const std::string& descriptor, const Metrics& m) {
    char buf[256];
    std::ostringstream out;
    std::string upper = descriptor;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    out << "Method             " << upper << '\n';
    std::snprintf(buf, sizeof buf, "Accuracy           %.2f%%\n", 100.0 * m.accuracy);
    out << buf;
    std::snprintf(buf, sizeof buf, "Average Precision  %.2f\n", m.macro_precision);
    out << buf;
    std::snprintf(buf, sizeof buf, "Average Recall     %.2f\n", m.macro_recall);
    out << buf;
    return out.str();
}

std::string render_csv(const std::string& descriptor, const Metrics& m,
                       const std::vector<std::string>& class_names) {
    char buf[96];
    std::ostringstream out;
    out << "metric,value\n";
    std::snprintf(buf, sizeof buf, "accuracy,%.10f\n", m.accuracy);
    out << buf;
    std::snprintf(buf, sizeof buf, "average_precision,%.10f\n", m.macro_precision);
    out << buf;
    std::snprintf(buf, sizeof buf, "average_recall,%.10f\n", m.macro_recall);
    out << buf;
    out << "descriptor," << descriptor << "\n";
    out << "confusion_truth\\pred";
    for (const std::string& name : class_names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < m.confusion.size(); ++r) {
        out << class_names[r];
        for (int v : m.confusion[r]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

BenchmarkReport benchmark_single(const DatasetIndex& train_idx, const DatasetIndex& test_idx,
                                 DescriptorKind kind, const BenchmarkOptions& opt) {
    BenchmarkReport report;
    report.descriptor = kind_name(kind);
    report.class_names = train_idx.class_names;
    const int num_classes = static_cast<int>(train_idx.class_names.size());
    IsdWeights weights = opt.weights;

    auto t0 = Clock::now();
    ExtractedSet train_set = extract_all(train_idx, kind, weights, opt.config);
    report.extract_train_seconds = seconds_since(t0);
    if (train_set.features.rows.empty()) fail(Errc::EmptyData, "no extractable training images");

    t0 = Clock::now();
    ExtractedSet test_set = extract_all(test_idx, kind, weights, opt.config);
    report.extract_test_seconds = seconds_since(t0);
    report.extraction_failures = train_set.failures + test_set.failures;

    // Optional ISD weight tuning: the alpha/beta blocks of an extracted ISD
    // can be rescaled in place, so the grid search never re-extracts.
    if (kind == DescriptorKind::Isd && opt.tune_weights) {
        const int gfd_len = opt.config.gfd_radial * opt.config.gfd_angular;
        auto reweigh = [&](const LabeledSet& src, double a, double b) {
            LabeledSet out = src;
            for (std::vector<double>& row : out.rows) {
                for (int i = 0; i < gfd_len; ++i) row[i] *= a;
                for (std::size_t i = gfd_len; i < row.size(); ++i) row[i] *= b;
            }
            return out;
        };
        // inner stratified split of the training rows
        LabeledSet fit, val;
        fit.class_names = val.class_names = train_set.features.class_names;
        {
            SplitMix64 rng(opt.split_spec.seed + 1);
            std::vector<std::vector<int>> by_class(num_classes);
            for (std::size_t i = 0; i < train_set.features.rows.size(); ++i)
                by_class[train_set.features.labels[i]].push_back(static_cast<int>(i));
            for (auto& members : by_class) {
                for (std::size_t i = 0; i + 1 < members.size(); ++i)
                    std::swap(members[i], members[i + rng.below(members.size() - i)]);
                const std::size_t n_fit = (members.size() + 1) / 2;
                for (std::size_t i = 0; i < members.size(); ++i) {
                    LabeledSet& side = i < n_fit ? fit : val;
                    side.rows.push_back(train_set.features.rows[members[i]]);
                    side.labels.push_back(train_set.features.labels[members[i]]);
                }
            }
        }
        const double grid[] = {0.25, 0.5, 1.0, 2.0};
        double best_acc = -1.0;
        for (double a : grid) {
            for (double b : grid) {
                const LabeledSet fit_w = reweigh(fit, a, b);
                const ForestModel probe = train_forest(
                    fit_w, opt.forest.trees, std::min(opt.forest.mtry, fit_w.dims()),
                    opt.forest.seed);
                const LabeledSet val_w = reweigh(val, a, b);
                int correct = 0;
                for (std::size_t i = 0; i < val_w.rows.size(); ++i)
                    correct += predict_proba(probe, val_w.rows[i]).argmax() == val_w.labels[i];
                const double acc = val_w.rows.empty()
                                       ? 0.0
                                       : static_cast<double>(correct) / val_w.rows.size();
                if (acc > best_acc) {
                    best_acc = acc;
                    weights = {a, b};
                }
            }
        }
        // rescale the extracted sets from the unit-weight baseline
        train_set.features = reweigh(train_set.features, weights.alpha, weights.beta);
        test_set.features = reweigh(test_set.features, weights.alpha, weights.beta);
    }
    report.tuned_weights = weights;

    t0 = Clock::now();
    const ForestModel model =
        train_forest(train_set.features, opt.forest.trees,
                     std::min(opt.forest.mtry, train_set.features.dims()), opt.forest.seed);
    report.train_seconds = seconds_since(t0);

    const int fallback = majority_class(train_set.features.labels, num_classes);
    std::vector<int> predictions(test_idx.entries.size(), fallback);
    report.classify_seconds = median_of_three_seconds([&] {
        for (std::size_t r = 0; r < test_set.features.rows.size(); ++r)
            predictions[test_set.source[r]] =
                predict_proba(model, test_set.features.rows[r]).argmax();
    });

    std::vector<int> truths(test_idx.entries.size());
    for (std::size_t i = 0; i < test_idx.entries.size(); ++i)
        truths[i] = test_idx.entries[i].class_index;

    report.predictions = std::move(predictions);
    report.truths = std::move(truths);
    report.metrics = compute_metrics(report.predictions, report.truths, num_classes);
    report.text = render_table(report.descriptor, report.metrics);
    report.csv = render_csv(report.descriptor, report.metrics, report.class_names);
    return report;
}

BenchmarkReport benchmark_two_stage(const DatasetIndex& train_idx, const DatasetIndex& test_idx,
                                    const BenchmarkOptions& opt) {
    BenchmarkReport report;
    report.descriptor = "two-stage";
    report.class_names = train_idx.class_names;
    const int num_classes = static_cast<int>(train_idx.class_names.size());
    const int shortlist_n = std::min(opt.shortlist_n, num_classes);

    auto t0 = Clock::now();
    TwoStageModel model =
        train_two_stage(train_idx, opt.config, opt.weights, opt.forest, shortlist_n);
    report.train_seconds = seconds_since(t0);  // includes training-set extraction
    report.tuned_weights = opt.weights;

    t0 = Clock::now();
    ExtractedSet isd_test = extract_all(test_idx, DescriptorKind::Isd, opt.weights, opt.config);
    ExtractedSet cbid_test = extract_all(test_idx, DescriptorKind::Cbid, opt.weights, opt.config);
    report.extract_test_seconds = seconds_since(t0);
    report.extraction_failures = isd_test.failures;

    // CBID rows aligned to test entries (missing = stage-1 skip).
    std::vector<const std::vector<double>*> cbid_by_entry(test_idx.entries.size(), nullptr);
    for (std::size_t r = 0; r < cbid_test.features.rows.size(); ++r)
        cbid_by_entry[cbid_test.source[r]] = &cbid_test.features.rows[r];

    const int fallback = majority_class(model.isd_train.labels, num_classes);
    std::vector<int> predictions(test_idx.entries.size(), fallback);
    report.classify_seconds = median_of_three_seconds([&] {
        for (std::size_t r = 0; r < isd_test.features.rows.size(); ++r) {
            const int entry = isd_test.source[r];
            predictions[entry] =
                two_stage_decide(model, cbid_by_entry[entry], isd_test.features.rows[r])
                    .class_index;
        }
    });

    // Decision-stage latency study on the pre-extracted descriptors: the
    // shortlist shrinks matching work, so the comparison isolates the
    // classification stage ("with and without the stage-1 shortlist").
    std::vector<std::vector<int>> rows_by_class(num_classes);
    for (std::size_t i = 0; i < model.isd_train.rows.size(); ++i)
        rows_by_class[model.isd_train.labels[i]].push_back(static_cast<int>(i));

    const std::size_t n_rows = isd_test.features.rows.size();
    if (n_rows > 0) {
        std::vector<int> nn_full(n_rows), nn_short(n_rows);
        const double full_s = median_of_three_seconds([&] {
            for (std::size_t r = 0; r < n_rows; ++r)
                nn_full[r] =
                    nn_classify_subset(model.isd_train, rows_by_class, isd_test.features.rows[r], {});
        });
        const double short_s = median_of_three_seconds([&] {
            for (std::size_t r = 0; r < n_rows; ++r) {
                const std::vector<double>* cbid = cbid_by_entry[isd_test.source[r]];
                std::vector<int> subset;
                if (cbid && model.cbid_available)
                    subset = top_n_classes(predict_proba(model.cbid_forest, *cbid), shortlist_n);
                nn_short[r] = nn_classify_subset(model.isd_train, rows_by_class,
                                                 isd_test.features.rows[r], subset);
            }
        });
        const double forest_full_s = median_of_three_seconds([&] {
            for (std::size_t r = 0; r < n_rows; ++r)
                predict_proba(model.isd_forest, isd_test.features.rows[r]);
        });
        const double forest_short_s = median_of_three_seconds([&] {
            for (std::size_t r = 0; r < n_rows; ++r)
                two_stage_decide(model, cbid_by_entry[isd_test.source[r]],
                                 isd_test.features.rows[r]);
        });
        report.nn_full_ms = 1e3 * full_s / static_cast<double>(n_rows);
        report.nn_shortlist_ms = 1e3 * short_s / static_cast<double>(n_rows);
        report.forest_full_ms = 1e3 * forest_full_s / static_cast<double>(n_rows);
        report.forest_shortlist_ms = 1e3 * forest_short_s / static_cast<double>(n_rows);

        int full_correct = 0, short_correct = 0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            const int truth = test_idx.entries[isd_test.source[r]].class_index;
            full_correct += nn_full[r] == truth;
            short_correct += nn_short[r] == truth;
        }
        report.nn_full_accuracy = static_cast<double>(full_correct) / n_rows;
        report.nn_shortlist_accuracy = static_cast<double>(short_correct) / n_rows;
    }

    std::vector<int> truths(test_idx.entries.size());
    for (std::size_t i = 0; i < test_idx.entries.size(); ++i)
        truths[i] = test_idx.entries[i].class_index;

    report.predictions = std::move(predictions);
    report.truths = std::move(truths);
    report.metrics = compute_metrics(report.predictions, report.truths, num_classes);
    report.text = render_table("two-stage (CBID->ISD)", report.metrics);
    report.csv = render_csv(report.descriptor, report.metrics, report.class_names);
    return report;
}

}  // namespace

BenchmarkReport run_benchmark(const DatasetIndex& index, const BenchmarkOptions& opt) {
    auto [train_idx, test_idx] = split(index, opt.split_spec);
    BenchmarkReport report;
    if (opt.descriptor == "two-stage") {
        report = benchmark_two_stage(train_idx, test_idx, opt);
    } else {
        const auto kind = kind_from_name(opt.descriptor);
        if (!kind) fail(Errc::InvalidParams, "unknown descriptor '" + opt.descriptor + "'");
        report = benchmark_single(train_idx, test_idx, *kind, opt);
    }

    char buf[256];
    std::ostringstream extra;
    std::snprintf(buf, sizeof buf,
                  "\ntiming: train %.2f s (two-stage includes extraction) | extract-train %.2f s "
                  "| extract-test %.2f s | classify %.3f s\n",
                  report.train_seconds, report.extract_train_seconds, report.extract_test_seconds,
                  report.classify_seconds);
    extra << buf;
    if (opt.descriptor == "two-stage") {
        std::snprintf(buf, sizeof buf,
                      "decision stage per image: ISD matching full %.4f ms | with shortlist %.4f "
                      "ms (stage-1 included)\n",
                      report.nn_full_ms, report.nn_shortlist_ms);
        extra << buf;
        std::snprintf(buf, sizeof buf,
                      "                          forest full %.4f ms | with shortlist %.4f ms\n",
                      report.forest_full_ms, report.forest_shortlist_ms);
        extra << buf;
        std::snprintf(buf, sizeof buf, "NN matching accuracy: full %.4f | with shortlist %.4f\n",
                      report.nn_full_accuracy, report.nn_shortlist_accuracy);
        extra << buf;
    }
    if (report.extraction_failures > 0) {
        std::snprintf(buf, sizeof buf, "extraction failures: %d (majority-class fallback)\n",
                      report.extraction_failures);
        extra << buf;
    }
    report.text += extra.str();
    return report;
}

BenchmarkReport run_benchmark(const std::string& dataset_dir, const BenchmarkOptions& opt) {
    return run_benchmark(load_dataset(dataset_dir), opt);
}

// ===========================================================================
// Invariance suite
// ===========================================================================

std::vector<std::pair<std::string, GrayImage>> sample_shapes(const std::string& dataset_dir,
                                                             int max_shapes) {
    const DatasetIndex index = load_dataset(dataset_dir);
    std::vector<std::pair<std::string, GrayImage>> shapes;
    // one entry per class first, then a second pass, until the cap
    for (int round = 0; static_cast<int>(shapes.size()) < max_shapes; ++round) {
        bool any = false;
        for (std::size_t c = 0; c < index.class_names.size(); ++c) {
            int seen = 0;
            for (const DatasetEntry& e : index.entries) {
                if (e.class_index != static_cast<int>(c)) continue;
                if (seen++ == round) {
                    shapes.emplace_back(fs::path(e.path).stem().string(), load_image(e.path));
                    any = true;
                    break;
                }
            }
            if (static_cast<int>(shapes.size()) >= max_shapes) break;
        }
        if (!any) break;
    }
    return shapes;
}

InvarianceReport run_invariance(const std::vector<std::pair<std::string, GrayImage>>& shapes,
                                const std::vector<DescriptorKind>& kinds,
                                const ExtractionConfig& cfg, const IsdWeights& weights,
                                const InvarianceTolerances& tol) {
    if (shapes.size() < 2) fail(Errc::InvalidParams, "invariance suite needs at least 2 shapes");

    struct Transform {
        const char* name;
        GrayImage (*apply)(const GrayImage&);
    };
    static const Transform transforms[] = {
        {"identity", [](const GrayImage& im) { return im; }},
        {"translate", [](const GrayImage& im) { return translate(im, 7, 4, 16); }},
        {"rot90", [](const GrayImage& im) { return rotate90(im); }},
        {"rot36", [](const GrayImage& im) { return rotate_nn(im, 36.0); }},
        {"scale0.5", [](const GrayImage& im) { return scale_nn(im, 0.5); }},
        {"scale2", [](const GrayImage& im) { return scale_nn(im, 2.0); }},
        {"noise1pct", [](const GrayImage& im) { return flip_boundary_noise(im, 0.01, 12345); }},
    };

    InvarianceReport report;
    report.all_pass = true;
    std::ostringstream text;
    text << "invariance suite: " << shapes.size() << " shapes\n";

    for (DescriptorKind kind : kinds) {
        std::vector<std::optional<Descriptor>> base(shapes.size());
        parallel_for(shapes.size(), [&](std::size_t i) {
            try {
                base[i] = extract_descriptor(shapes[i].second, kind, weights, cfg);
            } catch (const Error&) {
                base[i] = std::nullopt;
            }
        });

        double inter_sum = 0.0;
        int inter_count = 0;
        for (std::size_t i = 0; i < shapes.size(); ++i)
            for (std::size_t j = i + 1; j < shapes.size(); ++j)
                if (base[i] && base[j]) {
                    inter_sum += cityblock(*base[i], *base[j]);
                    ++inter_count;
                }
        if (inter_count == 0) continue;  // kind undefined on this shape set
        const double mean_inter = inter_sum / inter_count;
        report.mean_inter_shape[kind] = mean_inter;

        for (std::size_t i = 0; i < shapes.size(); ++i) {
            if (!base[i]) continue;
            for (const Transform& tf : transforms) {
                InvarianceRow row;
                row.shape = shapes[i].first;
                row.transform = tf.name;
                row.kind = kind;
                try {
                    const Descriptor moved =
                        extract_descriptor(tf.apply(shapes[i].second), kind, weights, cfg);
                    row.drift = cityblock(*base[i], moved);
                } catch (const Error&) {
                    row.drift = std::numeric_limits<double>::infinity();
                }
                row.ratio = row.drift / mean_inter;
                const std::string name = tf.name;
                if (name == "identity")
                    row.pass = row.drift == 0.0;
                else if (name == "translate")
                    row.pass = row.drift < tol.translate;
                else if (name == "noise1pct")
                    row.pass = row.ratio < tol.noise;
                else
                    row.pass = row.ratio < tol.rot_scale;
                report.all_pass = report.all_pass && row.pass;
                report.rows.push_back(row);

                char buf[192];
                std::snprintf(buf, sizeof buf, "%-6s %-10s %-10s drift %.3e ratio %.4f %s\n",
                              kind_name(kind), row.shape.c_str(), row.transform.c_str(), row.drift,
                              row.ratio, row.pass ? "ok" : "FAIL");
                text << buf;
            }
        }
    }
    report.text = text.str();
    return report;
}

}  // namespace shapekit
