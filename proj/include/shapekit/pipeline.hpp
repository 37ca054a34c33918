#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shapekit/descriptors.hpp"
#include "shapekit/learn.hpp"

namespace shapekit {

// ---------------------------------------------------------------------------
// Dataset handling
// ---------------------------------------------------------------------------

struct DatasetEntry {
    std::string path;
    std::string label;
    int class_index = -1;
    long file_index = 0;  // numeric suffix after the last hyphen
};

struct DatasetIndex {
    std::vector<DatasetEntry> entries;
    std::vector<std::string> class_names;
    std::vector<int> per_class_count;
    int skipped = 0;  // files whose name did not parse
};

// Scans a directory of <class>-<index>.{gif,png,pgm} files; the class is the
// substring before the last hyphen. Entries are sorted by (class, index).
DatasetIndex load_dataset(const std::string& dir);

struct SplitSpec {
    double train_fraction = 0.5;
    std::uint64_t seed = 42;
    bool stratified = true;  // always honored; per-class shuffling
};

// Per class: seeded shuffle, first ceil(fraction*n) entries to train.
std::pair<DatasetIndex, DatasetIndex> split(const DatasetIndex& index, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Batch extraction
// ---------------------------------------------------------------------------

struct ExtractedSet {
    LabeledSet features;
    std::vector<int> source;  // entry index per feature row
    int failures = 0;         // extraction errors (rows omitted)
};

// Extracts one descriptor per entry, in parallel; rows keep entry order.
ExtractedSet extract_all(const DatasetIndex& index, DescriptorKind kind,
                         const IsdWeights& weights = {}, const ExtractionConfig& cfg = {});

// ---------------------------------------------------------------------------
// Two-stage recognition
// ---------------------------------------------------------------------------

struct ForestParams {
    int trees = 10;
    int mtry = 6;
    std::uint64_t seed = 42;
};

struct TwoStageModel {
    ForestModel cbid_forest;
    ForestModel isd_forest;
    int shortlist_n = 10;
    IsdWeights weights;
    ExtractionConfig config;
    bool shortlist_noop = false;   // shortlist_n == number of classes
    bool cbid_available = true;    // false when the CBID forest could not be trained

    // Training descriptors, kept for retrieval-style matching; not part of
    // the serialized model.
    LabeledSet isd_train;
    LabeledSet cbid_train;
};

TwoStageModel train_two_stage(const DatasetIndex& train, const ExtractionConfig& cfg,
                              const IsdWeights& weights, const ForestParams& params,
                              int shortlist_n);

struct TwoStageResult {
    int class_index = -1;
    ClassProbs probs;
    std::vector<int> shortlist;  // ascending class indices; empty if stage 1 skipped
    bool used_shortlist = false;
};

// Stage 1: CBID forest probabilities -> shortlist_n most probable classes.
// Stage 2: ISD forest probabilities zeroed outside the shortlist and
// renormalized. If CBID extraction fails stage 1 is skipped entirely.
TwoStageResult classify_two_stage(const TwoStageModel& model, const GrayImage& img);

void save_two_stage(const std::string& path, const TwoStageModel& model);
TwoStageModel load_two_stage(const std::string& path);

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BenchmarkOptions {
    std::string descriptor = "gfd";  // kind name or "two-stage"
    SplitSpec split_spec;
    ForestParams forest;
    ExtractionConfig config;
    IsdWeights weights;
    int shortlist_n = 10;
    bool tune_weights = false;  // grid-search alpha/beta on a validation split
};

struct BenchmarkReport {
    std::string descriptor;
    Metrics metrics;
    std::vector<int> predictions;
    std::vector<int> truths;
    std::vector<std::string> class_names;

    double extract_train_seconds = 0.0;
    double extract_test_seconds = 0.0;
    double train_seconds = 0.0;
    double classify_seconds = 0.0;
    int extraction_failures = 0;

    // Two-stage decision-stage study (descriptor extraction excluded; the
    // matching work is what the shortlist shrinks).
    double nn_full_ms = 0.0;        // 1-NN over all training ISDs, per image
    double nn_shortlist_ms = 0.0;   // stage-1 forest + 1-NN over shortlist classes
    double nn_full_accuracy = 0.0;
    double nn_shortlist_accuracy = 0.0;
    double forest_full_ms = 0.0;
    double forest_shortlist_ms = 0.0;

    IsdWeights tuned_weights;

    std::string text;  // rendered report table
    std::string csv;   // machine-readable counterpart
};

BenchmarkReport run_benchmark(const DatasetIndex& index, const BenchmarkOptions& options);
BenchmarkReport run_benchmark(const std::string& dataset_dir, const BenchmarkOptions& options);

// ---------------------------------------------------------------------------
// Invariance suite
// ---------------------------------------------------------------------------

struct InvarianceRow {
    std::string shape;
    std::string transform;
    DescriptorKind kind = DescriptorKind::Gfd;
    double drift = 0.0;
    double ratio = 0.0;  // drift / mean inter-shape distance for the kind
    bool pass = false;
};

struct InvarianceReport {
    std::vector<InvarianceRow> rows;
    std::map<DescriptorKind, double> mean_inter_shape;
    bool all_pass = false;
    std::string text;
};

struct InvarianceTolerances {
    double translate = 1e-9;  // absolute city-block drift
    double rot_scale = 0.1;   // drift ratio
    double noise = 0.2;       // drift ratio, 1% boundary flips
};

InvarianceReport run_invariance(const std::vector<std::pair<std::string, GrayImage>>& shapes,
                                const std::vector<DescriptorKind>& kinds,
                                const ExtractionConfig& cfg = {}, const IsdWeights& weights = {},
                                const InvarianceTolerances& tol = {});

// Convenience: samples up to `max_shapes` entries (one per class first) from
// a dataset directory.
std::vector<std::pair<std::string, GrayImage>> sample_shapes(const std::string& dataset_dir,
                                                             int max_shapes = 10);

}  // namespace shapekit
