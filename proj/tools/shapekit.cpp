// shapekit command-line front end: descriptor extraction, forest training,
// classification, retrieval, benchmarking, and the invariance suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "shapekit/pipeline.hpp"
#include "shapekit/synth.hpp"

namespace sk = shapekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitInvarianceFail = 3;

void add_config_flags(CLI::App* cmd, sk::ExtractionConfig& cfg) {
    cmd->add_option("--canny-sigma", cfg.canny.sigma, "Canny gradient scale");
    cmd->add_option("--canny-low-ratio", cfg.canny.low_ratio, "Canny low/high threshold ratio");
    cmd->add_option("--canny-high-quantile", cfg.canny.high_quantile,
                    "Canny high-threshold quantile of nonzero gradient magnitudes");
    cmd->add_option("--harris-k", cfg.harris.k, "Harris response coefficient");
    cmd->add_option("--harris-window-sigma", cfg.harris.window_sigma, "Harris window scale");
    cmd->add_option("--harris-rel-threshold", cfg.harris.rel_threshold,
                    "Harris relative response threshold");
    cmd->add_option("--harris-nms-radius", cfg.harris.nms_radius, "Harris suppression radius");
    cmd->add_option("--msgbd-sigma0", cfg.msgbd_sigma0, "first MSGBD scale");
    cmd->add_option("--msgbd-factor", cfg.msgbd_factor, "MSGBD scale increment factor");
    cmd->add_option("--msgbd-levels", cfg.msgbd_levels, "MSGBD scale levels");
    cmd->add_option("--msgbd-directions", cfg.msgbd_directions, "MSGBD directional derivatives");
    cmd->add_option("--max-corners", cfg.cbid_max_corners, "CBID corner cap");
}

std::vector<sk::DescriptorKind> parse_kinds(const std::string& desc) {
    if (desc == "all")
        return {sk::DescriptorKind::Gfd, sk::DescriptorKind::Msgbd, sk::DescriptorKind::Cbid,
                sk::DescriptorKind::Efd, sk::DescriptorKind::Cbfd};
    const auto kind = sk::kind_from_name(desc);
    if (!kind) sk::fail(sk::Errc::InvalidParams, "unknown descriptor '" + desc + "'");
    return {*kind};
}

int cmd_extract(const std::string& desc, const std::string& input, const std::string& out_file,
                const sk::IsdWeights& weights, const sk::ExtractionConfig& cfg) {
    const auto kind = sk::kind_from_name(desc);
    if (!kind) sk::fail(sk::Errc::InvalidParams, "unknown descriptor '" + desc + "'");
    const sk::DatasetIndex index = sk::load_dataset(input);
    const sk::ExtractedSet set = sk::extract_all(index, *kind, weights, cfg);
    std::vector<sk::DescriptorRecord> records;
    records.reserve(set.features.rows.size());
    for (std::size_t r = 0; r < set.features.rows.size(); ++r) {
        const sk::DatasetEntry& e = index.entries[set.source[r]];
        records.push_back({e.path, e.label, {*kind, set.features.rows[r]}});
    }
    sk::save_descriptor_records(out_file, records);
    std::cout << "extracted " << records.size() << " descriptors (" << set.failures
              << " failures) -> " << out_file << "\n";
    return kExitOk;
}

sk::LabeledSet records_to_set(const std::vector<sk::DescriptorRecord>& records) {
    sk::LabeledSet set;
    for (const sk::DescriptorRecord& rec : records)
        if (std::find(set.class_names.begin(), set.class_names.end(), rec.label) ==
            set.class_names.end())
            set.class_names.push_back(rec.label);
    std::sort(set.class_names.begin(), set.class_names.end());
    for (const sk::DescriptorRecord& rec : records) {
        set.rows.push_back(rec.desc.values);
        set.labels.push_back(static_cast<int>(
            std::find(set.class_names.begin(), set.class_names.end(), rec.label) -
            set.class_names.begin()));
    }
    return set;
}

int cmd_train(const std::string& features, const std::string& model_file, int trees, int mtry,
              std::uint64_t seed) {
    const auto records = sk::load_descriptor_records(features);
    if (records.empty()) sk::fail(sk::Errc::EmptyData, features + " holds no records");
    const sk::LabeledSet set = records_to_set(records);
    sk::ForestModel model =
        sk::train_forest(set, trees, std::min(mtry, set.dims()), seed);
    model.feature_kind = sk::kind_name(records.front().desc.kind);
    sk::save_forest(model_file, model);
    std::cout << "trained " << trees << "-tree forest on " << set.rows.size() << " rows ("
              << set.class_names.size() << " classes) -> " << model_file << "\n";
    return kExitOk;
}

int cmd_classify(const std::string& model_file, const std::string& image_path, bool two_stage,
                 int shortlist, const sk::IsdWeights& weights) {
    const sk::GrayImage img = sk::load_image(image_path);
    if (two_stage) {
        sk::TwoStageModel model = sk::load_two_stage(model_file);
        if (shortlist > 0)
            model.shortlist_n =
                std::min(shortlist, static_cast<int>(model.isd_forest.class_names.size()));
        const sk::TwoStageResult result = sk::classify_two_stage(model, img);
        std::cout << model.isd_forest.class_names[result.class_index] << "\n";
        std::cout << "p=" << result.probs.p[result.class_index]
                  << (result.used_shortlist ? " (shortlist of " : " (full search, ")
                  << (result.used_shortlist ? std::to_string(result.shortlist.size())
                                            : std::string("all classes"))
                  << (result.used_shortlist ? " classes)" : ")") << "\n";
        return kExitOk;
    }
    const sk::ForestModel model = sk::load_forest(model_file);
    const auto kind = sk::kind_from_name(model.feature_kind);
    if (!kind)
        sk::fail(sk::Errc::ParseError, "model does not record its descriptor kind; cannot extract");
    const sk::Descriptor desc = sk::extract_descriptor(img, *kind, weights);
    const sk::ClassProbs probs = sk::predict_proba(model, desc.values);
    const int best = probs.argmax();
    std::cout << model.class_names[best] << "\n";
    std::cout << "p=" << probs.p[best] << " kind=" << model.feature_kind << "\n";
    return kExitOk;
}

int cmd_retrieve(const std::string& query, const std::string& index_file, int k,
                 const sk::IsdWeights& weights) {
    const auto records = sk::load_descriptor_records(index_file);
    if (records.empty()) sk::fail(sk::Errc::EmptyData, index_file + " holds no records");
    const sk::GrayImage img = sk::load_image(query);
    const sk::Descriptor desc = sk::extract_descriptor(img, records.front().desc.kind, weights);
    std::vector<std::pair<double, std::size_t>> ranked(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        ranked[i] = {sk::cityblock(desc, records[i].desc), i};
    std::sort(ranked.begin(), ranked.end());
    for (int i = 0; i < k && i < static_cast<int>(ranked.size()); ++i) {
        const sk::DescriptorRecord& rec = records[ranked[i].second];
        std::cout << ranked[i].first << "\t" << rec.label << "\t" << rec.path << "\n";
    }
    return kExitOk;
}

int cmd_benchmark(const std::string& dataset, const sk::BenchmarkOptions& opt,
                  const std::string& report_path) {
    const sk::BenchmarkReport report = sk::run_benchmark(dataset, opt);
    std::cout << report.text;
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << report.text;
        std::ofstream csv(report_path + ".csv");
        csv << report.csv;
        std::cout << "report written to " << report_path << " (+ .csv)\n";
    }
    return kExitOk;
}

int cmd_invariance(const std::string& dataset, const std::string& desc, double tolerance,
                   double noise_tolerance, const sk::ExtractionConfig& cfg,
                   const sk::IsdWeights& weights) {
    std::vector<std::pair<std::string, sk::GrayImage>> shapes;
    if (dataset == "synthetic")
        shapes = sk::synth::polygon_suite();
    else
        shapes = sk::sample_shapes(dataset, 10);
    sk::InvarianceTolerances tol;
    tol.rot_scale = tolerance;
    tol.noise = noise_tolerance;
    const sk::InvarianceReport report =
        sk::run_invariance(shapes, parse_kinds(desc), cfg, weights, tol);
    std::cout << report.text;
    std::cout << (report.all_pass ? "PASS" : "FAIL") << "\n";
    return report.all_pass ? kExitOk : kExitInvarianceFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shapekit: shape descriptors, retrieval, and two-stage recognition"};
    app.require_subcommand(1);

    sk::ExtractionConfig cfg;
    sk::IsdWeights weights;
    std::string desc = "gfd", input, output, model_file, image_path, dataset, report_path,
                features_file, query;
    int trees = 10, mtry = 6, k = 10, shortlist = 0;
    std::uint64_t seed = 42;
    double split_fraction = 0.5, tolerance = 0.1, noise_tolerance = 0.2;
    bool two_stage = false, tune = false;

    CLI::App* extract = app.add_subcommand("extract", "extract descriptors for a dataset");
    extract->add_option("--desc", desc, "gfd|msgbd|cbid|efd|cbfd|isd")->required();
    extract->add_option("--input", input, "dataset directory")->required();
    extract->add_option("--out", output, "output records file")->required();
    extract->add_option("--alpha", weights.alpha, "ISD region weight");
    extract->add_option("--beta", weights.beta, "ISD contour weight");
    add_config_flags(extract, cfg);

    CLI::App* train = app.add_subcommand("train", "train a random forest on saved descriptors");
    train->add_option("--features", features_file, "descriptor records file")->required();
    train->add_option("--model", model_file, "output model file")->required();
    train->add_option("--trees", trees, "number of trees");
    train->add_option("--mtry", mtry, "features considered per split");
    train->add_option("--seed", seed, "PRNG seed");

    CLI::App* classify = app.add_subcommand("classify", "classify one image");
    classify->add_option("--model", model_file, "model file")->required();
    classify->add_option("--image", image_path, "query image")->required();
    classify->add_flag("--two-stage", two_stage, "model file is a two-stage model");
    classify->add_option("--shortlist", shortlist, "override stage-1 shortlist size");
    classify->add_option("--alpha", weights.alpha, "ISD region weight");
    classify->add_option("--beta", weights.beta, "ISD contour weight");

    CLI::App* retrieve = app.add_subcommand("retrieve", "city-block nearest neighbors");
    retrieve->add_option("--query", query, "query image")->required();
    retrieve->add_option("--index", input, "descriptor records file")->required();
    retrieve->add_option("--k", k, "neighbors returned");
    retrieve->add_option("--alpha", weights.alpha, "ISD region weight");
    retrieve->add_option("--beta", weights.beta, "ISD contour weight");

    CLI::App* benchmark = app.add_subcommand("benchmark", "train/test evaluation on a dataset");
    benchmark->add_option("--dataset", dataset, "dataset directory")->required();
    benchmark->add_option("--desc", desc, "descriptor kind or 'two-stage'");
    benchmark->add_option("--split", split_fraction, "train fraction");
    benchmark->add_option("--seed", seed, "split + forest seed");
    benchmark->add_option("--trees", trees, "forest size");
    benchmark->add_option("--mtry", mtry, "features per split");
    benchmark->add_option("--shortlist", shortlist, "two-stage shortlist size");
    benchmark->add_option("--alpha", weights.alpha, "ISD region weight");
    benchmark->add_option("--beta", weights.beta, "ISD contour weight");
    benchmark->add_flag("--tune-weights", tune, "grid-search ISD weights on a validation split");
    benchmark->add_option("--report", report_path, "write the report (and .csv) here");
    add_config_flags(benchmark, cfg);

    CLI::App* invariance = app.add_subcommand("invariance", "descriptor drift under transforms");
    invariance->add_option("--dataset", dataset, "dataset directory or 'synthetic'")->required();
    invariance->add_option("--desc", desc, "descriptor kind or 'all'");
    invariance->add_option("--tolerance", tolerance, "rotation/scale drift-ratio tolerance");
    invariance->add_option("--noise-tolerance", noise_tolerance, "boundary-noise tolerance");
    invariance->add_option("--alpha", weights.alpha, "ISD region weight");
    invariance->add_option("--beta", weights.beta, "ISD contour weight");
    add_config_flags(invariance, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_extract(desc, input, output, weights, cfg);
        if (train->parsed()) return cmd_train(features_file, model_file, trees, mtry, seed);
        if (classify->parsed())
            return cmd_classify(model_file, image_path, two_stage, shortlist, weights);
        if (retrieve->parsed()) return cmd_retrieve(query, input, k, weights);
        if (benchmark->parsed()) {
            sk::BenchmarkOptions opt;
            opt.descriptor = desc;
            opt.split_spec.train_fraction = split_fraction;
            opt.split_spec.seed = seed;
            opt.forest = {trees, mtry, seed};
            opt.config = cfg;
            opt.weights = weights;
            if (shortlist > 0) opt.shortlist_n = shortlist;
            opt.tune_weights = tune;
            return cmd_benchmark(dataset, opt, report_path);
        }
        if (invariance->parsed())
            return cmd_invariance(dataset, desc, tolerance, noise_tolerance, cfg, weights);
    } catch (const sk::Error& e) {
        std::cerr << "shapekit: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "shapekit: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}
