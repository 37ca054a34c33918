#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "shapekit/common.hpp"

namespace shapekit {

struct LabeledSet {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;  // indices into class_names
    std::vector<std::string> class_names;

    int dims() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
    std::size_t size() const { return rows.size(); }
};

// Split node (feature >= 0, children by index) or leaf (feature < 0, class
// counts). `total` caches the leaf count sum so probability lookups are O(1).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> counts;
    double total = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
    std::vector<Tree> trees;
    int num_trees = 0;
    int mtry = 0;
    std::uint64_t seed = 0;
    int dims = 0;
    std::vector<std::string> class_names;
    std::string feature_kind;  // descriptor kind the model was trained on, if any
};

struct ClassProbs {
    std::vector<double> p;

    int argmax() const;
};

// Best axis-aligned split of the given sample rows over the given candidate
// features: candidate thresholds are midpoints between consecutive distinct
// sorted values, scored by weighted Gini impurity. Ties resolve to the lowest
// feature index, then the lowest threshold. Exposed for the exhaustive oracle
// tests.
struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
    bool valid = false;
};

SplitChoice find_best_split(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels, const std::vector<int>& sample_idx,
                            const std::vector<int>& features, int num_classes);

// Bootstrap-aggregated Gini trees; mtry features sampled without replacement
// at every node; growth stops on purity or fewer than 2 samples. Tree t draws
// from SplitMix64(seed + t), so results are independent of scheduling.
ForestModel train_forest(const LabeledSet& data, int num_trees, int mtry, std::uint64_t seed);

// Average of per-leaf class frequency distributions over all trees.
ClassProbs predict_proba(const ForestModel& model, const std::vector<double>& x);

// Same prediction restricted to a class subset: mathematically identical to
// zeroing the excluded classes and renormalizing, but the accumulation work
// is proportional to the subset size.
ClassProbs predict_proba_subset(const ForestModel& model, const std::vector<double>& x,
                                const std::vector<int>& class_subset);

// Majority label among the k nearest rows by city-block distance; distance
// ties resolve by row order, vote ties by the smallest class index.
int knn_classify(const LabeledSet& train, const std::vector<double>& x, int k);

struct Metrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    std::vector<std::vector<int>> confusion;  // [truth][predicted]
};

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                        int num_classes);

// Self-describing text format with a version header; decimal fields round-trip
// exactly, so identical models serialize to identical bytes. The stream
// variants allow embedding a forest inside a larger model file.
void write_forest(std::ostream& out, const ForestModel& model);
ForestModel read_forest(std::istream& in);
void save_forest(const std::string& path, const ForestModel& model);
ForestModel load_forest(const std::string& path);
std::string forest_to_string(const ForestModel& model);
ForestModel forest_from_string(const std::string& text);

}  // namespace shapekit
