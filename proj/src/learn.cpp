#include "shapekit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace shapekit {

int ClassProbs::argmax() const {
    int best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = static_cast<int>(i);
    return best;
}

// ===========================================================================
// Splitting
// ===========================================================================

namespace {

double gini_from_counts(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    return 1.0 - sum_sq / (total * total);
}

}  // namespace

SplitChoice find_best_split(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels, const std::vector<int>& sample_idx,
                            const std::vector<int>& features, int num_classes) {
    SplitChoice best;
    const double n = static_cast<double>(sample_idx.size());
    if (sample_idx.size() < 2) return best;

    std::vector<std::pair<double, int>> ordered(sample_idx.size());
    std::vector<double> left_counts(num_classes), right_counts(num_classes);

    for (int f : features) {
        for (std::size_t i = 0; i < sample_idx.size(); ++i)
            ordered[i] = {rows[sample_idx[i]][f], labels[sample_idx[i]]};
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (ordered.front().first == ordered.back().first) continue;  // constant feature

        std::fill(left_counts.begin(), left_counts.end(), 0.0);
        std::fill(right_counts.begin(), right_counts.end(), 0.0);
        for (const auto& [v, label] : ordered) right_counts[label] += 1.0;

        double n_left = 0.0;
        for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
            left_counts[ordered[i].second] += 1.0;
            right_counts[ordered[i].second] -= 1.0;
            n_left += 1.0;
            if (ordered[i].first == ordered[i + 1].first) continue;  // only split between distinct values
            const double threshold = ordered[i].first + (ordered[i + 1].first - ordered[i].first) / 2.0;
            const double impurity = (n_left * gini_from_counts(left_counts, n_left) +
                                     (n - n_left) * gini_from_counts(right_counts, n - n_left)) /
                                    n;
            // strict improvement only: ties keep the earlier (lower feature
            // index, lower threshold) candidate
            if (!best.valid || impurity < best.impurity) {
                best = {f, threshold, impurity, true};
            }
        }
    }
    return best;
}

// ===========================================================================
// Training
// ===========================================================================

namespace {

struct TreeBuilder {
    const std::vector<std::vector<double>>& rows;
    const std::vector<int>& labels;
    int num_classes;
    int mtry;
    SplitMix64& rng;
    Tree tree;

    int build(std::vector<int>& samples) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::vector<double> counts(num_classes, 0.0);
        for (int i : samples) counts[labels[i]] += 1.0;
        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

        if (pure || samples.size() < 2) {
            make_leaf(node_id, std::move(counts), static_cast<double>(samples.size()));
            return node_id;
        }

        const SplitChoice split =
            find_best_split(rows, labels, samples, sample_features(), num_classes);
        if (!split.valid) {
            make_leaf(node_id, std::move(counts), static_cast<double>(samples.size()));
            return node_id;
        }

        std::vector<int> left, right;
        for (int i : samples)
            (rows[i][split.feature] <= split.threshold ? left : right).push_back(i);
        samples.clear();
        samples.shrink_to_fit();

        const int left_id = build(left);
        const int right_id = build(right);
        TreeNode& node = tree.nodes[node_id];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }

    void make_leaf(int node_id, std::vector<double>&& counts, double total) {
        TreeNode& node = tree.nodes[node_id];
        node.counts = std::move(counts);
        node.total = total;
    }

    // mtry distinct features via partial Fisher-Yates, then sorted so split
    // candidates are examined in ascending feature order (the tie rule).
    std::vector<int> sample_features() {
        const int dims = static_cast<int>(rows.front().size());
        std::vector<int> pool(dims);
        std::iota(pool.begin(), pool.end(), 0);
        const int take = std::min(mtry, dims);
        for (int i = 0; i < take; ++i) {
            const std::size_t j = i + rng.below(static_cast<std::uint64_t>(dims - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(take);
        std::sort(pool.begin(), pool.end());
        return pool;
    }
};

}  // namespace

ForestModel train_forest(const LabeledSet& data, int num_trees, int mtry, std::uint64_t seed) {
    if (data.rows.empty()) fail(Errc::EmptyData, "no training rows");
    if (data.rows.size() != data.labels.size())
        fail(Errc::LengthMismatch, "rows and labels differ in length");
    const int num_classes = static_cast<int>(data.class_names.size());
    int distinct = 0;
    {
        std::vector<bool> seen(num_classes, false);
        for (int label : data.labels)
            if (label >= 0 && label < num_classes && !seen[label]) {
                seen[label] = true;
                ++distinct;
            }
    }
    if (distinct < 2) fail(Errc::SingleClass, "training data has a single class");
    if (num_trees < 1 || mtry < 1 || mtry > data.dims())
        fail(Errc::InvalidParams, "bad forest parameters");

    ForestModel model;
    model.num_trees = num_trees;
    model.mtry = mtry;
    model.seed = seed;
    model.dims = data.dims();
    model.class_names = data.class_names;
    model.trees.resize(num_trees);

    const std::size_t n = data.rows.size();
    for (int t = 0; t < num_trees; ++t) {
        SplitMix64 rng(seed + static_cast<std::uint64_t>(t));
        std::vector<int> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i)
            bootstrap[i] = static_cast<int>(rng.below(n));
        TreeBuilder builder{data.rows, data.labels, num_classes, mtry, rng, {}};
        builder.build(bootstrap);
        model.trees[t] = std::move(builder.tree);
    }
    return model;
}

// ===========================================================================
// Prediction
// ===========================================================================

namespace {

const TreeNode& descend(const Tree& tree, const std::vector<double>& x) {
    const TreeNode* node = &tree.nodes.front();
    while (!node->is_leaf())
        node = &tree.nodes[x[node->feature] <= node->threshold ? node->left : node->right];
    return *node;
}

}  // namespace

ClassProbs predict_proba(const ForestModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.dims)
        fail(Errc::DimMismatch, "probe dimensionality differs from model");
    const std::size_t k = model.class_names.size();
    ClassProbs out;
    out.p.assign(k, 0.0);
    for (const Tree& tree : model.trees) {
        const TreeNode& leaf = descend(tree, x);
        for (std::size_t c = 0; c < k; ++c) out.p[c] += leaf.counts[c] / leaf.total;
    }
    double sum = 0.0;
    for (double v : out.p) sum += v;
    for (double& v : out.p) v /= sum;
    return out;
}

ClassProbs predict_proba_subset(const ForestModel& model, const std::vector<double>& x,
                                const std::vector<int>& class_subset) {
    if (static_cast<int>(x.size()) != model.dims)
        fail(Errc::DimMismatch, "probe dimensionality differs from model");
    ClassProbs out;
    out.p.assign(model.class_names.size(), 0.0);
    for (const Tree& tree : model.trees) {
        const TreeNode& leaf = descend(tree, x);
        for (int c : class_subset) out.p[c] += leaf.counts[c] / leaf.total;
    }
    double sum = 0.0;
    for (int c : class_subset) sum += out.p[c];
    if (sum > 0.0)
        for (int c : class_subset) out.p[c] /= sum;
    return out;
}

int knn_classify(const LabeledSet& train, const std::vector<double>& x, int k) {
    if (train.rows.empty()) fail(Errc::EmptyData, "empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.rows.size())
        fail(Errc::InvalidParams, "k must be in [1, |train|]");

    std::vector<std::pair<double, std::size_t>> dist(train.rows.size());
    for (std::size_t i = 0; i < train.rows.size(); ++i) {
        double d = 0.0;
        const std::vector<double>& row = train.rows[i];
        if (row.size() != x.size()) fail(Errc::DimMismatch, "probe dimensionality differs");
        for (std::size_t j = 0; j < x.size(); ++j) d += std::abs(row[j] - x[j]);
        dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::vector<int> votes(train.class_names.size(), 0);
    for (int i = 0; i < k; ++i) ++votes[train.labels[dist[i].second]];
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return best;
}

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                        int num_classes) {
    if (predicted.size() != truth.size() || predicted.empty())
        fail(Errc::LengthMismatch, "prediction/truth length mismatch");
    Metrics m;
    m.confusion.assign(num_classes, std::vector<int>(num_classes, 0));
    int correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++m.confusion[truth[i]][predicted[i]];
        correct += predicted[i] == truth[i];
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

    double prec_sum = 0.0, rec_sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        int tp = m.confusion[c][c];
        int pred_count = 0, truth_count = 0;
        for (int r = 0; r < num_classes; ++r) {
            pred_count += m.confusion[r][c];
            truth_count += m.confusion[c][r];
        }
        prec_sum += pred_count > 0 ? static_cast<double>(tp) / pred_count : 0.0;
        rec_sum += truth_count > 0 ? static_cast<double>(tp) / truth_count : 0.0;
    }
    m.macro_precision = prec_sum / num_classes;
    m.macro_recall = rec_sum / num_classes;
    return m;
}

// ===========================================================================
// Serialization
// ===========================================================================

namespace {

void write_node(std::ostream& out, const Tree& tree, int node_id, char* buf, std::size_t buf_len) {
    const TreeNode& node = tree.nodes[node_id];
    if (node.is_leaf()) {
        out << "L";
        for (double c : node.counts) {
            std::snprintf(buf, buf_len, "%.17g", c);
            out << ' ' << buf;
        }
        out << '\n';
        return;
    }
    std::snprintf(buf, buf_len, "%.17g", node.threshold);
    out << "S " << node.feature << ' ' << buf << '\n';
    write_node(out, tree, node.left, buf, buf_len);
    write_node(out, tree, node.right, buf, buf_len);
}

int read_node(std::istream& in, Tree& tree, int num_classes) {
    std::string tag;
    if (!(in >> tag)) fail(Errc::ParseError, "truncated forest file");
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (tag == "L") {
        TreeNode& node = tree.nodes[node_id];
        node.counts.resize(num_classes);
        node.total = 0.0;
        for (int c = 0; c < num_classes; ++c) {
            if (!(in >> node.counts[c])) fail(Errc::ParseError, "truncated leaf counts");
            node.total += node.counts[c];
        }
        return node_id;
    }
    if (tag != "S") fail(Errc::ParseError, "unknown node tag '" + tag + "'");
    int feature;
    double threshold;
    if (!(in >> feature >> threshold)) fail(Errc::ParseError, "truncated split node");
    const int left = read_node(in, tree, num_classes);
    const int right = read_node(in, tree, num_classes);
    TreeNode& node = tree.nodes[node_id];
    node.feature = feature;
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

}  // namespace

void write_forest(std::ostream& out, const ForestModel& model) {
    char buf[64];
    out << "shapekit-forest v1\n";
    out << "trees " << model.num_trees << " mtry " << model.mtry << " seed " << model.seed
        << " dims " << model.dims << " classes " << model.class_names.size() << " kind "
        << (model.feature_kind.empty() ? "-" : model.feature_kind) << '\n';
    for (const std::string& name : model.class_names) out << "class " << name << '\n';
    for (int t = 0; t < model.num_trees; ++t) {
        out << "tree " << t << " nodes " << model.trees[t].nodes.size() << '\n';
        write_node(out, model.trees[t], 0, buf, sizeof buf);
    }
}

ForestModel read_forest(std::istream& in) {
    std::string word, version;
    in >> word >> version;
    if (word != "shapekit-forest" || version != "v1")
        fail(Errc::ParseError, "not a shapekit forest file");
    ForestModel model;
    std::size_t num_classes = 0;
    in >> word >> model.num_trees >> word >> model.mtry >> word >> model.seed >> word >>
        model.dims >> word >> num_classes >> word >> model.feature_kind;
    if (!in) fail(Errc::ParseError, "bad forest parameter line");
    if (model.feature_kind == "-") model.feature_kind.clear();
    model.class_names.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        in >> word;
        if (word != "class") fail(Errc::ParseError, "expected class entry");
        in >> model.class_names[c];
    }
    model.trees.resize(model.num_trees);
    for (int t = 0; t < model.num_trees; ++t) {
        int idx;
        std::size_t node_count;
        in >> word >> idx >> word >> node_count;
        if (!in) fail(Errc::ParseError, "bad tree header");
        read_node(in, model.trees[t], static_cast<int>(num_classes));
        if (model.trees[t].nodes.size() != node_count)
            fail(Errc::ParseError, "tree node count mismatch");
    }
    return model;
}

std::string forest_to_string(const ForestModel& model) {
    std::ostringstream out;
    write_forest(out, model);
    return out.str();
}

ForestModel forest_from_string(const std::string& text) {
    std::istringstream in(text);
    return read_forest(in);
}

void save_forest(const std::string& path, const ForestModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    write_forest(out, model);
    if (!out) fail(Errc::IoError, "short write to " + path);
}

ForestModel load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    return read_forest(in);
}

}  // namespace shapekit
