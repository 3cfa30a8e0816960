#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/matrix.hpp"
#include "maintvar/rng.hpp"

namespace maintvar {

struct RfConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 8;
    std::size_t min_leaf = 2;
    std::uint64_t seed = 0;
};

/// Binary CART regression tree stored as a flat node array.
struct RegressionTree {
    static constexpr std::size_t kLeaf = static_cast<std::size_t>(-1);

    struct Node {
        std::size_t feature = kLeaf;  // kLeaf marks a leaf
        double threshold = 0.0;
        double value = 0.0;           // node mean of bootstrap targets
        std::size_t left = 0;
        std::size_t right = 0;

        bool operator==(const Node&) const = default;
    };
    std::vector<Node> nodes;  // nodes[0] is the root

    bool operator==(const RegressionTree&) const = default;

    double predict(std::span<const double> row) const {
        std::size_t at = 0;
        while (nodes[at].feature != kLeaf)
            at = row[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
        return nodes[at].value;
    }
};

struct RandomForestModel {
    std::vector<RegressionTree> trees;
    RfConfig config;
    std::vector<std::string> feature_labels;
    std::vector<double> importances;  // normalized impurity decrease, sums to 1
    bool any_split = false;           // false => importances are all zero

    std::size_t feature_count() const { return feature_labels.size(); }
};

namespace detail {

struct TreeBuilder {
    const Matrix& features;
    std::span<const double> target;
    const RfConfig& config;
    std::size_t mtry;
    CounterRng rng;
    RegressionTree tree;
    std::vector<double> importance;  // raw variance reduction per feature

    std::size_t build(std::vector<std::size_t>& samples, std::size_t depth) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t idx : samples) {
            sum += target[idx];
            sum_sq += target[idx] * target[idx];
        }
        const double n = static_cast<double>(samples.size());
        const double node_sse = sum_sq - sum * sum / n;

        RegressionTree::Node node;
        node.value = sum / n;
        const std::size_t node_index = tree.nodes.size();
        tree.nodes.push_back(node);

        if (depth >= config.max_depth || samples.size() < 2 * config.min_leaf || node_sse <= 0.0)
            return node_index;

        // Random feature subset for this node (partial Fisher-Yates),
        // evaluated in ascending index order for determinism.
        const std::size_t k = features.cols();
        std::vector<std::size_t> pool(k);
        for (std::size_t i = 0; i < k; ++i) pool[i] = i;
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_below(k - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> candidates(pool.begin(),
                                            pool.begin() + static_cast<std::ptrdiff_t>(mtry));
        std::sort(candidates.begin(), candidates.end());

        double best_reduction = 0.0;
        std::size_t best_feature = RegressionTree::kLeaf;
        double best_threshold = 0.0;

        std::vector<std::pair<double, double>> xy(samples.size());
        for (std::size_t f : candidates) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                xy[i] = {features(samples[i], f), target[samples[i]]};
            std::sort(xy.begin(), xy.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < xy.size(); ++i) {
                left_sum += xy[i].second;
                left_sq += xy[i].second * xy[i].second;
                if (xy[i].first == xy[i + 1].first) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = xy.size() - nl;
                if (nl < config.min_leaf || nr < config.min_leaf) continue;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
                const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
                const double reduction = node_sse - sse_l - sse_r;
                if (reduction > best_reduction) {
                    best_reduction = reduction;
                    best_feature = f;
                    best_threshold = 0.5 * (xy[i].first + xy[i + 1].first);
                }
            }
        }

        if (best_feature == RegressionTree::kLeaf) return node_index;

        importance[best_feature] += best_reduction;
        std::vector<std::size_t> left, right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (std::size_t idx : samples) {
            if (features(idx, best_feature) <= best_threshold)
                left.push_back(idx);
            else
                right.push_back(idx);
        }
        tree.nodes[node_index].feature = best_feature;
        tree.nodes[node_index].threshold = best_threshold;
        tree.nodes[node_index].left = build(left, depth + 1);
        tree.nodes[node_index].right = build(right, depth + 1);
        return node_index;
    }
};

}  // namespace detail

/// Bagged CART regression: each tree trains on a same-size bootstrap
/// sample, each split considers ceil(K/3) randomly drawn features, and
/// every random draw comes from a stream keyed by (seed, tree index), so
/// the fit is reproducible and trees are independent of build order.
inline RandomForestModel fit_random_forest(const Matrix& features, std::span<const double> target,
                                           const RfConfig& config,
                                           std::vector<std::string> feature_labels = {}) {
    const std::size_t n = features.rows();
    const std::size_t k = features.cols();
    if (k == 0) throw NoFeatures();
    if (n < 10) throw TooFewRows(n, 10);
    if (target.size() != n) throw LengthMismatch(target.size(), n);
    if (config.n_trees == 0) throw DataError("fit_random_forest: n_trees must be positive");

    RandomForestModel model;
    model.config = config;
    if (feature_labels.empty())
        for (std::size_t j = 0; j < k; ++j) model.feature_labels.push_back("f" + std::to_string(j));
    else if (feature_labels.size() == k)
        model.feature_labels = std::move(feature_labels);
    else
        throw DimensionMismatch(feature_labels.size(), k);

    const std::size_t mtry = (k + 2) / 3;  // ceil(K / 3)
    std::vector<double> importance_sum(k, 0.0);

    for (std::size_t t = 0; t < config.n_trees; ++t) {
        detail::TreeBuilder builder{features, target, config, mtry,
                                    CounterRng::derive(config.seed, t), {}, {}};
        builder.importance.assign(k, 0.0);
        std::vector<std::size_t> samples(n);
        for (std::size_t i = 0; i < n; ++i)
            samples[i] = static_cast<std::size_t>(builder.rng.next_below(n));
        builder.build(samples, 0);
        model.trees.push_back(std::move(builder.tree));
        for (std::size_t j = 0; j < k; ++j) importance_sum[j] += builder.importance[j];
    }

    model.importances.assign(k, 0.0);
    double total = 0.0;
    for (double v : importance_sum) total += v;
    if (total > 0.0) {
        model.any_split = true;
        for (std::size_t j = 0; j < k; ++j) model.importances[j] = importance_sum[j] / total;
    }
    return model;
}

/// Mean of the per-tree leaf predictions.
inline double predict_rf(const RandomForestModel& model, std::span<const double> row) {
    if (row.size() != model.feature_count())
        throw DimensionMismatch(row.size(), model.feature_count());
    double s = 0.0;
    for (const RegressionTree& tree : model.trees) s += tree.predict(row);
    return s / static_cast<double>(model.trees.size());
}

/// (label, importance) pairs, descending, ties kept in feature order.
inline std::vector<std::pair<std::string, double>> feature_importances(
    const RandomForestModel& model) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < model.feature_count(); ++j)
        out.emplace_back(model.feature_labels[j], model.importances[j]);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

inline std::string write_importance_csv(const RandomForestModel& model) {
    std::string out = "label,importance\n";
    for (const auto& [label, importance] : feature_importances(model)) {
        out += label;
        out += ',' + format_double(importance);
        out += '\n';
    }
    return out;
}

}  // namespace maintvar
