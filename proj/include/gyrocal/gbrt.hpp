// Gradient-boosted regression trees with squared-error loss.
//
// Boosting follows the additive residual-fitting scheme: starting from the
// mean prediction, each round fits a tree to the current gradients
// (g_i = yhat_i - y_i, unit hessians) by exact greedy split search over
// sorted unique feature values, maximizing
//   gain = 1/2 * [ G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
//                  - (G_L+G_R)^2/(H_L+H_R+lambda) ] - gamma
// with leaf weights -G/(H+lambda), then shrinks the tree by the learning
// rate.
//
// Training is deterministic: split-gain ties break toward the lowest feature
// index, then the lowest threshold, and every gradient sum is accumulated in
// a content-defined order (values, then gradients), so permuting the
// training rows reproduces the same model.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "gyrocal/error.hpp"
#include "gyrocal/rng.hpp"
#include "gyrocal/types.hpp"

namespace gyrocal {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;  // routing for NaN feature values
    double weight = 0.0;       // leaf value
    double gain = 0.0;         // realized split gain (internal nodes)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double route(const double* x) const {
        int id = 0;
        while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
            const double v = x[nd.feature];
            const bool go_left = std::isnan(v) ? nd.default_left : (v < nd.threshold);
            id = go_left ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(id)].weight;
    }
};

struct GbrtParams {
    int rounds = 50;  // number of boosted trees, M
    double learning_rate = 0.1;
    int max_depth = 6;
    double lambda = 1.0;  // L2 leaf regularization
    double gamma = 0.0;   // split penalty
    double min_child_weight = 1.0;
    double subsample = 1.0;  // row fraction per round (1 = off)
    double colsample = 1.0;  // feature fraction per round (1 = off)
    std::uint64_t seed = 0;

    void validate() const {
        if (rounds < 0) throw Error(ErrorKind::InvalidConfig, "gbrt: rounds must be >= 0");
        if (!(learning_rate > 0.0) || learning_rate > 1.0)
            throw Error(ErrorKind::InvalidConfig, "gbrt: learning_rate must be in (0,1]");
        if (lambda < 0.0 || gamma < 0.0)
            throw Error(ErrorKind::InvalidConfig, "gbrt: lambda and gamma must be >= 0");
        if (max_depth < 1) throw Error(ErrorKind::InvalidConfig, "gbrt: max_depth must be >= 1");
        if (!(subsample > 0.0) || subsample > 1.0 || !(colsample > 0.0) || colsample > 1.0)
            throw Error(ErrorKind::InvalidConfig, "gbrt: subsample fractions must be in (0,1]");
    }
};

struct GbrtModel {
    double base_score = 0.0;
    std::vector<Tree> trees;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 6;
    std::vector<std::string> feature_names;
    std::vector<double> train_loss;  // per-round training MSE, not serialized
};

namespace detail {

// Sum in ascending value order, independent of input order.
inline double stable_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double g_left = 0.0;
    std::size_t h_left = 0;

    // strict improvement under the (gain desc, feature asc, threshold asc)
    // order; candidates arrive in that order, so strict > suffices
    bool beats(const SplitCandidate& other) const { return gain > other.gain; }
};

struct NodeBuild {
    double g_sum = 0.0;
    std::size_t h_sum = 0;
    int depth = 0;
    SplitCandidate best;
};

// Scan state for one (node, feature) pair while sweeping a sorted column.
struct ScanState {
    double g_accum = 0.0;
    std::size_t h_accum = 0;
    bool bucket_open = false;
    double bucket_value = 0.0;
    std::vector<double> bucket;  // gradients of rows tied at bucket_value

    void reset() {
        g_accum = 0.0;
        h_accum = 0;
        bucket_open = false;
        bucket.clear();
    }

    void close_bucket() {
        g_accum += stable_sum(bucket);
        h_accum += bucket.size();
        bucket.clear();
    }
};

}  // namespace detail

inline GbrtModel train_gbrt(const AlignedDataset& train, const GbrtParams& params) {
    params.validate();
    const auto n = train.rows();
    const auto d = train.cols();
    if (n < 2) throw Error(ErrorKind::EmptyTrainingSet, "gbrt: need at least 2 training rows");
    if (!train.features.allFinite() || !train.target.allFinite())
        throw Error(ErrorKind::NonFiniteInput, "gbrt: non-finite training values");

    const Eigen::MatrixXd& X = train.features;
    const Eigen::VectorXd& y = train.target;

    GbrtModel model;
    model.learning_rate = params.learning_rate;
    model.lambda = params.lambda;
    model.gamma = params.gamma;
    model.max_depth = params.max_depth;
    model.feature_names = train.feature_names;
    {
        std::vector<double> ys(y.data(), y.data() + n);
        model.base_score = detail::stable_sum(std::move(ys)) / static_cast<double>(n);
    }

    // global presort of each column, reused across rounds
    std::vector<std::vector<int>> sorted_idx(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        auto& idx = sorted_idx[static_cast<std::size_t>(j)];
        idx.resize(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return X(a, j) < X(b, j); });
    }

    Eigen::VectorXd F = Eigen::VectorXd::Constant(n, model.base_score);
    std::vector<double> g(static_cast<std::size_t>(n));
    std::vector<int> node_of_row(static_cast<std::size_t>(n));
    constexpr int kInactive = -1;

    for (int round = 0; round < params.rounds; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = F(i) - y(i);

        // optional row/column subsampling, seeded per round
        std::vector<char> row_active(static_cast<std::size_t>(n), 1);
        if (params.subsample < 1.0) {
            const auto k = std::max<std::size_t>(2, static_cast<std::size_t>(
                                                        std::floor(params.subsample * static_cast<double>(n))));
            std::vector<std::size_t> rows(static_cast<std::size_t>(n));
            std::iota(rows.begin(), rows.end(), 0);
            Rng rng(derive_seed(params.seed, 0x50000000ULL + static_cast<std::uint64_t>(round)));
            rng.shuffle(rows);
            std::fill(row_active.begin(), row_active.end(), 0);
            for (std::size_t i = 0; i < k; ++i) row_active[rows[i]] = 1;
        }
        std::vector<int> columns;
        if (params.colsample < 1.0) {
            const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                        std::floor(params.colsample * static_cast<double>(d))));
            std::vector<int> cols(static_cast<std::size_t>(d));
            std::iota(cols.begin(), cols.end(), 0);
            Rng rng(derive_seed(params.seed, 0x60000000ULL + static_cast<std::uint64_t>(round)));
            rng.shuffle(cols);
            cols.resize(k);
            std::sort(cols.begin(), cols.end());
            columns = std::move(cols);
        } else {
            columns.resize(static_cast<std::size_t>(d));
            std::iota(columns.begin(), columns.end(), 0);
        }

        Tree tree;
        std::vector<detail::NodeBuild> build;
        tree.nodes.emplace_back();
        build.emplace_back();
        {
            std::vector<double> root_g;
            std::size_t count = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!row_active[static_cast<std::size_t>(i)]) {
                    node_of_row[static_cast<std::size_t>(i)] = kInactive;
                    continue;
                }
                node_of_row[static_cast<std::size_t>(i)] = 0;
                root_g.push_back(g[static_cast<std::size_t>(i)]);
                ++count;
            }
            build[0].g_sum = detail::stable_sum(std::move(root_g));
            build[0].h_sum = count;
            build[0].depth = 0;
        }

        std::vector<int> frontier{0};
        while (!frontier.empty()) {
            // frontier nodes share the current depth
            if (build[static_cast<std::size_t>(frontier.front())].depth >= params.max_depth) break;

            const int frontier_base = frontier.front();
            std::vector<detail::ScanState> states(frontier.size());

            for (int j : columns) {
                for (auto& st : states) st.reset();
                const auto& order = sorted_idx[static_cast<std::size_t>(j)];
                for (int row : order) {
                    const int node = node_of_row[static_cast<std::size_t>(row)];
                    if (node < frontier_base) continue;  // inactive or settled leaf
                    auto& st = states[static_cast<std::size_t>(node - frontier_base)];
                    auto& nb = build[static_cast<std::size_t>(node)];
                    const double v = X(row, j);
                    if (st.bucket_open && v != st.bucket_value) {
                        st.close_bucket();
                        const std::size_t h_left = st.h_accum;
                        const std::size_t h_right = nb.h_sum - h_left;
                        if (static_cast<double>(h_left) >= params.min_child_weight &&
                            static_cast<double>(h_right) >= params.min_child_weight) {
                            const double g_left = st.g_accum;
                            const double g_right = nb.g_sum - g_left;
                            const double gain =
                                0.5 * (g_left * g_left / (static_cast<double>(h_left) + params.lambda) +
                                       g_right * g_right / (static_cast<double>(h_right) + params.lambda) -
                                       nb.g_sum * nb.g_sum / (static_cast<double>(nb.h_sum) + params.lambda)) -
                                params.gamma;
                            if (nb.best.feature < 0 || gain > nb.best.gain) {
                                nb.best = {gain, j, 0.5 * (st.bucket_value + v), g_left, h_left};
                            }
                        }
                        st.bucket_value = v;
                        st.bucket_open = true;
                        st.bucket.push_back(g[static_cast<std::size_t>(row)]);
                    } else {
                        if (!st.bucket_open) {
                            st.bucket_open = true;
                            st.bucket_value = v;
                        }
                        st.bucket.push_back(g[static_cast<std::size_t>(row)]);
                    }
                }
            }

            // materialize positive-gain splits; everything else settles as a leaf
            std::vector<int> next_frontier;
            for (int node : frontier) {
                // copy stats first: emplace_back below reallocates both vectors
                const detail::NodeBuild nb = build[static_cast<std::size_t>(node)];
                if (nb.best.feature < 0 || !(nb.best.gain > 0.0)) continue;
                const std::size_t h_left = nb.best.h_left;
                const std::size_t h_right = nb.h_sum - h_left;
                const int left = static_cast<int>(tree.nodes.size());
                const int right = left + 1;
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                build.emplace_back();
                build.emplace_back();
                TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
                tn.feature = nb.best.feature;
                tn.threshold = nb.best.threshold;
                tn.gain = nb.best.gain;
                tn.default_left = h_left >= h_right;
                tn.left = left;
                tn.right = right;
                build[static_cast<std::size_t>(left)] = {nb.best.g_left, h_left, nb.depth + 1, {}};
                build[static_cast<std::size_t>(right)] = {nb.g_sum - nb.best.g_left, h_right, nb.depth + 1, {}};
                next_frontier.push_back(left);
                next_frontier.push_back(right);
            }
            if (next_frontier.empty()) break;
            // reassign rows of split nodes
            for (Eigen::Index i = 0; i < n; ++i) {
                const int node = node_of_row[static_cast<std::size_t>(i)];
                if (node < frontier_base) continue;
                const auto& tn = tree.nodes[static_cast<std::size_t>(node)];
                if (tn.is_leaf()) continue;
                node_of_row[static_cast<std::size_t>(i)] =
                    X(i, tn.feature) < tn.threshold ? tn.left : tn.right;
            }
            frontier = std::move(next_frontier);
        }

        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& tn = tree.nodes[id];
            if (!tn.is_leaf()) continue;
            const auto& nb = build[id];
            tn.weight = -nb.g_sum / (static_cast<double>(nb.h_sum) + params.lambda);
        }

        // update predictions: active rows already sit in their leaf, the
        // rest (under row subsampling) route through the finished tree
        Eigen::VectorXd row_buf(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int node = node_of_row[static_cast<std::size_t>(i)];
            double w;
            if (node >= 0) {
                w = tree.nodes[static_cast<std::size_t>(node)].weight;
            } else {
                row_buf = X.row(i);
                w = tree.route(row_buf.data());
            }
            F(i) += params.learning_rate * w;
        }
        model.trees.push_back(std::move(tree));
        model.train_loss.push_back((F - y).squaredNorm() / static_cast<double>(n));
    }

    return model;
}

inline Eigen::VectorXd predict_gbrt(const GbrtModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
        throw Error(ErrorKind::DimensionMismatch, "gbrt predict: feature count mismatch");
    const auto n = X.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(n, model.base_score);
    Eigen::VectorXd row_buf(X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        row_buf = X.row(i);
        double acc = 0.0;
        for (const auto& tree : model.trees) acc += tree.route(row_buf.data());
        out(i) += model.learning_rate * acc;
    }
    return out;
}

// Per-feature sum of realized split gains across all trees.
inline std::vector<double> gain_importance(const GbrtModel& model) {
    std::vector<double> scores(model.feature_names.size(), 0.0);
    for (const auto& tree : model.trees)
        for (const auto& nd : tree.nodes)
            if (!nd.is_leaf()) scores[static_cast<std::size_t>(nd.feature)] += nd.gain;
    return scores;
}

// --- JSON serialization: {base_score, learning_rate, lambda, gamma,
//     max_depth, feature_names, trees} with nodes as nested
//     {f, t, l, r, d, g} objects and leaves as {w}. ---

namespace detail {

inline nlohmann::json tree_to_json(const Tree& tree, int id) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) return {{"w", nd.weight}};
    return {{"f", nd.feature},
            {"t", nd.threshold},
            {"d", nd.default_left ? "l" : "r"},
            {"g", nd.gain},
            {"l", tree_to_json(tree, nd.left)},
            {"r", tree_to_json(tree, nd.right)}};
}

inline int tree_from_json(const nlohmann::json& j, Tree& tree) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("w")) {
        tree.nodes[static_cast<std::size_t>(id)].weight = j.at("w").get<double>();
        return id;
    }
    TreeNode nd;
    nd.feature = j.at("f").get<int>();
    nd.threshold = j.at("t").get<double>();
    nd.default_left = j.value("d", "l") == "l";
    nd.gain = j.value("g", 0.0);
    tree.nodes[static_cast<std::size_t>(id)] = nd;
    const int left = tree_from_json(j.at("l"), tree);
    const int right = tree_from_json(j.at("r"), tree);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const GbrtModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t, 0));
    j = {{"kind", "gbrt"},
         {"base_score", m.base_score},
         {"learning_rate", m.learning_rate},
         {"lambda", m.lambda},
         {"gamma", m.gamma},
         {"max_depth", m.max_depth},
         {"feature_names", m.feature_names},
         {"trees", trees}};
}

inline void from_json(const nlohmann::json& j, GbrtModel& m) {
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.max_depth = j.value("max_depth", 6);
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.trees.clear();
    for (const auto& tj : j.at("trees")) {
        Tree t;
        detail::tree_from_json(tj, t);
        m.trees.push_back(std::move(t));
    }
}

}  // namespace gyrocal
