#include "mvcp/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mvcp/csv.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/parallel.hpp"
#include "mvcp/random.hpp"

namespace mvcp {

std::size_t ForestParams::resolved_mtry(std::size_t d) const {
    if (d == 0) throw std::invalid_argument("forest: feature dimension is 0");
    const std::size_t m =
        mtry ? *mtry : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    if (m < 1 || m > d)
        throw std::invalid_argument("forest: mtry=" + std::to_string(m) + " outside [1, " + std::to_string(d) + "]");
    return m;
}

namespace {

struct Split {
    std::size_t feature = DecisionTree::Node::npos;
    double threshold = 0.0;
    double score = -1.0;  // sum over children of (sum_c count_c^2) / n_child; larger is purer
};

}  // namespace

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const Label> y, std::size_t k, const ForestParams& params,
                std::uint64_t seed)
        : x_(x), y_(y), k_(k), params_(params), mtry_(params.resolved_mtry(x.cols())), rng_(seed),
          features_(x.cols()) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    std::size_t build(std::vector<std::size_t>& rows, std::size_t depth, DecisionTree& tree) {
        std::vector<double> counts(k_, 0.0);
        for (auto r : rows) counts[y_[r]] += 1.0;
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        const bool depth_reached = params_.max_depth && depth >= *params_.max_depth;
        if (pure || depth_reached || rows.size() < params_.min_samples_split) return make_leaf(counts, rows.size(), tree);

        const Split split = best_split(rows, counts);
        if (split.feature == DecisionTree::Node::npos) return make_leaf(counts, rows.size(), tree);

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const std::size_t id = tree.nodes_.size();
        tree.nodes_.push_back({split.feature, split.threshold, 0, 0, 0});
        const std::size_t l = build(left, depth + 1, tree);
        const std::size_t r = build(right, depth + 1, tree);
        tree.nodes_[id].left = l;
        tree.nodes_[id].right = r;
        return id;
    }

private:
    std::size_t make_leaf(const std::vector<double>& counts, std::size_t n, DecisionTree& tree) {
        const std::size_t id = tree.nodes_.size();
        DecisionTree::Node leaf;
        leaf.value_offset = tree.class_freq_.size();
        for (double c : counts) tree.class_freq_.push_back(c / static_cast<double>(n));
        tree.nodes_.push_back(leaf);
        return id;
    }

    // Visits features in random order until mtry non-constant ones have been
    // scanned (or all features are exhausted).
    Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& total) {
        Split best;
        std::size_t scanned = 0;
        const std::size_t d = features_.size();
        std::vector<std::pair<double, Label>> column(rows.size());
        std::vector<double> left(k_);
        for (std::size_t i = 0; i < d && scanned < mtry_; ++i) {
            const std::size_t j = i + rng_.uniform_index(d - i);
            std::swap(features_[i], features_[j]);
            const std::size_t f = features_[i];

            for (std::size_t t = 0; t < rows.size(); ++t) column[t] = {x_(rows[t], f), y_[rows[t]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;
            ++scanned;

            std::fill(left.begin(), left.end(), 0.0);
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (double c : total) right_sq += c * c;
            std::vector<double> right = total;
            const auto n = static_cast<double>(rows.size());
            for (std::size_t t = 0; t + 1 < column.size(); ++t) {
                const Label c = column[t].second;
                left_sq += 2.0 * left[c] + 1.0;
                left[c] += 1.0;
                right_sq -= 2.0 * right[c] - 1.0;
                right[c] -= 1.0;
                const double lo = column[t].first;
                const double hi = column[t + 1].first;
                if (lo == hi) continue;
                const auto n_left = static_cast<double>(t + 1);
                const double score = left_sq / n_left + right_sq / (n - n_left);
                if (score > best.score) {
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best = {f, mid, score};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const Label> y_;
    std::size_t k_;
    const ForestParams& params_;
    std::size_t mtry_;
    Rng rng_;
    std::vector<std::size_t> features_;
};

}  // namespace detail

DecisionTree DecisionTree::grow(const Matrix& x, std::span<const Label> y, std::size_t num_classes,
                                std::span<const std::size_t> rows, const ForestParams& params, std::uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("DecisionTree::grow: no rows");
    DecisionTree tree;
    tree.num_classes_ = num_classes;
    detail::TreeBuilder builder(x, y, num_classes, params, seed);
    std::vector<std::size_t> sample(rows.begin(), rows.end());
    builder.build(sample, 0, tree);
    return tree;
}

std::span<const double> DecisionTree::leaf_distribution(std::span<const double> features) const {
    std::size_t id = 0;
    while (nodes_[id].feature != Node::npos)
        id = features[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
    return {class_freq_.data() + nodes_[id].value_offset, num_classes_};
}

std::size_t DecisionTree::depth() const {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[id].feature != Node::npos) {
            stack.emplace_back(nodes_[id].left, d + 1);
            stack.emplace_back(nodes_[id].right, d + 1);
        }
    }
    return deepest;
}

void RandomForest::fit(const Matrix& features, std::span<const Label> labels, std::size_t num_classes,
                       std::uint64_t seed) {
    const std::size_t n = features.rows();
    if (features.cols() == 0) throw std::invalid_argument("RandomForest::fit: feature dimension is 0");
    if (n < 2) throw std::invalid_argument("RandomForest::fit: need at least 2 examples");
    if (labels.size() != n) throw std::invalid_argument("RandomForest::fit: label count does not match rows");
    if (num_classes == 0) throw std::invalid_argument("RandomForest::fit: no classes");
    for (auto y : labels)
        if (y >= num_classes) throw std::invalid_argument("RandomForest::fit: label out of range");
    if (params_.n_trees == 0) throw std::invalid_argument("RandomForest::fit: n_trees must be positive");
    if (params_.min_samples_split < 1) throw std::invalid_argument("RandomForest::fit: min_samples_split must be >= 1");
    if (params_.max_depth && *params_.max_depth == 0) throw std::invalid_argument("RandomForest::fit: max_depth must be positive");
    params_.resolved_mtry(features.cols());

    num_classes_ = num_classes;
    num_features_ = features.cols();
    trees_.assign(params_.n_trees, DecisionTree{});
    parallel_for(params_.n_trees, params_.threads, [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(seed, t);
        Rng rng(tree_seed);
        std::vector<std::size_t> bootstrap(n);
        for (auto& r : bootstrap) r = rng.uniform_index(n);
        trees_[t] = DecisionTree::grow(features, labels, num_classes, bootstrap, params_, derive_seed(tree_seed, 1));
    });
}

ScoreMatrix RandomForest::predict_scores(const Matrix& features) const {
    if (trees_.empty()) throw std::logic_error("RandomForest::predict_scores: forest is not fitted");
    if (features.cols() != num_features_)
        throw std::invalid_argument("RandomForest::predict_scores: expected " + std::to_string(num_features_) +
                                    " features, got " + std::to_string(features.cols()));
    ScoreMatrix scores(features.rows(), num_classes_);
    const double inv = 1.0 / static_cast<double>(trees_.size());
    parallel_for(features.rows(), params_.threads, [&](std::size_t i) {
        auto out = scores.row(i);
        for (const auto& tree : trees_) {
            const auto dist = tree.leaf_distribution(features.row(i));
            for (std::size_t c = 0; c < num_classes_; ++c) out[c] += dist[c];
        }
        for (auto& v : out) v *= inv;
    });
    return scores;
}

namespace {

constexpr const char* kMagic = "mvcp-forest";
constexpr int kVersion = 1;

template <typename T>
T read_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("forest file truncated while reading ") + what);
    if constexpr (std::is_same_v<T, double>) {
        return csv::parse_double(tok, what);
    } else {
        T value{};
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw DataError(std::string("forest file: bad ") + what + " '" + tok + "'");
        return value;
    }
}

void expect(std::istream& in, const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw DataError("forest file: expected '" + word + "', got '" + tok + "'");
}

}  // namespace

void RandomForest::save(std::ostream& out) const {
    out << kMagic << ' ' << kVersion << '\n';
    out << "classes " << num_classes_ << " features " << num_features_ << " trees " << trees_.size() << '\n';
    for (const auto& tree : trees_) {
        out << "tree " << tree.nodes_.size() << ' ' << tree.class_freq_.size() << '\n';
        for (const auto& node : tree.nodes_) {
            if (node.feature == DecisionTree::Node::npos)
                out << "leaf " << node.value_offset << '\n';
            else
                out << "split " << node.feature << ' ' << csv::format_double(node.threshold) << ' ' << node.left << ' '
                    << node.right << '\n';
        }
        out << "values";
        for (double v : tree.class_freq_) out << ' ' << csv::format_double(v);
        out << '\n';
    }
}

RandomForest RandomForest::load(std::istream& in) {
    expect(in, kMagic);
    if (read_token<int>(in, "version") != kVersion) throw DataError("forest file: unsupported version");
    RandomForest forest;
    expect(in, "classes");
    forest.num_classes_ = read_token<std::size_t>(in, "class count");
    expect(in, "features");
    forest.num_features_ = read_token<std::size_t>(in, "feature count");
    expect(in, "trees");
    const auto n_trees = read_token<std::size_t>(in, "tree count");
    forest.params_.n_trees = n_trees;
    for (std::size_t t = 0; t < n_trees; ++t) {
        expect(in, "tree");
        DecisionTree tree;
        tree.num_classes_ = forest.num_classes_;
        const auto n_nodes = read_token<std::size_t>(in, "node count");
        const auto n_values = read_token<std::size_t>(in, "value count");
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::string kind;
            in >> kind;
            DecisionTree::Node node;
            if (kind == "leaf") {
                node.value_offset = read_token<std::size_t>(in, "leaf offset");
                if (node.value_offset + forest.num_classes_ > n_values) throw DataError("forest file: leaf offset out of range");
            } else if (kind == "split") {
                node.feature = read_token<std::size_t>(in, "split feature");
                node.threshold = read_token<double>(in, "threshold");
                node.left = read_token<std::size_t>(in, "left child");
                node.right = read_token<std::size_t>(in, "right child");
                if (node.feature >= forest.num_features_ || node.left >= n_nodes || node.right >= n_nodes ||
                    node.left <= i || node.right <= i)
                    throw DataError("forest file: malformed split node");
            } else {
                throw DataError("forest file: unknown node kind '" + kind + "'");
            }
            tree.nodes_.push_back(node);
        }
        expect(in, "values");
        tree.class_freq_.resize(n_values);
        for (auto& v : tree.class_freq_) v = read_token<double>(in, "leaf value");
        forest.trees_.push_back(std::move(tree));
    }
    return forest;
}

void RandomForest::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    save(out);
}

RandomForest RandomForest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return load(in);
}

}  // namespace mvcp
