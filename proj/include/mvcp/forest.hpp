#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mvcp/classifier.hpp"

namespace mvcp {

namespace detail {
class TreeBuilder;
}

struct ForestParams {
    std::size_t n_trees = 100;
    /// Empty means unlimited depth.
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
    /// Candidate features per split; empty means ceil(sqrt(d)).
    std::optional<std::size_t> mtry;
    /// Worker threads used to grow trees. Results do not depend on it.
    std::size_t threads = 1;

    /// Effective mtry for a d-dimensional problem; throws if outside [1, d].
    std::size_t resolved_mtry(std::size_t d) const;
};

/// One CART classification tree stored as a flat node array.
class DecisionTree {
public:
    struct Node {
        // Leaf when feature == npos; `value_offset` then indexes class_freq_.
        static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
        std::size_t feature = npos;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::size_t value_offset = 0;

        bool operator==(const Node&) const = default;
    };

    /// Grows a tree on the given rows (a bootstrap sample, duplicates allowed).
    static DecisionTree grow(const Matrix& x, std::span<const Label> y, std::size_t num_classes,
                             std::span<const std::size_t> rows, const ForestParams& params, std::uint64_t seed);

    /// Leaf class-frequency vector for one example.
    std::span<const double> leaf_distribution(std::span<const double> features) const;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t depth() const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& leaf_values() const noexcept { return class_freq_; }

    bool operator==(const DecisionTree&) const = default;

private:
    friend class RandomForest;
    friend class detail::TreeBuilder;
    std::vector<Node> nodes_;
    std::vector<double> class_freq_;
    std::size_t num_classes_ = 0;
};

/// Bagged ensemble of Gini CART trees with soft (leaf-frequency) voting.
class RandomForest final : public Classifier {
public:
    RandomForest() = default;
    explicit RandomForest(ForestParams params) : params_(params) {}

    void fit(const Matrix& features, std::span<const Label> labels, std::size_t num_classes,
             std::uint64_t seed) override;
    ScoreMatrix predict_scores(const Matrix& features) const override;
    std::size_t num_classes() const override { return num_classes_; }

    std::size_t num_features() const noexcept { return num_features_; }
    const ForestParams& params() const noexcept { return params_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

    /// Versioned plain-text dump ("mvcp-forest 1"); see README for the layout.
    void save(std::ostream& out) const;
    static RandomForest load(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static RandomForest load(const std::filesystem::path& path);

    bool operator==(const RandomForest& other) const {
        return num_classes_ == other.num_classes_ && num_features_ == other.num_features_ && trees_ == other.trees_;
    }

private:
    ForestParams params_;
    std::vector<DecisionTree> trees_;
    std::size_t num_classes_ = 0;
    std::size_t num_features_ = 0;
};

}  // namespace mvcp
