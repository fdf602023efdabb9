#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mvcp/dataset.hpp"
#include "mvcp/matrix.hpp"

namespace mvcp {

/// Row-per-example class probability matrix (m x k). Every row is a
/// probability vector over the k classes of the training label space.
using ScoreMatrix = Matrix;

/// Contract for an underlying classifier that produces class scores.
class Classifier {
public:
    virtual ~Classifier() = default;

    /// Fits on (features, labels) with labels in [0, num_classes).
    /// Must be deterministic given data, parameters and seed.
    virtual void fit(const Matrix& features, std::span<const Label> labels, std::size_t num_classes,
                     std::uint64_t seed) = 0;

    virtual ScoreMatrix predict_scores(const Matrix& features) const = 0;

    virtual std::size_t num_classes() const = 0;
};

/// Index of the largest entry; ties go to the smallest index.
Label argmax_label(std::span<const double> row);

/// argmax_label applied to every row.
std::vector<Label> argmax_labels(const ScoreMatrix& scores);

}  // namespace mvcp
