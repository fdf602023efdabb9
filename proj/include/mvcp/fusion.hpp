#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mvcp/conformal.hpp"
#include "mvcp/dataset.hpp"
#include "mvcp/forest.hpp"

namespace mvcp {

struct TrainOptions {
    ForestParams forest;
    PValueMode pvalue_mode = PValueMode::Inclusive;
    /// Cross-validation folds for out-of-fold stacking features.
    std::size_t folds = 5;
};

/// Prediction sets plus single-label predictions for a batch of examples.
struct Predictions {
    std::vector<PredictionSet> sets;
    std::vector<Label> labels;
};

/// Anything that turns row-aligned view matrices into prediction sets and
/// point predictions.
class MultiViewModel {
public:
    virtual ~MultiViewModel() = default;
    virtual std::size_t num_classes() const = 0;
    virtual Predictions predict(std::span<const Matrix> views, double epsilon) const = 0;

    std::vector<PredictionSet> predict_sets(std::span<const Matrix> views, double epsilon) const {
        return predict(views, epsilon).sets;
    }
    std::vector<Label> predict_labels(std::span<const Matrix> views, double epsilon) const {
        return predict(views, epsilon).labels;
    }
};

/// Maps the full list of view matrices to class scores.
class ViewScorer {
public:
    virtual ~ViewScorer() = default;
    virtual std::size_t num_classes() const = 0;
    virtual ScoreMatrix predict_scores(std::span<const Matrix> views) const = 0;
};

/// One forest on one of the views.
class SingleViewScorer final : public ViewScorer {
public:
    SingleViewScorer(std::size_t view, RandomForest forest) : view_(view), forest_(std::move(forest)) {}
    std::size_t num_classes() const override { return forest_.num_classes(); }
    ScoreMatrix predict_scores(std::span<const Matrix> views) const override;
    std::size_t view() const noexcept { return view_; }
    const RandomForest& forest() const noexcept { return forest_; }

private:
    std::size_t view_;
    RandomForest forest_;
};

/// Horizontal concatenation of the views, in view order, without rescaling.
Matrix aggregate_features(std::span<const Matrix> views);

/// One forest on the concatenated feature vectors.
class AggregationScorer final : public ViewScorer {
public:
    explicit AggregationScorer(RandomForest forest) : forest_(std::move(forest)) {}
    std::size_t num_classes() const override { return forest_.num_classes(); }
    ScoreMatrix predict_scores(std::span<const Matrix> views) const override;
    const RandomForest& forest() const noexcept { return forest_; }

private:
    RandomForest forest_;
};

/// Meta-learner inputs: per view, the one-hot encoded predicted labels with
/// column `dropped_class` removed, followed by the element-wise mean of the
/// views' score matrices. Width is n_views * (k - 1) + k.
Matrix mvs_build_meta_features(std::span<const std::vector<Label>> predictions, std::span<const ScoreMatrix> scores,
                               std::size_t num_classes, Label dropped_class);

/// Stacked generalization over one first-level forest per view.
class StackModel final : public ViewScorer {
public:
    StackModel(std::vector<RandomForest> first_level, RandomForest meta, Label dropped_class);

    std::size_t num_classes() const override { return num_classes_; }
    ScoreMatrix predict_scores(std::span<const Matrix> views) const override;

    /// Meta-features produced by the refit first-level learners.
    Matrix meta_features(std::span<const Matrix> views) const;

    std::size_t num_views() const noexcept { return first_level_.size(); }
    std::size_t meta_width() const noexcept { return num_views() * (num_classes_ - 1) + num_classes_; }
    Label dropped_class() const noexcept { return dropped_class_; }
    const std::vector<RandomForest>& first_level() const noexcept { return first_level_; }
    const RandomForest& meta() const noexcept { return meta_; }

private:
    std::vector<RandomForest> first_level_;
    RandomForest meta_;
    Label dropped_class_;
    std::size_t num_classes_;
};

/// A score model wrapped with a split-conformal calibration table. Point
/// predictions are the argmax of the scores.
class ConformalViewModel final : public MultiViewModel {
public:
    ConformalViewModel(std::shared_ptr<const ViewScorer> scorer, CalibrationTable table);

    std::size_t num_classes() const override { return scorer_->num_classes(); }
    Predictions predict(std::span<const Matrix> views, double epsilon) const override;

    const ViewScorer& scorer() const noexcept { return *scorer_; }
    const CalibrationTable& table() const noexcept { return table_; }

private:
    std::shared_ptr<const ViewScorer> scorer_;
    CalibrationTable table_;
};

/// Per-view conformal models whose prediction sets are intersected. The
/// attached p-value of a label is its minimum over the views, so a label is
/// retained exactly when every view retains it.
class IntersectionModel final : public MultiViewModel {
public:
    explicit IntersectionModel(std::vector<ConformalViewModel> per_view);

    std::size_t num_classes() const override { return per_view_.front().num_classes(); }
    Predictions predict(std::span<const Matrix> views, double epsilon) const override;

    const std::vector<ConformalViewModel>& per_view() const noexcept { return per_view_; }

private:
    std::vector<ConformalViewModel> per_view_;
};

/// Combines per-view sets: retained = intersection, p[y] = min over views.
PredictionSet intersect_sets(std::span<const PredictionSet> per_view);

/// Point prediction of the intersection model: highest mean score within
/// the intersection, else within the union, else over all labels.
Label mvi_select_label(std::span<const PredictionSet> per_view, std::span<const double> mean_scores);

ConformalViewModel train_single_view(const MultiViewDataset& train, const MultiViewDataset& calib, std::size_t view,
                                     const TrainOptions& options, std::uint64_t seed);
ConformalViewModel mva_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                             const TrainOptions& options, std::uint64_t seed);
ConformalViewModel mvs_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                             const TrainOptions& options, std::uint64_t seed);
IntersectionModel mvi_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                            const TrainOptions& options, std::uint64_t seed);

/// Checks a model name: "mv-a", "mv-s", "mv-i" or "single:<view>".
void validate_model_name(const std::string& name, const MultiViewDataset& ds);

/// Trains the named model. Seeds are derived per model kind and view, so a
/// model's result does not depend on which other models are requested.
std::unique_ptr<MultiViewModel> train_model(const std::string& name, const MultiViewDataset& train,
                                            const MultiViewDataset& calib, const TrainOptions& options,
                                            std::uint64_t seed);

}  // namespace mvcp
