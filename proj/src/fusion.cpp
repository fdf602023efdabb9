#include "mvcp/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "mvcp/errors.hpp"
#include "mvcp/random.hpp"

namespace mvcp {

namespace {

// Seed salts per model kind. Single-view models and the per-view members of
// the intersection model share salts, so they are the same forests.
constexpr std::uint64_t kAggregationSalt = 1;
constexpr std::uint64_t kStackingSalt = 2;
constexpr std::uint64_t kViewSaltBase = 1000;

const Matrix& view_at(std::span<const Matrix> views, std::size_t v) {
    if (v >= views.size()) throw std::invalid_argument("view index out of range");
    return views[v];
}

void check_disjoint(const MultiViewDataset& train, const MultiViewDataset& calib) {
    std::vector<std::string> a = train.ids, b = calib.ids;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (!common.empty()) throw DataError("training and calibration sets share id '" + common.front() + "'");
    if (calib.size() == 0) throw DataError("empty calibration set");
    if (train.num_views() != calib.num_views()) throw DataError("training and calibration view counts differ");
}

RandomForest fit_forest(const Matrix& x, std::span<const Label> y, std::size_t k, const ForestParams& params,
                        std::uint64_t seed) {
    RandomForest forest(params);
    forest.fit(x, y, k, seed);
    return forest;
}

}  // namespace

ScoreMatrix SingleViewScorer::predict_scores(std::span<const Matrix> views) const {
    return forest_.predict_scores(view_at(views, view_));
}

Matrix aggregate_features(std::span<const Matrix> views) {
    if (views.empty()) throw std::invalid_argument("aggregate_features: no views");
    const std::size_t n = views.front().rows();
    std::size_t width = 0;
    for (const auto& v : views) {
        if (v.rows() != n) throw std::invalid_argument("aggregate_features: views differ in row count");
        width += v.cols();
    }
    Matrix out(n, width);
    for (std::size_t i = 0; i < n; ++i) {
        auto dst = out.row(i).begin();
        for (const auto& v : views) dst = std::copy(v.row(i).begin(), v.row(i).end(), dst);
    }
    return out;
}

ScoreMatrix AggregationScorer::predict_scores(std::span<const Matrix> views) const {
    return forest_.predict_scores(aggregate_features(views));
}

Matrix mvs_build_meta_features(std::span<const std::vector<Label>> predictions, std::span<const ScoreMatrix> scores,
                               std::size_t num_classes, Label dropped_class) {
    if (predictions.empty() || predictions.size() != scores.size())
        throw std::invalid_argument("mvs_build_meta_features: need one prediction vector and score matrix per view");
    if (num_classes == 0 || dropped_class >= num_classes)
        throw std::invalid_argument("mvs_build_meta_features: dropped class out of range");
    const std::size_t n = predictions.front().size();
    const std::size_t n_views = predictions.size();
    for (std::size_t v = 0; v < n_views; ++v)
        if (predictions[v].size() != n || scores[v].rows() != n || scores[v].cols() != num_classes)
            throw std::invalid_argument("mvs_build_meta_features: views are not row-aligned");

    const std::size_t block = num_classes - 1;
    Matrix meta(n, n_views * block + num_classes);
    for (std::size_t v = 0; v < n_views; ++v) {
        for (std::size_t i = 0; i < n; ++i) {
            const Label p = predictions[v][i];
            if (p >= num_classes) throw std::out_of_range("mvs_build_meta_features: predicted label out of range");
            if (p == dropped_class) continue;
            meta(i, v * block + (p < dropped_class ? p : p - 1)) = 1.0;
        }
    }
    const std::size_t offset = n_views * block;
    const double inv = 1.0 / static_cast<double>(n_views);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < num_classes; ++c) {
            double sum = 0.0;
            for (std::size_t v = 0; v < n_views; ++v) sum += scores[v](i, c);
            meta(i, offset + c) = sum * inv;
        }
    return meta;
}

StackModel::StackModel(std::vector<RandomForest> first_level, RandomForest meta, Label dropped_class)
    : first_level_(std::move(first_level)), meta_(std::move(meta)), dropped_class_(dropped_class),
      num_classes_(meta_.num_classes()) {
    if (first_level_.empty()) throw std::invalid_argument("StackModel: no first-level learners");
    for (const auto& f : first_level_)
        if (f.num_classes() != num_classes_) throw std::invalid_argument("StackModel: class count mismatch");
}

Matrix StackModel::meta_features(std::span<const Matrix> views) const {
    if (views.size() != first_level_.size()) throw std::invalid_argument("StackModel: view count mismatch");
    std::vector<ScoreMatrix> scores;
    std::vector<std::vector<Label>> predictions;
    for (std::size_t v = 0; v < views.size(); ++v) {
        scores.push_back(first_level_[v].predict_scores(views[v]));
        predictions.push_back(argmax_labels(scores.back()));
    }
    return mvs_build_meta_features(predictions, scores, num_classes_, dropped_class_);
}

ScoreMatrix StackModel::predict_scores(std::span<const Matrix> views) const {
    return meta_.predict_scores(meta_features(views));
}

ConformalViewModel::ConformalViewModel(std::shared_ptr<const ViewScorer> scorer, CalibrationTable table)
    : scorer_(std::move(scorer)), table_(std::move(table)) {
    if (!scorer_) throw std::invalid_argument("ConformalViewModel: null scorer");
}

Predictions ConformalViewModel::predict(std::span<const Matrix> views, double epsilon) const {
    check_epsilon(epsilon);
    const auto scores = scorer_->predict_scores(views);
    Predictions out;
    out.sets.reserve(scores.rows());
    out.labels.reserve(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        out.sets.push_back(table_.predict_set(scores.row(i), epsilon));
        out.labels.push_back(argmax_label(scores.row(i)));
    }
    return out;
}

PredictionSet intersect_sets(std::span<const PredictionSet> per_view) {
    if (per_view.empty()) throw std::invalid_argument("intersect_sets: no sets");
    std::vector<double> pvalues = per_view.front().pvalues;
    for (const auto& s : per_view.subspan(1)) {
        if (s.pvalues.size() != pvalues.size()) throw std::invalid_argument("intersect_sets: class count mismatch");
        for (std::size_t y = 0; y < pvalues.size(); ++y) pvalues[y] = std::min(pvalues[y], s.pvalues[y]);
    }
    return PredictionSet::from_pvalues(std::move(pvalues), per_view.front().epsilon);
}

Label mvi_select_label(std::span<const PredictionSet> per_view, std::span<const double> mean_scores) {
    const std::size_t k = mean_scores.size();
    std::vector<int> hits(k, 0);
    for (const auto& s : per_view)
        for (auto y : s.retained) ++hits[y];
    const int n_views = static_cast<int>(per_view.size());

    auto best_where = [&](auto&& keep) -> std::optional<Label> {
        std::optional<Label> best;
        for (Label y = 0; y < k; ++y)
            if (keep(y) && (!best || mean_scores[y] > mean_scores[*best])) best = y;
        return best;
    };
    if (auto y = best_where([&](Label c) { return hits[c] == n_views; })) return *y;
    if (auto y = best_where([&](Label c) { return hits[c] > 0; })) return *y;
    return argmax_label(mean_scores);
}

IntersectionModel::IntersectionModel(std::vector<ConformalViewModel> per_view) : per_view_(std::move(per_view)) {
    if (per_view_.empty()) throw std::invalid_argument("IntersectionModel: no views");
}

Predictions IntersectionModel::predict(std::span<const Matrix> views, double epsilon) const {
    check_epsilon(epsilon);
    const std::size_t n_views = per_view_.size();
    std::vector<ScoreMatrix> scores;
    for (const auto& m : per_view_) scores.push_back(m.scorer().predict_scores(views));
    const std::size_t n = scores.front().rows();
    const std::size_t k = num_classes();

    Predictions out;
    out.sets.reserve(n);
    out.labels.reserve(n);
    std::vector<PredictionSet> sets(n_views);
    std::vector<double> mean(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t v = 0; v < n_views; ++v) {
            sets[v] = per_view_[v].table().predict_set(scores[v].row(i), epsilon);
            for (std::size_t c = 0; c < k; ++c) mean[c] += scores[v](i, c);
        }
        for (auto& m : mean) m /= static_cast<double>(n_views);
        out.sets.push_back(intersect_sets(sets));
        out.labels.push_back(mvi_select_label(sets, mean));
    }
    return out;
}

ConformalViewModel train_single_view(const MultiViewDataset& train, const MultiViewDataset& calib, std::size_t view,
                                     const TrainOptions& options, std::uint64_t seed) {
    check_disjoint(train, calib);
    if (view >= train.num_views()) throw std::invalid_argument("train_single_view: view index out of range");
    auto forest = fit_forest(train.views[view].features, train.labels, train.num_classes(), options.forest,
                             derive_seed(seed, kViewSaltBase + view));
    auto scorer = std::make_shared<SingleViewScorer>(view, std::move(forest));
    const auto calib_views = calib.feature_matrices();
    auto table = CalibrationTable::from_scores(scorer->predict_scores(calib_views), calib.labels, options.pvalue_mode);
    return {std::move(scorer), std::move(table)};
}

ConformalViewModel mva_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                             const TrainOptions& options, std::uint64_t seed) {
    check_disjoint(train, calib);
    const auto train_views = train.feature_matrices();
    auto forest = fit_forest(aggregate_features(train_views), train.labels, train.num_classes(), options.forest,
                             derive_seed(seed, kAggregationSalt));
    auto scorer = std::make_shared<AggregationScorer>(std::move(forest));
    const auto calib_views = calib.feature_matrices();
    auto table = CalibrationTable::from_scores(scorer->predict_scores(calib_views), calib.labels, options.pvalue_mode);
    return {std::move(scorer), std::move(table)};
}

ConformalViewModel mvs_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                             const TrainOptions& options, std::uint64_t seed) {
    check_disjoint(train, calib);
    const std::size_t n = train.size();
    const std::size_t folds = options.folds;
    const std::size_t k = train.num_classes();
    const std::size_t n_views = train.num_views();
    if (folds < 2) throw ConfigError("stacking needs at least 2 folds");
    if (n < folds)
        throw DataError("stacking needs at least " + std::to_string(folds) + " training examples, got " +
                        std::to_string(n));
    const std::uint64_t stack_seed = derive_seed(seed, kStackingSalt);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng fold_rng(derive_seed(stack_seed, 0));
    fold_rng.shuffle(order.begin(), order.end());
    std::vector<std::size_t> fold_of(n);
    for (std::size_t p = 0; p < n; ++p) fold_of[order[p]] = p % folds;

    // Out-of-fold first-level scores and predictions.
    std::vector<ScoreMatrix> oof_scores(n_views, ScoreMatrix(n, k));
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_rows, held_out;
        for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? held_out : fit_rows).push_back(i);
        std::vector<Label> fit_labels;
        for (auto r : fit_rows) fit_labels.push_back(train.labels[r]);
        for (std::size_t v = 0; v < n_views; ++v) {
            const auto& x = train.views[v].features;
            auto forest = fit_forest(x.select_rows(fit_rows), fit_labels, k, options.forest,
                                     derive_seed(derive_seed(stack_seed, 10 + f), v));
            const auto s = forest.predict_scores(x.select_rows(held_out));
            for (std::size_t t = 0; t < held_out.size(); ++t)
                std::copy(s.row(t).begin(), s.row(t).end(), oof_scores[v].row(held_out[t]).begin());
        }
    }
    std::vector<std::vector<Label>> oof_predictions;
    for (const auto& s : oof_scores) oof_predictions.push_back(argmax_labels(s));

    const Label dropped = k - 1;
    const Matrix meta_x = mvs_build_meta_features(oof_predictions, oof_scores, k, dropped);
    auto meta = fit_forest(meta_x, train.labels, k, options.forest, derive_seed(stack_seed, 2));

    std::vector<RandomForest> first_level;
    for (std::size_t v = 0; v < n_views; ++v)
        first_level.push_back(fit_forest(train.views[v].features, train.labels, k, options.forest,
                                         derive_seed(derive_seed(stack_seed, 1), v)));

    auto stack = std::make_shared<StackModel>(std::move(first_level), std::move(meta), dropped);
    const auto calib_views = calib.feature_matrices();
    auto table = CalibrationTable::from_scores(stack->predict_scores(calib_views), calib.labels, options.pvalue_mode);
    return {std::move(stack), std::move(table)};
}

IntersectionModel mvi_train(const MultiViewDataset& train, const MultiViewDataset& calib,
                            const TrainOptions& options, std::uint64_t seed) {
    std::vector<ConformalViewModel> per_view;
    for (std::size_t v = 0; v < train.num_views(); ++v)
        per_view.push_back(train_single_view(train, calib, v, options, seed));
    return IntersectionModel(std::move(per_view));
}

void validate_model_name(const std::string& name, const MultiViewDataset& ds) {
    if (name == "mv-a" || name == "mv-s" || name == "mv-i") return;
    if (name.rfind("single:", 0) == 0) {
        ds.view_index(name.substr(7));
        return;
    }
    throw ConfigError("unknown model '" + name + "' (expected mv-a, mv-s, mv-i or single:<view>)");
}

std::unique_ptr<MultiViewModel> train_model(const std::string& name, const MultiViewDataset& train,
                                            const MultiViewDataset& calib, const TrainOptions& options,
                                            std::uint64_t seed) {
    validate_model_name(name, train);
    if (name == "mv-a") return std::make_unique<ConformalViewModel>(mva_train(train, calib, options, seed));
    if (name == "mv-s") return std::make_unique<ConformalViewModel>(mvs_train(train, calib, options, seed));
    if (name == "mv-i") return std::make_unique<IntersectionModel>(mvi_train(train, calib, options, seed));
    const std::size_t view = train.view_index(name.substr(7));
    return std::make_unique<ConformalViewModel>(train_single_view(train, calib, view, options, seed));
}

}  // namespace mvcp
