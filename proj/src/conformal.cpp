#include "mvcp/conformal.hpp"

#include <algorithm>
#include <stdexcept>

#include "mvcp/errors.hpp"

namespace mvcp {

PValueMode parse_pvalue_mode(const std::string& text) {
    if (text == "inclusive") return PValueMode::Inclusive;
    if (text == "paper_verbatim" || text == "verbatim") return PValueMode::PaperVerbatim;
    throw ConfigError("unknown p-value mode '" + text + "' (expected inclusive or paper_verbatim)");
}

std::string to_string(PValueMode mode) {
    return mode == PValueMode::Inclusive ? "inclusive" : "paper_verbatim";
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
}

double lac_nonconformity(std::span<const double> score_row, Label label) {
    if (label >= score_row.size()) throw std::out_of_range("lac_nonconformity: label out of range");
    return 1.0 - score_row[label];
}

bool PredictionSet::contains(Label y) const {
    return std::binary_search(retained.begin(), retained.end(), y);
}

PredictionSet PredictionSet::from_pvalues(std::vector<double> pvalues, double epsilon) {
    PredictionSet set;
    set.epsilon = epsilon;
    for (Label y = 0; y < pvalues.size(); ++y)
        if (pvalues[y] > epsilon) set.retained.push_back(y);
    set.pvalues = std::move(pvalues);
    return set;
}

CalibrationTable::CalibrationTable(std::vector<double> alphas, PValueMode mode)
    : alphas_(std::move(alphas)), mode_(mode) {
    if (alphas_.empty()) throw std::invalid_argument("calibration table needs at least one score");
    std::sort(alphas_.begin(), alphas_.end());
}

CalibrationTable CalibrationTable::from_scores(const ScoreMatrix& scores, std::span<const Label> labels,
                                               PValueMode mode) {
    if (scores.rows() != labels.size()) throw std::invalid_argument("calibration scores and labels differ in length");
    if (scores.empty()) throw std::invalid_argument("empty calibration set");
    std::vector<double> alphas(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) alphas[i] = lac_nonconformity(scores.row(i), labels[i]);
    return CalibrationTable(std::move(alphas), mode);
}

double CalibrationTable::p_value(double alpha_new) const {
    const auto first_ge = std::lower_bound(alphas_.begin(), alphas_.end(), alpha_new);
    const auto at_least = static_cast<double>(alphas_.end() - first_ge);
    const double denom = static_cast<double>(alphas_.size()) + 1.0;
    return mode_ == PValueMode::Inclusive ? (at_least + 1.0) / denom : at_least / denom;
}

PredictionSet CalibrationTable::predict_set(std::span<const double> score_row, double epsilon) const {
    check_epsilon(epsilon);
    std::vector<double> pvalues(score_row.size());
    for (Label y = 0; y < score_row.size(); ++y) pvalues[y] = p_value(lac_nonconformity(score_row, y));
    return PredictionSet::from_pvalues(std::move(pvalues), epsilon);
}

CalibrationTable calibrate(const Classifier& model, const Matrix& features, std::span<const Label> labels,
                           PValueMode mode) {
    return CalibrationTable::from_scores(model.predict_scores(features), labels, mode);
}

ConformalModel::ConformalModel(std::shared_ptr<const Classifier> underlying, CalibrationTable table)
    : underlying_(std::move(underlying)), table_(std::move(table)) {
    if (!underlying_) throw std::invalid_argument("ConformalModel: null classifier");
}

PredictionSet ConformalModel::predict_set(std::span<const double> features, double epsilon) const {
    Matrix one(1, features.size(), std::vector<double>(features.begin(), features.end()));
    return table_.predict_set(underlying_->predict_scores(one).row(0), epsilon);
}

std::vector<PredictionSet> ConformalModel::predict_sets(const Matrix& features, double epsilon) const {
    const auto scores = underlying_->predict_scores(features);
    std::vector<PredictionSet> out;
    out.reserve(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) out.push_back(table_.predict_set(scores.row(i), epsilon));
    return out;
}

}  // namespace mvcp
