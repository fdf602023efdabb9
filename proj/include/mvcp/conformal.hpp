#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mvcp/classifier.hpp"

namespace mvcp {

/// How the conformal p-value treats the test point itself.
enum class PValueMode {
    /// count(alpha_i >= alpha_new) / (n + 1)
    PaperVerbatim,
    /// (count(alpha_i >= alpha_new) + 1) / (n + 1); keeps the 1 - epsilon guarantee.
    Inclusive,
};

PValueMode parse_pvalue_mode(const std::string& text);
std::string to_string(PValueMode mode);

/// LAC nonconformity: one minus the score of the candidate label.
double lac_nonconformity(std::span<const double> score_row, Label label);

struct PredictionSet {
    /// Retained labels, ascending.
    std::vector<Label> retained;
    /// One p-value per class.
    std::vector<double> pvalues;
    double epsilon = 0.0;

    std::size_t size() const noexcept { return retained.size(); }
    bool empty() const noexcept { return retained.empty(); }
    bool contains(Label y) const;

    /// Builds the set {y : pvalues[y] > epsilon}.
    static PredictionSet from_pvalues(std::vector<double> pvalues, double epsilon);

    bool operator==(const PredictionSet&) const = default;
};

/// Sorted nonconformity scores of the calibration examples.
class CalibrationTable {
public:
    /// Sorts `alphas`; throws std::invalid_argument when empty.
    explicit CalibrationTable(std::vector<double> alphas, PValueMode mode = PValueMode::Inclusive);

    /// LAC alphas of (scores, true labels), one per calibration row.
    static CalibrationTable from_scores(const ScoreMatrix& scores, std::span<const Label> labels,
                                        PValueMode mode = PValueMode::Inclusive);

    double p_value(double alpha_new) const;

    /// p-values for every label of one score row, then thresholded at epsilon.
    PredictionSet predict_set(std::span<const double> score_row, double epsilon) const;

    std::span<const double> alphas() const noexcept { return alphas_; }
    std::size_t n_calib() const noexcept { return alphas_.size(); }
    PValueMode mode() const noexcept { return mode_; }

private:
    std::vector<double> alphas_;
    PValueMode mode_;
};

/// Scores the calibration features with `model` and tabulates LAC alphas.
CalibrationTable calibrate(const Classifier& model, const Matrix& features, std::span<const Label> labels,
                           PValueMode mode = PValueMode::Inclusive);

/// A fitted classifier together with its calibration table.
class ConformalModel {
public:
    ConformalModel(std::shared_ptr<const Classifier> underlying, CalibrationTable table);

    PredictionSet predict_set(std::span<const double> features, double epsilon) const;
    std::vector<PredictionSet> predict_sets(const Matrix& features, double epsilon) const;

    const Classifier& underlying() const noexcept { return *underlying_; }
    const CalibrationTable& table() const noexcept { return table_; }

private:
    std::shared_ptr<const Classifier> underlying_;
    CalibrationTable table_;
};

void check_epsilon(double epsilon);

}  // namespace mvcp
