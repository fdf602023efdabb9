#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "mvcp/conformal.hpp"
#include "mvcp/matrix.hpp"

namespace mvcp {

struct EvaluatedExample {
    Label true_label = 0;
    Label point_prediction = 0;
    PredictionSet set;
};

struct ClassicalMetrics {
    double accuracy = 0.0;
    double sensitivity = 0.0;  // macro recall
    double specificity = 0.0;  // macro one-vs-rest true-negative rate
    double f1 = 0.0;           // macro F1
};

/// The ten conformal measures and four classical metrics of one evaluation.
struct ConformalReport {
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double coverage = 0.0;
    double jaccard = 0.0;
    double setsize = 0.0;
    double pctempty = 0.0;
    double m_criterion = 0.0;
    double f_criterion = 0.0;
    double om = 0.0;
    double of = 0.0;
    double ou = 0.0;
    double oe = 0.0;

    static constexpr std::size_t kNumMetrics = 14;
    /// Metric names in report order.
    static const std::array<std::string_view, kNumMetrics>& names();
    /// Values in the same order as names().
    std::array<double, kNumMetrics> values() const;
};

/// The ten set-based measures, in report order.
const std::array<std::string_view, 10>& conformal_metric_names();
/// Whether a larger value is better for the named metric.
bool higher_is_better(std::string_view metric);

ClassicalMetrics classical_metrics(std::span<const EvaluatedExample> examples, std::size_t num_classes);

double coverage(std::span<const EvaluatedExample> examples);
double setsize_n_criterion(std::span<const EvaluatedExample> examples);
double pct_empty(std::span<const EvaluatedExample> examples);
double m_criterion(std::span<const EvaluatedExample> examples);
double f_criterion(std::span<const EvaluatedExample> examples);
double jaccard(std::span<const EvaluatedExample> examples);
double om_criterion(std::span<const EvaluatedExample> examples);
double of_criterion(std::span<const EvaluatedExample> examples);
/// Requires at least two classes.
double ou_criterion(std::span<const EvaluatedExample> examples);
double oe_criterion(std::span<const EvaluatedExample> examples);

/// All fourteen metrics. Throws std::logic_error if the identity
/// OE = setsize - coverage is violated by more than 1e-12.
ConformalReport evaluate(std::span<const EvaluatedExample> examples, std::size_t num_classes);

/// Raw counts of label pairs (i != j) appearing in the same prediction set.
Matrix cooccurrence_counts(std::span<const EvaluatedExample> examples, std::size_t num_classes);
/// Confusion counts, rows = predicted, columns = true.
Matrix confusion_counts(std::span<const EvaluatedExample> examples, std::size_t num_classes);
/// Zeroes the diagonal then scales each column to sum 1 (all-zero columns stay 0).
Matrix zero_diag_column_normalize(Matrix counts);

Matrix cooccurrence_matrix(std::span<const EvaluatedExample> examples, std::size_t num_classes);
Matrix zero_diag_confusion(std::span<const EvaluatedExample> examples, std::size_t num_classes);

/// Number of prediction sets of each size 0..k.
std::vector<std::size_t> setsize_histogram(std::span<const EvaluatedExample> examples, std::size_t num_classes);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

/// Two-sided Welch t-test. When both samples have zero variance, equal
/// means give (t=0, p=1) and different means give (t=+-inf, p=0).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> xs);
/// Sample standard deviation (divisor n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

}  // namespace mvcp
