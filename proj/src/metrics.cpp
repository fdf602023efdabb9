#include "mvcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

namespace mvcp {

const std::array<std::string_view, ConformalReport::kNumMetrics>& ConformalReport::names() {
    static constexpr std::array<std::string_view, kNumMetrics> kNames{
        "accuracy", "sensitivity", "specificity", "f1",          "coverage", "jaccard", "setsize",
        "pctempty", "m_criterion", "f_criterion", "om", "of", "ou", "oe"};
    return kNames;
}

std::array<double, ConformalReport::kNumMetrics> ConformalReport::values() const {
    return {accuracy, sensitivity, specificity, f1, coverage, jaccard, setsize,
            pctempty, m_criterion, f_criterion, om,   of,       ou,      oe};
}

const std::array<std::string_view, 10>& conformal_metric_names() {
    static constexpr std::array<std::string_view, 10> kNames{
        "coverage",    "jaccard",     "setsize",      "pctempty",     "m_criterion",
        "f_criterion", "om", "of", "ou", "oe"};
    return kNames;
}

bool higher_is_better(std::string_view metric) {
    return metric == "accuracy" || metric == "sensitivity" || metric == "specificity" || metric == "f1" ||
           metric == "coverage" || metric == "jaccard";
}

namespace {

void require_nonempty(std::span<const EvaluatedExample> examples, const char* what) {
    if (examples.empty()) throw std::invalid_argument(std::string(what) + ": no examples");
}

template <typename PerExample>
double average(std::span<const EvaluatedExample> examples, const char* what, PerExample&& f) {
    require_nonempty(examples, what);
    double sum = 0.0;
    for (const auto& e : examples) sum += f(e);
    return sum / static_cast<double>(examples.size());
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

ClassicalMetrics classical_metrics(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    require_nonempty(examples, "classical_metrics");
    const std::size_t k = num_classes;
    std::vector<double> tp(k), fp(k), fn(k);
    double correct = 0.0;
    for (const auto& e : examples) {
        if (e.true_label >= k || e.point_prediction >= k) throw std::out_of_range("classical_metrics: label out of range");
        if (e.true_label == e.point_prediction) {
            correct += 1.0;
            tp[e.true_label] += 1.0;
        } else {
            fn[e.true_label] += 1.0;
            fp[e.point_prediction] += 1.0;
        }
    }
    const auto n = static_cast<double>(examples.size());
    ClassicalMetrics m;
    m.accuracy = correct / n;
    for (std::size_t c = 0; c < k; ++c) {
        const double positives = tp[c] + fn[c];
        const double recall = positives > 0 ? tp[c] / positives : 0.0;
        const double negatives = n - positives;
        const double tn = negatives - fp[c];
        const double specificity = negatives > 0 ? tn / negatives : 1.0;
        const double denom = 2.0 * tp[c] + fp[c] + fn[c];
        const double f1 = denom > 0 ? 2.0 * tp[c] / denom : 0.0;
        m.sensitivity += recall;
        m.specificity += specificity;
        m.f1 += f1;
    }
    m.sensitivity /= static_cast<double>(k);
    m.specificity /= static_cast<double>(k);
    m.f1 /= static_cast<double>(k);
    return m;
}

double coverage(std::span<const EvaluatedExample> examples) {
    return average(examples, "coverage", [](const auto& e) { return e.set.contains(e.true_label) ? 1.0 : 0.0; });
}

double setsize_n_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "setsize", [](const auto& e) { return static_cast<double>(e.set.size()); });
}

double pct_empty(std::span<const EvaluatedExample> examples) {
    return average(examples, "pct_empty", [](const auto& e) { return e.set.empty() ? 1.0 : 0.0; });
}

double m_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "m_criterion", [](const auto& e) { return e.set.size() > 1 ? 1.0 : 0.0; });
}

double f_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "f_criterion", [](const auto& e) {
        const auto& p = e.set.pvalues;
        if (p.empty()) throw std::invalid_argument("f_criterion: missing p-values");
        return sum_of(p) - *std::max_element(p.begin(), p.end());
    });
}

double jaccard(std::span<const EvaluatedExample> examples) {
    return average(examples, "jaccard", [](const auto& e) {
        const bool hit = e.set.contains(e.true_label);
        const double union_size = static_cast<double>(e.set.size()) + (hit ? 0.0 : 1.0);
        return (hit ? 1.0 : 0.0) / union_size;
    });
}

double om_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "om_criterion", [](const auto& e) {
        const std::size_t false_labels = e.set.size() - (e.set.contains(e.true_label) ? 1 : 0);
        return false_labels > 0 ? 1.0 : 0.0;
    });
}

double of_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "of_criterion", [](const auto& e) {
        const auto& p = e.set.pvalues;
        if (e.true_label >= p.size()) throw std::out_of_range("of_criterion: label out of range");
        double total = 0.0;
        for (Label y = 0; y < p.size(); ++y)
            if (y != e.true_label) total += p[y];
        return total;
    });
}

double ou_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "ou_criterion", [](const auto& e) {
        const auto& p = e.set.pvalues;
        if (p.size() < 2) throw std::invalid_argument("ou_criterion: needs at least two classes");
        if (e.true_label >= p.size()) throw std::out_of_range("ou_criterion: label out of range");
        double best = 0.0;
        for (Label y = 0; y < p.size(); ++y)
            if (y != e.true_label) best = std::max(best, p[y]);
        return best;
    });
}

double oe_criterion(std::span<const EvaluatedExample> examples) {
    return average(examples, "oe_criterion", [](const auto& e) {
        return static_cast<double>(e.set.size() - (e.set.contains(e.true_label) ? 1 : 0));
    });
}

ConformalReport evaluate(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    const auto classical = classical_metrics(examples, num_classes);
    ConformalReport r;
    r.accuracy = classical.accuracy;
    r.sensitivity = classical.sensitivity;
    r.specificity = classical.specificity;
    r.f1 = classical.f1;
    r.coverage = coverage(examples);
    r.jaccard = jaccard(examples);
    r.setsize = setsize_n_criterion(examples);
    r.pctempty = pct_empty(examples);
    r.m_criterion = m_criterion(examples);
    r.f_criterion = f_criterion(examples);
    r.om = om_criterion(examples);
    r.of = of_criterion(examples);
    r.ou = num_classes >= 2 ? ou_criterion(examples) : 0.0;
    r.oe = oe_criterion(examples);
    if (std::abs(r.oe - (r.setsize - r.coverage)) > 1e-12)
        throw std::logic_error("identity OE = setsize - coverage violated");
    return r;
}

Matrix cooccurrence_counts(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    Matrix counts(num_classes, num_classes);
    for (const auto& e : examples)
        for (auto i : e.set.retained)
            for (auto j : e.set.retained)
                if (i != j) counts(i, j) += 1.0;
    return counts;
}

Matrix confusion_counts(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    Matrix counts(num_classes, num_classes);
    for (const auto& e : examples) counts(e.point_prediction, e.true_label) += 1.0;
    return counts;
}

Matrix zero_diag_column_normalize(Matrix m) {
    const std::size_t k = m.rows();
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) total += m(i, j);
        if (total > 0.0)
            for (std::size_t i = 0; i < k; ++i) m(i, j) /= total;
    }
    return m;
}

Matrix cooccurrence_matrix(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    return zero_diag_column_normalize(cooccurrence_counts(examples, num_classes));
}

Matrix zero_diag_confusion(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    return zero_diag_column_normalize(confusion_counts(examples, num_classes));
}

std::vector<std::size_t> setsize_histogram(std::span<const EvaluatedExample> examples, std::size_t num_classes) {
    std::vector<std::size_t> bins(num_classes + 1, 0);
    for (const auto& e : examples) ++bins.at(e.set.size());
    return bins;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: each sample needs at least 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double va = sample_sd(a) * sample_sd(a) / na;
    const double vb = sample_sd(b) * sample_sd(b) / nb;
    const double se2 = va + vb;
    TTestResult r;
    if (se2 == 0.0) {
        r.df = na + nb - 2.0;
        if (ma == mb) return {0.0, 1.0, r.df};
        r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    // Two-sided tail of Student's t: I_{df/(df+t^2)}(df/2, 1/2).
    const double x = r.df / (r.df + r.t * r.t);
    r.p = x >= 1.0 ? 1.0 : boost::math::ibeta(r.df / 2.0, 0.5, x);
    return r;
}

}  // namespace mvcp
