#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mvcp/csv.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/harness.hpp"
#include "mvcp/svg.hpp"

namespace mvcp {

namespace {

template <typename T, typename Key>
std::vector<T> unique_in_order(const std::vector<ResultRow>& rows, Key&& key) {
    std::vector<T> out;
    for (const auto& r : rows) {
        auto v = key(r);
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::vector<std::string> ResultsTable::models() const {
    return unique_in_order<std::string>(rows, [](const ResultRow& r) { return r.model; });
}

std::vector<std::size_t> ResultsTable::trials() const {
    auto t = unique_in_order<std::size_t>(rows, [](const ResultRow& r) { return r.trial; });
    std::sort(t.begin(), t.end());
    return t;
}

std::vector<double> ResultsTable::values(const std::string& model, const std::string& metric) const {
    std::vector<std::pair<std::size_t, double>> found;
    for (const auto& r : rows)
        if (r.model == model && r.metric == metric) found.emplace_back(r.trial, r.value);
    std::sort(found.begin(), found.end());
    std::vector<double> out;
    for (const auto& [_, v] : found) out.push_back(v);
    return out;
}

void ResultsTable::write_csv(const std::filesystem::path& path) const {
    auto out = open_out(path);
    out << "trial,model,metric,value\n";
    for (const auto& r : rows)
        out << r.trial << ',' << csv::escape(r.model) << ',' << csv::escape(r.metric) << ','
            << csv::format_double(r.value) << '\n';
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ResultsTable ResultsTable::read_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    if (table.empty() || table.front() != std::vector<std::string>{"trial", "model", "metric", "value"})
        throw DataError("'" + path.string() + "' is not a results table");
    ResultsTable results;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& row = table[i];
        if (row.size() != 4) throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + " is malformed");
        ResultRow r;
        r.trial = static_cast<std::size_t>(csv::parse_double(row[0], "trial column"));
        r.model = row[1];
        r.metric = row[2];
        r.value = csv::parse_double(row[3], "value column");
        results.rows.push_back(std::move(r));
    }
    return results;
}

std::vector<SummaryRow> summarize(const ResultsTable& results) {
    if (results.rows.empty()) throw std::invalid_argument("summarize: empty results");
    const auto metrics = unique_in_order<std::string>(results.rows, [](const ResultRow& r) { return r.metric; });
    std::vector<SummaryRow> out;
    for (const auto& model : results.models())
        for (const auto& metric : metrics) {
            const auto v = results.values(model, metric);
            if (v.empty()) continue;
            out.push_back({model, metric, v.size(), mean(v), sample_sd(v)});
        }
    return out;
}

std::vector<HypothesisRow> hypothesis_tests(const ResultsTable& results) {
    const auto models = results.models();
    const bool has_single = std::any_of(models.begin(), models.end(), is_single_view_model);
    const bool has_multi = std::any_of(models.begin(), models.end(), [](const auto& m) { return !is_single_view_model(m); });
    if (!has_single || !has_multi)
        throw std::invalid_argument("hypothesis_tests: needs at least one single-view and one multi-view model");
    std::vector<HypothesisRow> out;
    for (auto metric_name : conformal_metric_names()) {
        const std::string metric(metric_name);
        std::vector<double> multi, single;
        for (const auto& m : models) {
            const auto v = results.values(m, metric);
            auto& dst = is_single_view_model(m) ? single : multi;
            dst.insert(dst.end(), v.begin(), v.end());
        }
        HypothesisRow row;
        row.metric = metric;
        row.mean_multi = mean(multi);
        row.mean_single = mean(single);
        const auto t = welch_t_test(multi, single);
        row.t = t.t;
        row.p = t.p;
        row.direction = row.mean_multi < row.mean_single   ? "multi<single"
                        : row.mean_multi > row.mean_single ? "multi>single"
                                                           : "equal";
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

std::string mean_pm_sd(double m, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", m, sd);
    return buf;
}

LabelSpace read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) names.push_back(line);
    LabelSpace space(names);
    if (space.names() != names) throw DataError("'" + path.string() + "' is not in canonical label order");
    return space;
}

std::vector<EvaluatedExample> read_set_dump(const std::filesystem::path& path, const LabelSpace& labels) {
    const auto table = csv::read_file(path);
    const std::size_t k = labels.size();
    if (table.empty() || table.front().size() != 4 + k) throw DataError("'" + path.string() + "' has a bad header");
    std::vector<EvaluatedExample> out;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& row = table[i];
        if (row.size() != 4 + k) throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + " is malformed");
        EvaluatedExample e;
        e.true_label = labels.index(row[1]);
        e.point_prediction = labels.index(row[2]);
        std::vector<double> p(k);
        for (std::size_t c = 0; c < k; ++c) p[c] = csv::parse_double(row[4 + c], path.string());
        e.set.pvalues = std::move(p);
        std::stringstream members(row[3]);
        std::string name;
        while (std::getline(members, name, ';'))
            if (!name.empty()) e.set.retained.push_back(labels.index(name));
        std::sort(e.set.retained.begin(), e.set.retained.end());
        out.push_back(std::move(e));
    }
    return out;
}

void write_matrix(const Matrix& m, const LabelSpace& labels, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& name : labels.names()) out << ',' << csv::escape(name);
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << csv::escape(labels.name(i));
        for (double v : m.row(i)) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

void write_text(const std::string& text, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << text;
}

}  // namespace

void emit_reports(const std::filesystem::path& run_dir) {
    const auto results = ResultsTable::read_csv(run_dir / "results.csv");
    const auto labels = read_labels(run_dir / "labels.txt");
    const std::size_t k = labels.size();
    const auto models = results.models();
    const auto trials = results.trials();

    const auto summary = summarize(results);
    {
        auto out = open_out(run_dir / "summary.csv");
        out << "model,metric,n,mean,sd\n";
        for (const auto& s : summary)
            out << csv::escape(s.model) << ',' << s.metric << ',' << s.n << ',' << csv::format_double(s.mean) << ','
                << csv::format_double(s.sd) << '\n';
    }
    {
        auto out = open_out(run_dir / "summary.txt");
        out << "metric";
        for (const auto& m : models) out << '\t' << m;
        out << '\n';
        const auto metrics = unique_in_order<std::string>(results.rows, [](const ResultRow& r) { return r.metric; });
        for (const auto& metric : metrics) {
            out << metric << (higher_is_better(metric) ? "" : "*");
            for (const auto& m : models) {
                const auto it = std::find_if(summary.begin(), summary.end(),
                                             [&](const SummaryRow& s) { return s.model == m && s.metric == metric; });
                out << '\t' << (it == summary.end() ? std::string("-") : mean_pm_sd(it->mean, it->sd));
            }
            out << '\n';
        }
        out << "* smaller values are preferred\n";
    }
    {
        auto out = open_out(run_dir / "tests.csv");
        out << "metric,mean_multi,mean_single,t,p,direction\n";
        const bool testable = trials.size() >= 2 && std::any_of(models.begin(), models.end(), is_single_view_model) &&
                              std::any_of(models.begin(), models.end(), [](const auto& m) { return !is_single_view_model(m); });
        if (testable)
            for (const auto& h : hypothesis_tests(results))
                out << h.metric << ',' << csv::format_double(h.mean_multi) << ',' << csv::format_double(h.mean_single)
                    << ',' << csv::format_double(h.t) << ',' << csv::format_double(h.p) << ',' << h.direction << '\n';
    }

    std::vector<svg::Series> scatter;
    for (const auto& model : models) {
        const auto stem = model_file_stem(model);
        const auto model_dir = run_dir / "models" / stem;
        std::filesystem::create_directories(model_dir);

        Matrix co(k, k), conf(k, k);
        auto hist = open_out(model_dir / "setsize_histogram.csv");
        hist << "trial,size,count\n";
        for (auto t : trials) {
            char dir[32];
            std::snprintf(dir, sizeof dir, "trial_%03zu", t);
            const auto dump = run_dir / "trials" / dir / (stem + ".sets.csv");
            if (!std::filesystem::exists(dump)) throw DataError("missing prediction-set dump '" + dump.string() + "'");
            const auto examples = read_set_dump(dump, labels);
            const auto bins = setsize_histogram(examples, k);
            for (std::size_t s = 0; s < bins.size(); ++s) hist << t << ',' << s << ',' << bins[s] << '\n';
            const auto c1 = cooccurrence_counts(examples, k);
            const auto c2 = confusion_counts(examples, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    co(i, j) += c1(i, j);
                    conf(i, j) += c2(i, j);
                }
        }
        const Matrix co_norm = zero_diag_column_normalize(co);
        const Matrix conf_norm = zero_diag_column_normalize(conf);
        write_matrix(co_norm, labels, model_dir / "cooccurrence.csv");
        write_matrix(conf_norm, labels, model_dir / "confusion_zerodiag.csv");
        write_text(svg::heatmap(co_norm, labels.names(), model + ": co-occurrence", "co-occurring label", "label"),
                   model_dir / "cooccurrence.svg");
        write_text(svg::heatmap(conf_norm, labels.names(), model + ": zero-diagonal confusion", "predicted", "true"),
                   model_dir / "confusion_zerodiag.svg");

        scatter.push_back({model, results.values(model, "setsize"), results.values(model, "f1")});
    }
    write_text(svg::scatter(scatter, "F1 vs set size per trial", "set size", "F1"), run_dir / "f1_vs_setsize.svg");
}

}  // namespace mvcp
