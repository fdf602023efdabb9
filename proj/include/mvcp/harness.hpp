#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvcp/dataset.hpp"
#include "mvcp/fusion.hpp"
#include "mvcp/metrics.hpp"
#include "mvcp/synth.hpp"

namespace mvcp {

struct ExperimentConfig {
    /// Exactly one of manifest / synth is set.
    std::optional<std::filesystem::path> manifest;
    std::optional<SynthConfig> synth;
    /// Empty means every single view followed by mv-a, mv-s, mv-i.
    std::vector<std::string> models;
    double epsilon = 0.05;
    std::size_t n_trials = 15;
    SplitSpec split;
    TrainOptions training;
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir;
    /// Trials run concurrently on this many threads.
    std::size_t threads = 1;

    void validate() const;
};

/// Reads `key = value` lines; relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Default model list for a dataset: single:<view> for each view, then mv-a, mv-s, mv-i.
std::vector<std::string> default_models(const MultiViewDataset& ds);

/// Loads the manifest or synthesizes the dataset named by the config.
MultiViewDataset load_experiment_data(const ExperimentConfig& cfg);

struct ResultRow {
    std::size_t trial = 0;
    std::string model;
    std::string metric;
    double value = 0.0;
};

/// Long-format (trial, model, metric, value) results.
struct ResultsTable {
    std::vector<ResultRow> rows;

    std::vector<std::string> models() const;
    std::vector<std::size_t> trials() const;
    /// Per-trial values of one (model, metric), in trial order.
    std::vector<double> values(const std::string& model, const std::string& metric) const;

    void write_csv(const std::filesystem::path& path) const;
    static ResultsTable read_csv(const std::filesystem::path& path);
};

/// Evaluated test examples of one (trial, model) pair.
struct ModelTrial {
    std::size_t trial = 0;
    std::string model;
    std::vector<std::string> ids;
    std::vector<EvaluatedExample> examples;
    ConformalReport report;
};

struct ExperimentResult {
    ResultsTable table;
    /// Ordered by trial, then by model in configuration order.
    std::vector<ModelTrial> evaluations;
    LabelSpace label_space;
    std::vector<std::string> models;
    /// Test examples on which the MV-I set was compared with the explicit
    /// intersection of its per-view sets, and how many differed.
    std::size_t intersection_checks = 0;
    std::size_t intersection_mismatches = 0;
    /// Meta-feature width of every trained MV-S model.
    std::vector<std::size_t> stack_meta_widths;
};

/// Runs every trial: split with seed base_seed + trial, train and calibrate
/// each model, evaluate on the test split. When cfg.output_dir is set, each
/// trial writes its prediction-set dumps and diagnostic matrices under
/// trials/, and results.csv plus labels.txt are written once all trials end.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const MultiViewDataset& data);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    std::string model;
    std::string metric;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample sd across trials per (model, metric).
std::vector<SummaryRow> summarize(const ResultsTable& results);

struct HypothesisRow {
    std::string metric;
    double mean_multi = 0.0;
    double mean_single = 0.0;
    double t = 0.0;
    double p = 1.0;
    /// "multi<single", "multi>single" or "equal".
    std::string direction;
};

/// Welch tests of pooled multi-view vs pooled single-view trial values for
/// each of the ten conformal measures.
std::vector<HypothesisRow> hypothesis_tests(const ResultsTable& results);

bool is_single_view_model(const std::string& name);
/// File-system friendly model name ("single:audio" -> "single_audio").
std::string model_file_stem(const std::string& name);

/// Regenerates summary.csv, summary.txt, tests.csv, per-model histogram,
/// co-occurrence and confusion CSVs, and SVG figures from a run directory.
void emit_reports(const std::filesystem::path& run_dir);

}  // namespace mvcp
