// mvcp: multi-view conformal prediction experiments from the command line.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mvcp/csv.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/features.hpp"
#include "mvcp/harness.hpp"
#include "mvcp/synth.hpp"

namespace fs = std::filesystem;
using namespace mvcp;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

// Numeric table of a raw-signal CSV (header row required).
std::pair<std::vector<std::string>, Matrix> read_numeric_csv(const fs::path& path) {
    const auto table = csv::read_file(path);
    if (table.empty()) throw DataError("'" + path.string() + "' is empty");
    Matrix m;
    for (std::size_t r = 1; r < table.size(); ++r) {
        std::vector<double> row;
        for (const auto& cell : table[r]) row.push_back(csv::parse_double(cell, path.string()));
        if (row.size() != table.front().size())
            throw DataError("'" + path.string() + "' row " + std::to_string(r + 1) + " has the wrong field count");
        m.push_row(row);
    }
    return {table.front(), m};
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("'" + path.string() + "' has no '" + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
}

void extract(const std::string& kind, const std::vector<fs::path>& inputs, const std::string& label,
             std::size_t window, const fs::path& output) {
    std::ofstream out(output);
    if (!out) throw DataError("cannot write '" + output.string() + "'");
    const std::size_t width = kind == "accel" ? features::kAccelFeatureCount : features::kSkeletonFeatureCount;
    out << "id,label";
    for (std::size_t j = 0; j < width; ++j) out << ",f" << (j + 1);
    out << '\n';
    auto emit = [&](const std::string& id, const std::vector<double>& f) {
        out << csv::escape(id) << ',' << csv::escape(label);
        for (double v : f) out << ',' << csv::format_double(v);
        out << '\n';
    };
    for (const auto& input : inputs) {
        const auto [header, data] = read_numeric_csv(input);
        const std::string stem = input.stem().string();
        if (kind == "accel") {
            const std::size_t cx = column(header, "ax", input), cy = column(header, "ay", input),
                              cz = column(header, "az", input);
            const auto windows = features::window_signal(data, window);
            for (std::size_t w = 0; w < windows.size(); ++w) {
                features::AccelWindow aw;
                for (std::size_t t = 0; t < windows[w].rows(); ++t) {
                    aw.ax.push_back(windows[w](t, cx));
                    aw.ay.push_back(windows[w](t, cy));
                    aw.az.push_back(windows[w](t, cz));
                }
                emit(stem + "_w" + std::to_string(w), features::accel_features(aw));
            }
        } else {
            // Optional leading frame/time column, then x,y,z for each of the 31 joints (spine first).
            const std::size_t skip = data.cols() == 3 * features::kSkeletonJoints + 1 ? 1 : 0;
            if (data.cols() != 3 * features::kSkeletonJoints + skip)
                throw DataError("'" + input.string() + "': expected 93 joint coordinate columns");
            features::SkeletonSequence seq;
            for (std::size_t f = 0; f < data.rows(); ++f) {
                std::vector<features::Point3> frame;
                for (std::size_t j = 0; j < features::kSkeletonJoints; ++j)
                    frame.push_back({data(f, skip + 3 * j), data(f, skip + 3 * j + 1), data(f, skip + 3 * j + 2)});
                seq.frames.push_back(std::move(frame));
            }
            emit(stem, features::skeleton_features(seq));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view conformal prediction toolkit"};
    app.require_subcommand(1);

    auto* extract_cmd = app.add_subcommand("extract", "Convert raw signals to a feature CSV");
    std::string kind = "accel";
    std::vector<fs::path> inputs;
    std::string label;
    std::size_t window = 93;
    fs::path extract_out;
    extract_cmd->add_option("--kind", kind, "accel (t,ax,ay,az CSV) or skeleton (frame CSV)")
        ->check(CLI::IsMember({"accel", "skeleton"}));
    extract_cmd->add_option("--input", inputs, "Raw CSV file(s)")->required()->check(CLI::ExistingFile);
    extract_cmd->add_option("--label", label, "Class label for every emitted row")->required();
    extract_cmd->add_option("--window", window, "Samples per non-overlapping window (accel)");
    extract_cmd->add_option("--output", extract_out, "Feature CSV to write")->required();

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic multi-view dataset and manifest");
    SynthConfig synth;
    fs::path synth_out;
    synth_cmd->add_option("--n", synth.n_examples, "Number of examples");
    synth_cmd->add_option("--k", synth.k_classes, "Number of classes");
    synth_cmd->add_option("--dims", synth.dims, "Per-view dimensionality")->delimiter(',');
    synth_cmd->add_option("--separation", synth.separation, "Per-view class-mean spacing in noise sd units")
        ->delimiter(',');
    synth_cmd->add_option("--noise-sd", synth.noise_sd, "Noise standard deviation");
    synth_cmd->add_option("--seed", synth.seed, "Random seed");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    auto* run_cmd = app.add_subcommand("run", "Run the repeated-trial experiment");
    fs::path config_path;
    std::size_t threads = 0;
    run_cmd->add_option("--config", config_path, "Experiment config file")->required();
    run_cmd->add_option("--threads", threads, "Override the configured thread count");

    auto* report_cmd = app.add_subcommand("report", "Regenerate summaries and figures of a run");
    fs::path report_dir;
    report_cmd->add_option("--from", report_dir, "Run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*extract_cmd) {
            extract(kind, inputs, label, window, extract_out);
        } else if (*synth_cmd) {
            const auto ds = gen_multiview(synth);
            write_multiview(ds, synth_out);
            std::cout << "wrote " << ds.size() << " examples, " << ds.num_views() << " views to " << synth_out << '\n';
        } else if (*run_cmd) {
            auto cfg = load_config(config_path);
            if (threads > 0) cfg.threads = threads;
            if (cfg.output_dir.empty()) throw ConfigError("output_dir is required for 'run'");
            const auto result = run_experiment(cfg);
            emit_reports(cfg.output_dir);
            std::cout << "trials: " << cfg.n_trials << ", models: " << result.models.size()
                      << ", result rows: " << result.table.rows.size() << '\n';
            std::ifstream summary(cfg.output_dir / "summary.txt");
            std::cout << summary.rdbuf();
        } else if (*report_cmd) {
            emit_reports(report_dir);
            std::cout << "reports written to " << report_dir << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
