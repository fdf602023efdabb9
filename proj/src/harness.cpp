#include "mvcp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mvcp/csv.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/keyvalue.hpp"
#include "mvcp/parallel.hpp"
#include "mvcp/random.hpp"

namespace mvcp {

namespace {

constexpr std::uint64_t kTrainingSalt = 0x7472616eULL;

template <typename T>
T parse_unsigned(const std::string& text, const std::string& key) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + key + "' must be a non-negative integer, got '" + text + "'");
    return value;
}

double parse_real(const std::string& text, const std::string& key) {
    try {
        return csv::parse_double(text, "'" + key + "'");
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError("'" + key + "' must be true or false");
}

const std::vector<std::string>& array_items(const kv::Assignment& a) {
    if (!a.is_array) throw ConfigError("'" + a.key + "' must be an array like [a, b]");
    return a.items;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (manifest.has_value() == synth.has_value())
        throw ConfigError("configure exactly one data source: manifest or synth.*");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
    if (n_trials < 1) throw ConfigError("n_trials must be at least 1");
    if (synth) synth->validate();
    for (double f : {split.train_frac, split.calib_frac, split.test_frac})
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("split fractions must lie in (0,1)");
    if (std::abs(split.train_frac + split.calib_frac + split.test_frac - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    if (training.forest.n_trees < 1) throw ConfigError("forest.n_trees must be positive");
    if (training.forest.min_samples_split < 1) throw ConfigError("forest.min_samples_split must be positive");
    if (training.forest.mtry && *training.forest.mtry < 1) throw ConfigError("forest.mtry must be positive");
    if (training.folds < 2) throw ConfigError("folds must be at least 2");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    std::set<std::string> seen;
    for (const auto& m : models) {
        const bool known = m == "mv-a" || m == "mv-s" || m == "mv-i" || (is_single_view_model(m) && m.size() > 7);
        if (!known) throw ConfigError("unknown model '" + m + "'");
        if (!seen.insert(m).second) throw ConfigError("model '" + m + "' listed twice");
    }
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    SynthConfig synth;
    bool any_synth = false;
    std::set<std::string> seen;
    for (const auto& a : kv::parse_document(text)) {
        const std::string& k = a.key;
        if (!seen.insert(k).second) throw ConfigError("key '" + k + "' set twice");
        if (k == "manifest") cfg.manifest = resolve(base_dir, a.value);
        else if (k == "models") cfg.models = array_items(a);
        else if (k == "epsilon") cfg.epsilon = parse_real(a.value, k);
        else if (k == "n_trials") cfg.n_trials = parse_unsigned<std::size_t>(a.value, k);
        else if (k == "split") {
            const auto& items = array_items(a);
            if (items.size() != 3) throw ConfigError("split needs [train, calib, test]");
            cfg.split.train_frac = parse_real(items[0], k);
            cfg.split.calib_frac = parse_real(items[1], k);
            cfg.split.test_frac = parse_real(items[2], k);
        } else if (k == "stratify") cfg.split.stratify = parse_bool(a.value, k);
        else if (k == "base_seed") cfg.base_seed = parse_unsigned<std::uint64_t>(a.value, k);
        else if (k == "output_dir") cfg.output_dir = resolve(base_dir, a.value);
        else if (k == "threads") cfg.threads = parse_unsigned<std::size_t>(a.value, k);
        else if (k == "pvalue_mode") cfg.training.pvalue_mode = parse_pvalue_mode(a.value);
        else if (k == "folds") cfg.training.folds = parse_unsigned<std::size_t>(a.value, k);
        else if (k == "forest.n_trees") cfg.training.forest.n_trees = parse_unsigned<std::size_t>(a.value, k);
        else if (k == "forest.max_depth") {
            if (a.value == "unlimited") cfg.training.forest.max_depth.reset();
            else cfg.training.forest.max_depth = parse_unsigned<std::size_t>(a.value, k);
            if (cfg.training.forest.max_depth == std::size_t{0}) throw ConfigError("forest.max_depth must be positive");
        } else if (k == "forest.min_samples_split")
            cfg.training.forest.min_samples_split = parse_unsigned<std::size_t>(a.value, k);
        else if (k == "forest.mtry") {
            if (a.value == "auto") cfg.training.forest.mtry.reset();
            else cfg.training.forest.mtry = parse_unsigned<std::size_t>(a.value, k);
        } else if (k.rfind("synth.", 0) == 0) {
            any_synth = true;
            const std::string sk = k.substr(6);
            if (sk == "n_examples") synth.n_examples = parse_unsigned<std::size_t>(a.value, k);
            else if (sk == "k_classes") synth.k_classes = parse_unsigned<std::size_t>(a.value, k);
            else if (sk == "dims") {
                synth.dims.clear();
                for (const auto& item : array_items(a)) synth.dims.push_back(parse_unsigned<std::size_t>(item, k));
            } else if (sk == "separation") {
                synth.separation.clear();
                for (const auto& item : array_items(a)) synth.separation.push_back(parse_real(item, k));
            } else if (sk == "noise_sd") synth.noise_sd = parse_real(a.value, k);
            else if (sk == "seed") synth.seed = parse_unsigned<std::uint64_t>(a.value, k);
            else throw ConfigError("unknown key '" + k + "'");
        } else {
            throw ConfigError("unknown key '" + k + "'");
        }
    }
    if (any_synth) cfg.synth = synth;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

std::vector<std::string> default_models(const MultiViewDataset& ds) {
    std::vector<std::string> models;
    for (const auto& v : ds.views) models.push_back("single:" + v.view_name);
    models.insert(models.end(), {"mv-a", "mv-s", "mv-i"});
    return models;
}

MultiViewDataset load_experiment_data(const ExperimentConfig& cfg) {
    cfg.validate();
    return cfg.manifest ? load_multiview(*cfg.manifest) : gen_multiview(*cfg.synth);
}

bool is_single_view_model(const std::string& name) { return name.rfind("single:", 0) == 0; }

std::string model_file_stem(const std::string& name) {
    std::string out;
    for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
    return out;
}

namespace {

std::string trial_dir_name(std::size_t trial) {
    std::string s = std::to_string(trial);
    return "trial_" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

void write_matrix_csv(const Matrix& m, const LabelSpace& labels, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (const auto& name : labels.names()) out << ',' << csv::escape(name);
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << csv::escape(labels.name(i));
        for (double v : m.row(i)) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

void write_set_dump(const ModelTrial& mt, const LabelSpace& labels, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "id,true,pred,set";
    for (const auto& name : labels.names()) out << ',' << csv::escape("p_" + name);
    out << '\n';
    for (std::size_t i = 0; i < mt.examples.size(); ++i) {
        const auto& e = mt.examples[i];
        std::string set;
        for (auto y : e.set.retained) {
            if (!set.empty()) set += ';';
            set += labels.name(y);
        }
        out << csv::escape(mt.ids[i]) << ',' << csv::escape(labels.name(e.true_label)) << ','
            << csv::escape(labels.name(e.point_prediction)) << ',' << csv::escape(set);
        for (double p : e.set.pvalues) out << ',' << csv::format_double(p);
        out << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

struct TrialResult {
    std::vector<ModelTrial> evaluations;
    std::size_t intersection_checks = 0;
    std::size_t intersection_mismatches = 0;
    std::vector<std::size_t> stack_meta_widths;
};

TrialResult run_trial(const ExperimentConfig& cfg, const MultiViewDataset& data, const std::vector<std::string>& models,
                      std::size_t trial) {
    SplitSpec spec = cfg.split;
    spec.seed = cfg.base_seed + trial;
    const auto split = split_dataset(data, spec);
    const std::uint64_t train_seed = derive_seed(spec.seed, kTrainingSalt);
    const auto test_views = split.test.feature_matrices();
    const std::size_t k = data.num_classes();

    TrialResult out;
    for (const auto& name : models) {
        const auto model = train_model(name, split.train, split.calib, cfg.training, train_seed);
        const auto predictions = model->predict(test_views, cfg.epsilon);

        if (const auto* mvi = dynamic_cast<const IntersectionModel*>(model.get())) {
            std::vector<std::vector<PredictionSet>> per_view;
            for (const auto& m : mvi->per_view()) per_view.push_back(m.predict_sets(test_views, cfg.epsilon));
            for (std::size_t i = 0; i < predictions.sets.size(); ++i) {
                std::vector<Label> expected;
                for (Label y = 0; y < k; ++y)
                    if (std::all_of(per_view.begin(), per_view.end(), [&](const auto& sets) { return sets[i].contains(y); }))
                        expected.push_back(y);
                ++out.intersection_checks;
                if (expected != predictions.sets[i].retained) ++out.intersection_mismatches;
            }
        }
        if (const auto* cvm = dynamic_cast<const ConformalViewModel*>(model.get()))
            if (const auto* stack = dynamic_cast<const StackModel*>(&cvm->scorer()))
                out.stack_meta_widths.push_back(stack->meta_features(test_views).cols());

        ModelTrial mt;
        mt.trial = trial;
        mt.model = name;
        mt.ids = split.test.ids;
        mt.examples.reserve(split.test.size());
        for (std::size_t i = 0; i < split.test.size(); ++i)
            mt.examples.push_back({split.test.labels[i], predictions.labels[i], predictions.sets[i]});
        mt.report = evaluate(mt.examples, k);
        out.evaluations.push_back(std::move(mt));
    }

    if (!cfg.output_dir.empty()) {
        const auto dir = cfg.output_dir / "trials" / trial_dir_name(trial);
        std::filesystem::create_directories(dir);
        for (const auto& mt : out.evaluations) {
            const auto stem = model_file_stem(mt.model);
            write_set_dump(mt, data.label_space, dir / (stem + ".sets.csv"));
            write_matrix_csv(cooccurrence_matrix(mt.examples, k), data.label_space, dir / (stem + ".cooccurrence.csv"));
            write_matrix_csv(zero_diag_confusion(mt.examples, k), data.label_space,
                             dir / (stem + ".confusion_zerodiag.csv"));
        }
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const MultiViewDataset& data) {
    cfg.validate();
    data.validate();
    ExperimentResult result;
    result.label_space = data.label_space;
    result.models = cfg.models.empty() ? default_models(data) : cfg.models;
    for (const auto& m : result.models) validate_model_name(m, data);
    if (!cfg.output_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        if (ec) throw DataError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());
    }

    std::vector<TrialResult> trials(cfg.n_trials);
    parallel_for(cfg.n_trials, cfg.threads,
                 [&](std::size_t t) { trials[t] = run_trial(cfg, data, result.models, t); });

    for (auto& tr : trials) {
        result.intersection_checks += tr.intersection_checks;
        result.intersection_mismatches += tr.intersection_mismatches;
        result.stack_meta_widths.insert(result.stack_meta_widths.end(), tr.stack_meta_widths.begin(),
                                        tr.stack_meta_widths.end());
        for (auto& mt : tr.evaluations) {
            const auto names = ConformalReport::names();
            const auto values = mt.report.values();
            for (std::size_t m = 0; m < names.size(); ++m)
                result.table.rows.push_back({mt.trial, mt.model, std::string(names[m]), values[m]});
            result.evaluations.push_back(std::move(mt));
        }
    }

    if (!cfg.output_dir.empty()) {
        std::ofstream labels(cfg.output_dir / "labels.txt");
        for (const auto& name : data.label_space.names()) labels << name << '\n';
        if (!labels) throw DataError("cannot write labels.txt");
        result.table.write_csv(cfg.output_dir / "results.csv");
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, load_experiment_data(cfg));
}

}  // namespace mvcp
