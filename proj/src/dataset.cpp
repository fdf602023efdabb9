#include "mvcp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mvcp/csv.hpp"
#include "mvcp/errors.hpp"
#include "mvcp/keyvalue.hpp"
#include "mvcp/random.hpp"

namespace mvcp {

LabelSpace::LabelSpace(std::vector<std::string> names) : labels_(std::move(names)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    for (Label i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
}

Label LabelSpace::index(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw DataError("unknown label '" + name + "'");
    return it->second;
}

std::size_t MultiViewDataset::view_index(const std::string& name) const {
    for (std::size_t v = 0; v < views.size(); ++v)
        if (views[v].view_name == name) return v;
    throw ConfigError("unknown view '" + name + "'");
}

std::vector<Matrix> MultiViewDataset::feature_matrices() const {
    std::vector<Matrix> out;
    out.reserve(views.size());
    for (const auto& v : views) out.push_back(v.features);
    return out;
}

MultiViewDataset MultiViewDataset::subset(std::span<const std::size_t> rows) const {
    MultiViewDataset out;
    out.label_space = label_space;
    out.views.reserve(views.size());
    for (const auto& v : views) out.views.push_back({v.view_name, v.features.select_rows(rows)});
    out.labels.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (auto r : rows) {
        out.labels.push_back(labels.at(r));
        out.ids.push_back(ids.at(r));
    }
    return out;
}

void MultiViewDataset::validate() const {
    if (views.empty()) throw DataError("dataset has no views");
    if (ids.size() != labels.size()) throw DataError("ids and labels differ in length");
    for (const auto& v : views) {
        if (v.features.rows() != labels.size())
            throw DataError("view '" + v.view_name + "' is not row-aligned with the labels");
        if (v.features.cols() == 0) throw DataError("view '" + v.view_name + "' has no features");
        for (double x : v.features.data())
            if (!std::isfinite(x)) throw DataError("view '" + v.view_name + "' has a non-finite entry");
    }
    for (auto y : labels)
        if (y >= label_space.size()) throw DataError("label index out of range");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest '" + manifest_path.string() + "'");
    const auto base = manifest_path.parent_path();
    std::vector<ManifestEntry> entries;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto assignments = kv::parse_line(line, n);
        if (assignments.empty()) continue;
        ManifestEntry e;
        for (const auto& a : assignments) {
            if (a.key == "view") e.view_name = a.value;
            else if (a.key == "path") e.csv_path = a.value;
            else throw ConfigError("manifest line " + std::to_string(n) + ": unknown key '" + a.key + "'");
        }
        if (e.view_name.empty() || e.csv_path.empty())
            throw ConfigError("manifest line " + std::to_string(n) + ": needs both view and path");
        if (e.csv_path.is_relative()) e.csv_path = base / e.csv_path;
        for (const auto& prev : entries)
            if (prev.view_name == e.view_name) throw ConfigError("duplicate view '" + e.view_name + "' in manifest");
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw ConfigError("manifest '" + manifest_path.string() + "' lists no views");
    return entries;
}

namespace {

struct RawView {
    std::string name;
    std::size_t dim = 0;
    std::unordered_map<std::string, std::pair<std::string, std::vector<double>>> rows;  // id -> (label, features)
};

RawView read_view_csv(const ManifestEntry& entry) {
    const auto table = csv::read_file(entry.csv_path);
    const std::string where = "'" + entry.csv_path.string() + "'";
    if (table.empty()) throw DataError(where + " is empty");
    const auto& header = table.front();
    if (header.size() < 3 || header[0] != "id" || header[1] != "label")
        throw DataError(where + ": header must be id,label,f1,...,fd");
    RawView view;
    view.name = entry.view_name;
    view.dim = header.size() - 2;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        if (row.size() != header.size())
            throw DataError(where + " row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(row.size()));
        std::vector<double> features(view.dim);
        for (std::size_t j = 0; j < view.dim; ++j)
            features[j] = csv::parse_double(row[j + 2], where + " row " + std::to_string(r + 1));
        if (!view.rows.try_emplace(row[0], row[1], std::move(features)).second)
            throw DataError(where + ": duplicate id '" + row[0] + "'");
    }
    return view;
}

}  // namespace

MultiViewDataset load_multiview(const std::filesystem::path& manifest_path) {
    const auto entries = read_manifest(manifest_path);
    return load_multiview(entries);
}

MultiViewDataset load_multiview(std::span<const ManifestEntry> entries) {
    if (entries.empty()) throw ConfigError("no views to load");
    std::vector<RawView> raw;
    raw.reserve(entries.size());
    for (const auto& e : entries) raw.push_back(read_view_csv(e));

    std::vector<std::string> ids;
    for (const auto& [id, _] : raw.front().rows) {
        bool everywhere = true;
        for (std::size_t v = 1; v < raw.size() && everywhere; ++v) everywhere = raw[v].rows.contains(id);
        if (everywhere) ids.push_back(id);
    }
    if (ids.empty()) throw DataError("no example id is shared by all views");
    std::sort(ids.begin(), ids.end());

    std::vector<std::string> label_names;
    label_names.reserve(ids.size());
    for (const auto& id : ids) {
        const auto& label = raw.front().rows.at(id).first;
        for (std::size_t v = 1; v < raw.size(); ++v)
            if (raw[v].rows.at(id).first != label)
                throw DataError("id '" + id + "' has label '" + label + "' in view '" + raw.front().name +
                                "' but '" + raw[v].rows.at(id).first + "' in view '" + raw[v].name + "'");
        label_names.push_back(label);
    }

    MultiViewDataset ds;
    ds.label_space = LabelSpace(label_names);
    ds.ids = ids;
    ds.labels.reserve(ids.size());
    for (const auto& name : label_names) ds.labels.push_back(ds.label_space.index(name));
    for (const auto& rv : raw) {
        ViewMatrix vm{rv.name, Matrix(ids.size(), rv.dim)};
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto& f = rv.rows.at(ids[i]).second;
            std::copy(f.begin(), f.end(), vm.features.row(i).begin());
        }
        ds.views.push_back(std::move(vm));
    }
    ds.validate();
    return ds;
}

void write_view_csv(const MultiViewDataset& ds, std::size_t view, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    const auto& m = ds.views.at(view).features;
    out << "id,label";
    for (std::size_t j = 0; j < m.cols(); ++j) out << ",f" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << csv::escape(ds.ids[i]) << ',' << csv::escape(ds.label_space.name(ds.labels[i]));
        for (double x : m.row(i)) out << ',' << csv::format_double(x);
        out << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_multiview(const MultiViewDataset& ds, const std::filesystem::path& dir, const std::string& manifest_name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
    std::ofstream manifest(dir / manifest_name);
    if (!manifest) throw DataError("cannot write manifest in '" + dir.string() + "'");
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        const std::string file = ds.views[v].view_name + ".csv";
        write_view_csv(ds, v, dir / file);
        manifest << "view = \"" << ds.views[v].view_name << "\", path = \"" << file << "\"\n";
    }
}

namespace {

std::size_t rounded(std::size_t n, double frac) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * frac));
}

void check_fractions(const SplitSpec& spec) {
    for (double f : {spec.train_frac, spec.calib_frac, spec.test_frac})
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("split fractions must lie in (0,1)");
    if (std::abs(spec.train_frac + spec.calib_frac + spec.test_frac - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
}

// Cuts an already shuffled index list into (calib, test, train) by the rounding rule.
void cut(std::span<const std::size_t> order, const SplitSpec& spec, SplitIndices& out) {
    const std::size_t n = order.size();
    const std::size_t n_calib = rounded(n, spec.calib_frac);
    const std::size_t n_test = rounded(n, spec.test_frac);
    const std::size_t n_train = n - std::min(n, n_calib + n_test);
    out.train.insert(out.train.end(), order.begin(), order.begin() + n_train);
    out.calib.insert(out.calib.end(), order.begin() + n_train, order.begin() + n_train + n_calib);
    out.test.insert(out.test.end(), order.begin() + n_train + n_calib, order.end());
}

void finish(SplitIndices& s) {
    if (s.train.empty() || s.calib.empty() || s.test.empty())
        throw DataError("split leaves a partition empty (train " + std::to_string(s.train.size()) + ", calib " +
                        std::to_string(s.calib.size()) + ", test " + std::to_string(s.test.size()) + ")");
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.calib.begin(), s.calib.end());
    std::sort(s.test.begin(), s.test.end());
}

}  // namespace

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    check_fractions(spec);
    if (n < 3) throw DataError("need at least 3 examples to split");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(spec.seed, 0));
    rng.shuffle(order.begin(), order.end());
    SplitIndices out;
    cut(order, spec, out);
    finish(out);
    return out;
}

SplitIndices split_indices(std::span<const Label> labels, const SplitSpec& spec) {
    if (!spec.stratify) return split_indices(labels.size(), spec);
    check_fractions(spec);
    if (labels.size() < 3) throw DataError("need at least 3 examples to split");
    std::map<Label, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    SplitIndices out;
    for (auto& [label, rows] : by_class) {
        Rng rng(derive_seed(spec.seed, 1 + label));
        rng.shuffle(rows.begin(), rows.end());
        cut(rows, spec, out);
    }
    finish(out);
    return out;
}

DatasetSplit split_dataset(const MultiViewDataset& ds, const SplitSpec& spec) {
    const auto idx = split_indices(ds.labels, spec);
    return {ds.subset(idx.train), ds.subset(idx.calib), ds.subset(idx.test)};
}

}  // namespace mvcp
