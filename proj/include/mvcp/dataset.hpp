#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvcp/matrix.hpp"

namespace mvcp {

using Label = std::size_t;

/// Class names in canonical (lexicographic) order.
class LabelSpace {
public:
    LabelSpace() = default;
    /// Sorts and deduplicates the given names.
    explicit LabelSpace(std::vector<std::string> names);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& name(Label index) const { return labels_.at(index); }
    const std::vector<std::string>& names() const noexcept { return labels_; }
    /// Throws DataError for unknown names.
    Label index(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.contains(name); }

    bool operator==(const LabelSpace& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::map<std::string, Label> index_;
};

struct ViewMatrix {
    std::string view_name;
    Matrix features;

    std::size_t dim() const noexcept { return features.cols(); }
    bool operator==(const ViewMatrix&) const = default;
};

/// Row-aligned per-view feature matrices plus one label vector.
struct MultiViewDataset {
    std::vector<ViewMatrix> views;
    std::vector<Label> labels;
    std::vector<std::string> ids;
    LabelSpace label_space;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t num_views() const noexcept { return views.size(); }
    std::size_t num_classes() const noexcept { return label_space.size(); }

    /// Index of the view with the given name; throws ConfigError if absent.
    std::size_t view_index(const std::string& name) const;

    /// Feature matrices in view order.
    std::vector<Matrix> feature_matrices() const;

    /// Dataset restricted to the given rows (same label space).
    MultiViewDataset subset(std::span<const std::size_t> rows) const;

    /// Checks every structural invariant; throws DataError on violation.
    void validate() const;

    bool operator==(const MultiViewDataset&) const = default;
};

struct SplitSpec {
    double train_frac = 0.5;
    double calib_frac = 0.25;
    double test_frac = 0.25;
    std::uint64_t seed = 0;
    bool stratify = false;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> calib;
    std::vector<std::size_t> test;
};

struct DatasetSplit {
    MultiViewDataset train;
    MultiViewDataset calib;
    MultiViewDataset test;
};

struct ManifestEntry {
    std::string view_name;
    std::filesystem::path csv_path;
};

/// Parses lines of the form `view = "<name>", path = "<csv>"`. Relative
/// paths are resolved against the manifest's directory. Blank lines and
/// lines starting with '#' are ignored.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

/// Loads every view listed in the manifest and aligns rows by id.
MultiViewDataset load_multiview(const std::filesystem::path& manifest_path);
MultiViewDataset load_multiview(std::span<const ManifestEntry> entries);

/// Writes one view as `id,label,f1..fd`.
void write_view_csv(const MultiViewDataset& ds, std::size_t view, const std::filesystem::path& path);

/// Writes one CSV per view next to a manifest referencing them.
void write_multiview(const MultiViewDataset& ds, const std::filesystem::path& dir,
                     const std::string& manifest_name = "manifest.txt");

/// Split sizes for n rows: round(n * frac) for calib and test, remainder to train.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);
/// As above; with spec.stratify the permutation split is applied per class.
SplitIndices split_indices(std::span<const Label> labels, const SplitSpec& spec);

DatasetSplit split_dataset(const MultiViewDataset& ds, const SplitSpec& spec);

}  // namespace mvcp
