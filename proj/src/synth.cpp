#include "mvcp/synth.hpp"

#include <cmath>
#include <string>

#include "mvcp/errors.hpp"
#include "mvcp/random.hpp"

namespace mvcp {

void SynthConfig::validate() const {
    if (n_examples < 3) throw ConfigError("synth: n_examples must be at least 3");
    if (k_classes < 1) throw ConfigError("synth: k_classes must be positive");
    if (dims.empty()) throw ConfigError("synth: at least one view is required");
    if (dims.size() != separation.size()) throw ConfigError("synth: dims and separation differ in length");
    for (auto d : dims)
        if (d == 0) throw ConfigError("synth: view dimensions must be positive");
    for (double s : separation)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("synth: separation must be finite and >= 0");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw ConfigError("synth: noise_sd must be positive");
}

namespace {

// k unit directions in R^d; orthonormal (Gram-Schmidt) for the first min(k, d).
std::vector<std::vector<double>> random_directions(std::size_t k, std::size_t d, Rng& rng) {
    std::vector<std::vector<double>> dirs;
    while (dirs.size() < k) {
        std::vector<double> v(d);
        for (auto& x : v) x = rng.normal();
        if (dirs.size() < d)
            for (const auto& u : dirs) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += v[j] * u[j];
                for (std::size_t j = 0; j < d; ++j) v[j] -= dot * u[j];
            }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue;
        for (auto& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

std::string padded(std::size_t i, std::size_t width) {
    std::string s = std::to_string(i);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

}  // namespace

MultiViewDataset gen_multiview(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_examples;
    const std::size_t k = cfg.k_classes;

    std::vector<std::string> class_names;
    for (std::size_t c = 0; c < k; ++c) class_names.push_back("c" + padded(c, std::to_string(k - 1).size()));

    MultiViewDataset ds;
    ds.label_space = LabelSpace(class_names);
    Rng label_rng(derive_seed(cfg.seed, 0));
    const std::size_t id_width = std::to_string(n - 1).size();
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels.push_back(label_rng.uniform_index(k));
        ds.ids.push_back("s" + padded(i, id_width));
    }

    for (std::size_t v = 0; v < cfg.n_views(); ++v) {
        const std::size_t d = cfg.dims[v];
        Rng rng(derive_seed(cfg.seed, 1 + v));
        // Orthonormal means at distance r*sqrt(2) apart; pick r so that distance is separation * sd.
        const double radius = cfg.separation[v] * cfg.noise_sd / std::sqrt(2.0);
        const auto dirs = random_directions(k, d, rng);
        ViewMatrix view{"v" + std::to_string(v + 1), Matrix(n, d)};
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mu = dirs[ds.labels[i]];
            for (std::size_t j = 0; j < d; ++j) view.features(i, j) = radius * mu[j] + cfg.noise_sd * rng.normal();
        }
        ds.views.push_back(std::move(view));
    }
    ds.validate();
    return ds;
}

}  // namespace mvcp
