#pragma once

#include <cstdint>
#include <vector>

#include "mvcp/dataset.hpp"

namespace mvcp {

/// Gaussian class-conditional multi-view generator settings.
struct SynthConfig {
    std::size_t n_examples = 2000;
    std::size_t k_classes = 3;
    /// Feature dimensionality of each view.
    std::vector<std::size_t> dims{5, 5};
    /// Distance between class means, in units of noise_sd, per view.
    std::vector<double> separation{3.0, 3.0};
    double noise_sd = 1.0;
    std::uint64_t seed = 1;

    std::size_t n_views() const noexcept { return dims.size(); }
    /// Throws ConfigError when inconsistent.
    void validate() const;
};

/// Draws i.i.d. rows: a uniform label, then per view a Gaussian sample around
/// that class's mean. Class means of a view sit on their own random
/// orthonormal directions, scaled so every pair of means is
/// separation * noise_sd apart (when dims >= k_classes). Views are named
/// v1, v2, ...; classes c0, c1, ...; ids are zero-padded row numbers.
MultiViewDataset gen_multiview(const SynthConfig& cfg);

}  // namespace mvcp
