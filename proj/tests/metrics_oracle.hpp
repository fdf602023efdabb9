#pragma once

// Naive reference implementation of the ten conformal measures: every
// membership test is a linear scan over the retained labels, and every
// quantity is recomputed per (example, label) pair.

#include <array>
#include <vector>

#include "mvcp/metrics.hpp"
#include "mvcp/random.hpp"

namespace mvcp::oracle {

inline bool member(const std::vector<Label>& set, Label y) {
    for (auto v : set)
        if (v == y) return true;
    return false;
}

/// coverage, jaccard, setsize, pctempty, m, f, om, of, ou, oe
inline std::array<double, 10> conformal_measures(const std::vector<EvaluatedExample>& ex, std::size_t k) {
    std::array<double, 10> sums{};
    for (const auto& e : ex) {
        std::size_t size = 0, false_in_set = 0;
        bool truth_in = false;
        double p_sum = 0, p_max = -1, p_false_sum = 0, p_false_max = 0;
        for (Label y = 0; y < k; ++y) {
            const bool in = member(e.set.retained, y);
            size += in;
            if (y == e.true_label) truth_in = in;
            else false_in_set += in;
            p_sum += e.set.pvalues[y];
            if (e.set.pvalues[y] > p_max) p_max = e.set.pvalues[y];
            if (y != e.true_label) {
                p_false_sum += e.set.pvalues[y];
                if (e.set.pvalues[y] > p_false_max) p_false_max = e.set.pvalues[y];
            }
        }
        const std::size_t union_size = size + (truth_in ? 0 : 1);
        sums[0] += truth_in ? 1 : 0;
        sums[1] += (truth_in ? 1.0 : 0.0) / static_cast<double>(union_size);
        sums[2] += static_cast<double>(size);
        sums[3] += size == 0 ? 1 : 0;
        sums[4] += size > 1 ? 1 : 0;
        sums[5] += p_sum - p_max;
        sums[6] += false_in_set > 0 ? 1 : 0;
        sums[7] += p_false_sum;
        sums[8] += p_false_max;
        sums[9] += static_cast<double>(false_in_set);
    }
    for (auto& s : sums) s /= static_cast<double>(ex.size());
    return sums;
}

/// Random examples with p-values on a 1/(n+1) grid, as produced by a table of size n.
inline std::vector<EvaluatedExample> random_examples(std::size_t count, std::size_t k, double epsilon, Rng& rng) {
    std::vector<EvaluatedExample> out;
    const std::size_t n_calib = 1 + rng.uniform_index(60);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> p(k);
        for (auto& v : p) v = static_cast<double>(rng.uniform_index(n_calib + 2)) / static_cast<double>(n_calib + 1);
        EvaluatedExample e;
        e.true_label = rng.uniform_index(k);
        e.point_prediction = rng.uniform_index(k);
        e.set = PredictionSet::from_pvalues(std::move(p), epsilon);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace mvcp::oracle
