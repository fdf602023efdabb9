#include "mvcp/classifier.hpp"

#include <stdexcept>

namespace mvcp {

Label argmax_label(std::span<const double> row) {
    if (row.empty()) throw std::invalid_argument("argmax_label: empty score row");
    Label best = 0;
    for (Label j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

std::vector<Label> argmax_labels(const ScoreMatrix& scores) {
    std::vector<Label> out(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) out[i] = argmax_label(scores.row(i));
    return out;
}

}  // namespace mvcp
