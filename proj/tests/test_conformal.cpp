#include <doctest.h>

#include <cmath>

#include "mvcp/conformal.hpp"
#include "mvcp/dataset.hpp"
#include "mvcp/forest.hpp"
#include "mvcp/random.hpp"
#include "mvcp/synth.hpp"

using namespace mvcp;

namespace {

// Independent p-value: linear scan, no sorting or binary search.
double brute_p_value(const std::vector<double>& alphas, double alpha_new, bool inclusive) {
    double count = 0;
    for (double a : alphas) count += a >= alpha_new ? 1.0 : 0.0;
    return (count + (inclusive ? 1.0 : 0.0)) / static_cast<double>(alphas.size() + 1);
}

std::vector<double> random_probability_row(Rng& rng, std::size_t k) {
    std::vector<double> row(k);
    double sum = 0;
    for (auto& v : row) sum += (v = rng.uniform() * rng.uniform());
    for (auto& v : row) v /= sum;
    return row;
}

}  // namespace

TEST_CASE("LAC nonconformity") {
    CHECK(lac_nonconformity(std::vector<double>{0.7, 0.2, 0.1}, 0) == doctest::Approx(0.3));
    CHECK(lac_nonconformity(std::vector<double>{0, 1, 0}, 1) == 0.0);
    for (Label y = 0; y < 4; ++y) CHECK(lac_nonconformity(std::vector<double>(4, 0.25), y) == 0.75);
    CHECK_THROWS(lac_nonconformity(std::vector<double>{0.5, 0.5}, 2));
}

TEST_CASE("calibration sorts the alphas") {
    Matrix scores(3, 2, {0.9, 0.1, 0.4, 0.6, 0.2, 0.8});
    const std::vector<Label> y{0, 1, 1};
    const CalibrationTable table = CalibrationTable::from_scores(scores, y);
    REQUIRE(table.n_calib() == 3);
    CHECK(table.alphas()[0] == doctest::Approx(0.1));
    CHECK(table.alphas()[1] == doctest::Approx(0.2));
    CHECK(table.alphas()[2] == doctest::Approx(0.4));

    const CalibrationTable perfect = CalibrationTable::from_scores(Matrix(2, 2, {1, 0, 0, 1}), std::vector<Label>{0, 1});
    CHECK(perfect.alphas()[0] == 0.0);
    CHECK(perfect.alphas()[1] == 0.0);

    CHECK_THROWS(CalibrationTable(std::vector<double>{}));
}

TEST_CASE("p-value modes") {
    const std::vector<double> alphas{0.1, 0.2, 0.3, 0.4};
    CHECK(CalibrationTable(alphas, PValueMode::PaperVerbatim).p_value(0.25) == doctest::Approx(0.4));
    CHECK(CalibrationTable(alphas, PValueMode::Inclusive).p_value(0.25) == doctest::Approx(0.6));
    CHECK(CalibrationTable(alphas, PValueMode::Inclusive).p_value(0.0) == 1.0);
    // ties count toward the numerator
    CHECK(CalibrationTable(alphas, PValueMode::PaperVerbatim).p_value(0.3) == doctest::Approx(0.4));
}

TEST_CASE("binary-search p-values agree with a linear scan") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> alphas(1 + rng.uniform_index(60));
        // coarse grid so ties are common
        for (auto& a : alphas) a = static_cast<double>(rng.uniform_index(11)) / 10.0;
        const CalibrationTable inc(alphas, PValueMode::Inclusive), verb(alphas, PValueMode::PaperVerbatim);
        for (int q = 0; q <= 12; ++q) {
            const double a = q / 10.0 - 0.05;
            CHECK(inc.p_value(a) == brute_p_value(alphas, a, true));
            CHECK(verb.p_value(a) == brute_p_value(alphas, a, false));
        }
    }
}

TEST_CASE("prediction set on a confident row") {
    std::vector<double> alphas(100);
    for (int i = 0; i < 100; ++i) alphas[i] = 0.05 * i / 99.0;
    const CalibrationTable table(alphas);
    const std::vector<double> row{0.96, 0.03, 0.01};
    const auto set = table.predict_set(row, 0.05);
    CHECK(set.retained == std::vector<Label>{0});
    for (Label y = 0; y < 3; ++y) CHECK(set.pvalues[y] == brute_p_value(alphas, 1.0 - row[y], true));
    CHECK(set.pvalues[0] == doctest::Approx(21.0 / 101.0));
}

TEST_CASE("vanishing epsilon keeps every label") {
    const CalibrationTable table(std::vector<double>{0.0, 0.1, 0.2});
    const auto set = table.predict_set(std::vector<double>{1.0, 0.0, 0.0, 0.0}, 1e-9);
    CHECK(set.size() == 4);
}

TEST_CASE("sets are nested, consistent with their p-values, and monotone in score") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t k = 2 + rng.uniform_index(6);
        std::vector<double> alphas(1 + rng.uniform_index(200));
        for (auto& a : alphas) a = rng.uniform();
        const CalibrationTable table(alphas, rep % 2 ? PValueMode::Inclusive : PValueMode::PaperVerbatim);
        const auto row = random_probability_row(rng, k);
        const double e1 = 0.01 + 0.5 * rng.uniform();
        const double e2 = e1 + 0.4 * rng.uniform() + 1e-6;
        const auto wide = table.predict_set(row, e1);
        const auto narrow = table.predict_set(row, e2);
        for (auto y : narrow.retained) CHECK(wide.contains(y));
        CHECK(PredictionSet::from_pvalues(wide.pvalues, e1).retained == wide.retained);
        for (Label a = 0; a < k; ++a)
            for (Label b = 0; b < k; ++b)
                if (row[a] > row[b]) CHECK(wide.pvalues[a] >= wide.pvalues[b]);
        for (double p : wide.pvalues) CHECK((p >= 0.0 && p <= 1.0));
    }
}

TEST_CASE("epsilon must lie in (0,1)") {
    const CalibrationTable table(std::vector<double>{0.5});
    CHECK_THROWS(table.predict_set(std::vector<double>{0.5, 0.5}, 0.0));
    CHECK_THROWS(table.predict_set(std::vector<double>{0.5, 0.5}, 1.0));
}

TEST_CASE("ConformalModel wraps a forest") {
    SynthConfig cfg{.n_examples = 400, .k_classes = 3, .dims = {4}, .separation = {4.0}, .seed = 3};
    const auto ds = gen_multiview(cfg);
    const auto parts = split_dataset(ds, SplitSpec{0.5, 0.25, 0.25, 1});
    auto rf = std::make_shared<RandomForest>(ForestParams{.n_trees = 20});
    rf->fit(parts.train.views[0].features, parts.train.labels, 3, 5);
    ConformalModel model(rf, calibrate(*rf, parts.calib.views[0].features, parts.calib.labels));
    CHECK(model.table().n_calib() == parts.calib.size());
    const auto sets = model.predict_sets(parts.test.views[0].features, 0.1);
    REQUIRE(sets.size() == parts.test.size());
    CHECK(model.predict_set(parts.test.views[0].features.row(0), 0.1) == sets.front());
}

TEST_CASE("marginal coverage on exchangeable data") {
    // n=1200 -> 300 calibration and 300 test rows per trial.
    double total = 0;
    const int trials = 15;
    for (int t = 0; t < trials; ++t) {
        SynthConfig cfg{.n_examples = 1200, .k_classes = 3, .dims = {4}, .separation = {2.0}, .seed = 1000u + t};
        const auto ds = gen_multiview(cfg);
        const auto parts = split_dataset(ds, SplitSpec{0.5, 0.25, 0.25, static_cast<std::uint64_t>(t)});
        RandomForest rf(ForestParams{.n_trees = 30});
        rf.fit(parts.train.views[0].features, parts.train.labels, 3, t);
        const auto table = calibrate(rf, parts.calib.views[0].features, parts.calib.labels);
        const auto scores = rf.predict_scores(parts.test.views[0].features);
        double hit = 0;
        for (std::size_t i = 0; i < scores.rows(); ++i)
            hit += table.predict_set(scores.row(i), 0.05).contains(parts.test.labels[i]);
        total += hit / static_cast<double>(scores.rows());
    }
    CHECK(total / trials >= 0.95 - 0.01);
}
