#include <doctest.h>

#include <cmath>

#include "metrics_oracle.hpp"
#include "mvcp/metrics.hpp"
#include "mvcp/random.hpp"

using namespace mvcp;

namespace {

EvaluatedExample ex(Label truth, Label pred, std::vector<Label> retained, std::vector<double> p = {}) {
    EvaluatedExample e;
    e.true_label = truth;
    e.point_prediction = pred;
    e.set.retained = std::move(retained);
    e.set.pvalues = std::move(p);
    return e;
}

}  // namespace

TEST_CASE("classical metrics") {
    SUBCASE("all correct") {
        const std::vector<EvaluatedExample> e{ex(0, 0, {}), ex(1, 1, {}), ex(2, 2, {})};
        const auto m = classical_metrics(e, 3);
        CHECK(m.accuracy == 1.0);
        CHECK(m.sensitivity == 1.0);
        CHECK(m.specificity == 1.0);
        CHECK(m.f1 == 1.0);
    }
    SUBCASE("binary hand example") {
        // truth A,A,B,B; predictions A,B,B,B
        const std::vector<EvaluatedExample> e{ex(0, 0, {}), ex(0, 1, {}), ex(1, 1, {}), ex(1, 1, {})};
        const auto m = classical_metrics(e, 2);
        CHECK(m.accuracy == 0.75);
        CHECK(m.sensitivity == doctest::Approx(0.75));
        // specificity A: TN=2/2, B: TN=1/2
        CHECK(m.specificity == doctest::Approx(0.75));
        // F1 A = 2/3, F1 B = 0.8
        CHECK(m.f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    }
    SUBCASE("single class present") {
        const std::vector<EvaluatedExample> e{ex(0, 0, {}), ex(0, 0, {})};
        const auto one = classical_metrics(e, 1);
        CHECK(one.accuracy == 1.0);
        CHECK(one.specificity == 1.0);
        const auto two = classical_metrics(e, 2);
        CHECK(two.specificity == 1.0);
        CHECK(two.sensitivity == 0.5);  // absent class contributes recall 0
    }
}

TEST_CASE("set-based measures on hand examples") {
    const std::vector<EvaluatedExample> all_hit{ex(0, 0, {0}, {1, 0, 0}), ex(1, 1, {1}, {0, 1, 0})};
    CHECK(coverage(all_hit) == 1.0);
    CHECK(setsize_n_criterion(all_hit) == 1.0);
    CHECK(pct_empty(all_hit) == 0.0);
    CHECK(m_criterion(all_hit) == 0.0);
    CHECK(f_criterion(all_hit) == 0.0);
    CHECK(jaccard(all_hit) == 1.0);
    CHECK(om_criterion(all_hit) == 0.0);
    CHECK(of_criterion(all_hit) == 0.0);
    CHECK(ou_criterion(all_hit) == 0.0);
    CHECK(oe_criterion(all_hit) == 0.0);

    const std::vector<EvaluatedExample> empty{ex(0, 0, {}, {0, 0}), ex(1, 0, {}, {0, 0})};
    CHECK(coverage(empty) == 0.0);
    CHECK(jaccard(empty) == 0.0);
    CHECK(pct_empty(empty) == 1.0);

    const std::vector<EvaluatedExample> sizes{ex(0, 0, {}, {0, 0, 0, 0}), ex(0, 0, {0}, {0, 0, 0, 0}),
                                              ex(0, 0, {0, 1}, {0, 0, 0, 0}), ex(0, 0, {0, 1, 2}, {0, 0, 0, 0})};
    CHECK(setsize_n_criterion(sizes) == 1.5);
    CHECK(pct_empty(std::span(sizes).subspan(0, 2)) == 0.5);
    CHECK(m_criterion(std::span(sizes).subspan(1, 2)) == 0.5);

    CHECK(jaccard(std::vector<EvaluatedExample>{ex(0, 0, {0, 2}, {1, 0, 1})}) == 0.5);
    CHECK(om_criterion(std::vector<EvaluatedExample>{ex(0, 0, {2}, {0, 0, 1})}) == 1.0);
    CHECK(f_criterion(std::vector<EvaluatedExample>{ex(0, 0, {}, {0.9, 0.3, 0.2})}) == doctest::Approx(0.5));
    CHECK(f_criterion(std::vector<EvaluatedExample>{ex(0, 0, {}, {0.2, 0.2, 0.2, 0.2})}) == doctest::Approx(0.6));
    CHECK(of_criterion(std::vector<EvaluatedExample>{ex(0, 0, {}, {0.8, 0.1, 0.1})}) == doctest::Approx(0.2));
    CHECK(of_criterion(std::vector<EvaluatedExample>{ex(0, 0, {0}, {0.7})}) == 0.0);
    CHECK(ou_criterion(std::vector<EvaluatedExample>{ex(0, 0, {}, {0.8, 0.3, 0.1})}) == doctest::Approx(0.3));
    CHECK_THROWS(ou_criterion(std::vector<EvaluatedExample>{ex(0, 0, {0}, {0.7})}));
}

TEST_CASE("table arithmetic: OE equals setsize minus coverage") {
    // Published audio and accelerometer figures: setsize 2.64 / 1.58, coverage 95.56% / 95.41%, OE 1.68 / 0.62.
    CHECK(2.64 - 0.9556 == doctest::Approx(1.6844).epsilon(1e-12));
    CHECK(std::round((2.64 - 0.9556) * 100) / 100 == doctest::Approx(1.68));
}

TEST_CASE("ten measures agree with the naive oracle, plus identities") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const std::size_t k = 2 + rng.uniform_index(7);
        const auto examples = oracle::random_examples(200, k, 0.05 + 0.3 * rng.uniform(), rng);
        const auto expected = oracle::conformal_measures(examples, k);
        const auto r = evaluate(examples, k);
        const std::array<double, 10> got{r.coverage,    r.jaccard, r.setsize, r.pctempty, r.m_criterion,
                                         r.f_criterion, r.om,      r.of,      r.ou,       r.oe};
        for (std::size_t m = 0; m < 10; ++m) CHECK(got[m] == expected[m]);

        CHECK(std::abs(r.oe - (r.setsize - r.coverage)) <= 1e-12);
        double singletons = 0;
        for (const auto& e : examples) singletons += e.set.size() == 1;
        CHECK(r.pctempty + singletons / 200.0 + r.m_criterion == doctest::Approx(1.0).epsilon(1e-15));
        for (const auto& e : examples) {
            double sum = 0, mx = 0;
            for (double p : e.set.pvalues) sum += p, mx = std::max(mx, p);
            CHECK(sum - mx <= sum - e.set.pvalues[e.true_label]);
        }
        CHECK(r.coverage >= 0.0);
        CHECK(r.coverage <= 1.0);
        CHECK(r.oe <= static_cast<double>(k - 1));
        CHECK(r.setsize <= static_cast<double>(k));
    }
}

TEST_CASE("co-occurrence matrix") {
    const std::vector<EvaluatedExample> singletons{ex(0, 0, {0}), ex(1, 1, {1})};
    CHECK(cooccurrence_matrix(singletons, 3) == Matrix(3, 3));

    const std::vector<EvaluatedExample> pair{ex(0, 0, {0, 1})};
    const auto m = cooccurrence_matrix(pair, 3);
    CHECK(m(0, 1) == 1.0);
    CHECK(m(1, 0) == 1.0);
    CHECK(m(2, 0) + m(2, 1) + m(0, 2) + m(1, 2) == 0.0);

    const std::vector<EvaluatedExample> mixed{ex(0, 0, {0, 1}), ex(0, 0, {0, 1, 2}), ex(2, 2, {0, 2})};
    const auto mm = cooccurrence_matrix(mixed, 3);
    // column 0 counts: with 1 twice, with 2 twice
    CHECK(mm(1, 0) == 0.5);
    CHECK(mm(2, 0) == 0.5);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(mm(j, j) == 0.0);
        double col = 0;
        for (std::size_t i = 0; i < 3; ++i) col += mm(i, j);
        CHECK(col == doctest::Approx(1.0));
    }
}

TEST_CASE("zero-diagonal confusion matrix") {
    const std::vector<EvaluatedExample> perfect{ex(0, 0, {}), ex(1, 1, {})};
    CHECK(zero_diag_confusion(perfect, 2) == Matrix(2, 2));

    const std::vector<EvaluatedExample> wrong{ex(0, 1, {}), ex(0, 1, {})};
    const auto m = zero_diag_confusion(wrong, 2);
    CHECK(m(1, 0) == 1.0);
    CHECK(m(0, 1) == 0.0);

    // true class 0 predicted as 1 three times, as 2 once, correct twice
    const std::vector<EvaluatedExample> spread{ex(0, 1, {}), ex(0, 1, {}), ex(0, 1, {}),
                                               ex(0, 2, {}), ex(0, 0, {}), ex(0, 0, {})};
    const auto s = zero_diag_confusion(spread, 3);
    CHECK(s(1, 0) == 0.75);
    CHECK(s(2, 0) == 0.25);
}

TEST_CASE("set-size histogram covers 0..k") {
    const std::vector<EvaluatedExample> e{ex(0, 0, {}), ex(0, 0, {0}), ex(0, 0, {0, 1}), ex(0, 0, {0})};
    CHECK(setsize_histogram(e, 2) == std::vector<std::size_t>{1, 2, 1});
}

TEST_CASE("Welch t-test") {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
    SUBCASE("identical samples") {
        const auto r = welch_t_test(a, a);
        CHECK(r.t == 0.0);
        CHECK(r.p == doctest::Approx(1.0));
    }
    SUBCASE("shifted samples, equal variances") {
        // Frozen from scipy.stats.ttest_ind(equal_var=False).
        const auto r = welch_t_test(a, b);
        CHECK(r.t == doctest::Approx(-1.0));
        CHECK(r.df == doctest::Approx(8.0));
        CHECK(r.p == doctest::Approx(0.34659350708733416).epsilon(1e-10));
    }
    SUBCASE("unequal sizes and variances") {
        const std::vector<double> x{1.1, 2.5, 3.3, 4.0, 7.2, 0.4}, y{5.5, 6.1, 3.9, 8.8};
        const auto r = welch_t_test(x, y);
        CHECK(r.t == doctest::Approx(-2.106196838465621).epsilon(1e-10));
        CHECK(r.df == doctest::Approx(7.376243408521482).epsilon(1e-10));
        CHECK(r.p == doctest::Approx(0.07118694520762758).epsilon(1e-9));
    }
    SUBCASE("well separated samples") {
        Rng rng(3);
        std::vector<double> lo(15), hi(15);
        for (auto& v : lo) v = rng.normal();
        for (auto& v : hi) v = 10 + rng.normal();
        CHECK(welch_t_test(lo, hi).p < 1e-6);
    }
    SUBCASE("degenerate variances") {
        const std::vector<double> c{2, 2, 2}, d{3, 3, 3};
        CHECK(welch_t_test(c, c).p == 1.0);
        CHECK(welch_t_test(c, d).p == 0.0);
        CHECK(std::isinf(welch_t_test(c, d).t));
        CHECK_THROWS(welch_t_test(std::vector<double>{1}, c));
    }
}

TEST_CASE("sample statistics") {
    const std::vector<double> v{1, 2, 3};
    CHECK(mean(v) == 2.0);
    CHECK(sample_sd(v) == 1.0);
    CHECK(sample_sd(std::vector<double>{4}) == 0.0);
}
