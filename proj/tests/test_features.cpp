#include <doctest.h>

#include <cmath>

#include "mvcp/features.hpp"
#include "mvcp/random.hpp"

using namespace mvcp;
using namespace mvcp::features;

namespace {

enum Col : std::size_t { MeanX, MeanY, MeanZ, SdX, SdY, SdZ, MaxX, MaxY, MaxZ, CorrXY, CorrXZ, CorrYZ, MeanMag, SdMag, Auc, MeanDif };

AccelWindow constant(double x, double y, double z, std::size_t t) {
    return {std::vector<double>(t, x), std::vector<double>(t, y), std::vector<double>(t, z)};
}

}  // namespace

TEST_CASE("accelerometer features of a constant window") {
    const auto f = accel_features(constant(3, 4, 0, 5));
    REQUIRE(f.size() == kAccelFeatureCount);
    CHECK(f[MeanX] == 3.0);
    CHECK(f[MeanY] == 4.0);
    CHECK(f[SdX] == 0.0);
    CHECK(f[MaxY] == 4.0);
    CHECK(f[MeanMag] == doctest::Approx(5.0));
    CHECK(f[SdMag] == doctest::Approx(0.0));
    CHECK(f[Auc] == doctest::Approx(25.0));
    CHECK(f[MeanDif] == doctest::Approx(0.0));
    CHECK(f[CorrXY] == 0.0);
    CHECK(f[CorrXZ] == 0.0);
    CHECK(f[CorrYZ] == 0.0);
}

TEST_CASE("magnitude summaries") {
    const AccelWindow w{{1, 2, 4}, {0, 0, 0}, {0, 0, 0}};
    const auto f = accel_features(w);
    CHECK(f[Auc] == doctest::Approx(7.0));
    CHECK(f[MeanDif] == doctest::Approx(1.5));
    CHECK(f[MeanMag] == doctest::Approx(7.0 / 3.0));
    CHECK(f[SdX] == doctest::Approx(std::sqrt(14.0 / 9.0)));
}

TEST_CASE("correlation of identical axes is one") {
    const AccelWindow w{{1, 3, 2, 5}, {1, 3, 2, 5}, {-1, -3, -2, -5}};
    const auto f = accel_features(w);
    CHECK(f[CorrXY] == doctest::Approx(1.0));
    CHECK(f[CorrXZ] == doctest::Approx(-1.0));
}

TEST_CASE("properties on random windows") {
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t t = 2 + rng.uniform_index(100);
        AccelWindow w{std::vector<double>(t), std::vector<double>(t), std::vector<double>(t)};
        for (std::size_t i = 0; i < t; ++i) w.ax[i] = rng.normal(), w.ay[i] = rng.normal(), w.az[i] = rng.normal();
        const auto f = accel_features(w);
        for (std::size_t c : {CorrXY, CorrXZ, CorrYZ}) {
            CHECK(f[c] >= -1.0 - 1e-12);
            CHECK(f[c] <= 1.0 + 1e-12);
        }
        CHECK(f[Auc] >= 0.0);
        CHECK(f[SdX] >= 0.0);

        // meandif telescopes to (m_T - m_1) / (T - 1)
        const double first = magnitude(w.ax, w.ay, w.az, 0), last = magnitude(w.ax, w.ay, w.az, t - 1);
        CHECK(std::abs(f[MeanDif] - (last - first) / static_cast<double>(t - 1)) <= 1e-12);

        // scaling every axis by c > 0 scales the magnitude features by c
        const double c = 0.5 + 3 * rng.uniform();
        AccelWindow s = w;
        for (auto* axis : {&s.ax, &s.ay, &s.az})
            for (auto& v : *axis) v *= c;
        const auto g = accel_features(s);
        for (std::size_t k : {MeanMag, SdMag, Auc, MeanDif, SdX, MeanY})
            CHECK(g[k] == doctest::Approx(c * f[k]).epsilon(1e-9));
        CHECK(g[CorrXY] == doctest::Approx(f[CorrXY]).epsilon(1e-9));
    }
}

TEST_CASE("feature names") {
    CHECK(accel_feature_names().size() == kAccelFeatureCount);
    CHECK(accel_feature_names()[Auc] == "auc");
}

TEST_CASE("windowing") {
    auto rows = [](std::size_t n) {
        Matrix m(n, 3);
        for (std::size_t i = 0; i < n; ++i) m(i, 0) = static_cast<double>(i);
        return m;
    };
    const auto w = window_signal(rows(10), 3);
    REQUIRE(w.size() == 3);
    CHECK(w[2](0, 0) == 6.0);
    CHECK(w[2].rows() == 3);
    CHECK(window_signal(rows(9), 3).size() == 3);
    CHECK(window_signal(rows(2), 3).empty());
    CHECK_THROWS(window_signal(rows(10), 1));

    const auto a = to_accel_window(w[1]);
    CHECK(a.length() == 3);
    CHECK(a.ax[0] == 3.0);
}

TEST_CASE("skeleton features") {
    auto frame = [](double d) {
        std::vector<Point3> joints(kSkeletonJoints);
        for (std::size_t j = 1; j < kSkeletonJoints; ++j) joints[j] = {0.0, d, 0.0};
        return joints;
    };
    SkeletonSequence seq{{frame(2), frame(4)}};
    const auto f = skeleton_features(seq);
    REQUIRE(f.size() == kSkeletonFeatureCount);
    CHECK(f[0] == doctest::Approx(3.0));
    CHECK(f[30] == doctest::Approx(4.0));
    CHECK(f[60] == doctest::Approx(2.0));

    SkeletonSequence single{{frame(2)}};
    const auto g = skeleton_features(single);
    CHECK(g[5] == g[35]);
    CHECK(g[35] == g[65]);

    SkeletonSequence bad{{std::vector<Point3>(30)}};
    CHECK_THROWS(skeleton_features(bad));
    CHECK_THROWS(skeleton_features(SkeletonSequence{}));
}
