#include "mvcp/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvcp::features {

const std::array<std::string_view, kAccelFeatureCount>& accel_feature_names() {
    static constexpr std::array<std::string_view, kAccelFeatureCount> kNames{
        "mean_x",  "mean_y",  "mean_z",         "sd_x",          "sd_y", "sd_z",   "max_x",   "max_y",
        "max_z",   "corr_xy", "corr_xz",        "corr_yz",       "mean_magnitude", "sd_magnitude", "auc", "meandif"};
    return kNames;
}

std::vector<Matrix> window_signal(const Matrix& samples, std::size_t window_len) {
    if (window_len < 2) throw std::invalid_argument("window_signal: window length must be at least 2");
    std::vector<Matrix> windows;
    for (std::size_t start = 0; start + window_len <= samples.rows(); start += window_len) {
        std::vector<std::size_t> rows(window_len);
        for (std::size_t i = 0; i < window_len; ++i) rows[i] = start + i;
        windows.push_back(samples.select_rows(rows));
    }
    return windows;
}

double magnitude(std::span<const double> ax, std::span<const double> ay, std::span<const double> az, std::size_t t) {
    if (t >= ax.size() || t >= ay.size() || t >= az.size()) throw std::out_of_range("magnitude: sample index out of range");
    return std::sqrt(ax[t] * ax[t] + ay[t] * ay[t] + az[t] * az[t]);
}

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_sd(std::span<const double> v, double m) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

std::vector<double> accel_features(const AccelWindow& w) {
    const std::size_t T = w.length();
    if (w.ay.size() != T || w.az.size() != T) throw std::invalid_argument("accel_features: axes differ in length");
    if (T < 2) throw std::invalid_argument("accel_features: window needs at least 2 samples");

    std::vector<double> mag(T);
    for (std::size_t t = 0; t < T; ++t) mag[t] = magnitude(w.ax, w.ay, w.az, t);

    std::vector<double> out;
    out.reserve(kAccelFeatureCount);
    const std::array<std::span<const double>, 3> axes{w.ax, w.ay, w.az};
    std::array<double, 3> means{};
    for (std::size_t a = 0; a < 3; ++a) out.push_back(means[a] = mean_of(axes[a]));
    for (std::size_t a = 0; a < 3; ++a) out.push_back(population_sd(axes[a], means[a]));
    for (std::size_t a = 0; a < 3; ++a) out.push_back(*std::max_element(axes[a].begin(), axes[a].end()));
    out.push_back(pearson(w.ax, w.ay));
    out.push_back(pearson(w.ax, w.az));
    out.push_back(pearson(w.ay, w.az));
    const double mag_mean = mean_of(mag);
    out.push_back(mag_mean);
    out.push_back(population_sd(mag, mag_mean));
    double auc = 0.0;
    for (double m : mag) auc += m;
    out.push_back(auc);
    double diff = 0.0;
    for (std::size_t t = 1; t < T; ++t) diff += mag[t] - mag[t - 1];
    out.push_back(diff / static_cast<double>(T - 1));
    return out;
}

AccelWindow to_accel_window(const Matrix& xyz) {
    if (xyz.cols() != 3) throw std::invalid_argument("to_accel_window: expected 3 columns (x, y, z)");
    AccelWindow w;
    for (std::size_t t = 0; t < xyz.rows(); ++t) {
        w.ax.push_back(xyz(t, 0));
        w.ay.push_back(xyz(t, 1));
        w.az.push_back(xyz(t, 2));
    }
    return w;
}

std::vector<double> skeleton_features(const SkeletonSequence& seq) {
    if (seq.frames.empty()) throw std::invalid_argument("skeleton_features: no frames");
    constexpr std::size_t J = kSkeletonJoints - 1;
    std::vector<double> sum(J, 0.0), hi(J, -INFINITY), lo(J, INFINITY);
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const auto& frame = seq.frames[f];
        if (frame.size() != kSkeletonJoints)
            throw std::invalid_argument("skeleton_features: frame " + std::to_string(f) + " has " +
                                        std::to_string(frame.size()) + " joints, expected 31");
        const Point3 spine = frame[0];
        for (std::size_t j = 0; j < J; ++j) {
            const Point3& p = frame[j + 1];
            const double d = std::sqrt((p.x - spine.x) * (p.x - spine.x) + (p.y - spine.y) * (p.y - spine.y) +
                                       (p.z - spine.z) * (p.z - spine.z));
            sum[j] += d;
            hi[j] = std::max(hi[j], d);
            lo[j] = std::min(lo[j], d);
        }
    }
    std::vector<double> out;
    out.reserve(kSkeletonFeatureCount);
    for (double s : sum) out.push_back(s / static_cast<double>(seq.frames.size()));
    out.insert(out.end(), hi.begin(), hi.end());
    out.insert(out.end(), lo.begin(), lo.end());
    return out;
}

}  // namespace mvcp::features
