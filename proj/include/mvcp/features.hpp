#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "mvcp/matrix.hpp"

namespace mvcp::features {

/// Tri-axial acceleration samples of one window.
struct AccelWindow {
    std::vector<double> ax;
    std::vector<double> ay;
    std::vector<double> az;

    std::size_t length() const noexcept { return ax.size(); }
};

inline constexpr std::size_t kAccelFeatureCount = 16;
inline constexpr std::size_t kSkeletonJoints = 31;  // spine first
inline constexpr std::size_t kSkeletonFeatureCount = 3 * (kSkeletonJoints - 1);

/// Column names of accel_features, in output order.
const std::array<std::string_view, kAccelFeatureCount>& accel_feature_names();

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Frames of 31 joint positions each.
struct SkeletonSequence {
    std::vector<std::vector<Point3>> frames;
};

/// Consecutive non-overlapping windows of exactly `window_len` rows; a
/// trailing partial window is dropped.
std::vector<Matrix> window_signal(const Matrix& samples, std::size_t window_len);

/// Euclidean norm of the acceleration at sample t.
double magnitude(std::span<const double> ax, std::span<const double> ay, std::span<const double> az, std::size_t t);

/// mean/sd/max per axis, pairwise Pearson correlations, mean and sd of the
/// magnitude, its sum (AUC) and mean consecutive difference. sd uses
/// divisor T; correlation with a constant axis is 0.
std::vector<double> accel_features(const AccelWindow& w);

/// Window (T x 3, columns x,y,z) to AccelWindow.
AccelWindow to_accel_window(const Matrix& xyz);

/// Spine-to-joint distances of the 30 other joints summarised over frames:
/// 30 means, then 30 maxima, then 30 minima.
std::vector<double> skeleton_features(const SkeletonSequence& seq);

}  // namespace mvcp::features
