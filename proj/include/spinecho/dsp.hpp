#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spinecho {

constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Wrap an angle in degrees into [0, 360).
inline double wrap_deg(double a) {
  double w = std::fmod(a, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

/// Shortest angular distance between two angles in degrees, in [0, 180].
inline double circular_distance_deg(double a, double b) {
  const double d = std::fabs(wrap_deg(a) - wrap_deg(b));
  return std::min(d, 360.0 - d);
}

/// Circular mean of angles in degrees, reported in (-180, 180].
inline double circular_mean_deg(const std::vector<double>& angles) {
  if (angles.empty()) throw std::invalid_argument("circular_mean_deg: empty input");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(deg_to_rad(a));
    s += std::sin(deg_to_rad(a));
  }
  double m = rad_to_deg(std::atan2(s, c));
  if (m <= -180.0) m += 360.0;
  return m;
}

/// Centered moving RMS with shrinking edge windows.
inline Eigen::VectorXd moving_rms(const Eigen::Ref<const Eigen::VectorXd>& x, int window) {
  if (window < 1) throw std::invalid_argument("moving_rms: window must be >= 1");
  const Eigen::Index n = x.size();
  Eigen::VectorXd out(n);
  const int half = window / 2;
  // prefix sums of squares for O(n)
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    prefix[static_cast<std::size_t>(k) + 1] = prefix[static_cast<std::size_t>(k)] + x[k] * x[k];
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + half);
    const double ss = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
    out[k] = std::sqrt(ss / static_cast<double>(hi - lo + 1));
  }
  return out;
}

/// Min-max normalization to [0, 1]. A constant input maps to all zeros; by
/// convention such a window carries no signal.
inline Eigen::VectorXd minmax_normalize(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw std::invalid_argument("minmax_normalize: empty input");
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const double range = hi - lo;
  if (!(range > 0.0)) return Eigen::VectorXd::Zero(x.size());
  return (x.array() - lo) / range;
}

}  // namespace spinecho
