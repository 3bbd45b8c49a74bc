#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "nlwave/types.hpp"

namespace nlwave {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points mapped to [a, b].
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

/// Uniform time grid 0 = t_0 < ... < t_N = horizon (offset by `start`).
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double start, double end, int intervals) : start_(start), end_(end), intervals_(intervals) {
    if (intervals < 1) throw ConfigError("TimeGrid: need at least one interval");
    if (!(end > start)) throw ConfigError("TimeGrid: end must exceed start");
  }
  static TimeGrid on(double horizon, int intervals) { return TimeGrid(0.0, horizon, intervals); }

  int intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(intervals_) + 1; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double step() const noexcept { return (end_ - start_) / intervals_; }
  double operator[](std::size_t i) const noexcept {
    if (i == static_cast<std::size_t>(intervals_)) return end_;
    return start_ + step() * static_cast<double>(i);
  }
  std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i];
    return out;
  }
  /// Index of `t` if it is a node (to 1e-9 relative to the step), else -1.
  long index_of(double t) const noexcept {
    const double r = (t - start_) / step();
    const long k = std::lround(r);
    if (k < 0 || k > intervals_ || std::abs(r - k) > 1e-9) return -1;
    return k;
  }

 private:
  double start_ = 0.0;
  double end_ = 1.0;
  int intervals_ = 1;
};

/// Composite weights for integrating over nodes first..last of a uniform grid
/// with spacing `step`. Simpson's rule; an odd interval count closes with the
/// 3/8 rule on the last three intervals, and a single interval falls back to
/// the trapezoid rule. Returned vector has length last - first + 1.
inline std::vector<double> composite_weights(std::size_t first, std::size_t last, double step) {
  const std::size_t n = last - first;
  std::vector<double> w(n + 1, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = w[1] = 0.5 * step;
    return w;
  }
  const std::size_t simpson_n = (n % 2 == 0) ? n : n - 3;
  for (std::size_t k = 0; k + 2 <= simpson_n; k += 2) {
    w[k] += step / 3.0;
    w[k + 1] += 4.0 * step / 3.0;
    w[k + 2] += step / 3.0;
  }
  if (simpson_n != n) {
    const std::size_t k = simpson_n;
    w[k] += 3.0 * step / 8.0;
    w[k + 1] += 9.0 * step / 8.0;
    w[k + 2] += 9.0 * step / 8.0;
    w[k + 3] += 3.0 * step / 8.0;
  }
  return w;
}

}  // namespace nlwave
