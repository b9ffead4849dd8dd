#include "fsde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fsde::quad {

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double gauss_legendre_integrate(const std::function<double(double)>& fn, double a, double b,
                                std::size_t n) {
  const auto rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * fn(mid + half * rule.nodes[i]);
  return half * sum;
}

double simpson(std::span<const double> samples, double dx) {
  const std::size_t m = samples.size();
  if (m < 2) return 0.0;
  if (m == 2) return 0.5 * dx * (samples[0] + samples[1]);
  // Simpson needs an even number of intervals (odd sample count).
  std::size_t simpson_end = (m % 2 == 1) ? m - 1 : m - 4;
  double sum = 0.0;
  if (simpson_end >= 2) {
    double acc = samples[0] + samples[simpson_end];
    for (std::size_t k = 1; k < simpson_end; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * samples[k];
    sum = acc * dx / 3.0;
  } else {
    simpson_end = 0;
  }
  if (m % 2 == 0) {
    const std::size_t k = simpson_end;
    sum += 3.0 * dx / 8.0 *
           (samples[k] + 3.0 * samples[k + 1] + 3.0 * samples[k + 2] + samples[k + 3]);
  }
  return sum;
}

double simpson_integrate(const std::function<double(double)>& fn, double a, double b,
                         std::size_t intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  const double dx = (b - a) / static_cast<double>(intervals);
  double acc = fn(a) + fn(b);
  for (std::size_t k = 1; k < intervals; ++k) {
    acc += (k % 2 == 1 ? 4.0 : 2.0) * fn(a + dx * static_cast<double>(k));
  }
  return acc * dx / 3.0;
}

double piecewise_simpson(const std::function<double(double)>& fn, double lo, double hi,
                         std::vector<double> breakpoints, double resolution) {
  if (!(hi > lo)) return 0.0;
  breakpoints.push_back(lo);
  breakpoints.push_back(hi);
  std::erase_if(breakpoints, [&](double b) { return !(b >= lo && b <= hi); });
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  // Evaluate just inside each piece so a jump exactly at a breakpoint is
  // attributed to the correct side.
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    const double width = b - a;
    if (width <= 0.0) continue;
    auto intervals = static_cast<std::size_t>(std::ceil(width / resolution));
    intervals = std::max<std::size_t>(intervals, 2);
    if (intervals % 2 == 1) ++intervals;
    const double dx = width / static_cast<double>(intervals);
    const double eps = width * 1e-12;
    double acc = fn(a + eps) + fn(b - eps);
    for (std::size_t k = 1; k < intervals; ++k) {
      acc += (k % 2 == 1 ? 4.0 : 2.0) * fn(a + dx * static_cast<double>(k));
    }
    total += acc * dx / 3.0;
  }
  return total;
}

}  // namespace fsde::quad
