#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fsde::quad {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule (Newton on P_n).
GaussLegendreRule gauss_legendre(std::size_t n);

/// Integral of fn over [a, b] with an n-point Gauss-Legendre rule.
double gauss_legendre_integrate(const std::function<double(double)>& fn, double a, double b,
                                std::size_t n = 64);

/// Composite Simpson rule on equally spaced samples with spacing dx. An even
/// sample count closes the last interval with the 3/8 rule.
double simpson(std::span<const double> samples, double dx);

/// Composite Simpson of fn on [a, b] with `intervals` subintervals (rounded up
/// to even).
double simpson_integrate(const std::function<double(double)>& fn, double a, double b,
                         std::size_t intervals);

/// Integrates fn over [lo, hi] split at every breakpoint inside the range, so
/// jumps of fn at breakpoints never fall inside a Simpson panel. `resolution`
/// is the target subinterval width; every piece gets at least 2 subintervals.
double piecewise_simpson(const std::function<double(double)>& fn, double lo, double hi,
                         std::vector<double> breakpoints, double resolution);

}  // namespace fsde::quad
