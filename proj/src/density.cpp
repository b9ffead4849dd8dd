#include "fsde/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "fsde/errors.hpp"
#include "fsde/quadrature.hpp"

namespace fsde {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Gaussian kernel terms past this radius underflow to exactly zero.
constexpr double kGaussianUnderflowRadius = 40.0;
// Gaussian kernel mass beyond this radius is below 1e-18.
constexpr double kGaussianNegligibleRadius = 9.0;

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double horner_derivative(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * u + static_cast<double>(k) * c[k];
  return acc;
}

// Monomial coefficients of the Legendre polynomials P_0..P_order.
std::vector<std::vector<double>> legendre_polynomials(unsigned order) {
  std::vector<std::vector<double>> p(order + 1);
  p[0] = {1.0};
  if (order >= 1) p[1] = {0.0, 1.0};
  for (unsigned m = 1; m < order; ++m) {
    // (m + 1) P_{m+1} = (2m + 1) u P_m - m P_{m-1}
    std::vector<double> next(m + 2, 0.0);
    const double md = m;
    for (std::size_t k = 0; k < p[m].size(); ++k) next[k + 1] += (2.0 * md + 1.0) * p[m][k];
    for (std::size_t k = 0; k < p[m - 1].size(); ++k) next[k] -= md * p[m - 1][k];
    for (auto& v : next) v /= md + 1.0;
    p[m + 1] = std::move(next);
  }
  return p;
}

}  // namespace

Kernel::Kernel(KernelKind kind, unsigned order) : kind_(kind), order_(order) {}

Kernel Kernel::gaussian() {
  Kernel k(KernelKind::Gaussian, 1);
  k.precompute_constants();
  return k;
}

Kernel Kernel::epanechnikov() {
  Kernel k(KernelKind::Epanechnikov, 1);
  k.precompute_constants();
  return k;
}

Kernel Kernel::uniform() {
  Kernel k(KernelKind::Uniform, 1);
  k.precompute_constants();
  return k;
}

Kernel Kernel::legendre(unsigned order) {
  if (order == 0) throw ConfigError("Legendre kernel order must be at least 1");
  Kernel k(KernelKind::Legendre, order);
  const auto polys = legendre_polynomials(order);
  k.coeffs_.assign(order + 1, 0.0);
  for (unsigned m = 0; m <= order; ++m) {
    // p_m(0) p_m(u) = (2m + 1) / 2 * P_m(0) P_m(u)
    const double weight = (2.0 * m + 1.0) / 2.0 * polys[m][0];
    if (weight == 0.0) continue;
    for (std::size_t j = 0; j < polys[m].size(); ++j) k.coeffs_[j] += weight * polys[m][j];
  }
  k.precompute_constants();
  return k;
}

Kernel make_legendre_kernel(unsigned order) { return Kernel::legendre(order); }

std::string Kernel::name() const {
  switch (kind_) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Uniform: return "uniform";
    case KernelKind::Legendre: return "legendre" + std::to_string(order_);
  }
  return "unknown";
}

double Kernel::operator()(double u) const {
  switch (kind_) {
    case KernelKind::Gaussian: return kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case KernelKind::Epanechnikov: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::Uniform: return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case KernelKind::Legendre: return std::abs(u) <= 1.0 ? horner(coeffs_, u) : 0.0;
  }
  return 0.0;
}

double Kernel::derivative(double u) const {
  switch (kind_) {
    case KernelKind::Gaussian: return -u * kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case KernelKind::Epanechnikov: return std::abs(u) <= 1.0 ? -1.5 * u : 0.0;
    case KernelKind::Uniform: return 0.0;
    case KernelKind::Legendre: return std::abs(u) <= 1.0 ? horner_derivative(coeffs_, u) : 0.0;
  }
  return 0.0;
}

double Kernel::support_radius() const noexcept {
  return kind_ == KernelKind::Gaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

double Kernel::effective_radius() const noexcept {
  return kind_ == KernelKind::Gaussian ? kGaussianUnderflowRadius : 1.0;
}

void Kernel::precompute_constants() {
  switch (kind_) {
    case KernelKind::Gaussian:
      norm_sq_ = 0.5 / std::sqrt(std::numbers::pi);
      derivative_norm_sq_ = 0.25 / std::sqrt(std::numbers::pi);
      derivative_sup_ = kInvSqrt2Pi * std::exp(-0.5);
      return;
    case KernelKind::Epanechnikov:
      norm_sq_ = 0.6;
      derivative_norm_sq_ = 1.5;
      derivative_sup_ = 1.5;
      return;
    case KernelKind::Uniform:
      norm_sq_ = 0.5;
      derivative_norm_sq_ = 0.0;
      derivative_sup_ = 0.0;
      return;
    case KernelKind::Legendre: {
      // Polynomials of degree <= 2 * order are integrated exactly.
      const auto rule = quad::gauss_legendre(order_ + 2);
      norm_sq_ = 0.0;
      derivative_norm_sq_ = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double k = horner(coeffs_, rule.nodes[i]);
        const double dk = horner_derivative(coeffs_, rule.nodes[i]);
        norm_sq_ += rule.weights[i] * k * k;
        derivative_norm_sq_ += rule.weights[i] * dk * dk;
      }
      derivative_sup_ = 0.0;
      for (int i = 0; i <= 20000; ++i) {
        const double u = -1.0 + 1e-4 * i;
        derivative_sup_ = std::max(derivative_sup_, std::abs(horner_derivative(coeffs_, u)));
      }
      return;
    }
  }
}

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("bandwidth must be positive and finite, got " + std::to_string(h));
  }
}

Bandwidth kernel_bandwidth(double beta, double alpha, std::size_t count) {
  if (!(beta > 0.0)) throw ConfigError("kernel bandwidth: beta must be positive");
  if (!(alpha > 0.0)) throw ConfigError("kernel bandwidth: alpha must be positive");
  if (count == 0) throw ConfigError("kernel bandwidth: N must be at least 1");
  return Bandwidth(alpha * std::pow(static_cast<double>(count), -1.0 / (2.0 * beta + 1.0)));
}

Bandwidth histogram_bandwidth(std::size_t count, double delta, double scale) {
  if (!(delta > 1.0 / 3.0 && delta < 0.5)) {
    throw std::domain_error(
        "histogram bandwidth: delta must lie in (1/3, 1/2) so that N h -> infinity");
  }
  if (!(scale > 0.0)) throw ConfigError("histogram bandwidth: scale c must be positive");
  if (count == 0) throw ConfigError("histogram bandwidth: N must be at least 1");
  return Bandwidth(scale * std::pow(static_cast<double>(count), -1.0 / (3.0 * delta)));
}

double normal_reference_scale(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw ConfigError("normal reference bandwidth needs at least two values");
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr_scale = (quantile(0.75) - quantile(0.25)) / 1.34;
  double spread = (iqr_scale > 0.0) ? std::min(sd, iqr_scale) : sd;
  if (!(spread > 0.0)) throw ConfigError("normal reference bandwidth: sample has no spread");
  return 1.06 * spread;
}

std::int64_t bin_index(double x, double h) {
  auto j = static_cast<std::int64_t>(std::floor(x / h));
  while (h * static_cast<double>(j + 1) <= x) ++j;
  while (h * static_cast<double>(j) > x) --j;
  return j;
}

DensityEstimate::DensityEstimate(Form form) : form_(std::move(form)) {}

double DensityEstimate::bandwidth() const noexcept {
  return std::visit([](const auto& f) { return f.h; }, form_);
}

double DensityEstimate::operator()(double x) const {
  if (const auto* kf = std::get_if<KernelForm>(&form_)) {
    const double radius = kf->kernel.effective_radius() * kf->h;
    const auto first = std::lower_bound(kf->centers.begin(), kf->centers.end(), x - radius);
    const auto last = std::upper_bound(first, kf->centers.end(), x + radius);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += kf->kernel((x - *it) / kf->h);
    return sum / (static_cast<double>(kf->centers.size()) * kf->h);
  }
  const auto& hf = std::get<HistogramForm>(form_);
  if (hf.trim && !hf.trim->contains(x)) return 0.0;
  const std::int64_t j = bin_index(x, hf.h) - hf.first_bin;
  if (j < 0 || j >= static_cast<std::int64_t>(hf.heights.size())) return 0.0;
  return hf.heights[static_cast<std::size_t>(j)];
}

std::vector<double> DensityEstimate::evaluate(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
  return out;
}

Interval DensityEstimate::extent() const {
  if (const auto* kf = std::get_if<KernelForm>(&form_)) {
    const double r = (kf->kernel.kind() == KernelKind::Gaussian ? kGaussianNegligibleRadius : 1.0) * kf->h;
    return {kf->centers.front() - r, kf->centers.back() + r};
  }
  const auto& hf = std::get<HistogramForm>(form_);
  Interval out{hf.bin_left(0), hf.bin_right(hf.heights.size() - 1)};
  if (hf.trim) {
    out.lower = std::max(out.lower, hf.trim->lower);
    out.upper = std::min(out.upper, hf.trim->upper);
  }
  return out;
}

std::vector<double> DensityEstimate::breakpoints() const {
  std::vector<double> out;
  if (const auto* kf = std::get_if<KernelForm>(&form_)) {
    if (kf->kernel.kind() == KernelKind::Gaussian) return out;
    out.reserve(2 * kf->centers.size());
    for (double c : kf->centers) {
      out.push_back(c - kf->h);
      out.push_back(c + kf->h);
    }
    return out;
  }
  const auto& hf = std::get<HistogramForm>(form_);
  out.reserve(hf.heights.size() + 3);
  for (std::size_t i = 0; i <= hf.heights.size(); ++i) out.push_back(hf.bin_left(i));
  if (hf.trim) {
    out.push_back(hf.trim->lower);
    out.push_back(hf.trim->upper);
  }
  return out;
}

DensityEstimate kde(std::span<const double> effects, const Kernel& kernel, Bandwidth h) {
  if (effects.empty()) throw ConfigError("kde: effects vector is empty");
  KernelForm form{kernel, h.value(), {effects.begin(), effects.end()}};
  std::sort(form.centers.begin(), form.centers.end());
  return DensityEstimate(std::move(form));
}

DensityEstimate histogram(std::span<const double> effects, Bandwidth h,
                          std::optional<Interval> trim) {
  if (effects.empty()) throw ConfigError("histogram: effects vector is empty");
  const double width = h.value();
  std::vector<std::int64_t> bins(effects.size());
  for (std::size_t i = 0; i < effects.size(); ++i) bins[i] = bin_index(effects[i], width);
  const auto [lo, hi] = std::minmax_element(bins.begin(), bins.end());
  HistogramForm form{width, *lo, std::vector<double>(static_cast<std::size_t>(*hi - *lo + 1), 0.0),
                     trim};
  for (auto j : bins) form.heights[static_cast<std::size_t>(j - *lo)] += 1.0;
  const double norm = static_cast<double>(effects.size()) * width;
  for (auto& v : form.heights) v /= norm;
  return DensityEstimate(std::move(form));
}

double smoothing_bias_sq(const RandomEffectDistribution& truth, const Kernel& kernel, double h) {
  const bool gaussian = kernel.kind() == KernelKind::Gaussian;
  const double radius = gaussian ? kGaussianNegligibleRadius : 1.0;
  const auto truth_breaks = truth.breakpoints();

  auto smoothed = [&](double x) {
    std::vector<double> breaks;
    for (double b : truth_breaks) breaks.push_back((x - b) / h);
    return quad::piecewise_simpson([&](double u) { return kernel(u) * truth.density(x - h * u); },
                                   -radius, radius, std::move(breaks), 0.02);
  };

  const auto eff = truth.effective_support(1e-14);
  const double lo = eff.lower - radius * h;
  const double hi = eff.upper + radius * h;
  std::vector<double> outer_breaks = truth_breaks;
  if (!gaussian) {
    for (double b : truth_breaks) {
      outer_breaks.push_back(b - h);
      outer_breaks.push_back(b + h);
    }
  }
  const double resolution = std::min((hi - lo) / 2000.0, h / 20.0);
  return quad::piecewise_simpson(
      [&](double x) {
        const double d = smoothed(x) - truth.density(x);
        return d * d;
      },
      lo, hi, std::move(outer_breaks), resolution);
}

RiskBoundTerms l2_risk_bound_terms(const RandomEffectDistribution& truth, const Kernel& kernel,
                                   const RiskBoundInputs& in) {
  if (!(in.h > 0.0 && in.horizon > 0.0 && in.count > 0 && in.c0 > 0.0 && in.c1 > 0.0 &&
        in.m1_bound >= 0.0 && in.c_hurst >= 0.0 && in.hurst > 0.0 && in.hurst < 1.0)) {
    throw ConfigError("risk bound inputs must be positive");
  }
  const double n = static_cast<double>(in.count);
  const double c0_4 = std::pow(in.c0, 4);
  RiskBoundTerms terms{};
  terms.bias = 2.0 * smoothing_bias_sq(truth, kernel, in.h);
  terms.variance = kernel.norm_sq() / (n * in.h);
  terms.plug_in = kernel.derivative_norm_sq() / (in.horizon * std::pow(in.h, 3)) *
                  (1.0 + in.m1_bound / c0_4 +
                   2.0 * in.c_hurst * in.c_hurst * in.c1 * in.c1 /
                       (c0_4 * std::pow(in.horizon, 1.0 - in.hurst)));
  return terms;
}

}  // namespace fsde
