#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fsde/randeff.hpp"

namespace fsde {

enum class KernelKind { Gaussian, Epanechnikov, Uniform, Legendre };

/// Smoothing kernel K with its derivative and the constants the risk bound
/// needs. Legendre kernels of order l are polynomials on [-1, 1]:
///   K(u) = sum_{m=0}^{l} p_m(0) p_m(u),  p_m orthonormal Legendre.
/// Derivative norms are for the a.e. derivative; jumps at +-1 of the
/// compactly supported kernels are not counted.
class Kernel {
 public:
  static Kernel gaussian();
  static Kernel epanechnikov();
  static Kernel uniform();
  /// Order-l kernel from orthonormal Legendre polynomials. Throws ConfigError
  /// when l == 0.
  static Kernel legendre(unsigned order);

  KernelKind kind() const noexcept { return kind_; }
  /// Number of vanishing moments (1 for the symmetric second-order kernels).
  unsigned order() const noexcept { return order_; }
  std::string name() const;

  double operator()(double u) const;
  double derivative(double u) const;

  /// Infinite for the Gaussian kernel.
  double support_radius() const noexcept;
  /// Radius beyond which K underflows to exactly zero.
  double effective_radius() const noexcept;

  double norm_sq() const noexcept { return norm_sq_; }
  double derivative_norm_sq() const noexcept { return derivative_norm_sq_; }
  double derivative_sup() const noexcept { return derivative_sup_; }

  /// Monomial coefficients on [-1, 1] (Legendre kernels only).
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

 private:
  Kernel(KernelKind kind, unsigned order);
  void precompute_constants();

  KernelKind kind_;
  unsigned order_;
  std::vector<double> coeffs_;
  double norm_sq_ = 0.0;
  double derivative_norm_sq_ = 0.0;
  double derivative_sup_ = 0.0;
};

Kernel make_legendre_kernel(unsigned order);

/// Positive smoothing parameter / bin width.
class Bandwidth {
 public:
  explicit Bandwidth(double h);
  double value() const noexcept { return h_; }

 private:
  double h_;
};

/// h = alpha * N^{-1/(2 beta + 1)}.
Bandwidth kernel_bandwidth(double beta, double alpha, std::size_t count);

/// h = c * N^{-1/(3 delta)} with delta in (1/3, 1/2).
Bandwidth histogram_bandwidth(std::size_t count, double delta, double scale);

/// Normal-reference scale 1.06 * min(sd, IQR / 1.34) of a sample. Multiplied
/// by N^{-1/5} this is the usual rule-of-thumb Gaussian bandwidth.
double normal_reference_scale(std::span<const double> sample);

/// Index j of the bin [h j, h (j + 1)) holding x. Exact with respect to the
/// floating-point products h * j.
std::int64_t bin_index(double x, double h);

struct KernelForm {
  Kernel kernel;
  double h;
  std::vector<double> centers;  // sorted ascending
};

struct HistogramForm {
  double h;
  std::int64_t first_bin;        // index of heights[0]
  std::vector<double> heights;   // contiguous bins first_bin .. first_bin + size - 1
  std::optional<Interval> trim;  // evaluation is zero outside when set

  double bin_left(std::size_t i) const { return h * static_cast<double>(first_bin + static_cast<std::int64_t>(i)); }
  double bin_right(std::size_t i) const { return h * static_cast<double>(first_bin + static_cast<std::int64_t>(i) + 1); }
};

/// Evaluable reconstruction of the effect density.
class DensityEstimate {
 public:
  using Form = std::variant<KernelForm, HistogramForm>;
  explicit DensityEstimate(Form form);

  const Form& form() const noexcept { return form_; }
  bool is_histogram() const noexcept { return std::holds_alternative<HistogramForm>(form_); }
  double bandwidth() const noexcept;

  double operator()(double x) const;
  std::vector<double> evaluate(std::span<const double> xs) const;

  /// Interval outside which the estimate is exactly zero.
  Interval extent() const;
  /// Points where the estimate may jump (bin edges, trim ends, compact
  /// kernel edges around each center).
  std::vector<double> breakpoints() const;

 private:
  Form form_;
};

/// (1 / (N h)) sum_i K((x - effect_i) / h). Throws ConfigError on empty input.
DensityEstimate kde(std::span<const double> effects, const Kernel& kernel, Bandwidth h);

/// Height count{effects in [h j, h (j + 1))} / (N h) on bin j; optionally
/// zero outside `trim`.
DensityEstimate histogram(std::span<const double> effects, Bandwidth h,
                          std::optional<Interval> trim = std::nullopt);

/// Squared L2 distance between K_h * f and f, by nested quadrature.
double smoothing_bias_sq(const RandomEffectDistribution& truth, const Kernel& kernel, double h);

struct RiskBoundInputs {
  double h;
  std::size_t count;    // N
  double horizon;       // T
  double hurst;         // H
  double m1_bound = 1.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double c_hurst = 1.0;  // C_H, not known in closed form
};

struct RiskBoundTerms {
  double bias;      // 2 ||f_h - f||^2
  double variance;  // ||K||^2 / (N h)
  double plug_in;   // ||K'||^2 / (T h^3) (1 + M1/c0^4 + 2 C_H^2 c1^2 / (c0^4 T^{1-H}))
  double total() const noexcept { return bias + variance + plug_in; }
};

/// Right-hand side of the L2 risk bound for the plug-in kernel estimator.
RiskBoundTerms l2_risk_bound_terms(const RandomEffectDistribution& truth, const Kernel& kernel,
                                   const RiskBoundInputs& in);

}  // namespace fsde
