#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fsde/density.hpp"
#include "fsde/estimators.hpp"
#include "fsde/model.hpp"
#include "fsde/randeff.hpp"

namespace fsde {

/// Evaluation interval and resolution for risk quadrature.
struct GridSpec {
  double lower;
  double upper;
  std::size_t points;

  double spacing() const { return (upper - lower) / static_cast<double>(points - 1); }
};

constexpr std::size_t kDefaultRiskPoints = 4097;

/// Hull of the truth's effective support and the estimate's extent.
GridSpec default_risk_grid(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
                           std::size_t points = kDefaultRiskPoints);

/// int (fhat - f)^2 by composite Simpson at the grid resolution, split at
/// every jump of either function. Throws ConfigError if the grid has fewer
/// than 64 points or misses part of the truth's effective support.
double l2_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
               const GridSpec& grid);
double l2_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth);

/// int |fhat - f|, same quadrature as l2_risk.
double l1_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
               const GridSpec& grid);
double l1_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth);

/// Psi(u) = sqrt(2/pi) (u int_0^u e^{-x^2/2} dx + e^{-u^2/2}), u >= 0.
double psi_big(double u);

/// psi_1(N, h) = int sqrt(f/(N h)) Psi((h/2) |z_N| sqrt(N h / f)) with
/// z_N = (1 - 2 r_N) f' and r_N(x) = x/h - floor(x/h). Zero where f = 0.
double psi1_bound(const RandomEffectDistribution& truth, std::size_t count, double h);

/// 2 sum_j P(phi in [h j, h(j+1)))^{1/2} over bins meeting the support.
/// Throws ConfigError for unbounded supports.
double psi2_diagnostic(const RandomEffectDistribution& truth, double h);

enum class DensityEstimatorKind { F1, F2, F3, F4 };

/// f1/f2 are kernel estimators on phi_hat/phi_tilde, f3/f4 histograms.
bool is_histogram_kind(DensityEstimatorKind kind);
/// phi_hat for f1/f3, phi_tilde for f2/f4.
EstimatorKind effect_estimator_for(DensityEstimatorKind kind);
std::string to_string(DensityEstimatorKind kind);
DensityEstimatorKind parse_density_estimator_kind(const std::string& name);

struct KernelRule {
  double beta = 2.0;
  std::optional<double> alpha;  // empty: normal-reference scale of the input sample
};
struct HistogramRule {
  double delta = 0.4;
  double scale = 1.0;
};
struct ExplicitBandwidth {
  double h;
};
using BandwidthRule = std::variant<KernelRule, HistogramRule, ExplicitBandwidth>;

/// Bandwidth the rule gives for a sample of size sample.size().
Bandwidth bandwidth_for(const BandwidthRule& rule, std::span<const double> sample);

struct EstimatorSpec {
  DensityEstimatorKind kind = DensityEstimatorKind::F1;
  Kernel kernel = Kernel::gaussian();
  BandwidthRule bandwidth = KernelRule{};
  bool oracle = false;  // feed the true effects instead of their estimates
};

/// Builds the density estimate of `spec` from effect values. Histogram kinds
/// are trimmed to the truth's support when it is compact.
DensityEstimate build_estimate(const EstimatorSpec& spec, std::span<const double> effects,
                               const RandomEffectDistribution& truth);

/// How the observation horizon grows with N in a sweep.
struct HorizonRule {
  enum class Kind { Fixed, KernelRate, HistogramBins } kind = Kind::Fixed;
  double fixed = 100.0;
  double cap = 2000.0;
};

struct SweepSettings {
  ModelSpec model;
  RandomEffectDistribution effects;
  double x0 = 0.0;
  double hurst = 0.75;
  std::size_t steps = 1000;     // grid steps per path
  double max_spacing = 0.0;     // when > 0, steps grows so that T / steps <= max_spacing
  EstimatorSpec estimator;
  std::vector<std::size_t> counts;  // N ladder, ascending
  std::size_t replicates = 32;
  HorizonRule horizon;
  double work_budget = 5e10;    // max subject-steps per N entry
  std::uint64_t seed = 0;
};

struct SweepEntry {
  std::size_t count = 0;
  double horizon = 0.0;
  bool horizon_capped = false;
  std::size_t steps = 0;
  double h = 0.0;  // bandwidth of the first replicate (data-driven rules vary)
  std::size_t replicates = 0;
  double mean_risk = 0.0;
  double std_error = 0.0;
  bool skipped = false;
  std::string skip_reason;
};

enum class RiskNorm { L1, L2 };

struct RiskReport {
  std::vector<SweepEntry> sweep;
  RiskNorm norm = RiskNorm::L2;
  double fitted_slope = 0.0;
  double slope_std_error = 0.0;
  double target_slope = 0.0;
};

struct SlopeFit {
  double slope;
  double intercept;
  double slope_std_error;
};

/// Unweighted least squares of log(y) on log(x).
SlopeFit fit_log_log(std::span<const double> xs, std::span<const double> ys);

/// Horizon the rule assigns to a cohort of `count` subjects after the cap;
/// `capped` reports whether the cap was hit. `h` feeds the bin-count rule.
double sweep_horizon(const SweepSettings& settings, std::size_t count, double h, bool* capped);

/// Monte Carlo risk per N and the fitted log-log slope. L2 risk for kernel
/// kinds, L1 for histogram kinds.
RiskReport mc_risk_sweep(const SweepSettings& settings);

}  // namespace fsde
