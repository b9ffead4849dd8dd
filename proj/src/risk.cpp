#include "fsde/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "fsde/errors.hpp"
#include "fsde/parallel.hpp"
#include "fsde/quadrature.hpp"

namespace fsde {

namespace {

constexpr double kSupportTolerance = 1e-12;

void check_grid(const GridSpec& grid, const RandomEffectDistribution& truth) {
  if (grid.points < 64) throw ConfigError("risk grid too coarse: need at least 64 points");
  if (!(grid.upper > grid.lower)) throw ConfigError("risk grid must have upper > lower");
  const auto eff = truth.effective_support(kSupportTolerance);
  const double slack = 1e-9 * std::max(1.0, eff.width());
  if (grid.lower > eff.lower + slack || grid.upper < eff.upper - slack) {
    throw ConfigError("risk grid does not cover the effective support of the true density");
  }
}

template <class Fn>
double integrate_difference(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
                            const GridSpec& grid, Fn&& transform) {
  check_grid(grid, truth);
  std::vector<double> breaks = estimate.breakpoints();
  const auto tb = truth.breakpoints();
  breaks.insert(breaks.end(), tb.begin(), tb.end());
  return quad::piecewise_simpson(
      [&](double x) { return transform(estimate(x) - truth.density(x)); }, grid.lower, grid.upper,
      std::move(breaks), grid.spacing());
}

}  // namespace

GridSpec default_risk_grid(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
                           std::size_t points) {
  const auto eff = truth.effective_support(kSupportTolerance);
  const auto ext = estimate.extent();
  return {std::min(eff.lower, ext.lower), std::max(eff.upper, ext.upper), points};
}

double l2_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
               const GridSpec& grid) {
  return integrate_difference(estimate, truth, grid, [](double d) { return d * d; });
}

double l2_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth) {
  return l2_risk(estimate, truth, default_risk_grid(estimate, truth));
}

double l1_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth,
               const GridSpec& grid) {
  return integrate_difference(estimate, truth, grid, [](double d) { return std::abs(d); });
}

double l1_risk(const DensityEstimate& estimate, const RandomEffectDistribution& truth) {
  return l1_risk(estimate, truth, default_risk_grid(estimate, truth));
}

double psi_big(double u) {
  if (!(u >= 0.0)) throw std::domain_error("Psi: argument must be nonnegative");
  // int_0^u e^{-x^2/2} dx = sqrt(pi/2) erf(u / sqrt 2)
  const double inner = std::sqrt(std::numbers::pi / 2.0) * std::erf(u / std::numbers::sqrt2);
  return std::sqrt(2.0 / std::numbers::pi) * (u * inner + std::exp(-0.5 * u * u));
}

double psi1_bound(const RandomEffectDistribution& truth, std::size_t count, double h) {
  if (!(h > 0.0) || count == 0) throw ConfigError("psi1: need h > 0 and N >= 1");
  const double nh = static_cast<double>(count) * h;
  const auto eff = truth.effective_support(kSupportTolerance);
  auto integrand = [&](double x) {
    const double f = truth.density(x);
    if (!(f > 0.0)) return 0.0;
    const double r = x / h - static_cast<double>(bin_index(x, h));
    const double z = (1.0 - 2.0 * r) * truth.density_derivative(x);
    return std::sqrt(f / nh) * psi_big(0.5 * h * std::abs(z) * std::sqrt(nh / f));
  };
  std::vector<double> breaks = truth.breakpoints();
  for (auto j = bin_index(eff.lower, h); h * static_cast<double>(j) <= eff.upper; ++j) {
    breaks.push_back(h * static_cast<double>(j));
  }
  const double resolution = std::min(h / 16.0, eff.width() / 4096.0);
  return quad::piecewise_simpson(integrand, eff.lower, eff.upper, std::move(breaks), resolution);
}

double psi2_diagnostic(const RandomEffectDistribution& truth, double h) {
  if (!(h > 0.0)) throw ConfigError("psi2: need h > 0");
  const auto support = truth.support();
  if (!support.bounded()) {
    throw ConfigError("psi2 diagnostic requires a compactly supported effect density");
  }
  double sum = 0.0;
  for (auto j = bin_index(support.lower, h); h * static_cast<double>(j) < support.upper; ++j) {
    const double a = std::max(support.lower, h * static_cast<double>(j));
    const double b = std::min(support.upper, h * static_cast<double>(j + 1));
    if (!(b > a)) continue;
    const double p =
        quad::gauss_legendre_integrate([&](double x) { return truth.density(x); }, a, b, 64);
    sum += std::sqrt(std::max(p, 0.0));
  }
  return 2.0 * sum;
}

bool is_histogram_kind(DensityEstimatorKind kind) {
  return kind == DensityEstimatorKind::F3 || kind == DensityEstimatorKind::F4;
}

EstimatorKind effect_estimator_for(DensityEstimatorKind kind) {
  return (kind == DensityEstimatorKind::F2 || kind == DensityEstimatorKind::F4)
             ? EstimatorKind::PhiTilde
             : EstimatorKind::PhiHat;
}

std::string to_string(DensityEstimatorKind kind) {
  switch (kind) {
    case DensityEstimatorKind::F1: return "f1";
    case DensityEstimatorKind::F2: return "f2";
    case DensityEstimatorKind::F3: return "f3";
    case DensityEstimatorKind::F4: return "f4";
  }
  return "?";
}

DensityEstimatorKind parse_density_estimator_kind(const std::string& name) {
  if (name == "f1") return DensityEstimatorKind::F1;
  if (name == "f2") return DensityEstimatorKind::F2;
  if (name == "f3") return DensityEstimatorKind::F3;
  if (name == "f4") return DensityEstimatorKind::F4;
  throw ConfigError("unknown estimator kind '" + name + "' (expected f1, f2, f3 or f4)");
}

Bandwidth bandwidth_for(const BandwidthRule& rule, std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (const auto* k = std::get_if<KernelRule>(&rule)) {
    const double alpha = k->alpha ? *k->alpha : normal_reference_scale(sample);
    return kernel_bandwidth(k->beta, alpha, n);
  }
  if (const auto* hr = std::get_if<HistogramRule>(&rule)) {
    return histogram_bandwidth(n, hr->delta, hr->scale);
  }
  return Bandwidth(std::get<ExplicitBandwidth>(rule).h);
}

DensityEstimate build_estimate(const EstimatorSpec& spec, std::span<const double> effects,
                               const RandomEffectDistribution& truth) {
  const auto h = bandwidth_for(spec.bandwidth, effects);
  if (is_histogram_kind(spec.kind)) {
    std::optional<Interval> trim;
    if (truth.support().bounded()) trim = truth.support();
    return histogram(effects, h, trim);
  }
  return kde(effects, spec.kernel, h);
}

SlopeFit fit_log_log(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("slope fit needs at least two (x, y) points");
  }
  const auto n = static_cast<double>(xs.size());
  std::vector<double> lx(xs.size());
  std::vector<double> ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw NumericalError("slope fit needs positive values");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("slope fit needs at least two distinct x values");
  SlopeFit fit{sxy / sxx, 0.0, 0.0};
  fit.intercept = my - fit.slope * mx;
  if (lx.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double res = ly[i] - fit.intercept - fit.slope * lx[i];
      ssr += res * res;
    }
    fit.slope_std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

double sweep_horizon(const SweepSettings& settings, std::size_t count, double h, bool* capped) {
  const auto& rule = settings.horizon;
  double horizon = rule.fixed;
  switch (rule.kind) {
    case HorizonRule::Kind::Fixed:
      break;
    case HorizonRule::Kind::KernelRate: {
      double beta = 2.0;
      if (const auto* k = std::get_if<KernelRule>(&settings.estimator.bandwidth)) beta = k->beta;
      horizon = std::pow(static_cast<double>(count), (2.0 * beta + 3.0) / (2.0 * beta + 1.0));
      break;
    }
    case HorizonRule::Kind::HistogramBins: {
      // T >= J^4, J the number of bins meeting the (effective) support.
      const auto eff = settings.effects.effective_support(kSupportTolerance);
      const auto bins = static_cast<double>(bin_index(eff.upper, h) - bin_index(eff.lower, h) + 1);
      horizon = std::pow(bins, 4.0);
      break;
    }
  }
  const bool over = rule.kind != HorizonRule::Kind::Fixed && horizon > rule.cap;
  if (capped) *capped = over;
  return over ? rule.cap : horizon;
}

RiskReport mc_risk_sweep(const SweepSettings& settings) {
  if (settings.replicates < 8) throw ConfigError("risk sweep needs at least 8 replicates");
  if (!std::is_sorted(settings.counts.begin(), settings.counts.end())) {
    throw ConfigError("risk sweep N list must be ascending");
  }
  if (std::set<std::size_t>(settings.counts.begin(), settings.counts.end()).size() < 3) {
    throw ConfigError("risk sweep needs at least 3 distinct N values for a slope fit");
  }
  if (settings.counts.front() == 0) throw ConfigError("risk sweep N values must be positive");
  settings.model.validate();
  const HurstIndex hurst(settings.hurst);
  const auto& est = settings.estimator;
  const bool histogram_kind = is_histogram_kind(est.kind);

  RiskReport report;
  report.norm = histogram_kind ? RiskNorm::L1 : RiskNorm::L2;
  if (histogram_kind) {
    report.target_slope = -1.0 / 3.0;
  } else {
    double beta = 2.0;
    if (const auto* k = std::get_if<KernelRule>(&est.bandwidth)) beta = k->beta;
    report.target_slope = -2.0 * beta / (2.0 * beta + 1.0);
  }

  for (std::size_t idx = 0; idx < settings.counts.size(); ++idx) {
    const std::size_t n = settings.counts[idx];
    SweepEntry entry;
    entry.count = n;
    entry.replicates = settings.replicates;

    // Deterministic bandwidth rules fix h before simulation; the horizon may depend on it.
    double rule_h = 0.0;
    if (const auto* hr = std::get_if<HistogramRule>(&est.bandwidth)) {
      rule_h = histogram_bandwidth(n, hr->delta, hr->scale).value();
    } else if (const auto* eb = std::get_if<ExplicitBandwidth>(&est.bandwidth)) {
      rule_h = eb->h;
    } else if (const auto* kr = std::get_if<KernelRule>(&est.bandwidth); kr && kr->alpha) {
      rule_h = kernel_bandwidth(kr->beta, *kr->alpha, n).value();
    }
    entry.horizon = sweep_horizon(settings, n, rule_h > 0.0 ? rule_h : 1.0, &entry.horizon_capped);
    entry.steps = settings.steps;
    if (settings.max_spacing > 0.0) {
      entry.steps = std::max(entry.steps, static_cast<std::size_t>(
                                              std::ceil(entry.horizon / settings.max_spacing)));
    }
    const double work = static_cast<double>(n) * static_cast<double>(entry.steps) *
                        static_cast<double>(settings.replicates);
    if (!est.oracle && work > settings.work_budget) {
      entry.skipped = true;
      entry.skip_reason = "work budget exceeded (" + std::to_string(work) + " subject-steps)";
      report.sweep.push_back(entry);
      continue;
    }

    const TimeGrid grid(entry.horizon, entry.steps);
    std::vector<double> risks(settings.replicates);
    std::vector<double> bandwidths(settings.replicates);
    const std::uint64_t entry_seed = derive_seed(settings.seed, idx + 1);
    parallel_for(settings.replicates, [&](std::size_t rep) {
      const std::uint64_t seed = derive_seed(entry_seed, rep);
      std::vector<double> effects;
      if (est.oracle) {
        effects = sample_effects(settings.effects, n, derive_seed(seed, 0));
      } else {
        const CohortSimulator sim(settings.model, settings.effects, n, settings.x0, grid, hurst,
                                  seed);
        effects = estimate_effects(sim, effect_estimator_for(est.kind)).values;
      }
      const auto estimate = build_estimate(est, effects, settings.effects);
      bandwidths[rep] = estimate.bandwidth();
      risks[rep] = histogram_kind ? l1_risk(estimate, settings.effects)
                                  : l2_risk(estimate, settings.effects);
    });

    const double reps = static_cast<double>(settings.replicates);
    const double mean = std::accumulate(risks.begin(), risks.end(), 0.0) / reps;
    double ss = 0.0;
    for (double r : risks) ss += (r - mean) * (r - mean);
    entry.mean_risk = mean;
    entry.std_error = std::sqrt(ss / (reps - 1.0) / reps);
    entry.h = bandwidths.front();
    report.sweep.push_back(entry);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& e : report.sweep) {
    if (e.skipped) continue;
    xs.push_back(static_cast<double>(e.count));
    ys.push_back(e.mean_risk);
  }
  if (xs.size() >= 2) {
    const auto fit = fit_log_log(xs, ys);
    report.fitted_slope = fit.slope;
    report.slope_std_error = fit.slope_std_error;
  } else {
    report.fitted_slope = std::nan("");
    report.slope_std_error = std::nan("");
  }
  return report;
}

}  // namespace fsde
