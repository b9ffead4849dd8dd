#include "fsde/estimators.hpp"

#include <cmath>

#include "fsde/errors.hpp"
#include "fsde/parallel.hpp"

namespace fsde {

PathStatistics compute_statistics(const SubjectPath& path, const CoefficientSpec& coeffs,
                                  bool include_r) {
  const auto& grid = path.grid;
  const double dt = grid.spacing();
  PathStatistics stats;
  double r = 0.0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const double b = coeffs.b(t);
    const double s2 = coeffs.sigma(t) * coeffs.sigma(t);
    stats.u1 += b / s2 * (path.x[k + 1] - path.x[k]);
    if (include_r) r += coeffs.a(path.x[k]) * b / s2;
  }
  if (coeffs.effect_is_constant()) {
    const double b = coeffs.b(0.0);
    const double s = coeffs.sigma(0.0);
    stats.u2 = grid.horizon() * b * b / (s * s);
  } else {
    double u2 = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double t = grid.time(k);
      const double b = coeffs.b(t);
      const double s = coeffs.sigma(t);
      u2 += b * b / (s * s);
    }
    stats.u2 = u2 * dt;
  }
  if (include_r) stats.r = r * dt;
  return stats;
}

double estimate_phi_hat(const PathStatistics& stats) {
  if (!(stats.u2 > 0.0)) {
    throw NumericalError("phi_hat: u2 must be positive (A1 guarantees u2 >= c0^2 T)");
  }
  return stats.u1 / stats.u2;
}

double estimate_phi_tilde(const PathStatistics& stats) {
  if (!stats.r) throw UsageError("phi_tilde needs the drift statistic r (known drift)");
  if (!(stats.u2 > 0.0)) {
    throw NumericalError("phi_tilde: u2 must be positive (A1 guarantees u2 >= c0^2 T)");
  }
  return (stats.u1 - *stats.r) / stats.u2;
}

double estimate_effect(const SubjectPath& path, const CoefficientSpec& coeffs, EstimatorKind kind) {
  const bool tilde = kind == EstimatorKind::PhiTilde;
  const auto stats = compute_statistics(path, coeffs, tilde);
  return tilde ? estimate_phi_tilde(stats) : estimate_phi_hat(stats);
}

EstimatedEffects estimate_effects(const Cohort& cohort, EstimatorKind kind) {
  EstimatedEffects out{std::vector<double>(cohort.subjects.size()), kind, 0.0};
  if (!cohort.subjects.empty()) out.horizon = cohort.subjects.front().grid.horizon();
  parallel_for(cohort.subjects.size(), [&](std::size_t i) {
    out.values[i] = estimate_effect(cohort.subjects[i], cohort.coeffs, kind);
  });
  return out;
}

EstimatedEffects estimate_effects(const CohortSimulator& simulator, EstimatorKind kind) {
  EstimatedEffects out{std::vector<double>(simulator.size()), kind, simulator.grid().horizon()};
  parallel_for(simulator.size(), [&](std::size_t i) {
    out.values[i] = estimate_effect(simulator.subject(i), simulator.model().coeffs, kind);
  });
  return out;
}

}  // namespace fsde
