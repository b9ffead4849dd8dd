#pragma once

#include <optional>
#include <vector>

#include "fsde/model.hpp"

namespace fsde {

/// Discrete images of the path functionals
///   u1 = int_0^T b/sigma^2 dX,  u2 = int_0^T b^2/sigma^2 dt,
///   r  = int_0^T a(X) b / sigma^2 dt.
/// All three use left-point sums on the observation grid, so a path built by
/// the Euler scheme satisfies u1 = r + phi * u2 + sum (b/sigma) dW exactly.
struct PathStatistics {
  double u1 = 0.0;
  double u2 = 0.0;
  std::optional<double> r;
};

enum class EstimatorKind { PhiHat, PhiTilde };

struct EstimatedEffects {
  std::vector<double> values;
  EstimatorKind kind = EstimatorKind::PhiHat;
  double horizon = 0.0;
};

PathStatistics compute_statistics(const SubjectPath& path, const CoefficientSpec& coeffs,
                                  bool include_r);

/// u1 / u2. Throws NumericalError when u2 <= 0.
double estimate_phi_hat(const PathStatistics& stats);

/// (u1 - r) / u2. Throws UsageError when r is absent.
double estimate_phi_tilde(const PathStatistics& stats);

double estimate_effect(const SubjectPath& path, const CoefficientSpec& coeffs, EstimatorKind kind);

EstimatedEffects estimate_effects(const Cohort& cohort, EstimatorKind kind);

/// Simulates and estimates subject by subject without keeping the paths.
/// Gives the same values as estimate_effects(simulate_cohort(...)).
EstimatedEffects estimate_effects(const CohortSimulator& simulator, EstimatorKind kind);

}  // namespace fsde
