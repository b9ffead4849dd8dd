#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsde {

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool bounded() const noexcept;
  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
  double width() const noexcept { return upper - lower; }
};

struct GaussianLaw {
  double mean;
  double variance;
};

/// Shape/scale parametrisation: mean shape * scale.
struct GammaLaw {
  double shape;
  double scale;
};

struct UniformLaw {
  double lower;
  double upper;
};

/// Law of the random effects: density, its derivative, sampler, support.
/// Immutable once constructed.
class RandomEffectDistribution {
 public:
  using Law = std::variant<GaussianLaw, GammaLaw, UniformLaw>;

  /// Throws ConfigError on invalid parameters. Gamma requires shape >= 1 so
  /// that the derivative stays bounded.
  explicit RandomEffectDistribution(Law law);

  static RandomEffectDistribution gaussian(double mean, double variance);
  static RandomEffectDistribution gamma(double shape, double scale);
  static RandomEffectDistribution uniform(double lower, double upper);

  const Law& law() const noexcept { return law_; }
  std::string name() const;

  double density(double x) const;
  double density_derivative(double x) const;
  Interval support() const;

  /// Interval outside of which the density stays below `tolerance`.
  /// Equals support() for bounded laws.
  Interval effective_support(double tolerance = 1e-12) const;

  /// Points where the density or its derivative jumps (bounded support ends).
  std::vector<double> breakpoints() const;

  double mean() const;
  double variance() const;
  /// sup_x f(x), used by rate diagnostics.
  double max_density() const;

  /// N i.i.d. draws, deterministic in `seed`.
  std::vector<double> sample(std::size_t count, std::uint64_t seed) const;

 private:
  Law law_;
};

/// i.i.d. effects phi_1..phi_N. Throws ConfigError when count == 0.
std::vector<double> sample_effects(const RandomEffectDistribution& dist, std::size_t count,
                                   std::uint64_t seed);

/// Pointwise density values, zero outside the support.
std::vector<double> density_on_grid(const RandomEffectDistribution& dist,
                                    std::span<const double> xs);

}  // namespace fsde
