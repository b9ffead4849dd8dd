#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/randeff.hpp"

namespace fsde {

// Drift a(x).
struct ZeroDrift {};
/// a(x) = -rate * x
struct LinearDrift {
  double rate;
};
struct ConstantDrift {
  double value;
};
using DriftFamily = std::variant<ZeroDrift, LinearDrift, ConstantDrift>;

// Effect coefficient b(t).
struct ConstantEffect {
  double value;
};
/// b(t) = base + amplitude * sin(frequency * t), |amplitude| < |base|.
struct SinusoidEffect {
  double base;
  double amplitude;
  double frequency;
};
using EffectFamily = std::variant<ConstantEffect, SinusoidEffect>;

// Diffusion sigma(t).
struct ConstantDiffusion {
  double value;
};
using DiffusionFamily = std::variant<ConstantDiffusion>;

/// Coefficients of dX = (a(X) + phi b(t)) dt + sigma(t) dW^H. Construction
/// checks that b^2 / sigma^2 is bounded away from zero and infinity.
class CoefficientSpec {
 public:
  CoefficientSpec(DriftFamily drift, EffectFamily effect, DiffusionFamily diffusion);

  const DriftFamily& drift() const noexcept { return drift_; }
  const EffectFamily& effect() const noexcept { return effect_; }
  const DiffusionFamily& diffusion() const noexcept { return diffusion_; }

  double a(double x) const;
  double b(double t) const;
  double sigma(double t) const;

  /// inf_t b^2/sigma^2 and sup_t b^2/sigma^2, in closed form per family.
  double c0_squared() const noexcept { return c0_sq_; }
  double c1_squared() const noexcept { return c1_sq_; }

  bool drift_is_zero() const noexcept { return std::holds_alternative<ZeroDrift>(drift_); }
  bool effect_is_constant() const noexcept {
    return std::holds_alternative<ConstantEffect>(effect_);
  }

 private:
  DriftFamily drift_;
  EffectFamily effect_;
  DiffusionFamily diffusion_;
  double c0_sq_ = 0.0;
  double c1_sq_ = 0.0;
};

struct SubjectPath {
  TimeGrid grid;
  std::vector<double> x;  // x[0] == x0
  double x0;
  double true_effect;
  HurstIndex hurst;
};

enum class Scheme { Euler, ExactFou };

/// What a cohort simulation needs besides the effect law: coefficients and
/// the integration scheme. ExactFou needs zero or linear drift with constant
/// b and sigma.
struct ModelSpec {
  CoefficientSpec coeffs;
  Scheme scheme = Scheme::Euler;

  void validate() const;
};

struct Cohort {
  std::vector<SubjectPath> subjects;
  CoefficientSpec coeffs;
  RandomEffectDistribution effect_dist;
};

/// Left-point Euler scheme driven by the given fBm path.
SubjectPath simulate_subject_euler(const CoefficientSpec& coeffs, double phi, double x0,
                                   const FbmPath& noise);
SubjectPath simulate_subject_euler(const CoefficientSpec& coeffs, double phi, double x0,
                                   const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed);

/// Explicit solution of dX = (-rate X + phi b) dt + sigma dW^H with the
/// stochastic integral evaluated pathwise by parts and the trapezoid rule.
SubjectPath simulate_subject_exact_fou(double rate, double b, double sigma, double phi, double x0,
                                       const FbmPath& noise);
SubjectPath simulate_subject_exact_fou(double rate, double b, double sigma, double phi, double x0,
                                       const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed);

/// Streams the subjects of a cohort one at a time. Subject i draws its noise
/// from substream (master_seed, i + 1); the effects come from substream 0.
class CohortSimulator {
 public:
  CohortSimulator(ModelSpec model, RandomEffectDistribution effect_dist, std::size_t count,
                  double x0, TimeGrid grid, HurstIndex hurst, std::uint64_t master_seed);

  std::size_t size() const noexcept { return effects_.size(); }
  const std::vector<double>& effects() const noexcept { return effects_; }
  const ModelSpec& model() const noexcept { return model_; }
  const TimeGrid& grid() const noexcept { return grid_; }

  SubjectPath subject(std::size_t i) const;

 private:
  ModelSpec model_;
  RandomEffectDistribution effect_dist_;
  double x0_;
  TimeGrid grid_;
  HurstIndex hurst_;
  std::uint64_t master_seed_;
  std::vector<double> effects_;
  FbmGenerator generator_;
};

/// Full cohort in memory. Identical to collecting CohortSimulator::subject(i).
Cohort simulate_cohort(const ModelSpec& model, const RandomEffectDistribution& effect_dist,
                       std::size_t count, double x0, const TimeGrid& grid, HurstIndex hurst,
                       std::uint64_t master_seed);

}  // namespace fsde
