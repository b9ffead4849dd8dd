#include "fsde/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fsde/errors.hpp"
#include "fsde/parallel.hpp"

namespace fsde {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CoefficientSpec::CoefficientSpec(DriftFamily drift, EffectFamily effect, DiffusionFamily diffusion)
    : drift_(drift), effect_(effect), diffusion_(diffusion) {
  std::visit(overloaded{
                 [](const ZeroDrift&) {},
                 [](const LinearDrift& d) {
                   if (!std::isfinite(d.rate)) throw ConfigError("linear drift rate must be finite");
                 },
                 [](const ConstantDrift& d) {
                   if (!std::isfinite(d.value)) throw ConfigError("constant drift must be finite");
                 },
             },
             drift_);

  const double s0 = std::get<ConstantDiffusion>(diffusion_).value;
  if (!(s0 > 0.0) || !std::isfinite(s0)) {
    throw ConfigError("diffusion sigma must be positive, got " + fmt(s0));
  }

  double b_inf = 0.0;
  double b_sup = 0.0;
  std::visit(overloaded{
                 [&](const ConstantEffect& e) { b_inf = b_sup = std::abs(e.value); },
                 [&](const SinusoidEffect& e) {
                   if (e.frequency == 0.0) {
                     b_inf = b_sup = std::abs(e.base);
                   } else {
                     b_inf = std::max(0.0, std::abs(e.base) - std::abs(e.amplitude));
                     b_sup = std::abs(e.base) + std::abs(e.amplitude);
                   }
                 },
             },
             effect_);
  c0_sq_ = b_inf * b_inf / (s0 * s0);
  c1_sq_ = b_sup * b_sup / (s0 * s0);
  if (!(c0_sq_ > 0.0)) throw ConfigError("A1 violated: inf b^2/sigma^2 = 0");
  if (!std::isfinite(c1_sq_)) throw ConfigError("A1 violated: sup b^2/sigma^2 is infinite");
}

double CoefficientSpec::a(double x) const {
  return std::visit(overloaded{
                        [](const ZeroDrift&) { return 0.0; },
                        [x](const LinearDrift& d) { return -d.rate * x; },
                        [](const ConstantDrift& d) { return d.value; },
                    },
                    drift_);
}

double CoefficientSpec::b(double t) const {
  return std::visit(overloaded{
                        [](const ConstantEffect& e) { return e.value; },
                        [t](const SinusoidEffect& e) {
                          return e.base + e.amplitude * std::sin(e.frequency * t);
                        },
                    },
                    effect_);
}

double CoefficientSpec::sigma(double) const { return std::get<ConstantDiffusion>(diffusion_).value; }

void ModelSpec::validate() const {
  if (scheme != Scheme::ExactFou) return;
  const bool drift_ok = std::holds_alternative<ZeroDrift>(coeffs.drift()) ||
                        std::holds_alternative<LinearDrift>(coeffs.drift());
  if (!drift_ok || !coeffs.effect_is_constant()) {
    throw ConfigError(
        "exact fOU scheme requires zero or linear drift with constant b and sigma");
  }
  if (const auto* lin = std::get_if<LinearDrift>(&coeffs.drift()); lin && lin->rate < 0.0) {
    throw ConfigError("exact fOU scheme requires a nonnegative rate");
  }
}

SubjectPath simulate_subject_euler(const CoefficientSpec& coeffs, double phi, double x0,
                                   const FbmPath& noise) {
  const auto& grid = noise.grid;
  const double dt = grid.spacing();
  SubjectPath path{grid, std::vector<double>(grid.steps() + 1), x0, phi, noise.hurst};
  path.x[0] = x0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const double dw = noise.values[k + 1] - noise.values[k];
    const double next =
        path.x[k] + (coeffs.a(path.x[k]) + phi * coeffs.b(t)) * dt + coeffs.sigma(t) * dw;
    if (!std::isfinite(next)) {
      throw NumericalError("Euler scheme produced a non-finite state at step " +
                           std::to_string(k + 1));
    }
    path.x[k + 1] = next;
  }
  return path;
}

SubjectPath simulate_subject_euler(const CoefficientSpec& coeffs, double phi, double x0,
                                   const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed) {
  return simulate_subject_euler(coeffs, phi, x0, simulate_fbm(hurst, grid, seed));
}

SubjectPath simulate_subject_exact_fou(double rate, double b, double sigma, double phi, double x0,
                                       const FbmPath& noise) {
  if (rate < 0.0 || !std::isfinite(rate)) {
    throw std::domain_error("exact fOU: rate must be nonnegative, got " + fmt(rate));
  }
  const auto& grid = noise.grid;
  const auto& w = noise.values;
  SubjectPath path{grid, std::vector<double>(grid.steps() + 1), x0, phi, noise.hurst};

  if (rate == 0.0) {
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
      path.x[k] = x0 + phi * b * grid.time(k) + sigma * w[k];
    }
    return path;
  }

  // X(t) = e^{-rt} x0 + phi b (1 - e^{-rt}) / r + sigma (W_t - r J_t) with
  // J_t = int_0^t e^{-r(t-s)} W_s ds, updated by the trapezoid rule.
  const double dt = grid.spacing();
  const double decay = std::exp(-rate * dt);
  double j = 0.0;
  path.x[0] = x0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    j = decay * j + 0.5 * dt * (decay * w[k] + w[k + 1]);
    const double t = grid.time(k + 1);
    const double e = std::exp(-rate * t);
    path.x[k + 1] = e * x0 + phi * b * (-std::expm1(-rate * t)) / rate + sigma * (w[k + 1] - rate * j);
  }
  return path;
}

SubjectPath simulate_subject_exact_fou(double rate, double b, double sigma, double phi, double x0,
                                       const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed) {
  return simulate_subject_exact_fou(rate, b, sigma, phi, x0, simulate_fbm(hurst, grid, seed));
}

CohortSimulator::CohortSimulator(ModelSpec model, RandomEffectDistribution effect_dist,
                                 std::size_t count, double x0, TimeGrid grid, HurstIndex hurst,
                                 std::uint64_t master_seed)
    : model_(std::move(model)),
      effect_dist_(std::move(effect_dist)),
      x0_(x0),
      grid_(grid),
      hurst_(hurst),
      master_seed_(master_seed),
      effects_(sample_effects(effect_dist_, count, derive_seed(master_seed, 0))),
      generator_(hurst, grid.steps()) {
  model_.validate();
}

SubjectPath CohortSimulator::subject(std::size_t i) const {
  const double phi = effects_.at(i);
  const auto noise = generator_.sample(grid_, derive_seed(master_seed_, i + 1));
  if (model_.scheme == Scheme::ExactFou) {
    const auto& c = model_.coeffs;
    const auto* lin = std::get_if<LinearDrift>(&c.drift());
    return simulate_subject_exact_fou(lin ? lin->rate : 0.0, c.b(0.0), c.sigma(0.0), phi, x0_,
                                      noise);
  }
  return simulate_subject_euler(model_.coeffs, phi, x0_, noise);
}

Cohort simulate_cohort(const ModelSpec& model, const RandomEffectDistribution& effect_dist,
                       std::size_t count, double x0, const TimeGrid& grid, HurstIndex hurst,
                       std::uint64_t master_seed) {
  CohortSimulator sim(model, effect_dist, count, x0, grid, hurst, master_seed);
  std::vector<std::optional<SubjectPath>> slots(count);
  parallel_for(count, [&](std::size_t i) { slots[i] = sim.subject(i); });
  Cohort cohort{{}, model.coeffs, effect_dist};
  cohort.subjects.reserve(count);
  for (auto& s : slots) cohort.subjects.push_back(std::move(*s));
  return cohort;
}

}  // namespace fsde
