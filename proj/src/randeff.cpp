#include "fsde/randeff.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fsde/errors.hpp"

namespace fsde {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double gamma_log_norm(const GammaLaw& g) {
  return std::lgamma(g.shape) + g.shape * std::log(g.scale);
}

}  // namespace

bool Interval::bounded() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }

RandomEffectDistribution::RandomEffectDistribution(Law law) : law_(law) {
  std::visit(overloaded{
                 [](const GaussianLaw& g) {
                   if (!std::isfinite(g.mean)) throw ConfigError("Gaussian mean must be finite");
                   if (!(g.variance > 0.0) || !std::isfinite(g.variance)) {
                     throw ConfigError("Gaussian variance must be positive");
                   }
                 },
                 [](const GammaLaw& g) {
                   if (!(g.scale > 0.0) || !std::isfinite(g.scale)) {
                     throw ConfigError("Gamma scale must be positive");
                   }
                   if (!(g.shape >= 1.0) || !std::isfinite(g.shape)) {
                     throw ConfigError(
                         "Gamma shape must be >= 1 (bounded density derivative required)");
                   }
                 },
                 [](const UniformLaw& u) {
                   if (!(u.lower < u.upper) || !std::isfinite(u.lower) ||
                       !std::isfinite(u.upper)) {
                     throw ConfigError("Uniform bounds must satisfy lower < upper");
                   }
                 },
             },
             law_);
}

RandomEffectDistribution RandomEffectDistribution::gaussian(double mean, double variance) {
  return RandomEffectDistribution(GaussianLaw{mean, variance});
}
RandomEffectDistribution RandomEffectDistribution::gamma(double shape, double scale) {
  return RandomEffectDistribution(GammaLaw{shape, scale});
}
RandomEffectDistribution RandomEffectDistribution::uniform(double lower, double upper) {
  return RandomEffectDistribution(UniformLaw{lower, upper});
}

std::string RandomEffectDistribution::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const GaussianLaw& g) { os << "gaussian(" << g.mean << "," << g.variance << ")"; },
                 [&](const GammaLaw& g) { os << "gamma(" << g.shape << "," << g.scale << ")"; },
                 [&](const UniformLaw& u) { os << "uniform(" << u.lower << "," << u.upper << ")"; },
             },
             law_);
  return os.str();
}

double RandomEffectDistribution::density(double x) const {
  return std::visit(
      overloaded{
          [x](const GaussianLaw& g) {
            const double z = x - g.mean;
            return std::exp(-0.5 * z * z / g.variance) /
                   std::sqrt(2.0 * std::numbers::pi * g.variance);
          },
          [x](const GammaLaw& g) {
            if (x < 0.0) return 0.0;
            if (x == 0.0) return g.shape == 1.0 ? 1.0 / g.scale : 0.0;
            return std::exp((g.shape - 1.0) * std::log(x) - x / g.scale - gamma_log_norm(g));
          },
          [x](const UniformLaw& u) {
            return (x >= u.lower && x <= u.upper) ? 1.0 / (u.upper - u.lower) : 0.0;
          },
      },
      law_);
}

double RandomEffectDistribution::density_derivative(double x) const {
  return std::visit(
      overloaded{
          [&](const GaussianLaw& g) { return -(x - g.mean) / g.variance * density(x); },
          [&](const GammaLaw& g) {
            if (x < 0.0) return 0.0;
            // f'(x) = [(k-1) x^{k-2} - x^{k-1}/theta] e^{-x/theta} / (Gamma(k) theta^k)
            const double norm = std::exp(-x / g.scale - gamma_log_norm(g));
            const double first = g.shape == 1.0 ? 0.0 : (g.shape - 1.0) * std::pow(x, g.shape - 2.0);
            return (first - std::pow(x, g.shape - 1.0) / g.scale) * norm;
          },
          [](const UniformLaw&) { return 0.0; },
      },
      law_);
}

Interval RandomEffectDistribution::support() const {
  return std::visit(overloaded{
                        [](const GaussianLaw&) { return Interval{}; },
                        [](const GammaLaw&) {
                          return Interval{0.0, std::numeric_limits<double>::infinity()};
                        },
                        [](const UniformLaw& u) { return Interval{u.lower, u.upper}; },
                    },
                    law_);
}

Interval RandomEffectDistribution::effective_support(double tolerance) const {
  return std::visit(
      overloaded{
          [&](const GaussianLaw& g) {
            const double sd = std::sqrt(g.variance);
            const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * g.variance);
            const double z = peak > tolerance ? std::sqrt(2.0 * std::log(peak / tolerance)) : 0.0;
            return Interval{g.mean - z * sd, g.mean + z * sd};
          },
          [&](const GammaLaw& g) {
            // Past the mode the density is decreasing; walk out until below tolerance.
            double hi = std::max(1.0, (g.shape - 1.0) * g.scale) + g.scale;
            while (density(hi) >= tolerance) hi *= 1.25;
            return Interval{0.0, hi};
          },
          [](const UniformLaw& u) { return Interval{u.lower, u.upper}; },
      },
      law_);
}

std::vector<double> RandomEffectDistribution::breakpoints() const {
  const auto s = support();
  std::vector<double> out;
  if (std::isfinite(s.lower)) out.push_back(s.lower);
  if (std::isfinite(s.upper)) out.push_back(s.upper);
  return out;
}

double RandomEffectDistribution::mean() const {
  return std::visit(overloaded{
                        [](const GaussianLaw& g) { return g.mean; },
                        [](const GammaLaw& g) { return g.shape * g.scale; },
                        [](const UniformLaw& u) { return 0.5 * (u.lower + u.upper); },
                    },
                    law_);
}

double RandomEffectDistribution::variance() const {
  return std::visit(overloaded{
                        [](const GaussianLaw& g) { return g.variance; },
                        [](const GammaLaw& g) { return g.shape * g.scale * g.scale; },
                        [](const UniformLaw& u) {
                          const double w = u.upper - u.lower;
                          return w * w / 12.0;
                        },
                    },
                    law_);
}

double RandomEffectDistribution::max_density() const {
  return std::visit(overloaded{
                        [this](const GaussianLaw& g) { return density(g.mean); },
                        [this](const GammaLaw& g) { return density((g.shape - 1.0) * g.scale); },
                        [](const UniformLaw& u) { return 1.0 / (u.upper - u.lower); },
                    },
                    law_);
}

std::vector<double> RandomEffectDistribution::sample(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  std::visit(overloaded{
                 [&](const GaussianLaw& g) {
                   std::normal_distribution<double> d(g.mean, std::sqrt(g.variance));
                   for (auto& v : out) v = d(rng);
                 },
                 [&](const GammaLaw& g) {
                   std::gamma_distribution<double> d(g.shape, g.scale);
                   for (auto& v : out) v = d(rng);
                 },
                 [&](const UniformLaw& u) {
                   std::uniform_real_distribution<double> d(u.lower, u.upper);
                   for (auto& v : out) v = d(rng);
                 },
             },
             law_);
  return out;
}

std::vector<double> sample_effects(const RandomEffectDistribution& dist, std::size_t count,
                                   std::uint64_t seed) {
  if (count == 0) throw ConfigError("sample_effects: N must be at least 1");
  return dist.sample(count, seed);
}

std::vector<double> density_on_grid(const RandomEffectDistribution& dist,
                                    std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = dist.density(xs[i]);
  return out;
}

}  // namespace fsde
