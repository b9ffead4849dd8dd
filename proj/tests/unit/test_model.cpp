#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fsde/errors.hpp"
#include "fsde/model.hpp"

using namespace fsde;

namespace {

CoefficientSpec zero_model(double sigma = 1.0) {
  return CoefficientSpec(ZeroDrift{}, ConstantEffect{1.0}, ConstantDiffusion{sigma});
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("A1 is checked at construction") {
  CHECK_THROWS_WITH_AS(CoefficientSpec(ZeroDrift{}, SinusoidEffect{0.0, 1.0, 1.0},
                                       ConstantDiffusion{1.0}),
                       "A1 violated: inf b^2/sigma^2 = 0", ConfigError);
  CHECK_THROWS_AS(CoefficientSpec(ZeroDrift{}, SinusoidEffect{1.0, 1.0, 1.0}, ConstantDiffusion{1.0}),
                  ConfigError);
  CHECK_THROWS_AS(CoefficientSpec(ZeroDrift{}, ConstantEffect{1.0}, ConstantDiffusion{0.0}),
                  ConfigError);
  const CoefficientSpec ok(LinearDrift{2.0}, SinusoidEffect{2.0, 0.5, 3.0}, ConstantDiffusion{0.5});
  // b in [1.5, 2.5], sigma = 0.5
  CHECK(ok.c0_squared() == doctest::Approx(9.0));
  CHECK(ok.c1_squared() == doctest::Approx(25.0));
  CHECK(ok.a(1.5) == -3.0);
  CHECK(ok.b(0.0) == 2.0);
}

TEST_CASE("Euler is exact for state-free drift with constant coefficients") {
  const TimeGrid grid(5.0, 50);
  const auto noise = simulate_fbm(HurstIndex(0.7), grid, 3);
  const auto path = simulate_subject_euler(zero_model(), 0.8, 0.0, noise);
  REQUIRE(path.x.size() == 51);
  CHECK(path.x[0] == 0.0);
  for (std::size_t k = 0; k <= 50; ++k) {
    CHECK(path.x[k] == doctest::Approx(0.8 * grid.time(k) + noise.values[k]).epsilon(1e-12).scale(1.0));
  }
  CHECK(path.true_effect == 0.8);
  CHECK(path.hurst.value() == 0.7);
}

TEST_CASE("Euler tracks the deterministic ODE solution") {
  const CoefficientSpec c(LinearDrift{1.0}, ConstantEffect{1.0}, ConstantDiffusion{1e-8});
  const TimeGrid grid(1.0, 10000);
  const auto path = simulate_subject_euler(c, 1.0, 0.0, grid, HurstIndex(0.6), 9);
  double err = 0.0;
  for (std::size_t k = 0; k <= 10000; ++k) {
    err = std::max(err, std::abs(path.x[k] - (1.0 - std::exp(-grid.time(k)))));
  }
  CHECK(err < 1e-4);
}

TEST_CASE("Euler reports a non-finite state with its step") {
  const CoefficientSpec c(LinearDrift{-1e6}, ConstantEffect{1.0}, ConstantDiffusion{1.0});
  CHECK_THROWS_AS(simulate_subject_euler(c, 1.0, 1.0, TimeGrid(1000.0, 1000), HurstIndex(0.5), 1),
                  NumericalError);
}

TEST_CASE("exact fOU special cases") {
  const TimeGrid grid(4.0, 40);
  const auto noise = simulate_fbm(HurstIndex(0.75), grid, 5);
  const auto p = simulate_subject_exact_fou(0.0, 1.0, 1.0, 1.3, 0.0, noise);
  for (std::size_t k = 0; k <= 40; ++k) {
    CHECK(p.x[k] == doctest::Approx(1.3 * grid.time(k) + noise.values[k]).epsilon(1e-12).scale(1.0));
  }

  const double lam = 3e-3;
  const TimeGrid fine(100.0, 10000);
  const auto q = simulate_subject_exact_fou(lam, 1.0, 0.0, 1.0, 0.0, fine, HurstIndex(0.75), 1);
  double err = 0.0;
  for (std::size_t k = 0; k <= 10000; ++k) {
    err = std::max(err, std::abs(q.x[k] - (1.0 - std::exp(-lam * fine.time(k))) / lam));
  }
  CHECK(err < 1e-6);
  CHECK_THROWS_AS(simulate_subject_exact_fou(-1.0, 1.0, 1.0, 1.0, 0.0, noise), std::domain_error);
}

TEST_CASE("Euler converges to the exact fOU solution on shared noise") {
  const double lam = 0.5;
  const CoefficientSpec c(LinearDrift{lam}, ConstantEffect{1.0}, ConstantDiffusion{1.0});
  const auto fine = simulate_fbm(HurstIndex(0.75), TimeGrid(10.0, 10000), 21);
  double previous = INFINITY;
  for (std::size_t factor : {100u, 10u, 1u}) {
    const auto noise = fine.coarsen(factor);
    const auto euler = simulate_subject_euler(c, 1.2, 0.5, noise);
    const auto exact = simulate_subject_exact_fou(lam, 1.0, 1.0, 1.2, 0.5, noise);
    const double err = max_abs_diff(euler.x, exact.x);
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-2);
}

TEST_CASE("cohorts: determinism, streaming equivalence, effect law, independence") {
  const ModelSpec model{zero_model()};
  const auto law = RandomEffectDistribution::gaussian(1.0, 0.8);
  const TimeGrid grid(2.0, 20);
  const auto a = simulate_cohort(model, law, 1000, 0.0, grid, HurstIndex(0.75), 77);
  const auto b = simulate_cohort(model, law, 1000, 0.0, grid, HurstIndex(0.75), 77);
  REQUIRE(a.subjects.size() == 1000);
  double mean = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(a.subjects[i].x == b.subjects[i].x);
    mean += a.subjects[i].true_effect;
  }
  mean /= 1000.0;
  CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(0.8 / 1000.0));

  const CohortSimulator sim(model, law, 1000, 0.0, grid, HurstIndex(0.75), 77);
  CHECK(sim.subject(412).x == a.subjects[412].x);
  CHECK(sim.effects()[3] == a.subjects[3].true_effect);

  const auto one = simulate_cohort(model, law, 1, 0.0, grid, HurstIndex(0.75), 77);
  CHECK(one.subjects[0].x == a.subjects[0].x);

  // Fixed effect, so terminal values differ only through the noise.
  const auto point = RandomEffectDistribution::uniform(1.0, 1.0 + 1e-12);
  const auto c = simulate_cohort(model, point, 2000, 0.0, grid, HurstIndex(0.75), 5);
  double corr = 0.0, var = 0.0;
  for (std::size_t i = 0; i < 2000; i += 2) {
    const double u = c.subjects[i].x.back() - 2.0;
    const double v = c.subjects[i + 1].x.back() - 2.0;
    corr += u * v;
    var += 0.5 * (u * u + v * v);
  }
  corr /= var;
  CHECK(std::abs(corr) < 4.0 / std::sqrt(1000.0));
}

TEST_CASE("model spec validation for the exact scheme") {
  const CoefficientSpec sinus(ZeroDrift{}, SinusoidEffect{2.0, 0.5, 1.0}, ConstantDiffusion{1.0});
  CHECK_THROWS_AS((ModelSpec{sinus, Scheme::ExactFou}.validate()), ConfigError);
  const CoefficientSpec konst(ConstantDrift{1.0}, ConstantEffect{1.0}, ConstantDiffusion{1.0});
  CHECK_THROWS_AS((ModelSpec{konst, Scheme::ExactFou}.validate()), ConfigError);
  const CoefficientSpec neg(LinearDrift{-1.0}, ConstantEffect{1.0}, ConstantDiffusion{1.0});
  CHECK_THROWS_AS((ModelSpec{neg, Scheme::ExactFou}.validate()), ConfigError);
  CHECK_NOTHROW((ModelSpec{zero_model(), Scheme::ExactFou}.validate()));
}
