#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fsde/density.hpp"
#include "fsde/errors.hpp"

using namespace fsde;

namespace {

template <class Fn>
double simpson_oracle(Fn fn, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const double dx = (b - a) / static_cast<double>(n);
  double s = fn(a) + fn(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * fn(a + dx * static_cast<double>(i));
  return s * dx / 3.0;
}

double gauss_k(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

std::vector<Kernel> all_kernels() {
  return {Kernel::gaussian(), Kernel::epanechnikov(), Kernel::uniform(), Kernel::legendre(1),
          Kernel::legendre(2), Kernel::legendre(3), Kernel::legendre(4)};
}

double kernel_radius(const Kernel& k) { return k.kind() == KernelKind::Gaussian ? 12.0 : 1.0; }

}  // namespace

TEST_CASE("kernels integrate to one and Legendre moments vanish") {
  for (const auto& k : all_kernels()) {
    const double r = kernel_radius(k);
    CHECK(simpson_oracle([&](double u) { return k(u); }, -r, r, 20000) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  for (unsigned l = 1; l <= 4; ++l) {
    const auto k = Kernel::legendre(l);
    CHECK(k.order() == l);
    for (unsigned j = 1; j <= l; ++j) {
      const double m = simpson_oracle([&](double u) { return std::pow(u, j) * k(u); }, -1, 1, 2000);
      CHECK(std::abs(m) < 1e-10);
    }
  }
  CHECK_THROWS_AS(Kernel::legendre(0), ConfigError);
}

TEST_CASE("order-2 Legendre kernel closed form") {
  const auto k = make_legendre_kernel(2);
  for (int i = 0; i <= 100; ++i) {
    const double u = -1.0 + 0.02 * i;
    CHECK(std::abs(k(u) - (9.0 - 15.0 * u * u) / 8.0) < 1e-12);
    CHECK(std::abs(k.derivative(u) - (-30.0 * u / 8.0)) < 1e-12);
  }
  CHECK(k(1.5) == 0.0);
  // ||K||^2 = int ((9 - 15u^2)/8)^2 = 9/8
  CHECK(k.norm_sq() == doctest::Approx(9.0 / 8.0).epsilon(1e-13));
}

TEST_CASE("kernel norms against independent quadrature") {
  for (const auto& k : all_kernels()) {
    const double r = kernel_radius(k);
    const double n2 = simpson_oracle([&](double u) { return k(u) * k(u); }, -r, r, 20000);
    const double d2 =
        simpson_oracle([&](double u) { return k.derivative(u) * k.derivative(u); }, -r, r, 20000);
    CHECK(k.norm_sq() == doctest::Approx(n2).epsilon(1e-9));
    CHECK(k.derivative_norm_sq() == doctest::Approx(d2).epsilon(1e-9).scale(1.0));
  }
  CHECK(Kernel::gaussian().norm_sq() == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)));
  CHECK(Kernel::gaussian().effective_radius() > 38.0);
  CHECK(Kernel::epanechnikov().support_radius() == 1.0);
  CHECK(std::isinf(Kernel::gaussian().support_radius()));
}

TEST_CASE("kde equals the brute-force sum") {
  const std::vector<double> phis = {0.3, -1.2, 2.05, 0.31, 1.0};
  for (const auto& k : all_kernels()) {
    for (std::size_t n = 1; n <= phis.size(); ++n) {
      const std::vector<double> sample(phis.begin(), phis.begin() + static_cast<long>(n));
      const double h = 0.7;
      const auto est = kde(sample, k, Bandwidth(h));
      for (double x = -3.0; x <= 4.0; x += 0.173) {
        double want = 0.0;
        for (double p : sample) want += k((x - p) / h);
        want /= static_cast<double>(n) * h;
        CHECK(std::abs(est(x) - want) < 1e-12);
      }
    }
  }
  const std::vector<double> one = {0.0};
  CHECK(kde(one, Kernel::gaussian(), Bandwidth(1.0))(0.0) == doctest::Approx(gauss_k(0.0)));
  CHECK_THROWS_AS(kde(std::vector<double>{}, Kernel::gaussian(), Bandwidth(1.0)), ConfigError);
  CHECK_THROWS_AS(Bandwidth(0.0), ConfigError);
}

TEST_CASE("histogram equals the brute-force count") {
  const std::vector<double> phis = {0.3, -1.2, 2.05, 0.31, 0.5};
  const double h = 0.25;
  for (std::size_t n = 1; n <= phis.size(); ++n) {
    const std::vector<double> sample(phis.begin(), phis.begin() + static_cast<long>(n));
    const auto est = histogram(sample, Bandwidth(h));
    CHECK(est.is_histogram());
    for (double x = -2.0; x <= 3.0; x += 0.0371) {
      const double j = std::floor(x / h);
      double count = 0.0;
      for (double p : sample) count += (p >= h * j && p < h * (j + 1)) ? 1.0 : 0.0;
      CHECK(std::abs(est(x) - count / (static_cast<double>(n) * h)) < 1e-12);
    }
  }
}

TEST_CASE("bin edges are half-open and histograms carry unit mass") {
  CHECK(bin_index(0.0, 0.1) == 0);
  CHECK(bin_index(0.3, 0.1) == 2);  // 0.1 * 3 = 0.30000000000000004 > 0.3
  CHECK(bin_index(-1e-300, 0.5) == -1);
  for (std::int64_t j = -50; j <= 50; ++j) CHECK(bin_index(0.1 * static_cast<double>(j), 0.1) == j);

  const auto sample = RandomEffectDistribution::gamma(2.0, 0.9).sample(500, 3);
  const auto est = histogram(sample, Bandwidth(0.3));
  const auto& form = std::get<HistogramForm>(est.form());
  double mass = 0.0;
  for (std::size_t i = 0; i < form.heights.size(); ++i) {
    mass += form.heights[i] * (form.bin_right(i) - form.bin_left(i));
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trimmed histograms vanish outside the support") {
  const std::vector<double> sample = {-0.05, 0.2, 0.7, 0.99, 1.04};
  const auto est = histogram(sample, Bandwidth(0.3), Interval{0.0, 1.0});
  CHECK(est(-0.01) == 0.0);
  CHECK(est(1.01) == 0.0);
  CHECK(est(0.25) > 0.0);
  const auto ext = est.extent();
  CHECK(ext.lower == 0.0);
  CHECK(ext.upper == 1.0);
  const auto bp = est.breakpoints();
  CHECK(std::find(bp.begin(), bp.end(), 1.0) != bp.end());
}

TEST_CASE("bandwidth rules") {
  CHECK(kernel_bandwidth(2.0, 1.5, 1024).value() == doctest::Approx(1.5 * std::pow(1024.0, -0.2)));
  CHECK(histogram_bandwidth(1000, 0.4, 2.0).value() ==
        doctest::Approx(2.0 * std::pow(1000.0, -1.0 / 1.2)));
  CHECK_THROWS_AS(histogram_bandwidth(1000, 0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(histogram_bandwidth(1000, 1.0 / 3.0, 1.0), std::domain_error);
  const std::vector<double> s = {1.0, 2.0, 3.0, 4.0, 100.0};
  // sd = 43.4..., IQR = 4 - 2 = 2 -> 2 / 1.34
  CHECK(normal_reference_scale(s) == doctest::Approx(1.06 * 2.0 / 1.34));
  CHECK_THROWS_AS(normal_reference_scale(std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("smoothing bias of a Gaussian kernel on a Gaussian density") {
  // K_h * N(m, v) = N(m, v + h^2); int g_a^2 = 1/(2 sqrt(pi a)), int g_a g_b = 1/sqrt(2 pi (a + b))
  const double v = 0.8, h = 0.4;
  const double a = v + h * h;
  const double want = 0.5 / std::sqrt(std::numbers::pi * a) + 0.5 / std::sqrt(std::numbers::pi * v) -
                      2.0 / std::sqrt(2.0 * std::numbers::pi * (a + v));
  const auto truth = RandomEffectDistribution::gaussian(1.0, v);
  CHECK(smoothing_bias_sq(truth, Kernel::gaussian(), h) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("risk bound terms") {
  const auto truth = RandomEffectDistribution::gaussian(1.0, 0.8);
  const auto k = Kernel::epanechnikov();
  RiskBoundInputs in{0.3, 500, 100.0, 0.75};
  const auto t = l2_risk_bound_terms(truth, k, in);
  CHECK(t.variance == doctest::Approx(0.6 / (500 * 0.3)));
  const double plug = 1.5 / (100.0 * std::pow(0.3, 3)) * (1.0 + 1.0 + 2.0 / std::pow(100.0, 0.25));
  CHECK(t.plug_in == doctest::Approx(plug));
  CHECK(t.bias == doctest::Approx(2.0 * smoothing_bias_sq(truth, k, 0.3)));
  CHECK(t.total() == doctest::Approx(t.bias + t.variance + t.plug_in));
}
