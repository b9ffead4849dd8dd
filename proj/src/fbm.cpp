#include "fsde/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>

#include "fsde/errors.hpp"

namespace fsde {

HurstIndex::HurstIndex(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ConfigError("Hurst index must lie in (0, 1), got " + std::to_string(value));
  }
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time grid horizon must be positive, got " + std::to_string(horizon));
  }
  if (steps == 0) throw ConfigError("time grid needs at least one step");
}

FbmPath FbmPath::coarsen(std::size_t factor) const {
  if (factor == 0 || grid.steps() % factor != 0) {
    throw UsageError("coarsen factor must divide the step count");
  }
  FbmPath out{TimeGrid(grid.horizon(), grid.steps() / factor), hurst, {}};
  out.values.reserve(out.grid.steps() + 1);
  for (std::size_t k = 0; k <= grid.steps(); k += factor) out.values.push_back(values[k]);
  return out;
}

double fbm_covariance(double s, double t, HurstIndex hurst) {
  if (s < 0.0 || t < 0.0) throw std::domain_error("fbm_covariance: times must be nonnegative");
  const double two_h = 2.0 * hurst.value();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, HurstIndex hurst) {
  const double two_h = 2.0 * hurst.value();
  const auto k = static_cast<double>(lag);
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

namespace {

// FFTW's planner is not reentrant; execution on fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

constexpr double kEigenClampRatio = 1e-12;

}  // namespace

struct FbmGenerator::Impl {
  HurstIndex hurst;
  std::size_t steps;
  FbmMethod method = FbmMethod::CirculantEmbedding;

  // Circulant embedding: sqrt(lambda_k / m) for the size-m embedding.
  std::size_t embed_size = 0;
  std::vector<double> spectral_scale;
  fftw_plan plan = nullptr;

  // Cholesky factor of the fGn Toeplitz covariance.
  Eigen::MatrixXd lower;

  Impl(HurstIndex h, std::size_t n) : hurst(h), steps(n) {}
  ~Impl() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }

  bool setup_embedding() {
    const std::size_t m = 2 * steps;
    std::vector<double> row(m);
    for (std::size_t k = 0; k <= steps; ++k) row[k] = fgn_autocovariance(k, hurst);
    for (std::size_t k = 1; k < steps; ++k) row[m - k] = row[k];

    FftwBuffer in(m);
    FftwBuffer out(m);
    {
      std::lock_guard lock(planner_mutex());
      plan = fftw_plan_dft_1d(static_cast<int>(m), in.data, out.data, FFTW_FORWARD,
                              FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("fBm generation: FFTW plan creation failed");
    for (std::size_t k = 0; k < m; ++k) {
      in.data[k][0] = row[k];
      in.data[k][1] = 0.0;
    }
    fftw_execute_dft(plan, in.data, out.data);

    double max_eig = 0.0;
    for (std::size_t k = 0; k < m; ++k) max_eig = std::max(max_eig, out.data[k][0]);
    spectral_scale.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      double eig = out.data[k][0];
      if (eig < 0.0) {
        if (-eig > kEigenClampRatio * max_eig) return false;
        eig = 0.0;
      }
      spectral_scale[k] = std::sqrt(eig / static_cast<double>(m));
    }
    embed_size = m;
    return true;
  }

  void setup_cholesky() {
    const auto n = static_cast<Eigen::Index>(steps);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        cov(i, j) = cov(j, i) = fgn_autocovariance(static_cast<std::size_t>(i - j), hurst);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError(
          "fBm generation failed: circulant embedding had negative eigenvalues and the "
          "Cholesky factorisation of the covariance matrix is not positive definite");
    }
    lower = llt.matrixL();
  }

  std::vector<double> draw(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> fgn(steps);
    if (method == FbmMethod::CirculantEmbedding) {
      FftwBuffer in(embed_size);
      FftwBuffer out(embed_size);
      for (std::size_t k = 0; k < embed_size; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        in.data[k][0] = spectral_scale[k] * re;
        in.data[k][1] = spectral_scale[k] * im;
      }
      fftw_execute_dft(plan, in.data, out.data);
      for (std::size_t k = 0; k < steps; ++k) fgn[k] = out.data[k][0];
    } else {
      Eigen::VectorXd z(static_cast<Eigen::Index>(steps));
      for (auto& v : z) v = normal(rng);
      const Eigen::VectorXd x = lower.triangularView<Eigen::Lower>() * z;
      std::copy(x.begin(), x.end(), fgn.begin());
    }
    return fgn;
  }
};

FbmGenerator::FbmGenerator(HurstIndex hurst, std::size_t steps, FbmMethod method)
    : impl_(std::make_unique<Impl>(hurst, steps)) {
  if (steps == 0) throw ConfigError("fBm generator needs at least one step");
  if (method != FbmMethod::Cholesky && impl_->setup_embedding()) {
    impl_->method = FbmMethod::CirculantEmbedding;
    return;
  }
  impl_->setup_cholesky();
  impl_->method = FbmMethod::Cholesky;
}

FbmGenerator::~FbmGenerator() = default;
FbmGenerator::FbmGenerator(FbmGenerator&&) noexcept = default;
FbmGenerator& FbmGenerator::operator=(FbmGenerator&&) noexcept = default;

HurstIndex FbmGenerator::hurst() const noexcept { return impl_->hurst; }
std::size_t FbmGenerator::steps() const noexcept { return impl_->steps; }
FbmMethod FbmGenerator::method() const noexcept { return impl_->method; }

std::vector<double> FbmGenerator::sample_fgn(std::uint64_t seed) const {
  return impl_->draw(seed);
}

FbmPath FbmGenerator::sample(const TimeGrid& grid, std::uint64_t seed) const {
  if (grid.steps() != impl_->steps) {
    throw UsageError("grid step count does not match the fBm generator");
  }
  const auto fgn = impl_->draw(seed);
  const double scale = std::pow(grid.spacing(), impl_->hurst.value());
  FbmPath path{grid, impl_->hurst, std::vector<double>(grid.steps() + 1)};
  path.values[0] = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < fgn.size(); ++k) {
    acc += fgn[k];
    path.values[k + 1] = scale * acc;
  }
  return path;
}

FbmPath simulate_fbm(HurstIndex hurst, const TimeGrid& grid, std::uint64_t seed,
                     FbmMethod method) {
  return FbmGenerator(hurst, grid.steps(), method).sample(grid, seed);
}

}  // namespace fsde
