#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace fsde {

/// Hurst index H, strictly inside (0, 1).
class HurstIndex {
 public:
  explicit HurstIndex(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Uniform grid t_k = k * horizon / steps, k = 0..steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double spacing() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t k) const noexcept {
    return k == steps_ ? horizon_ : spacing() * static_cast<double>(k);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

struct FbmPath {
  TimeGrid grid;
  HurstIndex hurst;
  std::vector<double> values;  // steps + 1 entries, values[0] == 0

  /// Keeps every `factor`-th point. The result lives on the grid with
  /// steps / factor steps and the same horizon.
  FbmPath coarsen(std::size_t factor) const;
};

enum class FbmMethod { Auto, CirculantEmbedding, Cholesky };

/// E[W_s W_t] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2. Throws std::domain_error
/// for negative times.
double fbm_covariance(double s, double t, HurstIndex hurst);

/// Autocovariance at lag k of unit-spaced fBm increments.
double fgn_autocovariance(std::size_t lag, HurstIndex hurst);

/// Exact sampler for fBm on a fixed (H, steps) pair. Construction does the
/// O(n log n) spectral setup once; draws are then cheap and thread-safe.
class FbmGenerator {
 public:
  FbmGenerator(HurstIndex hurst, std::size_t steps, FbmMethod method = FbmMethod::Auto);
  ~FbmGenerator();
  FbmGenerator(FbmGenerator&&) noexcept;
  FbmGenerator& operator=(FbmGenerator&&) noexcept;

  /// Unit-spaced fractional Gaussian noise of length `steps`.
  std::vector<double> sample_fgn(std::uint64_t seed) const;

  /// fBm on `grid` (which must have the generator's step count), scaled by
  /// spacing^H from the unit grid.
  FbmPath sample(const TimeGrid& grid, std::uint64_t seed) const;

  HurstIndex hurst() const noexcept;
  std::size_t steps() const noexcept;
  /// Method actually in use after any fallback.
  FbmMethod method() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One exact fBm draw. Identical (H, grid, seed) give bit-identical paths.
FbmPath simulate_fbm(HurstIndex hurst, const TimeGrid& grid, std::uint64_t seed,
                     FbmMethod method = FbmMethod::Auto);

}  // namespace fsde
