#pragma once

#include <string>
#include <vector>

#include "fsde/config.hpp"

namespace fsde {

inline constexpr const char* kToolName = "fsde";
inline constexpr const char* kToolVersion = "0.1.0";

/// Files a run wrote, relative to the output directory, manifest last.
struct RunOutputs {
  std::vector<std::string> files;
};

/// Cohort paths for the first output.paths subjects and every true effect.
/// Files: effects.csv (subject, phi), paths.csv (subject, k, t, x).
RunOutputs run_simulate(const RunConfig& config);

/// Simulate, estimate effects, estimate their density.
/// Files: effects.csv (subject, phi, estimate), density.csv (x, fhat),
/// truth.csv (x, f), histogram.csv (bin_left, bin_right, height) for
/// histogram kinds.
RunOutputs run_estimate(const RunConfig& config);

/// One panel per (law, H): est_NN.csv per realization, truth.csv and
/// oracle.csv (same estimator on the true effects of realization 0).
RunOutputs run_figures(const RunConfig& config);

/// Monte Carlo risk ladder. Files: risk.csv, risk.json.
RunOutputs run_sweep(const RunConfig& config);

RunOutputs run_command(Command command, const RunConfig& config);

}  // namespace fsde
