#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/model.hpp"
#include "fsde/randeff.hpp"
#include "fsde/risk.hpp"

namespace fsde {

enum class Command { Simulate, Estimate, Figures, Sweep };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Figure presets: kernel (fig1, fig3) or histogram (fig2, fig4) panels at
/// T = 100 (fig1, fig2) or T = 10 (fig3, fig4).
struct FigurePreset {
  std::string name;
  bool histogram;
  double horizon;
  std::size_t realizations;
};

FigurePreset figure_preset(const std::string& name);

/// Run configuration: a flat map of dotted keys ("model.H") to string values.
/// Every key has a default; unknown keys are rejected. Layering order is
/// defaults, preset, config file, command-line overrides.
class RunConfig {
 public:
  RunConfig();

  /// Applies the Langevin figure settings for `preset` (fig1..fig4).
  void apply_preset(const std::string& preset);

  /// Parses "key = value" lines. `[section]` headers prefix following keys
  /// with "section."; '#' and ';' start comments.
  void merge_text(const std::string& text);
  void merge_file(const std::filesystem::path& path);
  /// Applies "--key value" and "--key=value" pairs.
  void merge_overrides(const std::vector<std::string>& args);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  std::uint64_t seed() const { return get_u64("seed"); }
  std::filesystem::path output_dir() const { return get("output.dir"); }

  CoefficientSpec coefficients() const;
  ModelSpec model_spec() const;
  HurstIndex hurst() const;
  TimeGrid time_grid() const;
  RandomEffectDistribution effect_distribution() const;
  /// Distribution for a named law using the effects.* parameters.
  RandomEffectDistribution effect_distribution(const std::string& kind) const;
  EstimatorSpec estimator_spec() const;
  Kernel kernel() const;
  SweepSettings sweep_settings() const;

  /// Builds every typed view so that errors surface at load time with the
  /// offending field named. Throws ConfigError.
  void validate(Command command) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fsde
