#include "fsde/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fsde/errors.hpp"
#include "fsde/io.hpp"

namespace fsde {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

// Rethrows construction errors with the config section that caused them.
template <class Fn>
auto in_section(const std::string& section, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(section + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"seed", "1"},
      {"model.drift", "zero"},
      {"model.lambda", "0.003"},
      {"model.drift_value", "0"},
      {"model.drift_known", "true"},
      {"model.b", "constant"},
      {"model.b0", "1"},
      {"model.b_amplitude", "0"},
      {"model.b_frequency", "1"},
      {"model.sigma", "1"},
      {"model.scheme", "euler"},
      {"model.H", "0.75"},
      {"model.T", "100"},
      {"model.n", "1000"},
      {"model.N", "1000"},
      {"model.x0", "0"},
      {"effects.kind", "gaussian"},
      {"effects.mean", "1"},
      {"effects.variance", "0.8"},
      {"effects.shape", "2"},
      {"effects.scale", "0.9"},
      {"effects.lower", "0"},
      {"effects.upper", "1"},
      {"estimator.kind", "f1"},
      {"estimator.kernel", "gaussian"},
      {"estimator.order", "2"},
      {"estimator.bandwidth", "kernel"},
      {"estimator.beta", "2"},
      {"estimator.alpha", "auto"},
      {"estimator.delta", "0.4"},
      {"estimator.c", "1"},
      {"estimator.h", "0.1"},
      {"estimator.oracle", "false"},
      {"sweep.N_list", "64,256,1024"},
      {"sweep.replicates", "32"},
      {"sweep.T_rule", "kernel_rate"},
      {"sweep.T_cap", "2000"},
      {"sweep.max_spacing", "0"},
      {"sweep.work_budget", "5e10"},
      {"output.dir", "out"},
      {"output.grid_min", "auto"},
      {"output.grid_max", "auto"},
      {"output.grid_points", "512"},
      {"output.paths", "10"},
      {"figures.laws", "gaussian,gamma"},
      {"figures.H", "0.25,0.75,0.85"},
      {"figures.realizations", "auto"},
      {"figures.preset", "none"},
  };
  return defaults;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "estimate") return Command::Estimate;
  if (name == "figures") return Command::Figures;
  if (name == "sweep") return Command::Sweep;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::Figures: return "figures";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

FigurePreset figure_preset(const std::string& name) {
  if (name == "fig1") return {name, false, 100.0, 25};
  if (name == "fig2") return {name, true, 100.0, 10};
  if (name == "fig3") return {name, false, 10.0, 25};
  if (name == "fig4") return {name, true, 10.0, 10};
  throw ConfigError("unknown figure preset '" + name + "' (expected fig1, fig2, fig3 or fig4)");
}

RunConfig::RunConfig() : values_(default_values()) {}

void RunConfig::apply_preset(const std::string& preset) {
  const auto p = figure_preset(preset);
  set("figures.preset", p.name);
  set("model.drift", "linear");
  set("model.lambda", "0.003");
  set("model.b", "constant");
  set("model.b0", "1");
  set("model.sigma", "1");
  set("model.scheme", "exact");
  set("model.x0", "0");
  set("model.N", "1000");
  set("model.T", io::format_double(p.horizon));
  set("model.n", std::to_string(static_cast<std::size_t>(p.horizon / 0.1)));
  set("effects.mean", "1");
  set("effects.variance", "0.8");
  set("effects.shape", "2");
  set("effects.scale", "0.9");
  if (p.histogram) {
    set("estimator.kind", "f3");
    set("estimator.bandwidth", "histogram");
    set("estimator.delta", "0.4");
    set("estimator.c", "50");
  } else {
    set("estimator.kind", "f1");
    set("estimator.bandwidth", "kernel");
    set("estimator.kernel", "gaussian");
    set("estimator.beta", "2");
    set("estimator.alpha", "auto");
  }
}

void RunConfig::merge_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    set(key, trim(line.substr(eq + 1)));
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) { merge_text(io::read_text_file(path)); }

void RunConfig::merge_overrides(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& arg = args[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw ConfigError("unexpected argument '" + arg + "'");
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      set(arg.substr(2, eq - 2), arg.substr(eq + 1));
      continue;
    }
    if (i + 1 >= args.size()) throw ConfigError(arg + ": missing value");
    set(arg.substr(2), args[i + 1]);
    ++i;
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return parse_number<double>(key, get(key));
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return parse_number<std::size_t>(key, get(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(get(key), ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError(key + ": list is empty");
  return out;
}

std::vector<std::string> RunConfig::get_string_list(const std::string& key) const {
  auto out = split(get(key), ',');
  if (out.empty()) throw ConfigError(key + ": list is empty");
  return out;
}

CoefficientSpec RunConfig::coefficients() const {
  return in_section("model", [&] {
    DriftFamily drift;
    const auto& d = get("model.drift");
    if (d == "zero") {
      drift = ZeroDrift{};
    } else if (d == "linear") {
      drift = LinearDrift{get_double("model.lambda")};
    } else if (d == "constant") {
      drift = ConstantDrift{get_double("model.drift_value")};
    } else {
      throw ConfigError("model.drift must be zero, linear or constant, got '" + d + "'");
    }

    EffectFamily effect;
    const auto& b = get("model.b");
    if (b == "constant") {
      effect = ConstantEffect{get_double("model.b0")};
    } else if (b == "sinusoid") {
      effect = SinusoidEffect{get_double("model.b0"), get_double("model.b_amplitude"),
                              get_double("model.b_frequency")};
    } else {
      throw ConfigError("model.b must be constant or sinusoid, got '" + b + "'");
    }
    return CoefficientSpec(drift, effect, ConstantDiffusion{get_double("model.sigma")});
  });
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec{coefficients()};
  const auto& scheme = get("model.scheme");
  if (scheme == "euler") {
    spec.scheme = Scheme::Euler;
  } else if (scheme == "exact") {
    spec.scheme = Scheme::ExactFou;
  } else {
    throw ConfigError("model.scheme must be euler or exact, got '" + scheme + "'");
  }
  in_section("model", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

HurstIndex RunConfig::hurst() const {
  return in_section("model.H", [&] { return HurstIndex(get_double("model.H")); });
}

TimeGrid RunConfig::time_grid() const {
  return in_section("model", [&] { return TimeGrid(get_double("model.T"), get_size("model.n")); });
}

RandomEffectDistribution RunConfig::effect_distribution() const {
  return effect_distribution(get("effects.kind"));
}

RandomEffectDistribution RunConfig::effect_distribution(const std::string& kind) const {
  return in_section("effects", [&] {
    if (kind == "gaussian") {
      return RandomEffectDistribution::gaussian(get_double("effects.mean"),
                                                get_double("effects.variance"));
    }
    if (kind == "gamma") {
      return RandomEffectDistribution::gamma(get_double("effects.shape"),
                                             get_double("effects.scale"));
    }
    if (kind == "uniform") {
      return RandomEffectDistribution::uniform(get_double("effects.lower"),
                                               get_double("effects.upper"));
    }
    throw ConfigError("effects.kind must be gaussian, gamma or uniform, got '" + kind + "'");
  });
}

Kernel RunConfig::kernel() const {
  const auto& k = get("estimator.kernel");
  if (k == "gaussian") return Kernel::gaussian();
  if (k == "epanechnikov") return Kernel::epanechnikov();
  if (k == "uniform") return Kernel::uniform();
  if (k == "legendre") {
    return in_section("estimator", [&] {
      return Kernel::legendre(static_cast<unsigned>(get_size("estimator.order")));
    });
  }
  throw ConfigError("estimator.kernel must be gaussian, epanechnikov, uniform or legendre");
}

EstimatorSpec RunConfig::estimator_spec() const {
  return in_section("estimator", [&] {
    EstimatorSpec spec;
    spec.kind = parse_density_estimator_kind(get("estimator.kind"));
    spec.kernel = kernel();
    spec.oracle = get_bool("estimator.oracle");
    const auto& rule = get("estimator.bandwidth");
    if (rule == "kernel") {
      KernelRule kr{get_double("estimator.beta"), std::nullopt};
      if (!(kr.beta > 0.0)) throw ConfigError("estimator.beta must be positive");
      if (get("estimator.alpha") != "auto") {
        kr.alpha = get_double("estimator.alpha");
        if (!(*kr.alpha > 0.0)) throw ConfigError("estimator.alpha must be positive");
      }
      spec.bandwidth = kr;
    } else if (rule == "histogram") {
      HistogramRule hr{get_double("estimator.delta"), get_double("estimator.c")};
      // Surfaces the delta range check.
      histogram_bandwidth(1, hr.delta, hr.scale);
      spec.bandwidth = hr;
    } else if (rule == "explicit") {
      spec.bandwidth = ExplicitBandwidth{Bandwidth(get_double("estimator.h")).value()};
    } else {
      throw ConfigError("estimator.bandwidth must be kernel, histogram or explicit");
    }
    const bool needs_drift = spec.kind == DensityEstimatorKind::F2 ||
                             spec.kind == DensityEstimatorKind::F4;
    if (needs_drift && !get_bool("model.drift_known")) {
      throw ConfigError("estimator kinds f2 and f4 require a known drift (model.drift_known)");
    }
    return spec;
  });
}

SweepSettings RunConfig::sweep_settings() const {
  SweepSettings s{model_spec(), effect_distribution()};
  s.x0 = get_double("model.x0");
  s.hurst = hurst().value();
  s.steps = get_size("model.n");
  s.estimator = estimator_spec();
  s.seed = seed();
  in_section("sweep", [&] {
    s.replicates = get_size("sweep.replicates");
    if (s.replicates < 8) throw ConfigError("sweep.replicates must be at least 8");
    for (double n : get_double_list("sweep.N_list")) {
      if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("sweep.N_list entries must be positive integers");
      s.counts.push_back(static_cast<std::size_t>(n));
    }
    if (!std::is_sorted(s.counts.begin(), s.counts.end())) {
      throw ConfigError("sweep.N_list must be ascending");
    }
    const auto& rule = get("sweep.T_rule");
    s.horizon.fixed = get_double("model.T");
    s.horizon.cap = get_double("sweep.T_cap");
    if (rule == "fixed") {
      s.horizon.kind = HorizonRule::Kind::Fixed;
    } else if (rule == "kernel_rate") {
      s.horizon.kind = HorizonRule::Kind::KernelRate;
    } else if (rule == "histogram_bins") {
      s.horizon.kind = HorizonRule::Kind::HistogramBins;
    } else {
      throw ConfigError("sweep.T_rule must be fixed, kernel_rate or histogram_bins");
    }
    if (!(s.horizon.cap > 0.0)) throw ConfigError("sweep.T_cap must be positive");
    s.max_spacing = get_double("sweep.max_spacing");
    s.work_budget = get_double("sweep.work_budget");
    return 0;
  });
  return s;
}

void RunConfig::validate(Command command) const {
  seed();
  model_spec();
  hurst();
  time_grid();
  effect_distribution();
  estimator_spec();
  in_section("model", [&] {
    if (get_size("model.N") == 0) throw ConfigError("model.N must be at least 1");
    get_double("model.x0");
    return 0;
  });
  in_section("output", [&] {
    if (get_size("output.grid_points") < 2) throw ConfigError("output.grid_points must be >= 2");
    if (get("output.grid_min") != "auto") get_double("output.grid_min");
    if (get("output.grid_max") != "auto") get_double("output.grid_max");
    get_size("output.paths");
    return 0;
  });
  if (command == Command::Sweep) sweep_settings();
  if (command == Command::Figures) {
    if (get("figures.preset") == "none") {
      throw ConfigError("figures.preset: the figures command needs a preset (fig1..fig4)");
    }
    figure_preset(get("figures.preset"));
    for (const auto& law : get_string_list("figures.laws")) effect_distribution(law);
    for (double h : get_double_list("figures.H")) {
      in_section("figures.H", [&] { return HurstIndex(h); });
    }
    if (get("figures.realizations") != "auto" && get_size("figures.realizations") == 0) {
      throw ConfigError("figures.realizations must be positive");
    }
  }
}

}  // namespace fsde
