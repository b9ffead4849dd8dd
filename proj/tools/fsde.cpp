#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "fsde/errors.hpp"
#include "fsde/pipeline.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string preset;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "key = value config file");
  sub->add_option("--seed", opts.seed, "master seed (u64)");
  sub->add_option("--out", opts.out, "output directory");
  sub->add_option("--preset", opts.preset, "figure preset: fig1, fig2, fig3, fig4");
  sub->allow_extras();
}

fsde::RunConfig load_config(const CommonOptions& opts, const std::vector<std::string>& extras) {
  fsde::RunConfig config;
  if (!opts.preset.empty()) config.apply_preset(opts.preset);
  if (!opts.config_path.empty()) config.merge_file(opts.config_path);
  config.merge_overrides(extras);
  if (opts.seed) config.set("seed", std::to_string(*opts.seed));
  if (!opts.out.empty()) config.set("output.dir", opts.out);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-effects fractional SDE simulation and random-effect density estimation"};
  app.require_subcommand(1);

  CommonOptions opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate a cohort and write paths and effects"},
      {"estimate", "estimate the random-effect density from a simulated cohort"},
      {"figures", "reproduce the Langevin figure panels for a preset"},
      {"sweep", "Monte Carlo risk sweep over a ladder of cohort sizes"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, opts);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : subs) {
      if (!sub->parsed()) continue;
      const auto command = fsde::parse_command(sub->get_name());
      const auto config = load_config(opts, sub->remaining());
      const auto outputs = fsde::run_command(command, config);
      for (const auto& f : outputs.files) std::cout << (config.output_dir() / f).string() << '\n';
    }
  } catch (const fsde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fsde::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const fsde::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
