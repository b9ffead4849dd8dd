#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "fsde/errors.hpp"
#include "fsde/io.hpp"
#include "fsde/pipeline.hpp"

using namespace fsde;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fsde_pipeline_test_" + name);
  fs::remove_all(dir);
  return dir;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_csv(const fs::path& path) {
  std::istringstream in(io::read_text_file(path));
  Table t;
  std::string line;
  std::getline(in, line);
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
    REQUIRE(row.size() == t.header.size());
    t.rows.push_back(row);
  }
  return t;
}

double trapezoid_mass(const Table& t) {
  double m = 0.0;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    m += 0.5 * (t.rows[i][1] + t.rows[i - 1][1]) * (t.rows[i][0] - t.rows[i - 1][0]);
  }
  return m;
}

RunConfig small(const fs::path& out) {
  RunConfig c;
  c.set("output.dir", out.string());
  c.set("model.N", "40");
  c.set("model.n", "50");
  c.set("model.T", "20");
  c.set("seed", "17");
  return c;
}

json manifest(const fs::path& dir) { return json::parse(io::read_text_file(dir / "manifest.json")); }

// Manifest schema shared by every command.
void check_manifest(const fs::path& dir, const std::string& command, std::uint64_t seed) {
  const auto m = manifest(dir);
  CHECK(m.at("tool") == kToolName);
  CHECK(m.at("version") == kToolVersion);
  CHECK(m.at("command") == command);
  CHECK(m.at("seed").get<std::uint64_t>() == seed);
  CHECK(m.at("config").is_object());
  CHECK(m.at("config").at("seed") == std::to_string(seed));
  for (const auto& f : m.at("files")) CHECK(fs::exists(dir / f.get<std::string>()));
}

}  // namespace

TEST_CASE("simulate writes the documented shapes") {
  const auto dir = scratch("simulate");
  auto c = small(dir);
  c.set("model.N", "2");
  c.set("model.n", "10");
  const auto out = run_simulate(c);
  CHECK(out.files.back() == "manifest.json");
  const auto paths = read_csv(dir / "paths.csv");
  CHECK(paths.header == std::vector<std::string>{"subject", "k", "t", "x"});
  CHECK(paths.rows.size() == 2 * 11);
  CHECK(paths.rows[0][3] == 0.0);
  const auto effects = read_csv(dir / "effects.csv");
  CHECK(effects.header == std::vector<std::string>{"subject", "phi"});
  CHECK(effects.rows.size() == 2);
  check_manifest(dir, "simulate", 17);
}

TEST_CASE("reruns are byte-identical regardless of thread count") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto ca = small(a);
  auto cb = small(b);
  setenv("FSDE_THREADS", "1", 1);
  run_estimate(ca);
  setenv("FSDE_THREADS", "4", 1);
  run_estimate(cb);
  unsetenv("FSDE_THREADS");
  for (const char* f : {"effects.csv", "density.csv", "truth.csv"}) {
    CHECK(io::read_text_file(a / f) == io::read_text_file(b / f));
  }
  // Manifests differ only in the echoed output directory.
  auto ma = manifest(a);
  auto mb = manifest(b);
  ma["config"].erase("output.dir");
  mb["config"].erase("output.dir");
  CHECK(ma == mb);
}

TEST_CASE("estimate: density mass, truth schema, f2 equals f1 under zero drift") {
  const auto d1 = scratch("est_f1");
  auto c = small(d1);
  c.set("model.N", "300");
  run_estimate(c);
  const auto density = read_csv(d1 / "density.csv");
  CHECK(density.header == std::vector<std::string>{"x", "fhat"});
  CHECK(density.rows.size() == 512);
  const double mass = trapezoid_mass(density);
  CHECK(mass >= 0.99);
  CHECK(mass <= 1.01);
  const auto truth = read_csv(d1 / "truth.csv");
  CHECK(truth.header == std::vector<std::string>{"x", "f"});
  const auto effects = read_csv(d1 / "effects.csv");
  CHECK(effects.header == std::vector<std::string>{"subject", "phi", "estimate"});
  const auto m = manifest(d1);
  CHECK(m.at("l1_distance").get<double>() > 0.0);
  CHECK(m.at("warnings").empty());
  check_manifest(d1, "estimate", 17);

  const auto d2 = scratch("est_f2");
  auto c2 = small(d2);
  c2.set("model.N", "300");
  c2.set("estimator.kind", "f2");
  run_estimate(c2);
  CHECK(io::read_text_file(d1 / "density.csv") == io::read_text_file(d2 / "density.csv"));
}

TEST_CASE("estimate: trimmed histogram on uniform effects") {
  const auto dir = scratch("est_f3");
  auto c = small(dir);
  c.set("model.N", "200");
  c.set("model.T", "400");
  c.set("effects.kind", "uniform");
  c.set("estimator.kind", "f3");
  c.set("estimator.bandwidth", "histogram");
  c.set("estimator.c", "2");
  run_estimate(c);
  const auto density = read_csv(dir / "density.csv");
  for (const auto& row : density.rows) {
    if (row[0] < 0.0 || row[0] > 1.0) CHECK(row[1] == 0.0);
  }
  // 400 < J^4 for any sensible bin count here
  CHECK(manifest(dir).at("warnings").size() == 1);
  const auto bins = read_csv(dir / "histogram.csv");
  CHECK(bins.header == std::vector<std::string>{"bin_left", "bin_right", "height"});
  for (const auto& row : bins.rows) CHECK(row[1] > row[0]);

  const auto f4 = scratch("est_f4");
  c.set("output.dir", f4.string());
  c.set("estimator.kind", "f4");
  run_estimate(c);
  CHECK(io::read_text_file(dir / "histogram.csv") == io::read_text_file(f4 / "histogram.csv"));
}

TEST_CASE("figures: file counts, panels and notes") {
  const auto dir = scratch("fig1");
  RunConfig c;
  c.apply_preset("fig1");
  c.set("output.dir", dir.string());
  c.set("model.N", "60");
  c.set("model.n", "100");
  c.set("figures.laws", "gaussian");
  c.set("figures.H", "0.75");
  run_figures(c);
  const auto m = manifest(dir);
  REQUIRE(m.at("panels").size() == 1);
  const auto& panel = m.at("panels")[0];
  CHECK(panel.at("estimates").size() == 25);
  CHECK(panel.at("histogram") == false);
  CHECK(fs::exists(dir / panel.at("truth").get<std::string>()));
  CHECK(fs::exists(dir / panel.at("oracle").get<std::string>()));
  const auto est = read_csv(dir / panel.at("estimates")[0].get<std::string>());
  CHECK(est.header == std::vector<std::string>{"x", "fhat"});
  bool noted = false;
  for (const auto& n : m.at("notes")) noted |= n.get<std::string>().find("50") != std::string::npos;
  CHECK(noted);
  check_manifest(dir, "figures", 1);

  const auto d2 = scratch("fig2");
  RunConfig h;
  h.apply_preset("fig2");
  h.set("output.dir", d2.string());
  h.set("model.N", "60");
  h.set("model.n", "100");
  h.set("figures.laws", "gamma");
  h.set("figures.H", "0.85");
  run_figures(h);
  const auto m2 = manifest(d2);
  CHECK(m2.at("panels")[0].at("estimates").size() == 10);
  const auto bins = read_csv(d2 / m2.at("panels")[0].at("estimates")[0].get<std::string>());
  CHECK(bins.header == std::vector<std::string>{"bin_left", "bin_right", "height"});

  const auto d3 = scratch("fig3");
  RunConfig t;
  t.apply_preset("fig3");
  t.set("output.dir", d3.string());
  t.set("model.N", "20");
  t.set("figures.laws", "gaussian");
  t.set("figures.H", "0.25");
  t.set("figures.realizations", "2");
  run_figures(t);
  CHECK(manifest(d3).at("horizon").get<double>() == 10.0);
}

TEST_CASE("sweep writes risk.csv and risk.json with slopes") {
  const auto dir = scratch("sweep");
  auto c = small(dir);
  c.set("sweep.N_list", "16,32,64");
  c.set("sweep.replicates", "8");
  c.set("sweep.T_rule", "fixed");
  c.set("estimator.oracle", "true");
  c.set("estimator.beta", "3");
  run_sweep(c);
  const auto risk = json::parse(io::read_text_file(dir / "risk.json"));
  CHECK(risk.contains("fitted_slope"));
  CHECK(risk.at("target_slope").get<double>() == doctest::Approx(-6.0 / 7.0));
  CHECK(risk.at("fitted_slope").get<double>() < 0.0);
  CHECK(risk.at("entries").size() == 3);
  const auto csv = read_csv(dir / "risk.csv");
  CHECK(csv.header.front() == "N");
  CHECK(csv.rows.size() == 3);
  check_manifest(dir, "sweep", 17);
}

TEST_CASE("unwritable output reports an I/O error") {
  const auto file = scratch("blocker");
  io::write_text_file(file, "x");
  auto c = small(file / "sub");
  CHECK_THROWS_AS(run_simulate(c), IoError);
}
