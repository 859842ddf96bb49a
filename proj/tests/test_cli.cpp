#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "edicke/sweep_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kSmall = " --set j=4 --set n_cutoff=60";

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("edicke_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(EDICKE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("spectrum writes the windowed levels") {
  const auto out = scratch_dir("spectrum");
  REQUIRE(run("spectrum" + kSmall + " --set lambda=0.7 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "spectrum.csv"));
  const auto meta = read_json(out / "spectrum_meta.json");
  CHECK(meta.contains("params"));
}

TEST_CASE("spacing, ratio and eigstats histograms") {
  const auto out = scratch_dir("histos");
  const std::string common = kSmall + " --set lambda=1.0 --set kappa=0.5 --out " + out.string();
  REQUIRE(run("spacing" + common) == 0);
  REQUIRE(run("ratio" + common) == 0);
  REQUIRE(run("eigstats" + common) == 0);

  const auto s = edicke::histogram_from_json(read_json(out / "hist_spacing.json"));
  CHECK(s.integral() == doctest::Approx(1.0).epsilon(1e-12));
  const auto sm = read_json(out / "hist_spacing.json")["meta"];
  CHECK(sm["eta"].is_number());
  CHECK(sm["beta"].is_number());

  const auto r = read_json(out / "hist_ratio.json");
  CHECK(r["meta"]["mean_r"].get<double>() > 0.0);
  CHECK(r["edges"].size() == 21);

  const auto c = read_json(out / "hist_coeff.json");
  CHECK(c["meta"]["d_kl"].get<double>() >= 0.0);
  CHECK(c["meta"]["goe_density_at_centers"].size() == c["densities"].size());
}

TEST_CASE("fully degenerate ratio input is reported, not fatal") {
  const auto out = scratch_dir("degenerate");
  REQUIRE(run("ratio --set j=4 --set n_cutoff=60 --set lambda=0 --out " + out.string()) == 0);
  const auto meta = read_json(out / "hist_ratio.json")["meta"];
  CHECK(meta["mean_r"].is_null());
  CHECK(meta["n_degenerate_dropped"].get<long long>() > 0);
  CHECK(meta["n_ratios"] == 0);
}

TEST_CASE("sweep then boundary, reproducibly") {
  const auto a = scratch_dir("sweep_a");
  const auto b = scratch_dir("sweep_b");
  const auto cfg = scratch_dir("sweep_cfg") / "grid.json";
  std::ofstream(cfg) << R"({"j": 4, "n_cutoff": 60, "kappa_grid": [0, 1], "lambda_grid": [0.5, 1.0]})";
  REQUIRE(run("sweep --config " + cfg.string() + " --out " + a.string()) == 0);
  REQUIRE(run("sweep --config " + cfg.string() + " --workers 2 --out " + b.string()) == 0);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  CHECK(edicke::read_csv(a / "sweep.csv").size() == 4);

  fs::remove(a / "boundary_eta.csv");
  REQUIRE(run("boundary --out " + a.string()) == 0);
  CHECK(slurp(a / "boundary_eta.csv") == slurp(b / "boundary_eta.csv"));

  const auto c = scratch_dir("sweep_c");
  REQUIRE(run("boundary --sweep " + (a / "sweep.csv").string() + " --set thresholds.mean_r_min=0.9 --out " +
              c.string()) == 0);
  CHECK(slurp(c / "boundary_mean_r.csv").find("true") == std::string::npos);
}

TEST_CASE("identical invocations produce identical files") {
  const auto a = scratch_dir("same_a");
  const auto b = scratch_dir("same_b");
  const std::string common = kSmall + " --set lambda=0.8";
  REQUIRE(run("spacing" + common + " --out " + a.string()) == 0);
  REQUIRE(run("spacing" + common + " --out " + b.string()) == 0);
  CHECK(slurp(a / "hist_spacing.json") == slurp(b / "hist_spacing.json"));
}

TEST_CASE("cache directory from the environment") {
  const auto cache = scratch_dir("cache");
  const auto a = scratch_dir("cache_a");
  const auto b = scratch_dir("cache_b");
  const std::string env = "EDICKE_CACHE_DIR=" + cache.string() + " ";
  const std::string common = kSmall + " --set lambda=0.9 --set kappa=0.2";
  REQUIRE(std::system((env + EDICKE_CLI_PATH + " eigstats" + common + " --out " + a.string() + " >/dev/null").c_str()) == 0);
  CHECK(std::distance(fs::directory_iterator(cache), {}) == 1);
  REQUIRE(std::system((env + EDICKE_CLI_PATH + " eigstats" + common + " --out " + b.string() + " >/dev/null").c_str()) == 0);
  CHECK(slurp(a / "hist_coeff.json") == slurp(b / "hist_coeff.json"));
}

TEST_CASE("usage and runtime errors map to exit codes") {
  const auto out = scratch_dir("errors");
  CHECK(run("spacing --config /nonexistent/edicke.json --out " + out.string()) == 1);
  CHECK(run("spacing --set no_such_key=1 --out " + out.string()) == 1);
  CHECK(run("spacing --set thresholds.nope=1 --out " + out.string()) == 1);
  CHECK(run("spacing --frobnicate") == 1);
  CHECK(run("") == 1);
  CHECK(run("sweep --workers 0") == 1);
  CHECK(run("spacing --set j=2.3 --out " + out.string()) == 1);
  CHECK(run("boundary --sweep /nonexistent.csv --out " + out.string()) == 1);
  // Windows beyond the spectrum: a runtime failure, not a usage error.
  CHECK(run("eigstats" + kSmall + " --set mid_window=[30,31] --set energy_window=[0.4,40] --out " +
            out.string()) == 2);
  const auto cfg = out / "bad.json";
  std::ofstream(cfg) << R"({"j": 4, "n_cutoff": 60, "kappa_grid": [0], "lambda_grid": [1.0], "mid_window": [30, 31], "energy_window": [0.4, 40]})";
  CHECK(run("sweep --config " + cfg.string() + " --out " + (out / "sw").string()) == 2);
  CHECK(fs::exists(out / "sw" / "sweep_errors.csv"));
}
