#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "vpcontrol/io.hpp"

using namespace vpc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vpctl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int vpctl(const std::string& args) {
  const std::string cmd = std::string(VPCTL_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path config(const fs::path& dir, const json& j) {
  const auto p = dir / "config.json";
  write_json(p, j);
  return p;
}

}  // namespace

TEST_CASE("guess on two-stream yields a negative sine coefficient", "[cli]") {
  const auto dir = scratch("guess");
  const auto out = dir / "out";
  REQUIRE(vpctl("--preset two-stream --out " + out.string() + " guess") == 0);
  const auto s = read_json(out / "summary.json");
  CHECK(s.at("status") == "unstable");
  const auto h = read_control(out / "control.json");
  REQUIRE(h.order() == 1);
  CHECK(h.b[0] == Approx(-0.00128741).epsilon(0.05));
  CHECK(std::abs(h.a[0]) < 1e-3 * std::abs(h.b[0]));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "roots.json"));
}

TEST_CASE("guess without a perturbation is trivially stable", "[cli]") {
  const auto dir = scratch("guess0");
  const auto cfg = config(dir, {{"preset", "two-stream"}, {"epsilon", 0.0}, {"out", "out"}});
  REQUIRE(vpctl("--config " + cfg.string() + " guess") == 0);
  CHECK(read_json(dir / "out" / "summary.json").at("status") == "stable-trivial");
  const auto h = read_control(dir / "out" / "control.json");
  CHECK(sup_norm(h.a) == 0.0);
  CHECK(sup_norm(h.b) == 0.0);
}

TEST_CASE("simulate at equilibrium has zero field energy and a reproducible manifest", "[cli]") {
  const auto dir = scratch("sim");
  const auto cfg = config(dir, {{"preset", "two-stream"},
                                {"epsilon", 0.0},
                                {"grid", {{"Mx", 32}, {"Mv", 64}}},
                                {"T", 2.0},
                                {"out", "a"}});
  REQUIRE(vpctl("--config " + cfg.string() + " simulate") == 0);
  const auto s = read_json(dir / "a" / "summary.json");
  CHECK(s.at("final_energy").get<double>() == 0.0);
  for (const char* f : {"manifest.json", "energy.csv", "field.csv", "final_state.f64"}) CHECK(fs::exists(dir / "a" / f));

  auto man = read_json(dir / "a" / "manifest.json");
  CHECK(man.at("tool") == "vpctl");
  man["out"] = (dir / "b").string();
  const auto again = dir / "again.json";
  write_json(again, man);
  REQUIRE(vpctl("--config " + again.string() + " simulate") == 0);
  CHECK(read_text(dir / "a" / "energy.csv") == read_text(dir / "b" / "energy.csv"));
  CHECK(read_text(dir / "a" / "field.csv") == read_text(dir / "b" / "field.csv"));
}

TEST_CASE("perturbed simulate reports a growth rate", "[cli]") {
  const auto dir = scratch("simgrow");
  const auto cfg = config(dir, {{"preset", "two-stream"}, {"grid", {{"Mx", 64}}}, {"T", 26.0}, {"out", "o"}});
  REQUIRE(vpctl("--config " + cfg.string() + " simulate") == 0);
  const auto s = read_json(dir / "o" / "summary.json");
  CHECK(s.at("growth_rate").get<double>() > 0.3);
  const auto e = read_energy_csv(dir / "o" / "energy.csv");
  CHECK(e.size() == 261);
}

TEST_CASE("sweep rejects axes with fewer than three samples", "[cli]") {
  const auto dir = scratch("sweep_bad");
  const auto cfg = config(dir, {{"preset", "two-stream"},
                                {"sweep", {{"axes", {{{"param", 2}, {"low", -0.1}, {"high", 0.1}, {"samples", 2}}}}}},
                                {"out", "o"}});
  CHECK(vpctl("--config " + cfg.string() + " sweep") == 64);
}

TEST_CASE("small sweep writes landscape CSV and sidecar", "[cli]") {
  const auto dir = scratch("sweep");
  const auto cfg = config(dir, {{"preset", "two-stream"},
                                {"grid", {{"Mx", 32}, {"Mv", 64}}},
                                {"T", 3.0},
                                {"sweep", {{"axes", {{{"param", 2}, {"low", -0.05}, {"high", 0.05}, {"samples", 5}}}},
                                           {"objectives", {"ee", "eet"}}}},
                                {"out", "o"}});
  REQUIRE(vpctl("--config " + cfg.string() + " sweep") == 0);
  for (const char* obj : {"ee", "eet"}) {
    const auto rows = parse_landscape_csv(read_text(dir / "o" / (std::string("landscape_") + obj + ".csv")));
    CHECK(rows.values.size() == 5);
    const auto side = read_json(dir / "o" / (std::string("landscape_") + obj + ".json"));
    CHECK(side.at("failed_cells") == 0);
  }
  CHECK(fs::exists(dir / "o" / "manifest.json"));
}

TEST_CASE("short optimize run writes its history", "[cli]") {
  const auto dir = scratch("opt");
  const auto cfg = config(dir, {{"preset", "two-stream"},
                                {"grid", {{"Mx", 32}, {"Mv", 64}}},
                                {"T", 3.0},
                                {"objective", "eet"},
                                {"method", "wolfe"},
                                {"init", {{"kind", "mid"}, {"seed", 3}}},
                                {"optimizer", {{"max_iters", 2}}},
                                {"out", "o"}});
  REQUIRE(vpctl("--config " + cfg.string() + " optimize") == 0);
  const auto h = read_history(dir / "o");
  REQUIRE(h.records.size() == 3);
  CHECK(h.records.back().objective <= h.records.front().objective);
  CHECK(fs::exists(dir / "o" / "control.json"));
}

TEST_CASE("bad configs exit with the usage code", "[cli]") {
  const auto dir = scratch("bad");
  CHECK(vpctl("--config " + config(dir, {{"preset", "three-stream"}}).string() + " simulate") == 64);
  CHECK(vpctl("--config " + config(dir, {{"method", "newton"}}).string() + " optimize") == 64);
  write_text(dir / "broken.json", "{\"preset\": ");
  CHECK(vpctl("--config " + (dir / "broken.json").string() + " simulate") == 64);
  CHECK(vpctl("bogus-subcommand") != 0);
}
