// Batch driver: simulate | guess | optimize | sweep.
#include <CLI11.hpp>

#include <iostream>

#include "vpcontrol/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::string out;
  std::size_t workers = 0;
  std::optional<std::uint64_t> seed;
  std::string horizon;
  std::string sweep;
};

vpc::json load_config(const Flags& f) {
  vpc::json j = vpc::json::object();
  if (!f.config.empty()) {
    try {
      j = vpc::read_json(f.config);
    } catch (const vpc::FormatError& e) {
      throw vpc::ConfigError(e.what());
    }
  }
  if (!f.preset.empty()) j["preset"] = f.preset;
  if (!f.out.empty()) j["out"] = std::filesystem::absolute(f.out).string();
  if (f.workers > 0) j["workers"] = f.workers;
  if (f.seed) {
    if (!j.contains("init")) j["init"] = vpc::json::object();
    j["init"]["seed"] = *f.seed;
  }
  if (!f.horizon.empty()) j["horizon"] = f.horizon;
  if (!f.sweep.empty()) {
    if (!j.contains("sweep")) j["sweep"] = vpc::json::object();
    j["sweep"]["preset"] = f.sweep;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vlasov-Poisson instability control: forward runs, analytic guesses, optimization, sweeps"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--preset", flags.preset, "two-stream | bump-on-tail");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--workers", flags.workers, "worker threads for gradients and sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", flags.seed, "seed for random initialization");

  auto* sim = app.add_subcommand("simulate", "forward solve with the configured control");
  auto* guess = app.add_subcommand("guess", "control field from the dispersion relation");
  guess->add_option("--horizon", flags.horizon, "Laplace horizon: published | converged")
      ->check(CLI::IsMember({"published", "converged"}));
  auto* opt = app.add_subcommand("optimize", "gradient-based refinement of the control");
  auto* sw = app.add_subcommand("sweep", "objective landscape over one or two parameters");
  sw->add_option("--name", flags.sweep, "named sweep, e.g. ts-1d-fig, bot-2d-near");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto base = flags.config.empty() ? std::filesystem::path(".")
                                           : std::filesystem::path(flags.config).parent_path();
    const vpc::ExperimentConfig cfg = vpc::resolve_config(load_config(flags), base);
    if (sim->parsed()) return vpc::cmd_simulate(cfg);
    if (guess->parsed()) return vpc::cmd_guess(cfg);
    if (opt->parsed()) return vpc::cmd_optimize(cfg);
    if (sw->parsed()) return vpc::cmd_sweep(cfg);
  } catch (const vpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
