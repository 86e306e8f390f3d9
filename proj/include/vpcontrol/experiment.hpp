#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpcontrol/dispersion.hpp"
#include "vpcontrol/io.hpp"

namespace vpc {

inline constexpr const char* tool_version = "1.0.0";

/// Fully-resolved batch configuration. Every field has a value after resolve_config.
struct ExperimentConfig {
  std::string preset = "two-stream";
  std::size_t mx = 256;
  std::size_t mv = 256;
  double lx = 0.0;
  double lv = 0.0;
  double dt = 0.1;
  double final_time = 0.0;
  double epsilon = 1e-3;
  ControlField control;  // simulate: applied field; optimize: ignored
  ObjectiveKind objective = ObjectiveKind::EET;
  Method method = Method::ConstantGD;
  std::string parametrization = "under";  // under | over
  std::string init_kind = "near";         // far | mid | near | vector | guess
  std::vector<double> init_vector;
  std::uint64_t seed = 0;
  double stepsize = 0.0;
  std::size_t max_iters = 200;
  double fd_step = 0.0;
  double grad_tol = 0.0;
  double f_tol = 0.0;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::string horizon = "published";  // Laplace horizon for guess synthesis
  double fit_t0 = 0.0;
  double fit_t1 = 0.0;
  std::string sweep_preset;
  std::vector<SweepAxis> sweep_axes;
  std::vector<ObjectiveKind> sweep_objectives;
  std::size_t workers = 1;
  std::filesystem::path out = "out";

  InstabilityPreset instability() const {
    InstabilityPreset p = preset_by_name(preset);
    p.perturbation = with_epsilon(p.perturbation, epsilon);
    p.lx = lx;
    p.lv = lv;
    p.final_time = final_time;
    return p;
  }

  SimulationConfig simulation() const {
    const auto p = instability();
    SimulationConfig c;
    c.grid = make_grid(mx, mv, lx, lv);
    c.dt = dt;
    c.final_time = final_time;
    c.equilibrium = p.equilibrium;
    c.perturbation = p.perturbation;
    c.control = control.order() == 0 ? ControlField(0, c.grid.k0()) : control;
    c.control.k0 = c.grid.k0();
    return c;
  }

  ParameterMask mask() const {
    if (parametrization == "over") return over_parametrized_mask();
    return preset == "bump-on-tail" ? bump_on_tail_under_mask() : two_stream_under_mask();
  }

  RootSearchOptions root_options() const {
    RootSearchOptions o;
    o.laplace = horizon == "converged" ? LaplaceOptions::converged() : LaplaceOptions::published();
    return o;
  }
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "preset", "grid", "dt", "T", "epsilon", "control", "objective", "method", "parametrization", "init",
      "optimizer", "horizon", "fit_window", "sweep", "workers", "out", "seed", "tool", "version", "command"};
  return keys;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

/// Resolves a config JSON (relative paths against `base_dir`) into an ExperimentConfig.
/// Unknown top-level keys are reported on `warn`.
inline ExperimentConfig resolve_config(const json& j, const std::filesystem::path& base_dir = ".",
                                       std::ostream* warn = &std::cerr) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!detail::known_config_keys().contains(k) && warn) *warn << "warning: ignoring unknown config key '" << k << "'\n";
  }
  ExperimentConfig c;
  try {
    const json sw = j.value("sweep", json::object());
    std::string preset_name = "two-stream";
    if (sw.contains("preset")) preset_name = sweep_preset(sw.at("preset").get<std::string>()).experiment;
    c.preset = preset_by_name(detail::get_or<std::string>(j, "preset", preset_name)).name;
    const auto pre = preset_by_name(c.preset);
    const json grid = j.value("grid", json::object());
    c.mx = detail::get_or<std::size_t>(grid, "Mx", 256);
    c.mv = detail::get_or<std::size_t>(grid, "Mv", c.mx);
    c.lx = detail::get_or<double>(grid, "Lx", pre.lx);
    c.lv = detail::get_or<double>(grid, "Lv", pre.lv);
    c.dt = detail::get_or<double>(j, "dt", 0.1);
    c.final_time = detail::get_or<double>(j, "T", pre.final_time);
    c.epsilon = detail::get_or<double>(j, "epsilon", perturbation_epsilon(pre.perturbation));
    const double k0 = 2.0 * std::numbers::pi / c.lx;
    c.control = ControlField(0, k0);
    if (j.contains("control")) {
      const json& h = j.at("control");
      if (h.contains("from")) {
        std::filesystem::path from = h.at("from").get<std::string>();
        if (from.is_relative()) from = base_dir / from;
        c.control = read_control(from);
      } else {
        json full = h;
        if (!full.contains("k0")) full["k0"] = k0;
        c.control = control_from_json(full);
      }
      c.control.k0 = k0;
    }
    c.objective = parse_objective(detail::get_or<std::string>(j, "objective", "eet"));
    c.method = parse_method(detail::get_or<std::string>(j, "method", "constant"));
    c.parametrization = detail::get_or<std::string>(j, "parametrization", "under");
    if (c.parametrization != "under" && c.parametrization != "over")
      throw ConfigError("parametrization must be 'under' or 'over'");

    c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    const json init = j.value("init", json::object());
    c.init_kind = detail::get_or<std::string>(init, "kind", "near");
    c.seed = detail::get_or<std::uint64_t>(init, "seed", c.seed);
    if (c.init_kind == "vector") {
      c.init_vector = init.at("vector").get<std::vector<double>>();
    } else if (c.init_kind != "guess") {
      parse_init_kind(c.init_kind);
    }

    const json opt = j.value("optimizer", json::object());
    c.stepsize = detail::get_or<double>(opt, "stepsize", default_stepsize(c.preset));
    c.max_iters = detail::get_or<std::size_t>(opt, "max_iters", 200);
    c.fd_step = detail::get_or<double>(opt, "fd_step", default_fd_step(c.objective));
    c.grad_tol = detail::get_or<double>(opt, "grad_tol", 0.0);
    c.f_tol = detail::get_or<double>(opt, "f_tol", 0.0);
    c.c1 = detail::get_or<double>(opt, "c1", 1e-4);
    c.c2 = detail::get_or<double>(opt, "c2", 0.9);

    c.horizon = detail::get_or<std::string>(j, "horizon", "published");
    if (c.horizon != "published" && c.horizon != "converged")
      throw ConfigError("horizon must be 'published' or 'converged'");
    const auto window = detail::get_or<std::vector<double>>(
        j, "fit_window", c.preset == "bump-on-tail" ? std::vector<double>{15.0, 35.0} : std::vector<double>{10.0, 25.0});
    if (window.size() != 2) throw ConfigError("fit_window needs two entries");
    c.fit_t0 = window[0];
    c.fit_t1 = window[1];

    if (sw.contains("preset")) {
      c.sweep_preset = sw.at("preset").get<std::string>();
      const auto sp = sweep_preset(c.sweep_preset);
      if (sp.experiment != c.preset) throw ConfigError("sweep preset belongs to " + sp.experiment);
      c.sweep_axes = sp.axes;
    }
    if (sw.contains("axes")) {
      c.sweep_axes.clear();
      for (const auto& ax : sw.at("axes")) {
        c.sweep_axes.push_back({ax.at("param").get<std::size_t>(), ax.at("low").get<double>(),
                                ax.at("high").get<double>(), ax.at("samples").get<std::size_t>()});
      }
      if (c.sweep_preset.empty()) c.sweep_preset = "custom";
    }
    if (sw.contains("objectives")) {
      for (const auto& o : sw.at("objectives")) c.sweep_objectives.push_back(parse_objective(o.get<std::string>()));
    } else {
      c.sweep_objectives = {c.objective};
    }

    c.workers = detail::get_or<std::size_t>(j, "workers", 1);
    c.out = detail::get_or<std::string>(j, "out", "out");
    if (c.out.is_relative()) c.out = base_dir / c.out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.workers == 0) throw ConfigError("workers must be >= 1");
  return c;
}

/// Inverse of resolve_config with every default spelled out.
inline json config_to_json(const ExperimentConfig& c) {
  json axes = json::array();
  for (const auto& ax : c.sweep_axes)
    axes.push_back({{"param", ax.param}, {"low", ax.low}, {"high", ax.high}, {"samples", ax.samples}});
  json objectives = json::array();
  for (auto k : c.sweep_objectives) objectives.push_back(to_string(k));
  json init{{"kind", c.init_kind}, {"seed", c.seed}};
  if (c.init_kind == "vector") init["vector"] = c.init_vector;
  json sweep{{"axes", axes}, {"objectives", objectives}};
  if (!c.sweep_preset.empty() && c.sweep_preset != "custom") sweep["preset"] = c.sweep_preset;
  return json{{"preset", c.preset},
              {"grid", {{"Mx", c.mx}, {"Mv", c.mv}, {"Lx", c.lx}, {"Lv", c.lv}}},
              {"dt", c.dt},
              {"T", c.final_time},
              {"epsilon", c.epsilon},
              {"control", control_to_json(c.control)},
              {"objective", to_string(c.objective)},
              {"method", to_string(c.method)},
              {"parametrization", c.parametrization},
              {"init", init},
              {"optimizer",
               {{"stepsize", c.stepsize},
                {"max_iters", c.max_iters},
                {"fd_step", c.fd_step},
                {"grad_tol", c.grad_tol},
                {"f_tol", c.f_tol},
                {"c1", c.c1},
                {"c2", c.c2}}},
              {"horizon", c.horizon},
              {"fit_window", {c.fit_t0, c.fit_t1}},
              {"sweep", sweep},
              {"workers", c.workers},
              {"out", c.out.string()}};
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& c) {
  json m = config_to_json(c);
  m["tool"] = "vpctl";
  m["version"] = tool_version;
  m["command"] = command;
  write_json(dir / "manifest.json", m);
}

// ---------------------------------------------------------------------------
// Subcommands. Each writes its artifacts into cfg.out and returns a process exit code.

inline json root_to_json(const DispersionRoot& r, cplx amplitude) {
  return {{"mode", r.mode},
          {"s0", {r.s0.real(), r.s0.imag()}},
          {"residual", r.residual},
          {"amplitude", {amplitude.real(), amplitude.imag()}}};
}

inline int cmd_guess(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  const auto pre = cfg.instability();
  const auto grid = make_grid(cfg.mx, cfg.mv, cfg.lx, cfg.lv);
  std::filesystem::create_directories(cfg.out);
  write_manifest(cfg.out, "guess", cfg);
  const std::vector<int> modes{perturbation_mode(pre.perturbation)};
  json summary{{"horizon", cfg.horizon}};
  int code = 0;
  try {
    const auto rep = synthesize_guess_report(pre.equilibrium, pre.perturbation, grid, modes, cfg.root_options());
    json roots = json::array();
    for (std::size_t n = 0; n < rep.roots.size(); ++n) roots.push_back(root_to_json(rep.roots[n], rep.amplitudes[n]));
    write_json(cfg.out / "roots.json", roots);
    write_control(cfg.out / "control.json", rep.field);
    summary["status"] = rep.trivial ? "stable-trivial" : "unstable";
    summary["control"] = control_to_json(rep.field);
    log << "guess: " << summary["status"].get<std::string>();
    for (std::size_t k = 0; k < rep.field.order(); ++k)
      log << "  a" << k + 1 << "=" << fmt17(rep.field.a[k]) << " b" << k + 1 << "=" << fmt17(rep.field.b[k]);
    log << "\n";
  } catch (const NoUnstableRoot& e) {
    summary["status"] = "stable";
    summary["diagnostic"] = e.what();
    log << "guess: stable (" << e.what() << ")\n";
    code = 2;
  }
  write_json(cfg.out / "summary.json", summary);
  return code;
}

/// Forward solve with full recording; `tag` prefixes artifact names.
inline json simulate_into(const SimulationConfig& sim, const ExperimentConfig& cfg, const std::filesystem::path& dir,
                          const std::string& tag, bool& ok) {
  SimulationConfig c = sim;
  c.record.field_history = true;
  json summary{{"control", control_to_json(c.control)}};
  try {
    const auto tr = run(c);
    write_text(dir / (tag + "energy.csv"), energy_csv(tr.energy_series, tr.dt));
    write_text(dir / (tag + "field.csv"), field_history_csv(tr, c.grid));
    write_state(dir / (tag + "final_state.f64"), tr.final_state, c.grid);
    summary["status"] = "ok";
    summary["final_energy"] = tr.energy_series.back();
    summary["initial_energy"] = tr.energy_series.front();
    summary["blowup_warnings"] = tr.blowup_warnings;
    summary["growth_window"] = {cfg.fit_t0, cfg.fit_t1};
    try {
      summary["growth_rate"] = fit_growth_rate(tr.energy_series, tr.dt, cfg.fit_t0, cfg.fit_t1);
    } catch (const std::domain_error& e) {
      summary["growth_rate"] = nullptr;
      summary["growth_rate_note"] = e.what();
    }
    ok = true;
  } catch (const SimulationError& e) {
    summary["status"] = "failed";
    summary["diagnostic"] = e.what();
    ok = false;
  }
  return summary;
}

inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  std::filesystem::create_directories(cfg.out);
  write_manifest(cfg.out, "simulate", cfg);
  bool ok = false;
  const json summary = simulate_into(cfg.simulation(), cfg, cfg.out, "", ok);
  write_json(cfg.out / "summary.json", summary);
  if (ok) {
    log << "simulate: final_energy=" << fmt17(summary["final_energy"].get<double>());
    if (!summary["growth_rate"].is_null()) log << " growth_rate=" << fmt17(summary["growth_rate"].get<double>());
    log << "\n";
  } else {
    log << "simulate: failed (" << summary["diagnostic"].get<std::string>() << ")\n";
  }
  return ok ? 0 : 1;
}

/// Initial parameter vector for cmd_optimize.
inline std::vector<double> resolve_init(const ExperimentConfig& cfg, const ParameterMask& mask) {
  if (cfg.init_kind == "vector") {
    if (cfg.init_vector.size() != mask.free.size()) throw ConfigError("init vector length differs from 2N");
    return cfg.init_vector;
  }
  if (cfg.init_kind == "guess") {
    const auto pre = cfg.instability();
    const auto grid = make_grid(cfg.mx, cfg.mv, cfg.lx, cfg.lv);
    const std::vector<int> modes{perturbation_mode(pre.perturbation)};
    const auto guess = synthesize_guess(pre.equilibrium, pre.perturbation, grid, modes, cfg.root_options());
    std::vector<double> theta(mask.free.size(), 0.0);
    for (std::size_t k = 1; k <= guess.order() && k <= mask.order; ++k) {
      theta[mask.a_index(k)] = mask.free[mask.a_index(k)] ? guess.a[k - 1] : 0.0;
      theta[mask.b_index(k)] = mask.free[mask.b_index(k)] ? guess.b[k - 1] : 0.0;
    }
    return theta;
  }
  return sample_init(init_box(parse_init_kind(cfg.init_kind), cfg.preset), mask, cfg.seed);
}

inline int cmd_optimize(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  std::filesystem::create_directories(cfg.out);
  write_manifest(cfg.out, "optimize", cfg);
  const ParameterMask mask = cfg.mask();
  SimulationConfig base = cfg.simulation();

  OptimizerConfig oc;
  oc.method = cfg.method;
  oc.stepsize = cfg.stepsize;
  oc.c1 = cfg.c1;
  oc.c2 = cfg.c2;
  oc.max_iters = cfg.max_iters;
  oc.fd_step = cfg.fd_step;
  oc.grad_tol = cfg.grad_tol;
  oc.f_tol = cfg.f_tol;
  oc.mask = mask.free;
  oc.workers = cfg.workers;
  oc.init = resolve_init(cfg, mask);

  auto hist = optimize(make_control_objective(cfg.objective, base, mask.order), oc);
  hist.final_field = unpack_params(hist.last().params, mask.order, base.grid.k0());
  write_history(cfg.out, hist);
  write_control(cfg.out / "control.json", *hist.final_field);

  // Reference and optimized forward solves for the summary.
  SimulationConfig zero = base;
  zero.control = ControlField(0, base.grid.k0());
  const double ee_zero = evaluate_objective(ObjectiveKind::EE, zero);
  const double obj_zero = evaluate_objective(cfg.objective, zero);
  SimulationConfig tuned = base;
  tuned.control = *hist.final_field;
  bool ok = false;
  json final_run = simulate_into(tuned, cfg, cfg.out, "final_", ok);

  json summary = history_summary(hist);
  summary["objective"] = to_string(cfg.objective);
  summary["method"] = to_string(cfg.method);
  summary["init"] = {{"kind", cfg.init_kind}, {"params", oc.init}};
  summary["objective_without_control"] = obj_zero;
  summary["ee_without_control"] = ee_zero;
  if (ok) {
    summary["ee_final"] = final_run["final_energy"];
    summary["ee_ratio"] = final_run["final_energy"].get<double>() / ee_zero;
  }
  summary["final_run"] = final_run;
  write_json(cfg.out / "history.json", summary);

  log << "optimize: status=" << hist.status << " iterations=" << hist.records.size() - 1
      << " objective=" << fmt17(hist.last().objective);
  if (ok) log << " ee_ratio=" << fmt17(summary["ee_ratio"].get<double>());
  if (non_physical(hist)) log << " [non-physical regime: |theta|_inf > " << non_physical_threshold << "]";
  log << "\n";
  const bool failed = hist.status == "gradient-failure" || hist.status == "objective-failure" ||
                      hist.status == "line-search-failure" || !ok;
  return failed ? 1 : 0;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  if (cfg.sweep_axes.empty()) throw ConfigError("sweep needs a preset or explicit axes");
  std::filesystem::create_directories(cfg.out);
  write_manifest(cfg.out, "sweep", cfg);
  const ParameterMask mask = cfg.mask();
  bool any_failed = false;
  for (auto kind : cfg.sweep_objectives) {
    LandscapeSpec spec;
    spec.objective = kind;
    spec.base = cfg.simulation();
    spec.order = mask.order;
    spec.axes = cfg.sweep_axes;
    spec.preset = cfg.sweep_preset;
    spec.workers = cfg.workers;
    const auto res = sweep(spec);
    const std::string stem = std::string("landscape_") + std::string(to_string(kind));
    write_text(cfg.out / (stem + ".csv"), landscape_csv(res));
    json side = landscape_sidecar(spec, res);
    if (res.dims() == 1 && !res.any_failed()) side["interior_minima"] = count_local_minima_1d(res);
    if (res.dims() == 2 && !res.any_failed()) side["local_minima"] = local_minima_2d(res).size();
    write_json(cfg.out / (stem + ".json"), side);
    any_failed = any_failed || res.any_failed();
    log << "sweep: " << to_string(kind) << " cells=" << res.values.size();
    if (side.contains("argmin")) log << " argmin=" << side["argmin"].dump();
    if (res.any_failed()) log << " (failed cells present)";
    log << "\n";
  }
  return any_failed ? 1 : 0;
}

}  // namespace vpc
