#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>

#include "vpcontrol/solver.hpp"

namespace vpc {

enum class ObjectiveKind { KL, EE, KLT, EET, L2, L2T };

inline constexpr std::array<ObjectiveKind, 6> all_objectives{ObjectiveKind::KL,  ObjectiveKind::EE,
                                                             ObjectiveKind::KLT, ObjectiveKind::EET,
                                                             ObjectiveKind::L2,  ObjectiveKind::L2T};

inline std::string_view to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::KL: return "kl";
    case ObjectiveKind::EE: return "ee";
    case ObjectiveKind::KLT: return "klt";
    case ObjectiveKind::EET: return "eet";
    case ObjectiveKind::L2: return "l2";
    case ObjectiveKind::L2T: return "l2t";
  }
  return "?";
}

inline ObjectiveKind parse_objective(std::string_view name) {
  for (auto k : all_objectives)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

/// Marks a failed forward solve; optimizers treat it as a rejected point.
inline constexpr double failed_objective = std::numeric_limits<double>::max();

inline bool is_failed(double value) { return !(value < failed_objective); }

/// Recording needed to reduce the trace to `kind`.
inline RecordFlags required_recording(ObjectiveKind kind) {
  RecordFlags r;
  r.kl = kind == ObjectiveKind::KLT;
  r.l2 = kind == ObjectiveKind::L2T;
  return r;
}

namespace detail {
// Left-rectangle rule over t^0 .. t^{N-1}.
inline double time_integral(std::span<const double> series, double dt) {
  if (series.size() < 2) return 0.0;
  return std::accumulate(series.begin(), series.end() - 1, 0.0) * dt;
}
}  // namespace detail

/// Reduces a finished trace. KL / L2 need the configuration's equilibrium.
inline double reduce_trace(ObjectiveKind kind, const SimulationTrace& trace, const SimulationConfig& config) {
  switch (kind) {
    case ObjectiveKind::EE: return trace.energy_series.back();
    case ObjectiveKind::EET: return detail::time_integral(trace.energy_series, trace.dt);
    case ObjectiveKind::KL: return kl_divergence(trace.final_state, config.equilibrium, config.grid);
    case ObjectiveKind::KLT: return detail::time_integral(trace.kl_series, trace.dt);
    case ObjectiveKind::L2: return l2_misfit(trace.final_state, config.equilibrium, config.grid);
    case ObjectiveKind::L2T: return detail::time_integral(trace.l2_series, trace.dt);
  }
  return failed_objective;
}

struct ObjectiveValue {
  double value = failed_objective;
  std::string diagnostic;  // empty on success

  bool ok() const { return diagnostic.empty(); }
};

/// Runs the forward solve and reduces it. Failed runs map to failed_objective.
inline ObjectiveValue evaluate_objective_checked(ObjectiveKind kind, SimulationConfig config) {
  const RecordFlags need = required_recording(kind);
  config.record.kl = config.record.kl || need.kl;
  config.record.l2 = config.record.l2 || need.l2;
  try {
    const auto trace = run(config);
    const double v = reduce_trace(kind, trace, config);
    if (!std::isfinite(v)) return {failed_objective, "objective is not finite"};
    return {v, {}};
  } catch (const SimulationError& e) {
    return {failed_objective, e.what()};
  }
}

inline double evaluate_objective(ObjectiveKind kind, const SimulationConfig& config) {
  return evaluate_objective_checked(kind, config).value;
}

}  // namespace vpc
