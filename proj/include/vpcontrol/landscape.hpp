#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpcontrol/optimize.hpp"

namespace vpc {

struct SweepAxis {
  std::size_t param = 0;  // index into the packed (a, b) vector
  double low = 0.0;
  double high = 0.0;
  std::size_t samples = 3;

  double node(std::size_t i) const {
    if (i + 1 == samples) return high;
    return low + (high - low) * static_cast<double>(i) / static_cast<double>(samples - 1);
  }
  std::vector<double> nodes() const {
    std::vector<double> out(samples);
    for (std::size_t i = 0; i < samples; ++i) out[i] = node(i);
    return out;
  }
};

struct LandscapeSpec {
  ObjectiveKind objective = ObjectiveKind::EET;
  SimulationConfig base;
  std::size_t order = 1;
  std::vector<double> base_params;  // empty: zeros
  std::vector<SweepAxis> axes;
  std::string preset = "custom";
  std::size_t workers = 1;

  void validate() const {
    if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep needs one or two axes");
    for (const auto& ax : axes) {
      if (ax.samples < 3) throw ConfigError("sweep axes need at least 3 samples");
      if (!(ax.low < ax.high)) throw ConfigError("sweep axis needs low < high");
      if (ax.param >= 2 * order) throw ConfigError("sweep axis parameter outside the control basis");
    }
    if (axes.size() == 2 && axes[0].param == axes[1].param) throw ConfigError("sweep axes must differ");
    if (!base_params.empty() && base_params.size() != 2 * order)
      throw ConfigError("base parameter vector length differs from 2N");
  }
};

enum class CellStatus { Ok, Failed };

/// Values are row-major over (axis 0, axis 1); failed cells hold +inf.
struct LandscapeResult {
  std::vector<std::vector<double>> axis_nodes;
  std::vector<std::size_t> axis_params;
  std::vector<double> values;
  std::vector<CellStatus> status;
  std::string diagnostic;  // "all-cells-failed" when nothing succeeded

  std::size_t dims() const { return axis_nodes.size(); }
  std::size_t extent(std::size_t d) const { return axis_nodes[d].size(); }
  double at(std::size_t i, std::size_t j = 0) const { return values[i * (dims() == 2 ? extent(1) : 1) + j]; }
  bool any_failed() const {
    for (auto s : status)
      if (s == CellStatus::Failed) return true;
    return false;
  }
  /// Index of the smallest ok value.
  std::size_t argmin() const {
    std::size_t best = values.size();
    for (std::size_t c = 0; c < values.size(); ++c)
      if (status[c] == CellStatus::Ok && (best == values.size() || values[c] < values[best])) best = c;
    return best;
  }
};

/// Evaluates `objective` over the tensor grid of `axes`, holding the other parameters at
/// `base_params`. Cells are independent and stored by index.
inline LandscapeResult sweep(const LandscapeSpec& spec, const ObjectiveFn& objective) {
  spec.validate();
  LandscapeResult res;
  std::size_t cells = 1;
  for (const auto& ax : spec.axes) {
    res.axis_nodes.push_back(ax.nodes());
    res.axis_params.push_back(ax.param);
    cells *= ax.samples;
  }
  res.values.assign(cells, std::numeric_limits<double>::infinity());
  res.status.assign(cells, CellStatus::Failed);
  const std::vector<double> base =
      spec.base_params.empty() ? std::vector<double>(2 * spec.order, 0.0) : spec.base_params;
  const std::size_t inner = spec.axes.size() == 2 ? spec.axes[1].samples : 1;

  parallel_for(cells, spec.workers, [&](std::size_t c) {
    std::vector<double> theta = base;
    theta[spec.axes[0].param] = res.axis_nodes[0][c / inner];
    if (spec.axes.size() == 2) theta[spec.axes[1].param] = res.axis_nodes[1][c % inner];
    const double v = objective(theta);
    if (!is_failed(v) && std::isfinite(v)) {
      res.values[c] = v;
      res.status[c] = CellStatus::Ok;
    }
  });
  bool any_ok = false;
  for (auto s : res.status) any_ok = any_ok || s == CellStatus::Ok;
  if (!any_ok) res.diagnostic = "all-cells-failed";
  return res;
}

inline LandscapeResult sweep(const LandscapeSpec& spec) {
  return sweep(spec, make_control_objective(spec.objective, spec.base, spec.order));
}

/// Interior strict local minima of a sequence; a run of equal values counts once when
/// both of its outer neighbours are larger.
inline std::size_t count_local_minima(std::span<const double> v) {
  std::size_t count = 0;
  std::size_t i = 1;
  while (i + 1 < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    if (j + 1 < v.size() && v[i] < v[i - 1] && v[j] < v[j + 1]) ++count;
    i = j + 1;
  }
  return count;
}

inline std::size_t count_local_minima_1d(const LandscapeResult& r) {
  if (r.dims() != 1) throw ConfigError("expected a one-dimensional landscape");
  if (r.any_failed()) throw std::runtime_error("landscape has failed cells");
  return count_local_minima(r.values);
}

/// Cells strictly below all existing 4-neighbours.
inline std::vector<std::pair<std::size_t, std::size_t>> local_minima_2d(const LandscapeResult& r) {
  if (r.dims() != 2) throw ConfigError("expected a two-dimensional landscape");
  if (r.any_failed()) throw std::runtime_error("landscape has failed cells");
  const std::size_t n0 = r.extent(0);
  const std::size_t n1 = r.extent(1);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      const double v = r.at(i, j);
      const bool lower = (i == 0 || v < r.at(i - 1, j)) && (i + 1 == n0 || v < r.at(i + 1, j)) &&
                         (j == 0 || v < r.at(i, j - 1)) && (j + 1 == n1 || v < r.at(i, j + 1));
      if (lower) out.emplace_back(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Named sweeps. "ts-*" sweep b1 (and b2) of the two-stream basis, "bot-*" sweep a1 (and b1).

struct SweepPreset {
  std::string experiment;  // two-stream | bump-on-tail
  std::string box;         // 1d-fig | 1d-text | far | mid | near
  std::vector<SweepAxis> axes;
  std::size_t order;
};

inline SweepPreset sweep_preset(std::string_view name) {
  const bool ts = name.starts_with("ts-");
  const bool bot = name.starts_with("bot-");
  if (!ts && !bot) throw ConfigError("unknown sweep preset '" + std::string(name) + "'");
  const std::string_view box = name.substr(ts ? 3 : 4);
  SweepPreset p;
  p.experiment = ts ? "two-stream" : "bump-on-tail";
  p.box = std::string(box);
  const ParameterMask mask = ts ? two_stream_under_mask() : bump_on_tail_under_mask();
  p.order = mask.order;
  const std::size_t first = ts ? mask.b_index(1) : mask.a_index(1);
  const std::size_t second = ts ? mask.b_index(2) : mask.b_index(1);

  if (box == "1d-fig") {
    p.axes = {{first, -0.07, 0.07, 29}};
  } else if (box == "1d-text") {
    p.axes = {{first, -0.1, 0.1, 29}};
  } else if (box == "2d-far") {
    p.axes = {{first, -1.0, 1.0, 21}, {second, -1.0, 1.0, 21}};
  } else if (box == "2d-mid") {
    p.axes = {{first, -0.1, 0.1, 41}, {second, -0.1, 0.1, 41}};
  } else if (box == "2d-near") {
    const double lo = ts ? -0.003 : -0.001;
    p.axes = {{first, lo, lo + 0.004, 41}, {second, lo, lo + 0.004, 41}};
  } else {
    throw ConfigError("unknown sweep preset '" + std::string(name) + "'");
  }
  return p;
}

}  // namespace vpc
