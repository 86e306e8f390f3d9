#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpcontrol/landscape.hpp"

namespace vpc {

using json = nlohmann::ordered_json;

struct FormatError : std::runtime_error {
  std::size_t offset;
  FormatError(const std::string& what, std::size_t off)
      : std::runtime_error(what + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

/// Shortest-roundtrip-safe decimal form with 17 significant digits.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Least-squares slope of log E(t) over samples with t in [t0, t1].
inline double fit_growth_rate(std::span<const double> energy, double dt, double t0, double t1) {
  double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < energy.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t < t0 - 1e-9 * dt || t > t1 + 1e-9 * dt) continue;
    if (!(energy[i] > 0.0)) throw std::domain_error("non-positive energy inside the fit window");
    const double y = std::log(energy[i]);
    n += 1.0;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  if (n < 2.0) throw std::domain_error("fit window holds fewer than two samples");
  return (n * sty - st * sy) / (n * stt - st * st);
}

// ---------------------------------------------------------------------------
// Plain-text helpers.

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

namespace detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      auto cells = split_csv_line(line);
      if (first) {
        t.header = std::move(cells);
        first = false;
      } else {
        if (cells.size() != t.header.size()) throw FormatError("CSV row width differs from header", pos);
        t.rows.push_back(std::move(cells));
      }
    }
    pos = nl + 1;
  }
  if (first) throw FormatError("empty CSV", 0);
  return t;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FormatError("not a number: '" + s + "'", 0);
  return v;
}

inline json to_json_array(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ControlField JSON: {"N", "k0", "a", "b"}.

inline json control_to_json(const ControlField& f) {
  return json{{"N", f.order()}, {"k0", f.k0}, {"a", detail::to_json_array(f.a)}, {"b", detail::to_json_array(f.b)}};
}

inline ControlField control_from_json(const json& j) {
  try {
    const auto n = j.at("N").get<std::size_t>();
    auto a = j.at("a").get<std::vector<double>>();
    auto b = j.at("b").get<std::vector<double>>();
    if (a.size() != n || b.size() != n) throw ConfigError("control field arrays do not have length N");
    return ControlField(std::move(a), std::move(b), j.at("k0").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed control field: ") + e.what());
  }
}

inline void write_control(const std::filesystem::path& path, const ControlField& f) {
  write_json(path, control_to_json(f));
}

inline ControlField read_control(const std::filesystem::path& path) { return control_from_json(read_json(path)); }

// ---------------------------------------------------------------------------
// Time series.

inline std::string energy_csv(std::span<const double> energy, double dt) {
  std::string s = "t,energy\n";
  for (std::size_t n = 0; n < energy.size(); ++n)
    s += fmt17(static_cast<double>(n) * dt) + "," + fmt17(energy[n]) + "\n";
  return s;
}

inline std::string field_history_csv(const SimulationTrace& trace, const PhaseSpaceGrid& grid) {
  std::string s = "t,x,E\n";
  for (std::size_t n = 0; n < trace.field_history.size(); ++n) {
    const std::string t = fmt17(trace.time(n));
    for (std::size_t i = 0; i < trace.field_history[n].size(); ++i)
      s += t + "," + fmt17(grid.x(i)) + "," + fmt17(trace.field_history[n][i]) + "\n";
  }
  return s;
}

/// Two-column (t, energy) CSV back into the energy series.
inline std::vector<double> read_energy_csv(const std::filesystem::path& path) {
  const auto t = detail::parse_csv(read_text(path));
  if (t.header != std::vector<std::string>{"t", "energy"}) throw FormatError("expected header t,energy", 0);
  std::vector<double> e;
  for (const auto& r : t.rows) e.push_back(detail::parse_double(r[1]));
  return e;
}

// ---------------------------------------------------------------------------
// State dump: one JSON header line {Mx, Mv, Lx, Lv, T}, then Mx*Mv little-endian f64, x-major.

namespace detail {
inline std::uint64_t to_little(std::uint64_t u) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int k = 0; k < 8; ++k) r |= ((u >> (8 * k)) & 0xffu) << (8 * (7 - k));
    return r;
  }
  return u;
}
}  // namespace detail

inline void write_state(const std::filesystem::path& path, const DistributionState& f, const PhaseSpaceGrid& grid) {
  json h{{"Mx", grid.mx()}, {"Mv", grid.mv()}, {"Lx", grid.lx()}, {"Lv", grid.lv()}, {"T", f.time()}};
  std::string bytes = h.dump() + "\n";
  const std::size_t head = bytes.size();
  bytes.resize(head + 8 * f.values().size());
  for (std::size_t k = 0; k < f.values().size(); ++k) {
    const std::uint64_t u = detail::to_little(std::bit_cast<std::uint64_t>(f.values()[k]));
    std::memcpy(bytes.data() + head + 8 * k, &u, 8);
  }
  write_text(path, bytes);
}

struct StateDump {
  PhaseSpaceGrid grid;
  DistributionState state;
};

inline StateDump read_state(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw FormatError("state dump has no header line", bytes.size());
  json h;
  try {
    h = json::parse(bytes.substr(0, nl));
  } catch (const json::parse_error& e) {
    throw FormatError("malformed state header", e.byte > 0 ? e.byte - 1 : 0);
  }
  std::size_t mx = 0, mv = 0;
  double lx = 0, lv = 0, t = 0;
  try {
    mx = h.at("Mx").get<std::size_t>();
    mv = h.at("Mv").get<std::size_t>();
    lx = h.at("Lx").get<double>();
    lv = h.at("Lv").get<double>();
    t = h.at("T").get<double>();
  } catch (const json::exception&) {
    throw FormatError("state header lacks Mx/Mv/Lx/Lv/T", 0);
  }
  const std::size_t head = nl + 1;
  const std::size_t expected = head + 8 * mx * mv;
  if (bytes.size() != expected) {
    throw FormatError("state payload holds " + std::to_string(bytes.size() - head) + " bytes, header implies " +
                          std::to_string(8 * mx * mv),
                      std::min(bytes.size(), expected));
  }
  StateDump d{make_grid(mx, mv, lx, lv), {}};
  d.state = DistributionState(d.grid, t);
  for (std::size_t k = 0; k < mx * mv; ++k) {
    std::uint64_t u;
    std::memcpy(&u, bytes.data() + head + 8 * k, 8);
    d.state.values()[k] = std::bit_cast<double>(detail::to_little(u));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Optimization history: CSV per iterate plus a JSON summary.

/// Parameters beyond this sup-norm mark the non-physical large-field regime.
inline constexpr double non_physical_threshold = 0.1;

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline bool non_physical(const OptimizationHistory& h) {
  return !h.records.empty() && sup_norm(h.last().params) > non_physical_threshold;
}

/// Columns: iter, objective, grad_norm, step, a1.. bN, sufficient_decrease, curvature, note.
/// Wall times live in the JSON summary so the CSV is reproducible.
inline std::string history_csv(const OptimizationHistory& h) {
  const std::size_t np = h.records.empty() ? 0 : h.records.front().params.size();
  std::string s = "iter,objective,grad_norm,step";
  for (std::size_t i = 0; i < np; ++i) s += "," + param_name(i, np / 2);
  s += ",sufficient_decrease,curvature,note\n";
  for (const auto& r : h.records) {
    std::string note = r.note;
    for (char& c : note)
      if (c == ',' || c == '\n') c = ';';
    s += std::to_string(r.iter) + "," + fmt17(r.objective) + "," + fmt17(r.grad_norm) + "," + fmt17(r.step);
    for (double p : r.params) s += "," + fmt17(p);
    s += std::string(",") + (r.sufficient_decrease ? "1" : "0") + "," + (r.curvature ? "1" : "0") + "," + note + "\n";
  }
  return s;
}

inline std::vector<IterationRecord> parse_history_csv(const std::string& text) {
  const auto t = detail::parse_csv(text);
  const std::size_t w = t.header.size();
  if (w < 7 || t.header[0] != "iter" || t.header[w - 1] != "note") throw FormatError("not a history CSV", 0);
  std::vector<IterationRecord> out;
  for (const auto& r : t.rows) {
    IterationRecord rec;
    rec.iter = static_cast<std::size_t>(std::stoull(r[0]));
    rec.objective = detail::parse_double(r[1]);
    rec.grad_norm = detail::parse_double(r[2]);
    rec.step = detail::parse_double(r[3]);
    for (std::size_t c = 4; c + 3 < w; ++c) rec.params.push_back(detail::parse_double(r[c]));
    rec.sufficient_decrease = r[w - 3] == "1";
    rec.curvature = r[w - 2] == "1";
    rec.note = r[w - 1];
    out.push_back(std::move(rec));
  }
  return out;
}

inline json history_summary(const OptimizationHistory& h) {
  json j{{"status", h.status},
         {"iterations", h.records.empty() ? 0 : h.records.size() - 1},
         {"wall_time", h.wall_time},
         {"non_physical_regime", non_physical(h)},
         {"non_physical_threshold", non_physical_threshold}};
  if (!h.records.empty()) {
    j["initial_objective"] = h.records.front().objective;
    j["final_objective"] = h.last().objective;
    j["final_params"] = detail::to_json_array(h.last().params);
  }
  if (h.final_field) j["final_field"] = control_to_json(*h.final_field);
  json times = json::array();
  for (const auto& r : h.records) times.push_back(r.wall_time);
  j["wall_times"] = times;
  return j;
}

inline void write_history(const std::filesystem::path& dir, const OptimizationHistory& h) {
  write_text(dir / "history.csv", history_csv(h));
  write_json(dir / "history.json", history_summary(h));
}

inline OptimizationHistory read_history(const std::filesystem::path& dir) {
  OptimizationHistory h;
  h.records = parse_history_csv(read_text(dir / "history.csv"));
  const json j = read_json(dir / "history.json");
  h.status = j.value("status", "");
  h.wall_time = j.value("wall_time", 0.0);
  if (j.contains("final_field")) h.final_field = control_from_json(j["final_field"]);
  if (j.contains("wall_times")) {
    const auto times = j["wall_times"].get<std::vector<double>>();
    for (std::size_t n = 0; n < std::min(times.size(), h.records.size()); ++n) h.records[n].wall_time = times[n];
  }
  return h;
}

// ---------------------------------------------------------------------------
// Landscapes: CSV 1D (param, value, status) or 2D (p1, p2, value, status) + JSON sidecar.

inline std::string landscape_csv(const LandscapeResult& r) {
  std::string s = r.dims() == 1 ? "param,value,status\n" : "p1,p2,value,status\n";
  for (std::size_t c = 0; c < r.values.size(); ++c) {
    if (r.dims() == 1) {
      s += fmt17(r.axis_nodes[0][c]);
    } else {
      s += fmt17(r.axis_nodes[0][c / r.extent(1)]) + "," + fmt17(r.axis_nodes[1][c % r.extent(1)]);
    }
    s += "," + fmt17(r.values[c]) + "," + (r.status[c] == CellStatus::Ok ? "ok" : "failed") + "\n";
  }
  return s;
}

/// Re-reads a landscape CSV; axis nodes are recovered from the distinct coordinates.
inline LandscapeResult parse_landscape_csv(const std::string& text) {
  const auto t = detail::parse_csv(text);
  LandscapeResult r;
  const bool two = t.header.size() == 4;
  if (!two && t.header.size() != 3) throw FormatError("not a landscape CSV", 0);
  r.axis_nodes.resize(two ? 2 : 1);
  for (const auto& row : t.rows) {
    const double p0 = detail::parse_double(row[0]);
    if (r.axis_nodes[0].empty() || r.axis_nodes[0].back() != p0) r.axis_nodes[0].push_back(p0);
    if (two && r.axis_nodes[0].size() == 1) r.axis_nodes[1].push_back(detail::parse_double(row[1]));
    r.values.push_back(detail::parse_double(row[two ? 2 : 1]));
    const std::string& st = row[two ? 3 : 2];
    if (st != "ok" && st != "failed") throw FormatError("bad status '" + st + "'", 0);
    r.status.push_back(st == "ok" ? CellStatus::Ok : CellStatus::Failed);
  }
  std::size_t cells = 1;
  for (const auto& ax : r.axis_nodes) cells *= ax.size();
  if (cells != r.values.size()) throw FormatError("landscape CSV is not a full tensor grid", text.size());
  return r;
}

inline json landscape_sidecar(const LandscapeSpec& spec, const LandscapeResult& r) {
  json axes = json::array();
  for (const auto& ax : spec.axes) {
    axes.push_back({{"param", ax.param},
                    {"name", param_name(ax.param, spec.order)},
                    {"low", ax.low},
                    {"high", ax.high},
                    {"samples", ax.samples}});
  }
  json j{{"objective", to_string(spec.objective)},
         {"preset", spec.preset},
         {"order", spec.order},
         {"axes", axes},
         {"base_params", detail::to_json_array(spec.base_params)},
         {"failed_cells", std::count(r.status.begin(), r.status.end(), CellStatus::Failed)}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  const std::size_t best = r.argmin();
  if (best < r.values.size()) {
    json at = json::array();
    const std::size_t inner = r.dims() == 2 ? r.extent(1) : 1;
    at.push_back(r.axis_nodes[0][best / inner]);
    if (r.dims() == 2) at.push_back(r.axis_nodes[1][best % inner]);
    j["argmin"] = at;
    j["min_value"] = r.values[best];
  }
  return j;
}

}  // namespace vpc
