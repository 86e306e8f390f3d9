#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vpcontrol/control_field.hpp"
#include "vpcontrol/objectives.hpp"
#include "vpcontrol/parallel.hpp"

namespace vpc {

/// Objective over the packed (a, b) parameter vector.
using ObjectiveFn = std::function<double(std::span<const double>)>;

struct GradientFailure : std::runtime_error {
  std::size_t index;
  GradientFailure(std::size_t i, const std::string& what) : std::runtime_error(what), index(i) {}
};

/// Central differences [J(θ + h e_i) - J(θ - h e_i)] / 2h on the free entries; masked
/// entries are exactly zero. The 2 * free evaluations run on `workers` threads.
inline std::vector<double> fd_gradient(const ObjectiveFn& objective, std::span<const double> theta,
                                       double h, const std::vector<bool>& mask, std::size_t workers = 1) {
  if (!mask.empty() && mask.size() != theta.size()) throw ConfigError("mask length differs from parameter length");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (mask.empty() || mask[i]) free.push_back(i);

  std::vector<double> values(2 * free.size());
  parallel_for(values.size(), workers, [&](std::size_t e) {
    std::vector<double> p(theta.begin(), theta.end());
    p[free[e / 2]] += (e % 2 == 0 ? h : -h);
    values[e] = objective(p);
  });

  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t n = 0; n < free.size(); ++n) {
    const double plus = values[2 * n];
    const double minus = values[2 * n + 1];
    if (is_failed(plus) || is_failed(minus)) {
      throw GradientFailure(free[n], "objective failed while differentiating parameter " +
                                         std::to_string(free[n]));
    }
    grad[free[n]] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

/// Directional derivative of J at θ along d by central differences with step h.
inline double fd_directional(const ObjectiveFn& objective, std::span<const double> theta,
                             std::span<const double> dir, double h) {
  std::vector<double> p(theta.begin(), theta.end());
  std::vector<double> m(theta.begin(), theta.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] += h * dir[i];
    m[i] -= h * dir[i];
  }
  const double jp = objective(p);
  const double jm = objective(m);
  if (is_failed(jp) || is_failed(jm)) return std::numeric_limits<double>::quiet_NaN();
  return (jp - jm) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Strong-Wolfe line search (bracketing phase followed by zoom).

enum class LineSearchStatus { Ok, ExpansionLimit, Failure };

struct LineSearchOptions {
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_expansions = 30;
  std::size_t max_zoom = 40;
  double expansion = 2.0;
};

struct LineSearchResult {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = std::numeric_limits<double>::quiet_NaN();
  double phi0 = 0.0;
  double dphi0 = 0.0;
  LineSearchStatus status = LineSearchStatus::Failure;
  std::size_t evaluations = 0;

  bool sufficient_decrease(double c1) const { return phi <= phi0 + c1 * alpha * dphi0; }
  bool curvature(double c2) const { return std::abs(dphi) <= c2 * std::abs(dphi0); }
};

namespace detail {

// Minimiser of the cubic through (a, fa, ga), (b, fb, gb), or of the quadratic
// through (a, fa, ga), (b, fb) when gb is NaN; NaN if degenerate.
inline double interpolate_step(double a, double fa, double ga, double b, double fb, double gb) {
  if (std::isnan(gb)) {
    const double d = b - a;
    const double denom = 2.0 * (fb - fa - ga * d);
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return a - ga * d * d / denom;
  }
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double rad = d1 * d1 - ga * gb;
  if (rad < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(rad), b - a);
  return b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
}

}  // namespace detail

/// Step length satisfying the strong Wolfe conditions for phi(alpha) with phi'(0) < 0.
/// phi may return failed_objective; such trials count as insufficient decrease.
inline LineSearchResult wolfe_line_search(const std::function<double(double)>& phi,
                                          const std::function<double(double)>& dphi, double phi0,
                                          double dphi0, double alpha_init,
                                          const LineSearchOptions& opts = {}) {
  LineSearchResult res;
  res.phi0 = phi0;
  res.dphi0 = dphi0;
  if (!(dphi0 < 0.0)) {
    res.status = LineSearchStatus::Failure;
    return res;
  }
  auto eval = [&](double a) {
    ++res.evaluations;
    const double v = phi(a);
    return std::isfinite(v) ? v : failed_objective;
  };
  auto deriv = [&](double a) {
    res.evaluations += 2;
    return dphi(a);
  };
  auto armijo = [&](double a, double v) { return !is_failed(v) && v <= phi0 + opts.c1 * a * dphi0; };
  auto curv = [&](double g) { return std::abs(g) <= -opts.c2 * dphi0; };
  auto accept = [&](double a, double v, double g, LineSearchStatus st) {
    res.alpha = a;
    res.phi = v;
    res.dphi = g;
    res.status = st;
    return res;
  };

  auto zoom = [&](double lo, double flo, double glo, double hi, double fhi, double ghi) {
    for (std::size_t it = 0; it < opts.max_zoom; ++it) {
      double a = detail::interpolate_step(lo, flo, glo, hi, is_failed(fhi) ? flo : fhi, is_failed(fhi) ? std::numeric_limits<double>::quiet_NaN() : ghi);
      const double left = std::min(lo, hi);
      const double width = std::abs(hi - lo);
      if (std::isnan(a) || is_failed(fhi) || a < left + 0.1 * width || a > left + 0.9 * width) {
        a = 0.5 * (lo + hi);
      }
      const double fa = eval(a);
      if (!armijo(a, fa) || fa >= flo) {
        hi = a;
        fhi = fa;
        ghi = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double ga = deriv(a);
      if (std::isnan(ga)) {
        hi = a;
        fhi = failed_objective;
        continue;
      }
      if (curv(ga)) return accept(a, fa, ga, LineSearchStatus::Ok);
      if (ga * (hi - lo) >= 0.0) {
        hi = lo;
        fhi = flo;
        ghi = glo;
      }
      lo = a;
      flo = fa;
      glo = ga;
    }
    return accept(0.0, phi0, dphi0, LineSearchStatus::Failure);
  };

  double a_prev = 0.0;
  double f_prev = phi0;
  double g_prev = dphi0;
  double a = alpha_init;
  std::optional<LineSearchResult> best_sufficient;
  for (std::size_t i = 0; i <= opts.max_expansions; ++i) {
    const double fa = eval(a);
    if (!armijo(a, fa) || (i > 0 && fa >= f_prev)) return zoom(a_prev, f_prev, g_prev, a, fa, std::numeric_limits<double>::quiet_NaN());
    const double ga = deriv(a);
    if (std::isnan(ga)) return zoom(a_prev, f_prev, g_prev, a, failed_objective, ga);
    if (curv(ga)) return accept(a, fa, ga, LineSearchStatus::Ok);
    if (ga >= 0.0) return zoom(a, fa, ga, a_prev, f_prev, g_prev);
    LineSearchResult partial = res;
    partial.alpha = a;
    partial.phi = fa;
    partial.dphi = ga;
    partial.status = LineSearchStatus::ExpansionLimit;
    best_sufficient = partial;
    a_prev = a;
    f_prev = fa;
    g_prev = ga;
    a *= opts.expansion;
  }
  best_sufficient->evaluations = res.evaluations;
  return *best_sufficient;
}

// ---------------------------------------------------------------------------
// Gradient descent drivers.

enum class Method { ConstantGD, WolfeGD };

inline std::string_view to_string(Method m) { return m == Method::ConstantGD ? "constant" : "wolfe"; }

inline Method parse_method(std::string_view s) {
  if (s == "constant" || s == "local" || s == "gd") return Method::ConstantGD;
  if (s == "wolfe" || s == "adaptive" || s == "gdl") return Method::WolfeGD;
  throw ConfigError("unknown optimizer method '" + std::string(s) + "'");
}

struct OptimizerConfig {
  Method method = Method::ConstantGD;
  double stepsize = 1e-8;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_iters = 200;
  double fd_step = 1e-6;
  double grad_tol = 0.0;
  double f_tol = 0.0;
  std::vector<double> init;
  std::vector<bool> mask;  // empty: all free
  std::size_t workers = 1;
  LineSearchOptions line_search{};

  void validate() const {
    if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("Wolfe constants need 0 < c1 < c2 < 1");
    if (!(stepsize > 0.0)) throw ConfigError("stepsize must be positive");
    if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
    if (init.empty()) throw ConfigError("optimizer needs an initial parameter vector");
    if (!mask.empty() && mask.size() != init.size()) throw ConfigError("mask length differs from init length");
  }
};

struct IterationRecord {
  std::size_t iter = 0;
  std::vector<double> params;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // step length taken from this iterate (0 on the last record)
  double wall_time = 0.0;
  // Line-search diagnostics of the step leaving this iterate (WolfeGD only).
  bool sufficient_decrease = true;
  bool curvature = true;
  std::string note;
};

struct OptimizationHistory {
  std::vector<IterationRecord> records;
  std::string status;
  double wall_time = 0.0;
  std::optional<ControlField> final_field;

  const IterationRecord& last() const { return records.back(); }
  std::vector<double> objective_series() const {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.objective);
    return out;
  }
};

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Shared iteration skeleton: `advance` takes (θ, J, g, record) and returns the next
// (θ', J') or nullopt to stop (status already set).
template <class Advance>
OptimizationHistory descend(const ObjectiveFn& objective, const OptimizerConfig& cfg, Advance&& advance) {
  cfg.validate();
  OptimizationHistory hist;
  Stopwatch clock;
  std::vector<double> theta = cfg.init;
  double j = objective(theta);
  if (is_failed(j)) {
    hist.status = "objective-failure";
    IterationRecord rec;
    rec.params = theta;
    rec.objective = j;
    rec.grad_norm = std::numeric_limits<double>::quiet_NaN();
    rec.wall_time = clock.seconds();
    hist.records.push_back(std::move(rec));
    return hist;
  }
  double j_prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 0;; ++it) {
    IterationRecord rec;
    rec.iter = it;
    rec.params = theta;
    rec.objective = j;
    std::vector<double> g;
    try {
      g = fd_gradient(objective, theta, cfg.fd_step, cfg.mask, cfg.workers);
    } catch (const GradientFailure& e) {
      rec.grad_norm = std::numeric_limits<double>::quiet_NaN();
      rec.wall_time = clock.seconds();
      rec.note = e.what();
      hist.records.push_back(std::move(rec));
      hist.status = "gradient-failure";
      break;
    }
    rec.grad_norm = norm2(g);
    rec.wall_time = clock.seconds();
    if (rec.grad_norm <= cfg.grad_tol) {
      hist.records.push_back(std::move(rec));
      hist.status = "converged-gradient";
      break;
    }
    if (it > 0 && std::abs(j - j_prev) <= cfg.f_tol) {
      hist.records.push_back(std::move(rec));
      hist.status = "converged-objective";
      break;
    }
    if (it >= cfg.max_iters) {
      hist.records.push_back(std::move(rec));
      hist.status = "max-iterations";
      break;
    }
    auto next = advance(theta, j, g, rec, hist.status);
    hist.records.push_back(std::move(rec));
    if (!next) break;
    j_prev = j;
    theta = std::move(next->first);
    j = next->second;
  }
  hist.wall_time = clock.seconds();
  return hist;
}

}  // namespace detail

/// θ_{n+1} = θ_n - α ∇J(θ_n) with fixed α.
inline OptimizationHistory gd_constant(const ObjectiveFn& objective, const OptimizerConfig& cfg) {
  return detail::descend(objective, cfg,
                         [&](const std::vector<double>& theta, double, const std::vector<double>& g,
                             IterationRecord& rec,
                             std::string& status) -> std::optional<std::pair<std::vector<double>, double>> {
                           std::vector<double> next(theta.size());
                           for (std::size_t i = 0; i < theta.size(); ++i) next[i] = theta[i] - cfg.stepsize * g[i];
                           const double jn = objective(next);
                           rec.step = cfg.stepsize;
                           if (is_failed(jn)) {
                             status = "objective-failure";
                             rec.note = "forward solve failed at the next iterate";
                             return std::nullopt;
                           }
                           return std::pair{std::move(next), jn};
                         });
}

/// Steepest descent with a strong-Wolfe step; the first trial moves the parameters by
/// min(1, 1/‖∇J‖) * ‖∇J‖ and φ' is a central difference along the search direction.
inline OptimizationHistory gd_wolfe(const ObjectiveFn& objective, const OptimizerConfig& cfg) {
  LineSearchOptions ls = cfg.line_search;
  ls.c1 = cfg.c1;
  ls.c2 = cfg.c2;
  return detail::descend(
      objective, cfg,
      [&](const std::vector<double>& theta, double j, const std::vector<double>& g, IterationRecord& rec,
          std::string& status) -> std::optional<std::pair<std::vector<double>, double>> {
        const double gnorm = rec.grad_norm;
        std::vector<double> dir(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -g[i];
        auto point = [&](double a) {
          std::vector<double> p(theta);
          for (std::size_t i = 0; i < p.size(); ++i) p[i] += a * dir[i];
          return p;
        };
        auto phi = [&](double a) { return objective(point(a)); };
        const double h = cfg.fd_step / gnorm;
        auto dphi = [&](double a) {
          const double jp = phi(a + h);
          const double jm = phi(a - h);
          if (is_failed(jp) || is_failed(jm)) return std::numeric_limits<double>::quiet_NaN();
          return (jp - jm) / (2.0 * h);
        };
        const double alpha0 = std::min(1.0, 1.0 / gnorm);
        const auto res = wolfe_line_search(phi, dphi, j, -gnorm * gnorm, alpha0, ls);
        rec.step = res.alpha;
        rec.sufficient_decrease = res.status != LineSearchStatus::Failure && res.sufficient_decrease(cfg.c1);
        rec.curvature = res.status != LineSearchStatus::Failure && res.curvature(cfg.c2);
        if (res.status == LineSearchStatus::Failure) {
          status = "line-search-failure";
          rec.note = "no sufficient decrease along the steepest-descent direction";
          rec.step = 0.0;
          return std::nullopt;
        }
        if (res.status == LineSearchStatus::ExpansionLimit) {
          // Still descending at the largest trial: the step would break curvature, so stop here.
          status = "line-search-stalled";
          rec.note = "line-search-warning";
          rec.curvature = false;
          rec.step = 0.0;
          return std::nullopt;
        }
        return std::pair{point(res.alpha), res.phi};
      });
}

inline OptimizationHistory optimize(const ObjectiveFn& objective, const OptimizerConfig& cfg) {
  return cfg.method == Method::ConstantGD ? gd_constant(objective, cfg) : gd_wolfe(objective, cfg);
}

// ---------------------------------------------------------------------------
// Control-problem plumbing.

/// Finite-difference step per objective; the KL family is smoother in θ at small scales.
inline double default_fd_step(ObjectiveKind kind) {
  return kind == ObjectiveKind::KL || kind == ObjectiveKind::KLT ? 1e-7 : 1e-6;
}

/// Constant GD step per preset.
inline double default_stepsize(std::string_view preset) { return preset == "bump-on-tail" ? 1e-9 : 1e-8; }

/// θ ↦ J(f[H(θ)]) for a base configuration; θ is the packed (a, b) vector of order n.
inline ObjectiveFn make_control_objective(ObjectiveKind kind, SimulationConfig base, std::size_t order) {
  return [kind, base = std::move(base), order](std::span<const double> theta) {
    SimulationConfig c = base;
    c.control = unpack_params(theta, order, base.grid.k0());
    return evaluate_objective(kind, c);
  };
}

enum class InitKind { Far, Mid, Near };

inline InitKind parse_init_kind(std::string_view s) {
  if (s == "far") return InitKind::Far;
  if (s == "mid") return InitKind::Mid;
  if (s == "near") return InitKind::Near;
  throw ConfigError("unknown init kind '" + std::string(s) + "'");
}

inline std::string_view to_string(InitKind k) {
  switch (k) {
    case InitKind::Far: return "far";
    case InitKind::Mid: return "mid";
    case InitKind::Near: return "near";
  }
  return "?";
}

struct InitBox {
  double low;
  double high;
};

/// Uniform sampling boxes; the near box depends on where the preset's optimum sits.
inline InitBox init_box(InitKind kind, std::string_view preset) {
  switch (kind) {
    case InitKind::Far: return {-1.0, 1.0};
    case InitKind::Mid: return {-0.05, 0.05};
    case InitKind::Near:
      return preset == "bump-on-tail" ? InitBox{-0.001, 0.003} : InitBox{-0.003, 0.001};
  }
  return {0.0, 0.0};
}

/// Samples free entries uniformly from the box; masked entries stay 0.
inline std::vector<double> sample_init(InitBox box, const ParameterMask& mask, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(box.low, box.high);
  std::vector<double> theta(mask.free.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (mask.free[i]) theta[i] = dist(rng);
  return theta;
}

}  // namespace vpc
