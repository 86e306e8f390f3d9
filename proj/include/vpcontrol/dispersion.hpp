#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpcontrol/control_field.hpp"
#include "vpcontrol/equilibria.hpp"
#include "vpcontrol/grid.hpp"
#include "vpcontrol/quadrature.hpp"

namespace vpc {

// Linear stability of a spatially uniform equilibrium. For each spatial mode the
// dispersion function 1 + L[U](s), U(t) = t f_eq^(k t), is searched for its root with
// the largest positive real part; the static field amplitude that cancels the source
// term L[S] at that root is H^(k) = s0 L[S](s0) / (i k).

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NoUnstableRoot : std::runtime_error {
  int mode;
  NoUnstableRoot(int m, const std::string& what) : std::runtime_error(what), mode(m) {}
};

/// Time horizon of the Laplace integrals. Unset: integrate until the integrand
/// envelope falls below decay_bound. The published control coefficients and roots
/// correspond to a finite horizon of 10.
struct LaplaceOptions {
  std::optional<double> horizon;
  double tolerance = 1e-10;
  double decay_bound = 1e-16;

  static LaplaceOptions converged() { return {}; }
  static LaplaceOptions published() { return {10.0}; }
};

/// Smallest t (in unit steps) with envelope(k t) * t * exp(-re_s t) below the bound.
inline double decay_horizon(const EquilibriumSpec& spec, double k_phys, double re_s, double bound) {
  double t = 1.0;
  for (; t < 1e4; t += 1.0) {
    const double env = equilibrium_fourier_envelope(spec, k_phys * t) * t * std::exp(-re_s * t);
    if (env < bound) break;
  }
  return t;
}

/// L[U](s) = int_0^inf exp(-s t) t f_eq^(k t) dt
inline cplx laplace_U(const EquilibriumSpec& spec, double k_phys, cplx s,
                      const LaplaceOptions& opts = {}) {
  if (k_phys == 0.0) throw DomainError("laplace_U requires a non-zero wavenumber");
  const double t_max =
      opts.horizon ? *opts.horizon : decay_horizon(spec, k_phys, s.real(), opts.decay_bound);
  auto integrand = [&](double t) { return std::exp(-s * t) * t * equilibrium_velocity_fourier(spec, k_phys * t); };
  return integrate(integrand, 0.0, t_max, opts.tolerance);
}

inline cplx dispersion_function(const EquilibriumSpec& spec, double k_phys, cplx s,
                                const LaplaceOptions& opts = {}) {
  return 1.0 + laplace_U(spec, k_phys, s, opts);
}

/// L[S](s) for spatial mode `mode`: (eps/2) int_0^inf exp(-s t) g^(k t) dt with g the
/// perturbation's velocity profile; zero for modes the perturbation does not excite.
inline cplx laplace_S(const EquilibriumSpec& spec, const PerturbationSpec& pert, int mode, double k0,
                      cplx s, const LaplaceOptions& opts = {}) {
  const double eps = perturbation_epsilon(pert);
  if (mode == 0 || std::abs(mode) != perturbation_mode(pert) || eps == 0.0) return {0.0, 0.0};
  const double k_phys = mode * k0;
  double t_max = 0.0;
  if (opts.horizon) {
    t_max = *opts.horizon;
  } else {
    // The profile transforms are bounded by the equilibrium envelope family.
    t_max = decay_horizon(BumpOnTail{}, k_phys, s.real(), opts.decay_bound);
    t_max = std::max(t_max, decay_horizon(spec, k_phys, s.real(), opts.decay_bound));
  }
  auto integrand = [&](double t) {
    return std::exp(-s * t) * perturbation_velocity_profile_fourier(pert, spec, k_phys * t);
  };
  return 0.5 * eps * integrate(integrand, 0.0, t_max, opts.tolerance);
}

struct DispersionRoot {
  int mode = 0;
  cplx s0;
  double residual = 0.0;
};

struct RootSearchOptions {
  double re_max = 1.0;
  double im_max = 1.0;
  std::size_t re_samples = 101;
  std::size_t im_samples = 101;
  double accept_threshold = 1e-2;
  std::size_t max_candidates = 8;
  LaplaceOptions laplace;
};

/// |1 + L[U]| sampled on the search rectangle; row-major over (re, im).
struct ResidualMap {
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> values;

  double at(std::size_t a, std::size_t b) const { return values[a * im.size() + b]; }
};

inline ResidualMap residual_map(const EquilibriumSpec& spec, double k_phys,
                                const RootSearchOptions& opts = {}) {
  ResidualMap map;
  map.re.resize(opts.re_samples);
  map.im.resize(opts.im_samples);
  // Re(s) in (0, re_max]; Im(s) in [-im_max, im_max].
  for (std::size_t a = 0; a < opts.re_samples; ++a)
    map.re[a] = opts.re_max * static_cast<double>(a + 1) / static_cast<double>(opts.re_samples);
  for (std::size_t b = 0; b < opts.im_samples; ++b)
    map.im[b] = -opts.im_max + 2.0 * opts.im_max * static_cast<double>(b) /
                                   static_cast<double>(opts.im_samples - 1);
  map.values.resize(opts.re_samples * opts.im_samples);
  for (std::size_t a = 0; a < opts.re_samples; ++a)
    for (std::size_t b = 0; b < opts.im_samples; ++b)
      map.values[a * opts.im_samples + b] =
          std::abs(dispersion_function(spec, k_phys, {map.re[a], map.im[b]}, opts.laplace));
  return map;
}

namespace detail {

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct DispersionObjective {
  const EquilibriumSpec* spec;
  double k_phys;
  const LaplaceOptions* laplace;
};

inline double dispersion_norm2(const gsl_vector* x, void* params) {
  const auto* p = static_cast<const DispersionObjective*>(params);
  const cplx s{gsl_vector_get(x, 0), gsl_vector_get(x, 1)};
  return std::norm(dispersion_function(*p->spec, p->k_phys, s, *p->laplace));
}

// Nelder-Mead polish of |1 + L[U]|^2 from a coarse-grid seed.
inline cplx refine_root(const EquilibriumSpec& spec, double k_phys, cplx seed, double step,
                        const LaplaceOptions& laplace) {
  gsl_set_error_handler_off();
  DispersionObjective params{&spec, k_phys, &laplace};
  gsl_multimin_function fn{&dispersion_norm2, 2, &params};
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(2));
  std::unique_ptr<gsl_vector, VectorDeleter> ss(gsl_vector_alloc(2));
  gsl_vector_set(x.get(), 0, seed.real());
  gsl_vector_set(x.get(), 1, seed.imag());
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> nm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2));
  gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), ss.get());
  for (int iter = 0; iter < 2000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm.get()), 1e-12) == GSL_SUCCESS) break;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(nm.get());
  return {gsl_vector_get(best, 0), gsl_vector_get(best, 1)};
}

}  // namespace detail

/// Fastest-growing root of 1 + L[U](s) for spatial mode `mode` (wavenumber mode*k0).
inline DispersionRoot find_root(const EquilibriumSpec& spec, int mode, const PhaseSpaceGrid& grid,
                                const RootSearchOptions& opts = {}) {
  if (mode == 0) throw DomainError("mode 0 has no dispersion relation");
  if (mode < 0) {
    // Real f_eq: roots of mode -m are conjugates of those of mode m.
    auto r = find_root(spec, -mode, grid, opts);
    return {mode, std::conj(r.s0), r.residual};
  }
  const double k_phys = mode * grid.k0();
  const ResidualMap map = residual_map(spec, k_phys, opts);
  const std::size_t na = map.re.size();
  const std::size_t nb = map.im.size();

  struct Seed {
    double value;
    std::size_t a, b;
  };
  std::vector<Seed> seeds;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      const double v = map.at(a, b);
      bool is_min = true;
      for (int da = -1; da <= 1 && is_min; ++da) {
        for (int db = -1; db <= 1; ++db) {
          if (da == 0 && db == 0) continue;
          const auto aa = static_cast<long long>(a) + da;
          const auto bb = static_cast<long long>(b) + db;
          if (aa < 0 || bb < 0 || aa >= static_cast<long long>(na) || bb >= static_cast<long long>(nb)) continue;
          if (map.at(static_cast<std::size_t>(aa), static_cast<std::size_t>(bb)) < v) {
            is_min = false;
            break;
          }
        }
      }
      if (is_min) seeds.push_back({v, a, b});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& l, const Seed& r) { return l.value < r.value; });
  if (seeds.size() > opts.max_candidates) seeds.resize(opts.max_candidates);

  const double step = 0.5 * opts.re_max / static_cast<double>(na);
  std::optional<DispersionRoot> best;
  for (const auto& sd : seeds) {
    const cplx s = detail::refine_root(spec, k_phys, {map.re[sd.a], map.im[sd.b]}, step, opts.laplace);
    const double res = std::abs(dispersion_function(spec, k_phys, s, opts.laplace));
    if (!(s.real() > 0.0) || !(res < opts.accept_threshold)) continue;
    const DispersionRoot cand{mode, s, res};
    if (!best) {
      best = cand;
      continue;
    }
    const double dre = cand.s0.real() - best->s0.real();
    if (dre > 1e-9 || (std::abs(dre) <= 1e-9 && std::abs(cand.s0.imag()) < std::abs(best->s0.imag()))) {
      best = cand;
    }
  }
  if (!best) {
    throw NoUnstableRoot(mode, "no unstable dispersion root for mode " + std::to_string(mode));
  }
  return *best;
}

/// Eq.-level amplitude H^(k) = s0 L[S](s0) / (i k) for one mode.
inline cplx control_amplitude(const EquilibriumSpec& spec, const PerturbationSpec& pert,
                              const DispersionRoot& root, double k0, const LaplaceOptions& laplace = {}) {
  const double k_phys = root.mode * k0;
  const cplx ls = laplace_S(spec, pert, root.mode, k0, root.s0, laplace);
  return root.s0 * ls / (cplx{0.0, 1.0} * k_phys);
}

struct GuessReport {
  std::vector<DispersionRoot> roots;
  std::vector<cplx> amplitudes;  // H^(k) for each root's mode
  ControlField field;
  bool trivial = false;  // zero perturbation: nothing to cancel
};

/// Overall sign of the synthesised coefficients, fixed once on the two-stream b1 < 0.
inline constexpr double guess_sign_calibration = -1.0;

/// Static control synthesised from the fastest-growing root of each requested mode.
/// Conjugate pairs give a_k = 2 Re H^(k), b_k = -2 Im H^(k), times the calibration sign.
inline GuessReport synthesize_guess_report(const EquilibriumSpec& spec, const PerturbationSpec& pert,
                                           const PhaseSpaceGrid& grid, std::span<const int> modes,
                                           const RootSearchOptions& opts = {}) {
  GuessReport rep;
  int order = 0;
  for (int m : modes) order = std::max(order, std::abs(m));
  rep.field = ControlField(static_cast<std::size_t>(order), grid.k0());
  if (perturbation_epsilon(pert) == 0.0) {
    rep.trivial = true;
    return rep;
  }
  for (int m : modes) {
    if (m <= 0) throw DomainError("guess modes must be positive");
    const DispersionRoot root = find_root(spec, m, grid, opts);
    const cplx h = control_amplitude(spec, pert, root, grid.k0(), opts.laplace);
    rep.roots.push_back(root);
    rep.amplitudes.push_back(h);
    rep.field.a[static_cast<std::size_t>(m - 1)] = guess_sign_calibration * 2.0 * h.real();
    rep.field.b[static_cast<std::size_t>(m - 1)] = -guess_sign_calibration * 2.0 * h.imag();
  }
  return rep;
}

inline ControlField synthesize_guess(const EquilibriumSpec& spec, const PerturbationSpec& pert,
                                     const PhaseSpaceGrid& grid, std::span<const int> modes,
                                     const RootSearchOptions& opts = {}) {
  return synthesize_guess_report(spec, pert, grid, modes, opts).field;
}

}  // namespace vpc
