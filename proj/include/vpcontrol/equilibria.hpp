#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "vpcontrol/grid.hpp"

namespace vpc {

using cplx = std::complex<double>;

// Two counter-drifting unit-temperature Maxwellians with weights alpha, 1-alpha.
struct TwoStream {
  double alpha = 0.5;
  double mu = 2.4;
};

// 90% bulk Maxwellian at v1 plus a 10% narrow (variance 1/4) bump at v2.
struct BumpOnTail {
  double v1 = -3.0;
  double v2 = 4.5;
};

using EquilibriumSpec = std::variant<TwoStream, BumpOnTail>;

/// f(0,x,v) = (1 + eps cos(m k0 x)) f_eq(v)
struct MultiplicativeCosine {
  double epsilon = 1e-3;
  int mode = 1;
};

/// f(0,x,v) = f_eq(v) + eps * sqrt(2)/(10 sqrt(pi)) exp(-2 (v - v2)^2) cos(m k0 x)
/// with v2 taken from the bump-on-tail equilibrium.
struct AdditiveBumpCosine {
  double epsilon = 1e-3;
  int mode = 1;
};

using PerturbationSpec = std::variant<MultiplicativeCosine, AdditiveBumpCosine>;

inline double perturbation_epsilon(const PerturbationSpec& p) {
  return std::visit([](const auto& q) { return q.epsilon; }, p);
}
inline int perturbation_mode(const PerturbationSpec& p) {
  return std::visit([](const auto& q) { return q.mode; }, p);
}
inline PerturbationSpec with_epsilon(PerturbationSpec p, double eps) {
  std::visit([eps](auto& q) { q.epsilon = eps; }, p);
  return p;
}

namespace detail {
inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343818684758586311649;
// sqrt(2)/(10 sqrt(pi)): normalises exp(-2 v^2) to total mass 1/10.
inline constexpr double bump_norm = 0.1 * 0.7978845608028653558798921198687637369517172623298;
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline double eval_equilibrium(const EquilibriumSpec& spec, double v) {
  return std::visit(
      detail::overloaded{
          [v](const TwoStream& ts) {
            const double a = std::exp(-0.5 * (v - ts.mu) * (v - ts.mu));
            const double b = std::exp(-0.5 * (v + ts.mu) * (v + ts.mu));
            return (ts.alpha * a + (1.0 - ts.alpha) * b) * detail::inv_sqrt_2pi;
          },
          [v](const BumpOnTail& bt) {
            return 0.9 * detail::inv_sqrt_2pi * std::exp(-0.5 * (v - bt.v1) * (v - bt.v1)) +
                   detail::bump_norm * std::exp(-2.0 * (v - bt.v2) * (v - bt.v2));
          }},
      spec);
}

/// Velocity transform with kernel exp(-i m v), no 2*pi normalisation.
inline cplx equilibrium_velocity_fourier(const EquilibriumSpec& spec, double m) {
  const cplx i{0.0, 1.0};
  return std::visit(
      detail::overloaded{
          [&](const TwoStream& ts) {
            return (ts.alpha * std::exp(-i * ts.mu * m) + (1.0 - ts.alpha) * std::exp(i * ts.mu * m)) *
                   std::exp(-0.5 * m * m);
          },
          [&](const BumpOnTail& bt) {
            return 0.9 * std::exp(-i * m * bt.v1) * std::exp(-0.5 * m * m) +
                   0.1 * std::exp(-i * m * bt.v2) * std::exp(-0.125 * m * m);
          }},
      spec);
}

/// Upper bound on |equilibrium_velocity_fourier(spec, m)|.
inline double equilibrium_fourier_envelope(const EquilibriumSpec& spec, double m) {
  return std::visit(detail::overloaded{[m](const TwoStream&) { return std::exp(-0.5 * m * m); },
                                       [m](const BumpOnTail&) {
                                         return 0.9 * std::exp(-0.5 * m * m) +
                                                0.1 * std::exp(-0.125 * m * m);
                                       }},
                    spec);
}

/// Velocity factor of the initial perturbation, in velocity-Fourier space.
inline cplx perturbation_velocity_profile_fourier(const PerturbationSpec& pert,
                                                  const EquilibriumSpec& spec, double m) {
  return std::visit(
      detail::overloaded{
          [&](const MultiplicativeCosine&) { return equilibrium_velocity_fourier(spec, m); },
          [&](const AdditiveBumpCosine&) {
            const double v2 = std::holds_alternative<BumpOnTail>(spec) ? std::get<BumpOnTail>(spec).v2
                                                                       : BumpOnTail{}.v2;
            return 0.1 * std::exp(cplx{0.0, -m * v2}) * std::exp(-0.125 * m * m);
          }},
      pert);
}

inline double perturbation_velocity_profile(const PerturbationSpec& pert,
                                            const EquilibriumSpec& spec, double v) {
  return std::visit(
      detail::overloaded{[&](const MultiplicativeCosine&) { return eval_equilibrium(spec, v); },
                         [&](const AdditiveBumpCosine&) {
                           const double v2 = std::holds_alternative<BumpOnTail>(spec)
                                                 ? std::get<BumpOnTail>(spec).v2
                                                 : BumpOnTail{}.v2;
                           return detail::bump_norm * std::exp(-2.0 * (v - v2) * (v - v2));
                         }},
      pert);
}

struct AliasingError : ConfigError {
  using ConfigError::ConfigError;
};

inline DistributionState build_initial_condition(const EquilibriumSpec& spec,
                                                 const PerturbationSpec& pert,
                                                 const PhaseSpaceGrid& grid) {
  const double eps = perturbation_epsilon(pert);
  const int mode = perturbation_mode(pert);
  if (eps < 0.0) throw ConfigError("perturbation amplitude must be non-negative");
  if (mode < 1) throw ConfigError("perturbation mode must be >= 1");
  if (2 * static_cast<std::size_t>(mode) >= grid.mx()) {
    throw AliasingError("perturbation mode " + std::to_string(mode) +
                        " is not resolvable with Mx=" + std::to_string(grid.mx()));
  }

  DistributionState f(grid);
  std::vector<double> feq(grid.mv());
  std::vector<double> profile(grid.mv());
  for (std::size_t j = 0; j < grid.mv(); ++j) {
    feq[j] = eval_equilibrium(spec, grid.v(j));
    profile[j] = perturbation_velocity_profile(pert, spec, grid.v(j));
  }
  const double k = mode * grid.k0();
  for (std::size_t i = 0; i < grid.mx(); ++i) {
    const double c = eps * std::cos(k * grid.x(i));
    for (std::size_t j = 0; j < grid.mv(); ++j) f(i, j) = feq[j] + c * profile[j];
  }
  return f;
}

// Named presets.
struct InstabilityPreset {
  std::string name;
  EquilibriumSpec equilibrium;
  PerturbationSpec perturbation;
  double lx;
  double lv;
  double final_time;
};

inline InstabilityPreset two_stream_preset() {
  return {"two-stream", TwoStream{0.5, 2.4}, MultiplicativeCosine{1e-3, 1}, 10.0 * std::numbers::pi,
          6.0, 30.0};
}

inline InstabilityPreset bump_on_tail_preset() {
  return {"bump-on-tail", BumpOnTail{-3.0, 4.5}, AdditiveBumpCosine{1e-3, 1},
          20.0 * std::numbers::pi, 9.0, 40.0};
}

inline InstabilityPreset preset_by_name(std::string_view name) {
  if (name == "two-stream" || name == "ts") return two_stream_preset();
  if (name == "bump-on-tail" || name == "bot") return bump_on_tail_preset();
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace vpc
