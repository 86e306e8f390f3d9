#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vpcontrol/equilibria.hpp"
#include "vpcontrol/grid.hpp"

namespace vpc {

inline constexpr double kl_floor = 1e-30;

/// Caches f_eq(v_j) so per-step KL/L2 integrands cost one pass over the state.
class EquilibriumReference {
 public:
  EquilibriumReference(const EquilibriumSpec& spec, const PhaseSpaceGrid& grid)
      : dxdv_(grid.dx() * grid.dv()), feq_(grid.mv()), log_feq_(grid.mv()) {
    for (std::size_t j = 0; j < grid.mv(); ++j) {
      feq_[j] = eval_equilibrium(spec, grid.v(j));
      log_feq_[j] = std::log(std::max(feq_[j], kl_floor));
    }
  }

  // sum f log(f / f_eq) dx dv; cells with f <= kl_floor contribute nothing.
  double kl(const DistributionState& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.mx(); ++i) {
      const auto col = f.column(i);
      for (std::size_t j = 0; j < col.size(); ++j) {
        const double fij = col[j];
        if (fij > kl_floor) acc += fij * (std::log(fij) - log_feq_[j]);
      }
    }
    return acc * dxdv_;
  }

  // 1/2 sum (f - f_eq)^2 dx dv
  double l2(const DistributionState& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.mx(); ++i) {
      const auto col = f.column(i);
      for (std::size_t j = 0; j < col.size(); ++j) {
        const double d = col[j] - feq_[j];
        acc += d * d;
      }
    }
    return 0.5 * acc * dxdv_;
  }

  const std::vector<double>& feq() const noexcept { return feq_; }

 private:
  double dxdv_;
  std::vector<double> feq_;
  std::vector<double> log_feq_;
};

inline double kl_divergence(const DistributionState& f, const EquilibriumSpec& spec,
                            const PhaseSpaceGrid& grid) {
  return EquilibriumReference(spec, grid).kl(f);
}

inline double l2_misfit(const DistributionState& f, const EquilibriumSpec& spec,
                        const PhaseSpaceGrid& grid) {
  return EquilibriumReference(spec, grid).l2(f);
}

}  // namespace vpc
