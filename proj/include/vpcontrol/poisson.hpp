#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include "vpcontrol/grid.hpp"

namespace vpc {

struct FieldSample {
  std::vector<double> values;
  double mean = 0.0;
};

namespace detail {
// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Pseudo-spectral periodic solve of V'' = 1 - rho, E = V'.
/// Mode m has wavenumber m k0; the mean and the Nyquist mode are discarded.
class PoissonSolver {
 public:
  explicit PoissonSolver(const PhaseSpaceGrid& grid)
      : n_(grid.mx()), k0_(grid.k0()), real_(n_), spec_(n_ / 2 + 1) {
    std::lock_guard lock(detail::fftw_planner_mutex());
    auto* spec = reinterpret_cast<fftw_complex*>(spec_.data());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_.data(), spec, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec, real_.data(), FFTW_ESTIMATE);
  }

  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  ~PoissonSolver() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  /// Field from charge density rho (length Mx) into out (length Mx).
  void field(std::span<const double> rho, std::span<double> out) {
    transform_rhs(rho);
    // E_m = i xi V_m = -i c_m / xi
    for (std::size_t m = 1; m < spec_.size(); ++m) {
      const double xi = static_cast<double>(m) * k0_;
      spec_[m] = std::complex<double>(0.0, -1.0) * spec_[m] / xi;
    }
    finish(out);
  }

  FieldSample field(std::span<const double> rho) {
    FieldSample s;
    s.values.resize(n_);
    field(rho, s.values);
    double m = 0.0;
    for (double e : s.values) m += e;
    s.mean = m / static_cast<double>(n_);
    return s;
  }

  /// Potential V with V'' = 1 - rho and zero mean.
  void potential(std::span<const double> rho, std::span<double> out) {
    transform_rhs(rho);
    for (std::size_t m = 1; m < spec_.size(); ++m) {
      const double xi = static_cast<double>(m) * k0_;
      spec_[m] = -spec_[m] / (xi * xi);
    }
    finish(out);
  }

 private:
  void transform_rhs(std::span<const double> rho) {
    for (std::size_t i = 0; i < n_; ++i) real_[i] = 1.0 - rho[i];
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& c : spec_) c *= scale;
    spec_[0] = 0.0;
    if (n_ % 2 == 0) spec_[n_ / 2] = 0.0;
  }

  void finish(std::span<double> out) {
    fftw_execute(backward_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i];
  }

  std::size_t n_;
  double k0_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spec_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// rho(x_i) = sum_j f(x_i, v_j) dv
inline void charge_density(const DistributionState& f, const PhaseSpaceGrid& grid,
                           std::span<double> rho) {
  const double dv = grid.dv();
  for (std::size_t i = 0; i < f.mx(); ++i) {
    double acc = 0.0;
    for (double fij : f.column(i)) acc += fij;
    rho[i] = acc * dv;
  }
}

inline std::vector<double> charge_density(const DistributionState& f, const PhaseSpaceGrid& grid) {
  std::vector<double> rho(f.mx());
  charge_density(f, grid, rho);
  return rho;
}

inline FieldSample solve_poisson(std::span<const double> rho, const PhaseSpaceGrid& grid) {
  PoissonSolver solver(grid);
  return solver.field(rho);
}

inline double electric_energy(std::span<const double> field, const PhaseSpaceGrid& grid) {
  double acc = 0.0;
  for (double e : field) acc += e * e;
  return acc * grid.dx();
}

}  // namespace vpc
