#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpc {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Uniform phase-space mesh: periodic in x on [0, Lx), half-open in v on
/// [-Lv, Lv). Velocity reads outside the box are treated as zero.
class PhaseSpaceGrid {
 public:
  PhaseSpaceGrid() = default;

  PhaseSpaceGrid(std::size_t mx, std::size_t mv, double lx, double lv)
      : mx_(mx), mv_(mv), lx_(lx), lv_(lv) {
    if (mx < 8 || mv < 8) {
      throw ConfigError("grid needs at least 8 nodes per axis (got Mx=" + std::to_string(mx) +
                        ", Mv=" + std::to_string(mv) + ")");
    }
    if (!(lx > 0.0) || !(lv > 0.0) || !std::isfinite(lx) || !std::isfinite(lv)) {
      throw ConfigError("grid extents must be positive and finite");
    }
  }

  std::size_t mx() const noexcept { return mx_; }
  std::size_t mv() const noexcept { return mv_; }
  std::size_t size() const noexcept { return mx_ * mv_; }
  double lx() const noexcept { return lx_; }
  double lv() const noexcept { return lv_; }
  double dx() const noexcept { return lx_ / static_cast<double>(mx_); }
  double dv() const noexcept { return 2.0 * lv_ / static_cast<double>(mv_); }
  double k0() const noexcept { return 2.0 * std::numbers::pi / lx_; }

  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }
  double v(std::size_t j) const noexcept { return -lv_ + static_cast<double>(j) * dv(); }

  std::vector<double> x_nodes() const {
    std::vector<double> out(mx_);
    for (std::size_t i = 0; i < mx_; ++i) out[i] = x(i);
    return out;
  }
  std::vector<double> v_nodes() const {
    std::vector<double> out(mv_);
    for (std::size_t j = 0; j < mv_; ++j) out[j] = v(j);
    return out;
  }

  friend bool operator==(const PhaseSpaceGrid&, const PhaseSpaceGrid&) = default;

 private:
  std::size_t mx_ = 0;
  std::size_t mv_ = 0;
  double lx_ = 0.0;
  double lv_ = 0.0;
};

inline PhaseSpaceGrid make_grid(std::size_t mx, std::size_t mv, double lx, double lv) {
  return PhaseSpaceGrid(mx, mv, lx, lv);
}

/// Samples of f(t, x_i, v_j), x-major / v-minor.
class DistributionState {
 public:
  DistributionState() = default;
  explicit DistributionState(const PhaseSpaceGrid& grid, double time = 0.0)
      : mx_(grid.mx()), mv_(grid.mv()), time_(time), values_(grid.size(), 0.0) {}

  std::size_t mx() const noexcept { return mx_; }
  std::size_t mv() const noexcept { return mv_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * mv_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * mv_ + j]; }

  std::span<double> column(std::size_t i) noexcept { return {values_.data() + i * mv_, mv_}; }
  std::span<const double> column(std::size_t i) const noexcept {
    return {values_.data() + i * mv_, mv_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double total_mass(const PhaseSpaceGrid& grid) const noexcept {
    double m = 0.0;
    for (double f : values_) m += f;
    return m * grid.dx() * grid.dv();
  }

  double min_value() const noexcept {
    double m = values_.empty() ? 0.0 : values_.front();
    for (double f : values_) m = f < m ? f : m;
    return m;
  }

  double max_value() const noexcept {
    double m = values_.empty() ? 0.0 : values_.front();
    for (double f : values_) m = f > m ? f : m;
    return m;
  }

 private:
  std::size_t mx_ = 0;
  std::size_t mv_ = 0;
  double time_ = 0.0;
  std::vector<double> values_;
};

}  // namespace vpc
