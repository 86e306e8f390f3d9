#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vpcontrol/grid.hpp"

namespace vpc {

/// Static external field H(x) = sum_{k=1..N} a_k cos(k k0 x) + b_k sin(k k0 x).
struct ControlField {
  std::vector<double> a;
  std::vector<double> b;
  double k0 = 1.0;

  ControlField() = default;
  ControlField(std::size_t n, double k0_) : a(n, 0.0), b(n, 0.0), k0(k0_) {}
  ControlField(std::vector<double> a_, std::vector<double> b_, double k0_)
      : a(std::move(a_)), b(std::move(b_)), k0(k0_) {
    if (a.size() != b.size()) throw ConfigError("control coefficient arrays differ in length");
  }

  std::size_t order() const noexcept { return a.size(); }

  double operator()(double x) const noexcept {
    double h = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double arg = static_cast<double>(k + 1) * k0 * x;
      h += a[k] * std::cos(arg) + b[k] * std::sin(arg);
    }
    return h;
  }

  double max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (double c : a) m = std::max(m, std::abs(c));
    for (double c : b) m = std::max(m, std::abs(c));
    return m;
  }

  friend bool operator==(const ControlField&, const ControlField&) = default;
};

inline double eval_control(const ControlField& field, double x) { return field(x); }

/// H sampled at the grid's x-nodes.
inline std::vector<double> sample_control(const ControlField& field, const PhaseSpaceGrid& grid) {
  std::vector<double> h(grid.mx());
  for (std::size_t i = 0; i < grid.mx(); ++i) h[i] = field(grid.x(i));
  return h;
}

/// (a_1..a_N, b_1..b_N)
inline std::vector<double> pack_params(const ControlField& field) {
  std::vector<double> theta;
  theta.reserve(2 * field.order());
  theta.insert(theta.end(), field.a.begin(), field.a.end());
  theta.insert(theta.end(), field.b.begin(), field.b.end());
  return theta;
}

inline ControlField unpack_params(std::span<const double> theta, std::size_t n, double k0) {
  if (theta.size() != 2 * n) {
    throw ConfigError("parameter vector has length " + std::to_string(theta.size()) +
                      ", expected " + std::to_string(2 * n));
  }
  return ControlField(std::vector<double>(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n)),
                      std::vector<double>(theta.begin() + static_cast<std::ptrdiff_t>(n), theta.end()),
                      k0);
}

/// Which entries of the packed (a, b) vector the optimizer may move.
struct ParameterMask {
  std::size_t order = 0;
  std::vector<bool> free;

  static ParameterMask all(std::size_t n) { return {n, std::vector<bool>(2 * n, true)}; }

  std::size_t a_index(std::size_t k) const { return k - 1; }
  std::size_t b_index(std::size_t k) const { return order + k - 1; }

  std::size_t free_count() const {
    std::size_t c = 0;
    for (bool f : free) c += f ? 1 : 0;
    return c;
  }

  std::vector<std::size_t> free_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (free[i]) idx.push_back(i);
    return idx;
  }
};

// Two-stream reduced basis: b1 sin(k0 x) + b2 sin(2 k0 x).
inline ParameterMask two_stream_under_mask() {
  ParameterMask m{2, std::vector<bool>(4, false)};
  m.free[m.b_index(1)] = true;
  m.free[m.b_index(2)] = true;
  return m;
}

// Bump-on-tail reduced basis: a1 cos(k0 x) + b1 sin(k0 x).
inline ParameterMask bump_on_tail_under_mask() {
  ParameterMask m{1, std::vector<bool>(2, true)};
  return m;
}

inline ParameterMask over_parametrized_mask() { return ParameterMask::all(14); }

/// Parameter name for index i of a packed vector of order n ("a1", "b2", ...).
inline std::string param_name(std::size_t i, std::size_t n) {
  return (i < n ? "a" : "b") + std::to_string(i < n ? i + 1 : i - n + 1);
}

}  // namespace vpc
