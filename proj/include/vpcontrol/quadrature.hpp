#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <algorithm>
#include <numbers>

namespace vpc {

namespace detail {

template <std::size_t N>
struct GaussLegendreRule {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendreRule() {
    // Newton iteration on P_N from the Chebyshev-type initial guess.
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

template <std::size_t N>
const GaussLegendreRule<N>& gauss_legendre_rule() {
  static const GaussLegendreRule<N> rule;
  return rule;
}

template <class F>
auto gauss_legendre_panel(F& f, double a, double b) {
  const auto& rule = gauss_legendre_rule<16>();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  decltype(f(a)) acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

template <class F, class T>
T adaptive_panel(F& f, double a, double b, T whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const T left = gauss_legendre_panel(f, a, mid);
  const T right = gauss_legendre_panel(f, mid, b);
  const T refined = left + right;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(refined - whole) <= std::max(tol, floor)) return refined;
  return adaptive_panel(f, a, mid, left, 0.5 * tol, depth - 1) +
         adaptive_panel(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Composite adaptive 16-point Gauss-Legendre on [a, b]. The interval is first cut
/// into panels no wider than max_panel; each panel is bisected until two-level
/// estimates agree to its share of tol.
template <class F>
auto integrate(F&& f, double a, double b, double tol = 1e-10, double max_panel = 1.0) {
  using T = decltype(f(a));
  T acc{};
  if (!(b > a)) return acc;
  const auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
  const double width = (b - a) / static_cast<double>(panels);
  const double panel_tol = tol / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + static_cast<double>(p) * width;
    const double hi = p + 1 == panels ? b : lo + width;
    const T whole = detail::gauss_legendre_panel(f, lo, hi);
    acc += detail::adaptive_panel(f, lo, hi, whole, panel_tol, 20);
  }
  return acc;
}

}  // namespace vpc
