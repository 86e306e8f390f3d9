#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <catch2/catch_amalgamated.hpp>

#include "vpcontrol/equilibria.hpp"

using namespace vpc;
using Catch::Approx;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Independent adaptive Gauss-Kronrod oracle over a wide finite box.
double oracle_integral(const std::function<double(double)>& f) {
  return gauss_kronrod<double, 61>::integrate(f, -20.0, 20.0, 15, 1e-14);
}

std::complex<double> oracle_fourier(const EquilibriumSpec& spec, double m) {
  const double re = oracle_integral([&](double v) { return eval_equilibrium(spec, v) * std::cos(m * v); });
  const double im = oracle_integral([&](double v) { return -eval_equilibrium(spec, v) * std::sin(m * v); });
  return {re, im};
}

}  // namespace

TEST_CASE("equilibria have unit mass", "[equilibria]") {
  for (const EquilibriumSpec& s : {EquilibriumSpec{TwoStream{}}, EquilibriumSpec{BumpOnTail{}}}) {
    CHECK(oracle_integral([&](double v) { return eval_equilibrium(s, v); }) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("closed-form velocity transforms match quadrature", "[equilibria]") {
  for (const EquilibriumSpec& s : {EquilibriumSpec{TwoStream{}}, EquilibriumSpec{BumpOnTail{}},
                                   EquilibriumSpec{TwoStream{0.3, 1.7}}}) {
    for (int m = -10; m <= 10; ++m) {
      for (double frac : {0.0, 0.37}) {
        const double mm = m + frac;
        const auto exact = equilibrium_velocity_fourier(s, mm);
        const auto num = oracle_fourier(s, mm);
        CHECK(std::abs(exact - num) < 1e-8);
      }
    }
  }
}

TEST_CASE("transform is bounded by its value at zero", "[equilibria]") {
  for (const EquilibriumSpec& s : {EquilibriumSpec{TwoStream{}}, EquilibriumSpec{BumpOnTail{}}}) {
    CHECK(std::abs(equilibrium_velocity_fourier(s, 0.0)) == Approx(1.0));
    for (double m = 0.05; m < 10.0; m += 0.05) {
      CHECK(std::abs(equilibrium_velocity_fourier(s, m)) < 1.0);
      CHECK(std::abs(equilibrium_velocity_fourier(s, m)) <= equilibrium_fourier_envelope(s, m) + 1e-15);
    }
  }
}

TEST_CASE("bump perturbation profile transform matches quadrature", "[equilibria]") {
  const PerturbationSpec p = AdditiveBumpCosine{1e-3, 1};
  const EquilibriumSpec s = BumpOnTail{};
  for (double m = -6.0; m <= 6.0; m += 0.75) {
    const double re = oracle_integral([&](double v) { return perturbation_velocity_profile(p, s, v) * std::cos(m * v); });
    const double im = oracle_integral([&](double v) { return -perturbation_velocity_profile(p, s, v) * std::sin(m * v); });
    CHECK(std::abs(perturbation_velocity_profile_fourier(p, s, m) - std::complex<double>(re, im)) < 1e-10);
  }
}

TEST_CASE("zero amplitude gives an x-independent state", "[equilibria]") {
  const auto pre = two_stream_preset();
  const PhaseSpaceGrid g(32, 64, pre.lx, pre.lv);
  const auto f = build_initial_condition(pre.equilibrium, with_epsilon(pre.perturbation, 0.0), g);
  for (std::size_t i = 1; i < g.mx(); ++i)
    for (std::size_t j = 0; j < g.mv(); ++j) REQUIRE(f(i, j) == f(0, j));
}

TEST_CASE("two-stream initial density is a cosine ripple on the boxed mass", "[equilibria]") {
  const auto pre = two_stream_preset();
  const PhaseSpaceGrid g(64, 256, pre.lx, pre.lv);
  const auto f = build_initial_condition(pre.equilibrium, pre.perturbation, g);
  // The beams at +-2.4 leave about 1.6e-4 of their mass outside |v| < 6.
  const double boxed = gauss_kronrod<double, 61>::integrate(
      [&](double v) { return eval_equilibrium(pre.equilibrium, v); }, -pre.lv, pre.lv, 15, 1e-14);
  CHECK(1.0 - boxed == Approx(1.6e-4).epsilon(0.05));
  for (std::size_t i = 0; i < g.mx(); ++i) {
    double rho = 0.0;
    for (double v : f.column(i)) rho += v;
    rho *= g.dv();
    CHECK(rho == Approx(boxed * (1.0 + 1e-3 * std::cos(g.k0() * g.x(i)))).margin(2e-5));
  }
}

TEST_CASE("bump-on-tail perturbation has zero x-average per velocity", "[equilibria]") {
  const auto pre = bump_on_tail_preset();
  const PhaseSpaceGrid g(64, 128, pre.lx, pre.lv);
  const auto f = build_initial_condition(pre.equilibrium, pre.perturbation, g);
  for (std::size_t j = 0; j < g.mv(); ++j) {
    double avg = 0.0;
    for (std::size_t i = 0; i < g.mx(); ++i) avg += f(i, j) - eval_equilibrium(pre.equilibrium, g.v(j));
    CHECK(std::abs(avg / g.mx()) < 1e-15);
  }
}

TEST_CASE("unresolvable perturbation modes are rejected", "[equilibria]") {
  const auto pre = two_stream_preset();
  const PhaseSpaceGrid g(8, 16, pre.lx, pre.lv);
  CHECK_THROWS_AS(build_initial_condition(pre.equilibrium, MultiplicativeCosine{1e-3, 4}, g), AliasingError);
  CHECK_NOTHROW(build_initial_condition(pre.equilibrium, MultiplicativeCosine{1e-3, 3}, g));
}

TEST_CASE("presets resolve by long and short names", "[equilibria]") {
  CHECK(preset_by_name("ts").name == "two-stream");
  CHECK(preset_by_name("bump-on-tail").final_time == 40.0);
  CHECK_THROWS_AS(preset_by_name("landau"), ConfigError);
}
