#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "vpcontrol/metrics.hpp"

using namespace vpc;
using Catch::Approx;

namespace {
// Brute-force double loop straight from the definitions.
double kl_oracle(const DistributionState& f, const EquilibriumSpec& s, const PhaseSpaceGrid& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.mx(); ++i)
    for (std::size_t j = 0; j < g.mv(); ++j) {
      const double fv = f(i, j);
      const double e = std::max(eval_equilibrium(s, g.v(j)), 1e-30);
      if (fv > 1e-30) acc += fv * std::log(fv / e) * g.dx() * g.dv();
    }
  return acc;
}
double l2_oracle(const DistributionState& f, const EquilibriumSpec& s, const PhaseSpaceGrid& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.mx(); ++i)
    for (std::size_t j = 0; j < g.mv(); ++j) {
      const double d = f(i, j) - eval_equilibrium(s, g.v(j));
      acc += 0.5 * d * d * g.dx() * g.dv();
    }
  return acc;
}
}  // namespace

TEST_CASE("KL and L2 agree with direct summation", "[metrics]") {
  const auto pre = bump_on_tail_preset();
  const PhaseSpaceGrid g(32, 64, pre.lx, pre.lv);
  auto f = build_initial_condition(pre.equilibrium, AdditiveBumpCosine{0.2, 1}, g);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.9, 1.1);
  for (auto& v : f.values()) v *= u(rng);
  f(3, 0) = 0.0;  // floor branch
  CHECK(kl_divergence(f, pre.equilibrium, g) == Approx(kl_oracle(f, pre.equilibrium, g)).epsilon(1e-12));
  CHECK(l2_misfit(f, pre.equilibrium, g) == Approx(l2_oracle(f, pre.equilibrium, g)).epsilon(1e-12));
}

TEST_CASE("metrics vanish on the equilibrium", "[metrics]") {
  const auto pre = two_stream_preset();
  const PhaseSpaceGrid g(16, 64, pre.lx, pre.lv);
  const auto f = build_initial_condition(pre.equilibrium, with_epsilon(pre.perturbation, 0.0), g);
  CHECK(std::abs(kl_divergence(f, pre.equilibrium, g)) < 1e-14);
  CHECK(l2_misfit(f, pre.equilibrium, g) == 0.0);
}

TEST_CASE("zero state has zero KL under the floor convention", "[metrics]") {
  const PhaseSpaceGrid g(8, 16, 1.0, 6.0);
  CHECK(kl_divergence(DistributionState(g), TwoStream{}, g) == 0.0);
}
