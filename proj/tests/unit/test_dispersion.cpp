#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <catch2/catch_amalgamated.hpp>

#include "vpcontrol/dispersion.hpp"

using namespace vpc;
using Catch::Approx;
using boost::math::quadrature::gauss_kronrod;

namespace {

// L[U](s) by Gauss-Kronrod on the real and imaginary parts separately.
cplx oracle_laplace_U(const EquilibriumSpec& spec, double k, cplx s, double t_max) {
  auto f = [&](double t) { return std::exp(-s * t) * t * equilibrium_velocity_fourier(spec, k * t); };
  const double re = gauss_kronrod<double, 61>::integrate([&](double t) { return f(t).real(); }, 0.0, t_max, 20, 1e-13);
  const double im = gauss_kronrod<double, 61>::integrate([&](double t) { return f(t).imag(); }, 0.0, t_max, 20, 1e-13);
  return {re, im};
}

PhaseSpaceGrid grid_of(const InstabilityPreset& p) { return make_grid(64, 64, p.lx, p.lv); }

}  // namespace

TEST_CASE("Laplace transform of U matches an independent quadrature", "[dispersion]") {
  for (const EquilibriumSpec& spec : {EquilibriumSpec{TwoStream{}}, EquilibriumSpec{BumpOnTail{}}}) {
    for (cplx s : {cplx{0.3, 0.0}, cplx{0.2, -0.3}, cplx{0.8, 0.7}}) {
      const auto ours = laplace_U(spec, 0.2, s);
      CHECK(std::abs(ours - oracle_laplace_U(spec, 0.2, s, 200.0)) < 1e-9);
      const auto clipped = laplace_U(spec, 0.2, s, LaplaceOptions::published());
      CHECK(std::abs(clipped - oracle_laplace_U(spec, 0.2, s, 10.0)) < 1e-9);
    }
  }
}

TEST_CASE("Laplace transform of U decays like 1/s^2", "[dispersion]") {
  // Watson's lemma: t f^(k t) = t + O(t^3) near 0, so L[U](s) ~ 1/s^2.
  const cplx s{100.0, 0.0};
  CHECK(std::abs(laplace_U(TwoStream{}, 0.2, s) * s * s - 1.0) < 1e-3);
}

TEST_CASE("real equilibria give conjugate-symmetric transforms", "[dispersion]") {
  const cplx s{0.25, 0.4};
  for (const EquilibriumSpec& spec : {EquilibriumSpec{TwoStream{}}, EquilibriumSpec{BumpOnTail{}}}) {
    CHECK(std::abs(laplace_U(spec, -0.2, std::conj(s)) - std::conj(laplace_U(spec, 0.2, s))) < 1e-12);
  }
}

TEST_CASE("zero wavenumber is rejected", "[dispersion]") {
  CHECK_THROWS_AS(laplace_U(TwoStream{}, 0.0, {0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(find_root(TwoStream{}, 0, grid_of(two_stream_preset())), DomainError);
}

TEST_CASE("source transform vanishes for modes the perturbation does not excite", "[dispersion]") {
  const auto pre = two_stream_preset();
  const double k0 = grid_of(pre).k0();
  CHECK(laplace_S(pre.equilibrium, pre.perturbation, 2, k0, {0.2, 0.0}) == cplx{0.0, 0.0});
  CHECK(laplace_S(pre.equilibrium, with_epsilon(pre.perturbation, 0.0), 1, k0, {0.2, 0.0}) == cplx{0.0, 0.0});
  CHECK(std::abs(laplace_S(pre.equilibrium, pre.perturbation, 1, k0, {0.2, 0.0})) > 0.0);
}

TEST_CASE("two-stream root solves the dispersion relation", "[dispersion]") {
  const auto pre = two_stream_preset();
  const auto g = grid_of(pre);
  const auto root = find_root(pre.equilibrium, 1, g);
  CHECK(root.s0.real() > 0.0);
  CHECK(std::abs(root.s0.imag()) < 1e-6);
  // verify with the independent oracle rather than the library's own residual
  CHECK(std::abs(1.0 + oracle_laplace_U(pre.equilibrium, g.k0(), root.s0, 200.0)) < 1e-6);
  const auto neg = find_root(pre.equilibrium, -1, g);
  CHECK(std::abs(neg.s0 - std::conj(root.s0)) < 1e-15);
}

TEST_CASE("bump-on-tail root is complex and satisfies the relation", "[dispersion]") {
  const auto pre = bump_on_tail_preset();
  const auto g = grid_of(pre);
  const auto root = find_root(pre.equilibrium, 1, g);
  CHECK(root.s0.real() > 0.1);
  CHECK(root.s0.imag() < -0.1);
  CHECK(std::abs(1.0 + oracle_laplace_U(pre.equilibrium, g.k0(), root.s0, 200.0)) < 1e-6);
}

TEST_CASE("horizon-10 transforms reproduce the reference roots", "[dispersion]") {
  RootSearchOptions opts;
  opts.laplace = LaplaceOptions::published();
  const auto ts = find_root(TwoStream{}, 1, grid_of(two_stream_preset()), opts);
  CHECK(std::abs(ts.s0 - cplx{0.236, 0.0}) < 5e-3);
  const auto bot = find_root(BumpOnTail{}, 1, grid_of(bump_on_tail_preset()), opts);
  CHECK(std::abs(bot.s0 - cplx{0.230, -0.324}) < 5e-3);
}

TEST_CASE("a stable equilibrium has no unstable root", "[dispersion]") {
  // Single Maxwellian: Landau damped, no root with Re s > 0.
  CHECK_THROWS_AS(find_root(TwoStream{0.5, 0.0}, 1, grid_of(two_stream_preset())), NoUnstableRoot);
}

TEST_CASE("guess is linear in the perturbation amplitude", "[dispersion]") {
  const auto pre = two_stream_preset();
  const auto g = grid_of(pre);
  const std::vector<int> modes{1};
  RootSearchOptions opts;
  opts.laplace = LaplaceOptions::published();
  const auto h1 = synthesize_guess(pre.equilibrium, pre.perturbation, g, modes, opts);
  const auto h2 = synthesize_guess(pre.equilibrium, with_epsilon(pre.perturbation, 2e-3), g, modes, opts);
  CHECK(h2.b[0] == Approx(2.0 * h1.b[0]).epsilon(1e-12));
  CHECK(std::abs(h1.a[0]) < 1e-12);
  CHECK(h1.b[0] < 0.0);
}

TEST_CASE("zero perturbation gives a trivial zero field", "[dispersion]") {
  const auto pre = bump_on_tail_preset();
  const std::vector<int> modes{1};
  const auto rep = synthesize_guess_report(pre.equilibrium, with_epsilon(pre.perturbation, 0.0), grid_of(pre), modes);
  CHECK(rep.trivial);
  CHECK(rep.field.a == std::vector<double>{0.0});
  CHECK(rep.field.b == std::vector<double>{0.0});
}

TEST_CASE("guess synthesis rejects non-positive modes", "[dispersion]") {
  const auto pre = two_stream_preset();
  const std::vector<int> modes{-1};
  CHECK_THROWS_AS(synthesize_guess(pre.equilibrium, pre.perturbation, grid_of(pre), modes), DomainError);
}
