#include <catch2/catch_amalgamated.hpp>

#include "vpcontrol/objectives.hpp"

using namespace vpc;
using Catch::Approx;

namespace {
SimulationConfig small_ts(double t = 5.0) {
  auto c = make_config(two_stream_preset(), 64);
  c.final_time = t;
  return c;
}
}  // namespace

TEST_CASE("objective names round-trip", "[objectives]") {
  for (auto k : all_objectives) CHECK(parse_objective(to_string(k)) == k);
  CHECK_THROWS_AS(parse_objective("energy"), ConfigError);
}

TEST_CASE("time integrals use the left rectangle rule", "[objectives]") {
  const std::vector<double> s{1.0, 2.0, 3.0, 100.0};
  CHECK(detail::time_integral(s, 0.5) == Approx(3.0));
  CHECK(detail::time_integral(std::vector<double>{5.0}, 0.5) == 0.0);
}

TEST_CASE("objectives reduce the recorded trace", "[objectives]") {
  auto cfg = small_ts();
  cfg.record.kl = cfg.record.l2 = true;
  const auto tr = run(cfg);
  double eet = 0.0, klt = 0.0, l2t = 0.0;
  for (std::size_t n = 0; n + 1 < tr.energy_series.size(); ++n) {
    eet += tr.energy_series[n] * cfg.dt;
    klt += tr.kl_series[n] * cfg.dt;
    l2t += tr.l2_series[n] * cfg.dt;
  }
  CHECK(evaluate_objective(ObjectiveKind::EE, cfg) == tr.energy_series.back());
  CHECK(evaluate_objective(ObjectiveKind::EET, cfg) == Approx(eet).epsilon(1e-13));
  CHECK(evaluate_objective(ObjectiveKind::KLT, cfg) == Approx(klt).epsilon(1e-13));
  CHECK(evaluate_objective(ObjectiveKind::L2T, cfg) == Approx(l2t).epsilon(1e-13));
  CHECK(evaluate_objective(ObjectiveKind::KL, cfg) == Approx(tr.kl_series.back()).epsilon(1e-13));
  CHECK(evaluate_objective(ObjectiveKind::L2, cfg) == Approx(tr.l2_series.back()).epsilon(1e-13));
}

TEST_CASE("objectives are non-negative and vanish at equilibrium", "[objectives]") {
  auto cfg = small_ts(2.0);
  for (auto k : all_objectives) CHECK(evaluate_objective(k, cfg) >= 0.0);
  cfg.perturbation = with_epsilon(cfg.perturbation, 0.0);
  for (auto k : all_objectives) CHECK(std::abs(evaluate_objective(k, cfg)) < 1e-14);
}

TEST_CASE("failed solves map to the sentinel", "[objectives]") {
  auto cfg = small_ts(1.0);
  cfg.control = ControlField({std::nan("")}, {0.0}, cfg.grid.k0());
  const auto v = evaluate_objective_checked(ObjectiveKind::EE, cfg);
  CHECK(!v.ok());
  CHECK(is_failed(v.value));
  CHECK(is_failed(evaluate_objective(ObjectiveKind::EET, cfg)));
  CHECK(!is_failed(1e300));
}
