// Analytic control from the dispersion relation versus no control.
//
//   suppression_demo [two-stream|bump-on-tail] [M]
//
// Prints the synthesised coefficients and a table of field energy with and without H.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "vpcontrol/vpcontrol.hpp"

int main(int argc, char** argv) {
  using namespace vpc;
  try {
    const std::string name = argc > 1 ? argv[1] : "two-stream";
    const std::size_t m = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 128;
    const auto pre = preset_by_name(name);
    auto cfg = make_config(pre, m);

    const std::vector<int> modes{perturbation_mode(pre.perturbation)};
    const auto rep = synthesize_guess_report(pre.equilibrium, pre.perturbation, cfg.grid, modes);
    const auto& root = rep.roots.front();
    std::printf("%s  Mx=Mv=%zu  dt=%g  T=%g\n", pre.name.c_str(), m, cfg.dt, cfg.final_time);
    std::printf("fastest root s0 = %.6f %+.6fi  (|1+L[U]| = %.2e)\n", root.s0.real(), root.s0.imag(), root.residual);
    std::printf("H(x) = %.6e cos(k0 x) %+.6e sin(k0 x)\n\n", rep.field.a[0], rep.field.b[0]);

    const auto free_run = run(cfg);
    cfg.control = rep.field;
    const auto controlled = run(cfg);

    std::printf("%8s %14s %14s %10s\n", "t", "E(t) H=0", "E(t) guess", "ratio");
    const std::size_t stride = free_run.n_steps() / 10;
    for (std::size_t n = 0; n <= free_run.n_steps(); n += stride) {
      const double e0 = free_run.energy_series[n], e1 = controlled.energy_series[n];
      std::printf("%8.2f %14.6e %14.6e %10.3e\n", free_run.time(n), e0, e1, e1 / e0);
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "suppression_demo: %s\n", e.what());
    return 1;
  }
}
