// Zero proportions of the Lasso and adaptive Lasso next to the atom of their
// thresholding counterparts, for every study design. Usage: [reps] [seed]
#include <cstdio>
#include <cstdlib>

#include "thresholding.hpp"

int main(int argc, char **argv) {
  using namespace thresholding;
  const int reps = argc > 1 ? std::atoi(argv[1]) : 2000;
  const unsigned long long seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  std::printf("%-40s %8s  %s\n", "panel", "cond", "zero share / atom weight, components 1-4");
  for (const auto &p : study_panels()) {
    SimConfig cfg;
    cfg.design = p.design;
    cfg.estimator = p.estimator;
    cfg.reps = reps;
    cfg.seed = splitmix64(seed ^ p.figure);
    cfg.overlay_points = 3;
    const auto r = run_study(cfg);
    std::printf("%-40s %8.2f ", panel_slug(p).c_str(), r.condition_number);
    for (const auto &c : r.components) std::printf(" %.3f/%.3f", c.zero_proportion, c.atom_weight);
    std::printf("\n");
  }
}
