// Which limit law each regime lands in, with its atoms.
#include <cstdio>
#include <string>
#include <vector>

#include "thresholding.hpp"

int main() {
  using namespace thresholding;
  struct Case {
    const char *label;
    EstimatorKind kind;
    LimitMode mode;
    RegimeParams p;
  };
  auto conservative = [](double nu, double e) {
    RegimeParams p;
    p.nu = nu;
    p.e = e;
    return p;
  };
  auto consistent = [](double zeta, int m) {
    RegimeParams p;
    p.e = ExtReal::pos_inf();
    p.zeta = zeta;
    if (m > 0) p.dof = FixedDof{m};
    return p;
  };
  const std::vector<Case> cases = {
      {"hard, known, nu=1 e=1.96", EstimatorKind::Hard, LimitMode::Known, conservative(1, 1.96)},
      {"soft, known, nu=1 e=1.96", EstimatorKind::Soft, LimitMode::Known, conservative(1, 1.96)},
      {"adaptive, known, nu=1 e=1.96", EstimatorKind::AdaptiveSoft, LimitMode::Known,
       conservative(1, 1.96)},
      {"hard, m=4, zeta=1", EstimatorKind::Hard, LimitMode::Unknown, consistent(1, 4)},
      {"soft, m=4, zeta=0.5", EstimatorKind::Soft, LimitMode::Unknown, consistent(0.5, 4)},
      {"adaptive, m=4, zeta=2", EstimatorKind::AdaptiveSoft, LimitMode::Unknown, consistent(2, 4)},
      {"soft, known, zeta=0.5", EstimatorKind::Soft, LimitMode::Known, consistent(0.5, 0)},
  };
  for (const auto &c : cases) {
    const auto d = limit_distribution(c.kind, c.mode, c.p);
    std::printf("%-32s %-20s F(0)=%.4f", c.label, limit_name(d).c_str(), limit_cdf(d, 0.0));
    for (auto [loc, w] : limit_atoms(d)) std::printf("  atom %.3f:%.4f", loc, w);
    std::printf("\n");
  }
}
