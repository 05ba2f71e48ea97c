// Deletion probability as theta moves away from zero, known vs estimated
// variance, at the default tuning (n = 8, four residual dof).
#include <cmath>
#include <cstdio>

#include "thresholding.hpp"

int main() {
  using namespace thresholding;
  const int n = 8;
  ComponentSpec s;
  s.n = n;
  s.eta = default_eta(n);
  s.alpha = std::sqrt(double(n));
  std::printf("%8s %10s %10s\n", "theta", "known", "m=4");
  for (int i = 0; i <= 20; ++i) {
    s.theta = 0.1 * i;
    std::printf("%8.2f %10.6f %10.6f\n", s.theta, deletion_probability(s, Known{}),
                deletion_probability(s, Unknown{4}));
  }
}
