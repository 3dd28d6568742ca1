#include "acmorse/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace acmorse {

ScalarField random_band_limited_field(GridPtr grid, Rng& rng, double amplitude, int max_mode) {
  if (!grid) throw std::invalid_argument("random field: null grid");
  if (max_mode < 0) throw std::invalid_argument("random field: negative band limit");
  const int d = grid->dim();
  const std::int64_t n = grid->node_count();
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(n);

  // Lattice wavevectors k in [0, max_mode]^d, lexicographic; each contributes
  // a_k cos(2 pi <k, x/L>) + b_k sin(...). Nonnegative k with both phases
  // spans the same real space as signed k.
  std::array<int, 3> k{0, 0, 0};
  const double tau = 2.0 * M_PI;
  for (;;) {
    const double a = rng.sym();
    const double b = rng.sym();
    for (std::int64_t i = 0; i < n; ++i) {
      double phase = 0.0;
      for (int ax = 0; ax < d; ++ax)
        phase += tau * k[ax] * grid->coordinate(i, ax) / grid->length(ax);
      vals[i] += a * std::cos(phase) + b * std::sin(phase);
    }
    int ax = d - 1;
    while (ax >= 0 && ++k[ax] > max_mode) k[ax--] = 0;
    if (ax < 0) break;
  }

  const double sup = vals.cwiseAbs().maxCoeff();
  if (sup > 0.0) vals *= amplitude / sup;
  return ScalarField(std::move(grid), std::move(vals));
}

}  // namespace acmorse
