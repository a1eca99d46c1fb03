#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mpqd/grid.hpp"
#include "mpqd/measures.hpp"

namespace mpqd::testing {

/// f_i = -lambda_i + sum of compact cosine bumps kept away from the box edge,
/// so every phase satisfies Condition A. With fit_box the draw is repeated
/// until the equivalent-area disc of each phase clears the box edge.
inline std::vector<ForceField> random_forces(const Grid& g, int m, std::mt19937_64& rng, double amp_lo = 5.0,
                                             double amp_hi = 30.0, bool fit_box = true) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double L = std::min(g.width(), g.height());
  std::vector<ForceField> out;
  for (int p = 0; p < m; ++p) {
    struct Bump {
      Point c;
      double r, a;
    };
    double lambda = 1.0;
    std::vector<Bump> bs;
    // Redraw until a disc of the phase's equivalent area around every bump
    // centre stays inside the box, so the truncated problem is not clipped.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      lambda = 0.5 + U(rng);
      const int bumps = 1 + static_cast<int>(U(rng) * 2.0);
      bs.clear();
      double mass = 0.0;
      for (int b = 0; b < bumps; ++b) {
        const double r = (0.08 + 0.12 * U(rng)) * L;
        const double lo = r + 2.5 * g.h();
        const Point c{g.origin().x + lo + (g.width() - 2 * lo) * U(rng),
                      g.origin().y + lo + (g.height() - 2 * lo) * U(rng)};
        const double a = amp_lo + (amp_hi - amp_lo) * U(rng);
        bs.push_back({c, r, a});
        mass += a * std::numbers::pi * r * r * (0.5 - 2.0 / (std::numbers::pi * std::numbers::pi));
      }
      if (!fit_box) break;
      const double R = std::sqrt(mass / (std::numbers::pi * lambda));
      bool fits = true;
      for (const auto& b : bs) {
        const double edge = std::min({b.c.x - g.origin().x, g.x_max() - b.c.x, b.c.y - g.origin().y, g.y_max() - b.c.y});
        fits &= edge >= R + 3.0 * g.h();
      }
      if (fits) break;
    }
    ScalarField f = ScalarField::sample(g, [&](Point x) {
      double v = -lambda;
      for (const auto& b : bs) {
        const double d = distance(x, b.c);
        if (d < b.r) v += b.a * 0.5 * (1.0 + std::cos(std::numbers::pi * d / b.r));
      }
      return v;
    });
    out.push_back(ForceField::from_values(std::move(f), lambda));
  }
  return out;
}

}  // namespace mpqd::testing
