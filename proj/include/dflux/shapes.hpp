/// Builtin data shapes for experiments plus the seeded random ensembles used
/// by the property suites. Everything here is deterministic given its inputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dflux/errors.hpp"
#include "dflux/grid.hpp"

namespace dflux {

/// Piecewise-constant description: values[k] on (breaks[k-1], breaks[k]),
/// values.front() left of breaks.front(), values.back() right of breaks.back().
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;

  void check() const {
    if (values.size() != breakpoints.size() + 1)
      throw ParameterError("PiecewiseConstant: need one more value than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
      throw ParameterError("PiecewiseConstant: breakpoints must be sorted");
  }

  double operator()(double x) const {
    std::size_t k = 0;
    while (k < breakpoints.size() && x > breakpoints[k]) ++k;
    return values[k];
  }

  double total_variation() const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) s += std::abs(values[k + 1] - values[k]);
    return s;
  }
};

inline GridFunction sample_piecewise(const Grid& g, const PiecewiseConstant& pc) {
  pc.check();
  return GridFunction::sample(g, [&](double x) { return pc(x); });
}

/// C1 compactly supported bump of the given height on [center-width, center+width].
inline GridFunction bump(const Grid& g, double center, double width, double height) {
  if (!(width > 0.0)) throw ParameterError("bump: width must be positive");
  return GridFunction::sample(g, [&](double x) {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * M_PI * s);
    return height * c * c;
  });
}

inline GridFunction riemann(const Grid& g, double left, double right) {
  return GridFunction::sample(g, [&](double x) { return x < 0.0 ? left : right; });
}

/// Random piecewise-constant datum in D = {0 <= w <= 1} supported in
/// [support_lo, support_hi], at most max_pieces interior pieces (zero outside).
inline PiecewiseConstant random_steps(std::mt19937_64& rng, double support_lo, double support_hi,
                                      int max_pieces) {
  std::uniform_real_distribution<double> X(support_lo, support_hi);
  std::uniform_real_distribution<double> V(0.0, 1.0);
  std::uniform_int_distribution<int> P(1, std::max(1, max_pieces - 2));
  const int pieces = P(rng);
  std::vector<double> breaks(pieces + 1);
  for (auto& b : breaks) b = X(rng);
  std::sort(breaks.begin(), breaks.end());
  PiecewiseConstant pc;
  pc.breakpoints = breaks;
  pc.values.push_back(0.0);
  for (int k = 0; k < pieces; ++k) pc.values.push_back(V(rng));
  pc.values.push_back(0.0);
  return pc;
}

/// Random smooth datum in D: a few cosine bumps with disjoint-ish supports.
inline GridFunction random_bumps(std::mt19937_64& rng, const Grid& g, double support_lo,
                                 double support_hi, int n_bumps) {
  std::uniform_real_distribution<double> C(support_lo, support_hi);
  std::uniform_real_distribution<double> W(0.3, 1.2);
  std::uniform_real_distribution<double> H(0.2, 0.95);
  GridFunction out(g);
  for (int b = 0; b < n_bumps; ++b) {
    GridFunction one = bump(g, C(rng), W(rng), H(rng));
    for (int i = 0; i < g.n_cells(); ++i) out.values[i] = std::max(out.values[i], one.values[i]);
  }
  for (auto& v : out.values) v = std::min(v, 1.0);
  return out;
}

}  // namespace dflux
