/// Uniform 1-D grid straddling x = 0, cell-centered sampled functions, and the
/// L1 / total-variation / exponential-convolution primitives built on them.
///
/// The truncated line [x_min, x_max] carries n_cells cells of width h with a
/// cell interface pinned exactly at x = 0, so the two flux branches never mix
/// inside a cell. Functions are zero-extended beyond the grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dflux/errors.hpp"

namespace dflux {

class Grid {
 public:
  Grid(double x_min, double x_max, int n_cells)
      : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
    if (!(n_cells > 0)) throw GridError("Grid: n_cells must be positive");
    if (!(x_min < 0.0 && 0.0 < x_max)) throw GridError("Grid: requires x_min < 0 < x_max");
    const double span = x_max - x_min;
    h_ = span / n_cells;
    n_left_ = static_cast<int>(std::lround(-x_min / h_));
    // The interface must sit on a cell edge to machine precision.
    const double misfit = std::abs(x_min + n_left_ * h_);
    if (n_left_ < 1 || n_left_ > n_cells - 1 ||
        misfit > 64.0 * std::numeric_limits<double>::epsilon() * span) {
      throw GridError("Grid: no cell interface at x = 0 (misfit " + std::to_string(misfit) + ")");
    }
  }

  /// Builds a grid with cell width near h_target and the interface exactly on
  /// an edge; x_min/x_max are expanded outward as needed.
  static Grid aligned(double x_min, double x_max, double h_target) {
    if (!(h_target > 0.0)) throw GridError("Grid::aligned: h_target must be positive");
    if (!(x_min < 0.0 && 0.0 < x_max)) throw GridError("Grid::aligned: requires x_min < 0 < x_max");
    const int nl = std::max(1, static_cast<int>(std::ceil(-x_min / h_target)));
    const int nr = std::max(1, static_cast<int>(std::ceil(x_max / h_target)));
    return Grid(-nl * h_target, nr * h_target, nl + nr);
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int n_cells() const { return n_cells_; }
  double h() const { return h_; }
  /// Number of cells strictly left of the interface.
  int n_left() const { return n_left_; }
  double center(int i) const { return x_min_ + (i + 0.5) * h_; }

  bool operator==(const Grid& o) const {
    return x_min_ == o.x_min_ && x_max_ == o.x_max_ && n_cells_ == o.n_cells_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  double x_min_, x_max_;
  int n_cells_;
  double h_;
  int n_left_;
};

/// One real value per cell center.
struct GridFunction {
  GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.n_cells(), fill) {}
  GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n_cells())
      throw ShapeError("GridFunction: values.length != n_cells");
  }

  template <typename F>
  static GridFunction sample(const Grid& g, F&& f) {
    GridFunction out(g);
    for (int i = 0; i < g.n_cells(); ++i) out.values[i] = f(g.center(i));
    return out;
  }

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Grid grid;
  std::vector<double> values;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid != b.grid) throw ShapeError("operands live on different grids");
}

inline double l1_norm(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values) s += std::abs(v);
  return f.grid.h() * s;
}

inline double mass(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return f.grid.h() * s;
}

inline double linf_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double total_variation(const GridFunction& f) {
  double s = 0.0;
  for (int i = 0; i + 1 < f.size(); ++i) s += std::abs(f.values[i + 1] - f.values[i]);
  return s;
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out(a.grid);
  for (int i = 0; i < a.size(); ++i) out.values[i] = a.values[i] + b.values[i];
  return out;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out(a.grid);
  for (int i = 0; i < a.size(); ++i) out.values[i] = a.values[i] - b.values[i];
  return out;
}

inline GridFunction operator*(double c, const GridFunction& a) {
  GridFunction out(a.grid);
  for (int i = 0; i < a.size(); ++i) out.values[i] = c * a.values[i];
  return out;
}

inline double l1_distance(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
  return a.grid.h() * s;
}

inline double linf_distance(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

/// h * sum of the positive part of (a - b); the one-sided counterpart of
/// l1_distance used by the comparison estimates.
inline double positive_part_mass(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::max(0.0, a.values[i] - b.values[i]);
  return a.grid.h() * s;
}

namespace detail {

/// Cell-integrated weights of the kernel exp(-|x|/a)/(2a) on a grid of width h.
/// own   = integral of the kernel over the source cell itself,
/// side  = coefficient of the geometric tail: weight at offset k >= 1 equals
///         side * decay^k, with decay = exp(-h/a).
/// These are exact for piecewise-constant data, and give the filter discrete
/// unit mass: own + 2 * side * decay / (1 - decay) == 1.
struct KernelWeights {
  double decay;
  double own;
  double side;
};

inline KernelWeights kernel_weights(double h, double a) {
  KernelWeights w;
  w.decay = std::exp(-h / a);
  w.own = 1.0 - std::exp(-h / (2.0 * a));
  w.side = std::sinh(h / (2.0 * a));
  return w;
}

}  // namespace detail

/// Convolution with the unit-mass kernel exp(-|x|/a)/(2a), zero-extended
/// beyond the grid. Two first-order recursive passes, O(N); exact for
/// piecewise-constant data, so a constant 1 maps to 1 in the interior.
inline GridFunction exp_convolve(const GridFunction& f, double a) {
  if (!(a > 0.0)) throw ParameterError("exp_convolve: scale a must be positive");
  const auto w = detail::kernel_weights(f.grid.h(), a);
  const int n = f.size();
  GridFunction out(f.grid);
  double acc = 0.0;  // sum_{j<i} decay^(i-j) f_j
  for (int i = 0; i < n; ++i) {
    out.values[i] = w.own * f.values[i] + w.side * acc;
    acc = w.decay * (acc + f.values[i]);
  }
  double bcc = 0.0;  // sum_{j>i} decay^(j-i) f_j
  for (int i = n - 1; i >= 0; --i) {
    out.values[i] += w.side * bcc;
    bcc = w.decay * (bcc + f.values[i]);
  }
  return out;
}

/// Convolution with the odd kernel d/dx[exp(-|x|/a)/(2a)] =
/// -sign(x) exp(-|x|/a)/(2a^2), zero-extended. Same recursive scheme; exact
/// for piecewise-constant data, so the weights of each source cell sum to
/// zero and an even function about x0 maps to zero at x0.
inline GridFunction exp_convolve_dx(const GridFunction& f, double a) {
  if (!(a > 0.0)) throw ParameterError("exp_convolve_dx: scale a must be positive");
  const auto w = detail::kernel_weights(f.grid.h(), a);
  const double c = w.side / a;
  const int n = f.size();
  GridFunction out(f.grid);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    out.values[i] = -c * acc;
    acc = w.decay * (acc + f.values[i]);
  }
  double bcc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    out.values[i] += c * bcc;
    bcc = w.decay * (bcc + f.values[i]);
  }
  return out;
}

/// Distance from the support of f (cells with |value| > tol) to the nearer
/// grid boundary. Returns the full span when f vanishes identically.
inline double support_distance_to_boundary(const GridFunction& f, double tol = 0.0) {
  int lo = -1, hi = -1;
  for (int i = 0; i < f.size(); ++i) {
    if (std::abs(f.values[i]) > tol) {
      if (lo < 0) lo = i;
      hi = i;
    }
  }
  if (lo < 0) return f.grid.x_max() - f.grid.x_min();
  const double dl = f.grid.center(lo) - f.grid.x_min();
  const double dr = f.grid.x_max() - f.grid.center(hi);
  return std::min(dl, dr);
}

/// Upper bound on the mass a single kernel pass can leak past the boundary.
inline double boundary_leakage_bound(const GridFunction& f, double a) {
  return l1_norm(f) * std::exp(-support_distance_to_boundary(f) / a);
}

inline void write_csv(std::ostream& os, const GridFunction& f) {
  os << "x,value\n";
  char buf[64];
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.center(i), f.values[i]);
    os << buf;
  }
}

/// Reads a `x,value` CSV written by write_csv back onto the given grid.
/// Row count must match; x columns are trusted (they are re-derived).
inline GridFunction read_csv(std::istream& is, const Grid& g) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_csv: empty stream");
  GridFunction out(g);
  for (int i = 0; i < g.n_cells(); ++i) {
    if (!std::getline(is, line)) throw IoError("read_csv: expected " + std::to_string(g.n_cells()) + " rows");
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("read_csv: malformed row: " + line);
    out.values[i] = std::stod(line.substr(comma + 1));
  }
  return out;
}

}  // namespace dflux
