/// Discontinuous flux f(x,w) = f_l(w) for x <= 0, f_r(w) for x > 0, with
/// analytic derivatives, a Lipschitz bound, and sampled hypothesis checks.
///
/// Branches are polynomials (every built-in fixture is one); the x-smooth
/// mollified variant of the shifted-Burgers pair is a separate type. Solver
/// code is generic over anything modelling the FluxModel concept.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "dflux/errors.hpp"

namespace dflux {

template <typename F>
concept FluxModel = requires(const F f, double x, double u) {
  { f.value(x, u) } -> std::convertible_to<double>;
  { f.deriv_u(x, u) } -> std::convertible_to<double>;
  { f.lipschitz() } -> std::convertible_to<double>;
};

/// Dense-coefficient polynomial, p(u) = c[0] + c[1] u + ...
class Poly {
 public:
  Poly() = default;
  Poly(std::initializer_list<double> c) : coef_(c) {}
  explicit Poly(std::vector<double> c) : coef_(std::move(c)) {}

  double operator()(double u) const {
    double acc = 0.0;
    for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  Poly derivative() const {
    if (coef_.size() <= 1) return Poly{0.0};
    std::vector<double> d(coef_.size() - 1);
    for (std::size_t k = 1; k < coef_.size(); ++k) d[k - 1] = k * coef_[k];
    return Poly(std::move(d));
  }

  const std::vector<double>& coefficients() const { return coef_; }

 private:
  std::vector<double> coef_{0.0};
};

/// The two-branch flux with its Lipschitz constant on [0,1].
class Flux {
 public:
  Flux(std::string name, Poly fl, Poly fr, double lipschitz)
      : name_(std::move(name)),
        fl_(std::move(fl)),
        fr_(std::move(fr)),
        dfl_(fl_.derivative()),
        dfr_(fr_.derivative()),
        lipschitz_(lipschitz) {
    if (!(lipschitz_ >= 0.0)) throw ParameterError("Flux: Lipschitz bound must be >= 0");
  }

  double value(double x, double u) const { return x <= 0.0 ? fl_(u) : fr_(u); }
  double deriv_u(double x, double u) const { return x <= 0.0 ? dfl_(u) : dfr_(u); }

  double left(double u) const { return fl_(u); }
  double right(double u) const { return fr_(u); }
  double dleft(double u) const { return dfl_(u); }
  double dright(double u) const { return dfr_(u); }

  double lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  const Poly& left_poly() const { return fl_; }
  const Poly& right_poly() const { return fr_; }

  /// f1 endpoint identities, each to 1e-12.
  bool satisfies_f1_endpoints() const {
    return std::abs(fl_(0.0)) <= 1e-12 && std::abs(fr_(0.0)) <= 1e-12 &&
           std::abs(fl_(1.0) - fr_(1.0)) <= 1e-12;
  }

 private:
  std::string name_;
  Poly fl_, fr_, dfl_, dfr_;
  double lipschitz_;
};

static_assert(FluxModel<Flux>);

/// Flips the sign of a flux; used by the traveling-wave negative control.
template <FluxModel F>
struct NegatedFlux {
  const F& base;
  double value(double x, double u) const { return -base.value(x, u); }
  double deriv_u(double x, double u) const { return -base.deriv_u(x, u); }
  double lipschitz() const { return base.lipschitz(); }
};

struct ClauseReport {
  bool pass = true;
  double worst_value = 0.0;   // worst ratio or mismatch found
  double worst_at[2] = {0.0, 0.0};
  std::string detail;
};

struct ValidationReport {
  ClauseReport lipschitz_left;
  ClauseReport lipschitz_right;
  ClauseReport f1_endpoints;
  bool lipschitz_ok() const { return lipschitz_left.pass && lipschitz_right.pass; }
  bool all_pass() const { return lipschitz_ok() && f1_endpoints.pass; }
};

namespace detail {

inline ClauseReport check_lipschitz(const Poly& p, double L, int samples_per_unit) {
  ClauseReport rep;
  const int n = samples_per_unit;
  // |p(u1)-p(u2)| <= L |u1-u2| sampled on an n x n mesh of [0,1]^2.
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = p(static_cast<double>(i) / n);
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double du = static_cast<double>(j - i) / n;
      const double ratio = std::abs(vals[j] - vals[i]) / du;
      if (ratio > rep.worst_value) {
        rep.worst_value = ratio;
        rep.worst_at[0] = static_cast<double>(i) / n;
        rep.worst_at[1] = static_cast<double>(j) / n;
      }
    }
  }
  rep.pass = rep.worst_value <= L * (1.0 + 1e-12) + 1e-12;
  return rep;
}

}  // namespace detail

/// Sampled check of the hypothesis clauses: Lipschitz bound of each branch on
/// [0,1] and the endpoint identities. Failures are report entries.
inline ValidationReport validate(const Flux& flux, int samples_per_unit = 1000) {
  ValidationReport rep;
  rep.lipschitz_left = detail::check_lipschitz(flux.left_poly(), flux.lipschitz(), samples_per_unit);
  rep.lipschitz_right = detail::check_lipschitz(flux.right_poly(), flux.lipschitz(), samples_per_unit);
  if (!rep.lipschitz_left.pass) rep.lipschitz_left.detail = "left branch exceeds the declared Lipschitz bound";
  if (!rep.lipschitz_right.pass) rep.lipschitz_right.detail = "right branch exceeds the declared Lipschitz bound";
  rep.f1_endpoints.pass = flux.satisfies_f1_endpoints();
  rep.f1_endpoints.worst_value = std::max(
      {std::abs(flux.left(0.0)), std::abs(flux.right(0.0)), std::abs(flux.left(1.0) - flux.right(1.0))});
  if (!rep.f1_endpoints.pass)
    rep.f1_endpoints.detail = "endpoint identities f_l(0)=f_r(0)=0, f_l(1)=f_r(1) fail; flux is f0-only";
  return rep;
}

/// Built-in flux fixtures.
///   burgers_shifted : f_l = (u-1)^2/2, f_r = u^2/2.  f0-only: the endpoint
///                     identities fail, so [0,1]-invariance is not guaranteed;
///                     experiments on it declare their own invariant data.
///   traffic         : u(1-u) on both sides.
///   traffic_jump    : f_l = u(1-u), f_r = 2u(1-u).
///   traffic_84      : f_l = 8u(1-u), f_r = 4u(1-u).
inline std::vector<Flux> builtin_fixtures() {
  std::vector<Flux> out;
  out.emplace_back("burgers_shifted", Poly{0.5, -1.0, 0.5}, Poly{0.0, 0.0, 0.5}, 1.0);
  out.emplace_back("traffic", Poly{0.0, 1.0, -1.0}, Poly{0.0, 1.0, -1.0}, 1.0);
  out.emplace_back("traffic_jump", Poly{0.0, 1.0, -1.0}, Poly{0.0, 2.0, -2.0}, 2.0);
  out.emplace_back("traffic_84", Poly{0.0, 8.0, -8.0}, Poly{0.0, 4.0, -4.0}, 8.0);
  return out;
}

inline Flux fixture(const std::string& name) {
  for (auto& f : builtin_fixtures())
    if (f.name() == name) return f;
  throw UnsupportedFluxError("unknown flux fixture: " + name);
}

/// x-smooth mollification of the shifted-Burgers pair,
/// f(x,u) = (u - 1 + H(x))^2 / 2 with H a monotone C1 transition over
/// [-delta, delta] (cubic smoothstep).
class MollifiedFlux {
 public:
  MollifiedFlux(const Flux& base, double delta) : delta_(delta) {
    if (base.name() != "burgers_shifted")
      throw UnsupportedFluxError("mollify: only the burgers_shifted fixture has a mollified form");
    if (!(delta > 0.0)) throw ParameterError("mollify: delta must be positive");
  }

  double transition(double x) const {
    if (x <= -delta_) return 0.0;
    if (x >= delta_) return 1.0;
    const double s = (x + delta_) / (2.0 * delta_);
    return s * s * (3.0 - 2.0 * s);
  }

  double value(double x, double u) const {
    const double t = u - 1.0 + transition(x);
    return 0.5 * t * t;
  }
  double deriv_u(double x, double u) const { return u - 1.0 + transition(x); }
  double lipschitz() const { return 1.0; }

  double delta() const { return delta_; }
  /// The level u_m(x) = 1 - H(x) where the flux vanishes.
  double zero_level(double x) const { return 1.0 - transition(x); }

 private:
  double delta_;
};

static_assert(FluxModel<MollifiedFlux>);

inline MollifiedFlux mollify(const Flux& base, double delta) { return MollifiedFlux(base, delta); }

}  // namespace dflux
