/// Viscous backward-Euler resolvent: solves u + lambda [f(x,u) - eps u_x]_x = w
/// as the fixed point of the kernel map
///
///   Lambda(u) = exp_convolve(w, a) - lambda exp_convolve_dx(f(.,u), a),
///   a = sqrt(lambda eps),
///
/// which is a strict L1 contraction with factor q = L sqrt(lambda/eps). For
/// q above the enforced margin the solve routes through the extension map
///
///   T_w(u) = J_base((1 - lb/lambda) u + (lb/lambda) w),  lb = eps/(2 L^2),
///
/// a contraction with factor 1 - lb/lambda built on the base resolvent. All
/// time steps above the margin share that base, so the family obeys the
/// algebraic resolvent identity J_lambda w = J_mu((mu/lambda) w +
/// ((lambda-mu)/lambda) J_lambda w) up to solver tolerance.
///
/// Picard is the reference iteration; Anderson and Newton-Krylov are optional
/// accelerators that drive the same residual below the same tolerance.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dflux/errors.hpp"
#include "dflux/flux.hpp"
#include "dflux/grid.hpp"

namespace dflux {

enum class Accel { picard, anderson, newton_krylov };

struct ResolventParams {
  double lambda = 0.0;
  double epsilon = 0.0;
  double fp_tol = -1.0;   // auto: 1e-10 * |w|_L1 + 1e-14
  long max_iter = -1;     // auto: 10 * ceil(log(fp_tol)/log(q))
  double relax = 1.0;     // outer damping, (0,1]; 1 = off
  Accel accel = Accel::picard;
  double q_margin = 0.9;

  void check() const {
    if (!(lambda > 0.0)) throw ParameterError("ResolventParams: lambda must be positive");
    if (!(epsilon > 0.0)) throw ParameterError("ResolventParams: epsilon must be positive");
    if (!(relax > 0.0 && relax <= 1.0)) throw ParameterError("ResolventParams: relax must be in (0,1]");
    if (!(q_margin > 0.0 && q_margin < 1.0)) throw ParameterError("ResolventParams: q_margin in (0,1)");
  }
};

struct ResolventSolution {
  GridFunction u;
  long iterations = 0;        // kernel-map applications, composite over inner+outer
  long outer_iterations = 0;  // extension sweeps (0 on the contractive path)
  double residual_l1 = 0.0;   // fixed-point residual of the map that was solved
  std::vector<double> path;   // residual after each (outer) iteration
};

template <FluxModel F>
double contraction_factor(const F& flux, const ResolventParams& p) {
  return flux.lipschitz() * std::sqrt(p.lambda / p.epsilon);
}

namespace detail {

// Raw-vector versions of the two recursive filters (see grid.hpp).
inline void conv_kernel(const std::vector<double>& f, double h, double a, std::vector<double>& out) {
  const auto w = kernel_weights(h, a);
  const int n = static_cast<int>(f.size());
  out.resize(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fi = f[i];
    out[i] = w.own * fi + w.side * acc;
    acc = w.decay * (acc + fi);
  }
  double bcc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double fi = f[i];
    out[i] += w.side * bcc;
    bcc = w.decay * (bcc + fi);
  }
}

inline void conv_kernel_dx(const std::vector<double>& f, double h, double a, std::vector<double>& out) {
  const auto w = kernel_weights(h, a);
  const double c = w.side / a;
  const int n = static_cast<int>(f.size());
  out.resize(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fi = f[i];
    out[i] = -c * acc;
    acc = w.decay * (acc + fi);
  }
  double bcc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double fi = f[i];
    out[i] += c * bcc;
    bcc = w.decay * (bcc + fi);
  }
}

inline double l1(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return h * s;
}

inline double l1_diff(const std::vector<double>& a, const std::vector<double>& b, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return h * s;
}

/// One viscous kernel equation at scale a: u + lambda Wdx(F(u)) = rhs.
template <FluxModel F>
class KernelEquation {
 public:
  KernelEquation(const Grid& g, const F& flux, double lambda, double a)
      : grid_(g), flux_(flux), lambda_(lambda), a_(a) {}

  const Grid& grid() const { return grid_; }
  double scale() const { return a_; }

  void set_rhs_from(const std::vector<double>& w) { conv_kernel(w, grid_.h(), a_, rhs_); }
  void set_rhs(std::vector<double> rhs) { rhs_ = std::move(rhs); }

  void flux_derivs(const std::vector<double>& u, std::vector<double>& dv) const {
    const int n = grid_.n_cells();
    dv.resize(n);
    for (int i = 0; i < n; ++i) dv[i] = flux_.deriv_u(grid_.center(i), u[i]);
  }

  // out = rhs - lambda Wdx(F(u))
  void apply_map(const std::vector<double>& u, std::vector<double>& out) const {
    const int n = grid_.n_cells();
    scratch_.resize(n);
    for (int i = 0; i < n; ++i) scratch_[i] = flux_.value(grid_.center(i), u[i]);
    conv_kernel_dx(scratch_, grid_.h(), a_, out);
    for (int i = 0; i < n; ++i) out[i] = rhs_[i] - lambda_ * out[i];
  }

  // out = v + lambda Wdx(dF v) for a frozen derivative field dv.
  void apply_jacobian(const std::vector<double>& dv, const std::vector<double>& v,
                      std::vector<double>& out) const {
    scratch_.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) scratch_[i] = dv[i] * v[i];
    conv_kernel_dx(scratch_, grid_.h(), a_, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] + lambda_ * out[i];
  }

 private:
  Grid grid_;
  const F& flux_;
  double lambda_, a_;
  std::vector<double> rhs_;
  mutable std::vector<double> scratch_;
};

/// Anderson acceleration (type II, bounded depth) with a plain-step safeguard
/// applied by the caller.
class AndersonMixer {
 public:
  explicit AndersonMixer(int depth) : m_(depth) {}

  void clear() {
    hist_u_.clear();
    hist_g_.clear();
  }

  std::vector<double> next(const std::vector<double>& u, const std::vector<double>& g) {
    hist_u_.push_back(u);
    hist_g_.push_back(g);
    if (static_cast<int>(hist_u_.size()) > m_ + 1) {
      hist_u_.erase(hist_u_.begin());
      hist_g_.erase(hist_g_.begin());
    }
    const int k = static_cast<int>(hist_u_.size()) - 1;
    if (k == 0) return g;
    const std::size_t n = u.size();
    const int mm = k;
    std::vector<double> rk(n);
    for (std::size_t i = 0; i < n; ++i) rk[i] = hist_g_[k][i] - hist_u_[k][i];
    std::vector<std::vector<double>> dR(mm, std::vector<double>(n));
    for (int j = 0; j < mm; ++j)
      for (std::size_t i = 0; i < n; ++i)
        dR[j][i] = (hist_g_[j][i] - hist_u_[j][i]) - rk[i];
    std::vector<double> A(mm * mm, 0.0), b(mm, 0.0);
    for (int p = 0; p < mm; ++p) {
      for (int q = p; q < mm; ++q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += dR[p][i] * dR[q][i];
        A[p * mm + q] = A[q * mm + p] = s;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += dR[p][i] * rk[i];
      b[p] = -s;
    }
    double tr = 0.0;
    for (int p = 0; p < mm; ++p) tr += A[p * mm + p];
    const double reg = 1e-12 * (tr > 0 ? tr : 1.0);
    for (int p = 0; p < mm; ++p) A[p * mm + p] += reg;
    if (!solve_dense(A, b, mm)) return g;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = hist_g_[k][i];
      for (int j = 0; j < mm; ++j) acc += b[j] * (hist_g_[j][i] - hist_g_[k][i]);
      out[i] = acc;
    }
    return out;
  }

 private:
  static bool solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
      if (std::abs(A[piv * n + c]) < 1e-300) return false;
      if (piv != c) {
        for (int j = 0; j < n; ++j) std::swap(A[c * n + j], A[piv * n + j]);
        std::swap(b[c], b[piv]);
      }
      for (int r = c + 1; r < n; ++r) {
        const double m = A[r * n + c] / A[c * n + c];
        for (int j = c; j < n; ++j) A[r * n + j] -= m * A[c * n + j];
        b[r] -= m * b[c];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = b[r];
      for (int j = r + 1; j < n; ++j) s -= A[r * n + j] * b[j];
      b[r] = s / A[r * n + r];
    }
    return true;
  }

  int m_;
  std::vector<std::vector<double>> hist_u_, hist_g_;
};

/// Restarted GMRES; returns the achieved relative residual.
template <typename ApplyOp>
double gmres(ApplyOp&& apply, const std::vector<double>& rhs, std::vector<double>& x,
             double rel_tol, int restart, int max_total) {
  const std::size_t n = rhs.size();
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  auto norm = [&](const std::vector<double>& a) { return std::sqrt(dot(a, a)); };

  std::vector<double> r(n), tmp(n);
  const double bnorm = std::max(norm(rhs), 1e-300);
  int total = 0;
  double rel = 1.0;
  if (x.size() != n) x.assign(n, 0.0);
  while (total < max_total) {
    apply(x, tmp);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - tmp[i];
    const double beta = norm(r);
    rel = beta / bnorm;
    if (rel <= rel_tol) return rel;
    const int m = std::min(restart, max_total - total);
    if (m <= 0) return rel;
    std::vector<std::vector<double>> V;
    V.reserve(m + 1);
    V.push_back(r);
    for (auto& v : V[0]) v /= beta;
    std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0), cs(m), sn(m), s(m + 1, 0.0);
    s[0] = beta;
    int k = 0;
    while (k < m) {
      apply(V[k], tmp);
      std::vector<double> wv = tmp;
      for (int j = 0; j <= k; ++j) {
        const double hij = dot(wv, V[j]);
        H[static_cast<std::size_t>(j) * m + k] = hij;
        for (std::size_t i = 0; i < n; ++i) wv[i] -= hij * V[j][i];
      }
      const double hk1 = norm(wv);
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[static_cast<std::size_t>(j) * m + k] +
                         sn[j] * H[static_cast<std::size_t>(j + 1) * m + k];
        H[static_cast<std::size_t>(j + 1) * m + k] =
            -sn[j] * H[static_cast<std::size_t>(j) * m + k] +
            cs[j] * H[static_cast<std::size_t>(j + 1) * m + k];
        H[static_cast<std::size_t>(j) * m + k] = t;
      }
      const double d = std::hypot(H[static_cast<std::size_t>(k) * m + k], hk1);
      if (d < 1e-300) break;  // exact breakdown; solve with columns built so far
      cs[k] = H[static_cast<std::size_t>(k) * m + k] / d;
      sn[k] = hk1 / d;
      H[static_cast<std::size_t>(k) * m + k] = d;
      s[k + 1] = -sn[k] * s[k];
      s[k] = cs[k] * s[k];
      ++total;
      ++k;
      rel = std::abs(s[k]) / bnorm;
      if (hk1 <= 1e-300) break;
      V.push_back(wv);
      for (auto& v : V.back()) v /= hk1;
      if (rel <= rel_tol) break;
    }
    std::vector<double> y(k, 0.0);
    for (int r2 = k - 1; r2 >= 0; --r2) {
      double acc = s[r2];
      for (int j = r2 + 1; j < k; ++j) acc -= H[static_cast<std::size_t>(r2) * m + j] * y[j];
      const double diag = H[static_cast<std::size_t>(r2) * m + r2];
      y[r2] = std::abs(diag) > 1e-300 ? acc / diag : 0.0;
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * V[j][i];
    if (rel <= rel_tol) return rel;
    if (k == 0) return rel;
  }
  return rel;
}

/// Inexact Newton with analytic Jacobian-vector products on
///   G(u) = u + lambda Wdx(F(u)) - rhs - extend_coef * H u.
/// Returns the number of operator applications; final L1 residual via out-param.
template <FluxModel F>
long newton_solve(const KernelEquation<F>& eq, double extend_coef, std::vector<double>& u,
                  double g_tol, long max_apply, double& final_res) {
  const std::size_t n = u.size();
  const double h = eq.grid().h();
  const double a = eq.scale();
  std::vector<double> g(n), dv(n), rhs(n), delta, tmp(n), hv(n), g2(n);
  long applies = 0;

  auto residual = [&](const std::vector<double>& uu, std::vector<double>& out) {
    eq.apply_map(uu, out);
    ++applies;
    for (std::size_t i = 0; i < n; ++i) out[i] = uu[i] - out[i];
    if (extend_coef != 0.0) {
      conv_kernel(uu, h, a, hv);
      for (std::size_t i = 0; i < n; ++i) out[i] -= extend_coef * hv[i];
    }
  };

  residual(u, g);
  double gn = l1(g, h);
  int stall = 0;
  while (gn > g_tol && applies < max_apply) {
    eq.flux_derivs(u, dv);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
    delta.assign(n, 0.0);
    const double lin_tol = std::clamp(0.01 * gn / g_tol, 1e-4, 0.1);
    auto apply_J = [&](const std::vector<double>& v, std::vector<double>& out) {
      eq.apply_jacobian(dv, v, out);
      ++applies;
      if (extend_coef != 0.0) {
        conv_kernel(v, h, a, hv);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= extend_coef * hv[i];
      }
    };
    gmres(apply_J, rhs, delta, lin_tol, 150,
          static_cast<int>(std::min<long>(std::max<long>(max_apply - applies, 1), 600)));
    double step = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 10 && applies < max_apply + 16; ++bt) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + step * delta[i];
      residual(tmp, g2);
      const double gn2 = l1(g2, h);
      if (gn2 < gn * (1.0 - 1e-4 * step) || gn2 <= g_tol) {
        u.swap(tmp);
        g.swap(g2);
        gn = gn2;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      if (++stall >= 2) break;
    } else {
      stall = 0;
    }
  }
  final_res = gn;
  return applies;
}

inline double auto_fp_tol(double w_l1) { return 1e-10 * w_l1 + 1e-14; }

inline long auto_max_iter(double tol, double q) {
  const double qq = std::clamp(q, 1e-3, 0.99999);
  const double it = 10.0 * std::ceil(std::log(std::max(tol, 1e-300)) / std::log(qq));
  return std::clamp<long>(static_cast<long>(it), 50, 5000000);
}

template <FluxModel F>
ResolventSolution solve_contractive(const GridFunction& w, const F& flux, const ResolventParams& p,
                                    const GridFunction* guess) {
  const double q = contraction_factor(flux, p);
  if (q > p.q_margin)
    throw MustUseExtendedSolverError("resolvent_contractive: q = " + std::to_string(q) +
                                     " exceeds margin " + std::to_string(p.q_margin) +
                                     "; use resolvent()");
  if (!w.all_finite()) throw ParameterError("resolvent: data w must be finite");
  const double h = w.grid.h();
  const double tol = p.fp_tol > 0 ? p.fp_tol : auto_fp_tol(l1_norm(w));
  const long cap = p.max_iter > 0 ? p.max_iter : auto_max_iter(tol, q);
  const double a = std::sqrt(p.lambda * p.epsilon);

  KernelEquation<F> eq(w.grid, flux, p.lambda, a);
  eq.set_rhs_from(w.values);

  ResolventSolution sol{GridFunction(w.grid), 0, 0, 0.0, {}};
  std::vector<double> u = guess ? guess->values : w.values;

  if (p.accel == Accel::newton_krylov) {
    double res = 0.0;
    sol.iterations = newton_solve(eq, 0.0, u, tol, 100000 + 50 * cap, res);
    if (res <= tol) {
      sol.residual_l1 = res;
      sol.path.push_back(res);
      sol.u.values = std::move(u);
      return sol;
    }
    // Newton stalled: continue with the guaranteed Picard loop below.
  }

  AndersonMixer mixer(6);
  std::vector<double> g;
  eq.apply_map(u, g);
  ++sol.iterations;
  double res = l1_diff(g, u, h);
  sol.path.push_back(res);
  while (res > tol) {
    if (sol.iterations >= cap)
      throw NonconvergenceError("resolvent_contractive: no convergence in " +
                                    std::to_string(sol.iterations) + " iterations (q = " +
                                    std::to_string(q) + ")",
                                sol.path);
    if (p.accel == Accel::anderson) {
      std::vector<double> cand = mixer.next(u, g);
      std::vector<double> gc;
      eq.apply_map(cand, gc);
      ++sol.iterations;
      const double rc = l1_diff(gc, cand, h);
      if (rc <= res) {
        u.swap(cand);
        g.swap(gc);
        res = rc;
      } else {
        u.swap(g);
        eq.apply_map(u, g);
        ++sol.iterations;
        res = l1_diff(g, u, h);
        mixer.clear();
      }
    } else {
      u.swap(g);
      eq.apply_map(u, g);
      ++sol.iterations;
      res = l1_diff(g, u, h);
    }
    sol.path.push_back(res);
  }
  sol.residual_l1 = res;
  sol.u.values = std::move(u);
  return sol;
}

}  // namespace detail

/// The contraction map whose fixed point solves the resolvent equation.
template <FluxModel F>
GridFunction lambda_map(const GridFunction& u, const GridFunction& w, const F& flux,
                        const ResolventParams& p) {
  p.check();
  require_same_grid(u, w);
  const double a = std::sqrt(p.lambda * p.epsilon);
  detail::KernelEquation<F> eq(u.grid, flux, p.lambda, a);
  eq.set_rhs_from(w.values);
  GridFunction out(u.grid);
  eq.apply_map(u.values, out.values);
  return out;
}

/// Direct kernel fixed point; valid only in the contractive regime
/// q = L sqrt(lambda/eps) <= q_margin. Picard starts from u0 = w.
template <FluxModel F>
ResolventSolution resolvent_contractive(const GridFunction& w, const F& flux,
                                        const ResolventParams& p,
                                        const GridFunction* guess = nullptr) {
  p.check();
  return detail::solve_contractive(w, flux, p, guess);
}

/// Backward-Euler resolvent for any lambda > 0. The contractive regime
/// delegates to resolvent_contractive; otherwise the extension map T_w is
/// iterated over the base step lb = eps/(2 L^2) until the L1 increment drops
/// below fp_tol.
template <FluxModel F>
ResolventSolution resolvent(const GridFunction& w, const F& flux, const ResolventParams& p,
                            const GridFunction* guess = nullptr) {
  p.check();
  const double q = contraction_factor(flux, p);
  if (q <= p.q_margin) return detail::solve_contractive(w, flux, p, guess);
  if (!w.all_finite()) throw ParameterError("resolvent: data w must be finite");

  const double h = w.grid.h();
  const double L = flux.lipschitz();
  const double lb = p.epsilon / (2.0 * L * L);
  const double blend = lb / p.lambda;  // T_w(u) = J_base((1-blend) u + blend w)
  const double rho = 1.0 - blend;
  const double tol = p.fp_tol > 0 ? p.fp_tol : detail::auto_fp_tol(l1_norm(w));
  const double q_base = 1.0 / std::sqrt(2.0);

  ResolventParams base = p;
  base.lambda = lb;
  base.fp_tol = 0.1 * tol;
  base.max_iter = -1;
  base.accel = Accel::picard;

  ResolventSolution sol{GridFunction(w.grid), 0, 0, 0.0, {}};
  GridFunction u = guess ? *guess : w;

  if (p.accel == Accel::newton_krylov) {
    const double a0 = std::sqrt(lb * p.epsilon);
    detail::KernelEquation<F> eq(w.grid, flux, lb, a0);
    {
      std::vector<double> blended(w.values.size());
      for (std::size_t i = 0; i < blended.size(); ++i) blended[i] = blend * w.values[i];
      std::vector<double> rhs;
      detail::conv_kernel(blended, h, a0, rhs);
      eq.set_rhs(std::move(rhs));
    }
    // |T_w(u) - u| <= |G_ext(u)| / (1 - q_base).
    const double g_tol = tol * (1.0 - q_base);
    double res = 0.0;
    sol.iterations = detail::newton_solve(eq, rho, u.values, g_tol, 4000000, res);
    if (res <= g_tol) {
      sol.residual_l1 = res / (1.0 - q_base);
      sol.outer_iterations = 1;
      sol.path.push_back(sol.residual_l1);
      sol.u = std::move(u);
      return sol;
    }
    // Newton stalled; fall through to the safe outer iteration from its iterate.
  }

  const long outer_cap = p.max_iter > 0 ? p.max_iter : detail::auto_max_iter(tol, rho);
  GridFunction blended(w.grid);
  detail::AndersonMixer mixer(8);
  double relax = p.relax;
  double prev_res = std::numeric_limits<double>::infinity();
  int rising = 0;

  while (true) {
    for (int i = 0; i < u.size(); ++i)
      blended.values[i] = rho * u.values[i] + blend * w.values[i];
    ResolventSolution tw = detail::solve_contractive(blended, flux, base, &u);
    sol.iterations += tw.iterations;
    ++sol.outer_iterations;
    const double res = l1_distance(tw.u, u);
    sol.path.push_back(res);
    if (res <= tol) {
      sol.residual_l1 = res;
      sol.u = std::move(tw.u);
      return sol;
    }
    if (sol.outer_iterations >= outer_cap)
      throw NonconvergenceError("resolvent: extension iteration exhausted " +
                                    std::to_string(outer_cap) + " sweeps",
                                sol.path);
    if (res > prev_res) {
      if (++rising >= 2 && relax > 0.2) {  // damp oscillating sweeps
        relax *= 0.5;
        rising = 0;
        mixer.clear();
      }
    } else {
      rising = 0;
    }
    prev_res = res;
    if (p.accel == Accel::anderson) {
      u.values = mixer.next(u.values, tw.u.values);
    } else if (relax < 1.0) {
      for (int i = 0; i < u.size(); ++i)
        u.values[i] = (1.0 - relax) * u.values[i] + relax * tw.u.values[i];
    } else {
      u = std::move(tw.u);
    }
  }
}

/// Estimate of the mass a resolvent solve can lose past the truncated
/// boundary. The solution tail decays on the scale max(sqrt(lambda eps),
/// lambda L) (diffusive and advective spreading), so paddings much larger
/// than that make the defect negligible.
template <FluxModel F>
double resolvent_leakage_bound(const GridFunction& w, const F& flux, const ResolventParams& p) {
  const double scale = std::max(std::sqrt(p.lambda * p.epsilon), p.lambda * flux.lipschitz());
  return 2.0 * l1_norm(w) * std::exp(-support_distance_to_boundary(w) / scale);
}

/// Defect in the interface relation f_r(u(0)) - f_l(u(0)) = eps (u_x(0+) -
/// u_x(0-)). The value trace u(0) comes from one-sided linear extrapolation of
/// the two adjacent cells on each side; the derivative traces are the classic
/// one-sided second-order stencils (-3 f0 + 4 f1 - f2)/(2h) evaluated at the
/// first cell center of each side. The half-cell offset of those stencils
/// makes the defect O(h) on resolvent outputs.
template <FluxModel F>
double interface_residual(const GridFunction& u, const F& flux, double epsilon) {
  const Grid& g = u.grid;
  const int i0 = g.n_left();  // first cell right of the interface
  if (i0 < 3 || g.n_cells() - i0 < 3)
    throw ParameterError("interface_residual: need at least 3 cells on each side of x = 0");
  const double h = g.h();
  const double u1 = u.values[i0], u2 = u.values[i0 + 1], u3 = u.values[i0 + 2];
  const double v1 = u.values[i0 - 1], v2 = u.values[i0 - 2], v3 = u.values[i0 - 3];
  const double ux_plus = (-3.0 * u1 + 4.0 * u2 - u3) / (2.0 * h);
  const double ux_minus = (3.0 * v1 - 4.0 * v2 + v3) / (2.0 * h);
  const double u0_right = 1.5 * u1 - 0.5 * u2;
  const double u0_left = 1.5 * v1 - 0.5 * v2;
  const double u0 = 0.5 * (u0_left + u0_right);
  const double f_minus = flux.value(0.0, u0);
  const double f_plus = flux.value(std::nextafter(0.0, 1.0), u0);
  return std::abs(f_plus - f_minus - epsilon * (ux_plus - ux_minus));
}

}  // namespace dflux
