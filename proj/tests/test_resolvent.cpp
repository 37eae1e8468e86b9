#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "dflux/resolvent.hpp"
#include "dflux/shapes.hpp"

using namespace dflux;

namespace {

ResolventParams params(double lambda, double eps) {
  ResolventParams p;
  p.lambda = lambda;
  p.epsilon = eps;
  return p;
}

}  // namespace

TEST_CASE("lambda_map on the zero state") {
  Grid g(-4.0, 4.0, 400);
  GridFunction zero(g);
  Flux t = fixture("traffic");
  GridFunction out = lambda_map(zero, zero, t, params(0.1, 0.5));
  CHECK(l1_norm(out) == 0.0);

  Grid g2(-4.0, 4.0, 200);
  GridFunction other(g2);
  CHECK_THROWS_AS(lambda_map(zero, other, t, params(0.1, 0.5)), ShapeError);
}

TEST_CASE("lambda_map fixes the constant 1/2 for burgers_shifted") {
  // f_l(1/2) = f_r(1/2), so the advective term sees a constant flux and the
  // odd kernel annihilates it; interior values stay 1/2 up to leakage.
  Grid g(-30.0, 30.0, 1500);
  GridFunction half(g, 0.5);
  Flux b = fixture("burgers_shifted");
  GridFunction out = lambda_map(half, half, b, params(0.1, 1.0));
  const int i0 = g.n_left();
  for (int i = i0 - 200; i <= i0 + 200; i += 40)
    CHECK(out.values[i] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("lambda_map of a spike reproduces the kernel (advective term absent)") {
  Grid g(-4.0, 4.0, 1600);
  GridFunction w(g);
  w.values[g.n_left()] = 1.0 / g.h();
  GridFunction zero(g);
  Flux t = fixture("traffic");
  const double lambda = 0.01, eps = 1.0;
  GridFunction out = lambda_map(zero, w, t, params(lambda, eps));
  const double a = std::sqrt(lambda * eps);
  for (int off : {10, 50, 150}) {
    const double x = g.center(g.n_left() + off) - g.center(g.n_left());
    CHECK(out.values[g.n_left() + off] ==
          Catch::Approx(std::exp(-std::abs(x) / a) / (2 * a)).margin(2.0 * g.h() / a));
  }
}

TEST_CASE("resolvent_contractive trivial and error paths") {
  Grid g(-2.0, 2.0, 200);
  Flux t = fixture("traffic");
  GridFunction zero(g);

  ResolventSolution s = resolvent_contractive(zero, t, params(0.01, 0.5));
  CHECK(l1_norm(s.u) == 0.0);
  CHECK(s.iterations == 1);
  CHECK(s.residual_l1 == 0.0);

  // q = sqrt(0.5/0.01) > 0.9: must route through the extended solver.
  CHECK_THROWS_AS(resolvent_contractive(zero, t, params(0.5, 0.01)), MustUseExtendedSolverError);

  // Exhausted iteration budget reports the residual path.
  GridFunction w = riemann(g, 0.3, 0.7);
  ResolventParams p = params(0.4, 0.5);  // q ~ 0.89, slow
  p.max_iter = 3;
  try {
    resolvent_contractive(w, t, p);
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK(e.residual_path.size() >= 3);
    CHECK(e.residual_path.front() > 0.0);
  }
}

TEST_CASE("constant-half resolvent for burgers_shifted") {
  Grid g(-30.0, 30.0, 3000);
  auto w = GridFunction::sample(g, [](double x) { return std::abs(x) <= 20.0 ? 0.5 : 0.0; });
  Flux b = fixture("burgers_shifted");
  ResolventSolution s = resolvent_contractive(w, b, params(0.01, 1.0));
  for (int i = 0; i < g.n_cells(); ++i) {
    const double x = g.center(i);
    if (std::abs(x) <= 10.0) CHECK(s.u.values[i] == Catch::Approx(0.5).margin(1e-6));
  }
}

TEST_CASE("fixed point matches the dense Newton oracle on the same equation") {
  // N = 401 with the interface on a cell edge.
  Grid g(-10.0, 10.05, 401);
  Flux t = fixture("traffic");
  GridFunction w = bump(g, -1.0, 3.0, 0.8);
  const double lambda = 1e-3, eps = 0.1;

  ResolventParams p = params(lambda, eps);
  p.fp_tol = 1e-13;
  ResolventSolution s = resolvent_contractive(w, t, p);

  dflux_test::DenseKernelOracle oracle(g, lambda, eps);
  GridFunction ref = oracle.solve(w, t);
  CHECK(l1_distance(s.u, ref) < 1e-7);

  // Same check on a discontinuous-flux case.
  Flux tj = fixture("traffic_jump");
  ResolventParams p2 = params(5e-3, 0.2);
  p2.fp_tol = 1e-13;
  ResolventSolution s2 = resolvent_contractive(w, tj, p2);
  dflux_test::DenseKernelOracle oracle2(g, 5e-3, 0.2);
  GridFunction ref2 = oracle2.solve(w, tj);
  CHECK(l1_distance(s2.u, ref2) < 1e-7);
}

TEST_CASE("resolvent delegates to the contractive path for small lambda") {
  Grid g(-6.0, 6.0, 600);
  Flux t = fixture("traffic");
  GridFunction w = bump(g, 0.5, 2.0, 0.9);
  // lambda <= 0.81 eps / L^2 keeps q <= 0.9.
  ResolventParams p = params(0.08, 0.1);
  ResolventSolution a = resolvent(w, t, p);
  ResolventSolution b = resolvent_contractive(w, t, p);
  CHECK(l1_distance(a.u, b.u) == 0.0);
  CHECK(a.outer_iterations == 0);
}

TEST_CASE("extended resolvent conserves mass") {
  Grid g(-12.0, 12.0, 1200);
  Flux t = fixture("traffic");
  auto w = GridFunction::sample(g, [](double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; });
  ResolventParams p = params(1.0, 0.05);
  p.fp_tol = 1e-11;
  ResolventSolution s = resolvent(w, t, p);
  CHECK(s.outer_iterations > 1);
  CHECK(mass(s.u) == Catch::Approx(2.0).margin(1e-8));
  CHECK(s.residual_l1 <= 1e-11);
}

TEST_CASE("accelerated solvers land on the Picard fixed point") {
  Grid g(-8.0, 8.0, 800);
  Flux tj = fixture("traffic_jump");
  GridFunction w = bump(g, -0.5, 2.5, 0.7);

  ResolventParams p = params(0.3, 0.4);  // q = 2 sqrt(0.75) ~ 1.73: extended path
  p.fp_tol = 1e-11;
  ResolventSolution picard = resolvent(w, tj, p);
  p.accel = Accel::anderson;
  ResolventSolution anderson = resolvent(w, tj, p);
  p.accel = Accel::newton_krylov;
  ResolventSolution newton = resolvent(w, tj, p);

  CHECK(l1_distance(picard.u, anderson.u) < 2e-10);
  CHECK(l1_distance(picard.u, newton.u) < 2e-10);
  CHECK(anderson.iterations <= picard.iterations);

  // Contractive regime as well.
  ResolventParams pc = params(0.05, 0.4);
  pc.fp_tol = 1e-12;
  ResolventSolution c0 = resolvent(w, tj, pc);
  pc.accel = Accel::newton_krylov;
  ResolventSolution c1 = resolvent(w, tj, pc);
  CHECK(l1_distance(c0.u, c1.u) < 1e-10);
}

TEST_CASE("contraction, one-sided contraction, monotonicity, conservation, max principle") {
  Grid g(-14.0, 14.0, 1400);
  std::mt19937_64 rng(101);
  for (const char* name : {"traffic", "traffic_jump"}) {
    Flux f = fixture(name);
    for (int rep = 0; rep < 6; ++rep) {
      GridFunction w1 = sample_piecewise(g, random_steps(rng, -4.0, 4.0, 8));
      GridFunction w2 = sample_piecewise(g, random_steps(rng, -4.0, 4.0, 8));
      ResolventParams p = params(rep % 2 ? 0.05 : 0.4, 0.1);
      p.fp_tol = 1e-11;
      p.accel = Accel::newton_krylov;
      GridFunction u1 = resolvent(w1, f, p).u;
      GridFunction u2 = resolvent(w2, f, p).u;

      const double slack = 10.0 * 1e-11;
      CHECK(l1_distance(u1, u2) <= l1_distance(w1, w2) + slack);
      CHECK(positive_part_mass(u1, u2) <= positive_part_mass(w1, w2) + slack);
      const double leak = resolvent_leakage_bound(w1, f, p);
      CHECK(std::abs(mass(u1) - mass(w1)) <= 1e-8 + leak);
      for (double v : u1.values) {
        CHECK(v >= -1e-9);
        CHECK(v <= 1.0 + 1e-9);
      }

      // Monotone pair: w1 vs max(w1, w2).
      GridFunction wb(g);
      for (int i = 0; i < g.n_cells(); ++i) wb.values[i] = std::max(w1.values[i], w2.values[i]);
      GridFunction ub = resolvent(wb, f, p).u;
      for (int i = 0; i < g.n_cells(); ++i) CHECK(u1.values[i] <= ub.values[i] + 1e-9);
    }
  }
}

TEST_CASE("TV bound of Lemma-type: TV(J w) <= 2 + TV(w)") {
  Grid g(-8.0, 8.0, 1000);
  std::mt19937_64 rng(55);
  for (const char* name : {"traffic", "traffic_jump"}) {
    Flux f = fixture(name);
    for (int rep = 0; rep < 4; ++rep) {
      GridFunction w = sample_piecewise(g, random_steps(rng, -4.0, 4.0, 8));
      ResolventParams p = params(0.25, 0.08);
      p.accel = Accel::newton_krylov;
      GridFunction u = resolvent(w, f, p).u;
      CHECK(total_variation(u) <= 2.0 + total_variation(w) + 1e-6);
    }
  }
}

TEST_CASE("resolvent formula within the shared-base extension family") {
  Grid g(-8.0, 8.0, 800);
  Flux t = fixture("traffic");
  std::mt19937_64 rng(77);
  const double eps = 0.1;
  for (int rep = 0; rep < 4; ++rep) {
    GridFunction w = sample_piecewise(g, random_steps(rng, -4.0, 4.0, 6));
    const double lambda = 0.4 + 0.1 * rep;
    const double mu = lambda / 2.0;  // both above the contractive margin
    ResolventParams pl = params(lambda, eps);
    pl.fp_tol = 1e-12;
    pl.accel = Accel::newton_krylov;
    ResolventParams pm = pl;
    pm.lambda = mu;
    GridFunction ul = resolvent(w, t, pl).u;
    GridFunction blend(g);
    for (int i = 0; i < g.n_cells(); ++i)
      blend.values[i] = (mu / lambda) * w.values[i] + (1.0 - mu / lambda) * ul.values[i];
    GridFunction um = resolvent(blend, t, pm).u;
    CHECK(l1_distance(ul, um) <= 10.0 * 1e-12);
  }
}

TEST_CASE("cross-regime resolvent formula defect vanishes with the mesh") {
  // Between the direct kernel regime and the extension family the discrete
  // operators differ at consistency order, so the identity defect must shrink
  // under refinement.
  Flux t = fixture("traffic");
  const double eps = 0.4, lambda = 0.45, mu = 0.225;
  // q(lambda) ~ 1.06 (extension), q(mu) ~ 0.75 (direct kernel).
  double defects[2];
  int k = 0;
  for (int n : {400, 800}) {
    Grid g(-8.0, 8.0, n);
    GridFunction w = bump(g, 0.0, 2.0, 0.8);
    ResolventParams pl = params(lambda, eps);
    pl.fp_tol = 1e-13;
    ResolventParams pm = params(mu, eps);
    pm.fp_tol = 1e-13;
    GridFunction ul = resolvent(w, t, pl).u;
    GridFunction blend(g);
    for (int i = 0; i < g.n_cells(); ++i)
      blend.values[i] = 0.5 * w.values[i] + 0.5 * ul.values[i];
    GridFunction um = resolvent(blend, t, pm).u;
    defects[k++] = l1_distance(ul, um);
  }
  CHECK(defects[1] < 0.6 * defects[0]);
}

TEST_CASE("interface residual") {
  Flux t = fixture("traffic");
  Flux tj = fixture("traffic_jump");

  // Continuous flux, smooth solution: both sides of the relation vanish.
  {
    Grid g(-6.0, 6.0, 1200);
    GridFunction w = bump(g, 0.0, 2.0, 0.6);
    ResolventSolution s = resolvent_contractive(w, t, params(0.01, 0.2));
    CHECK(interface_residual(s.u, t, 0.2) < 0.05 * g.h() / 0.01);
    CHECK(interface_residual(s.u, t, 0.2) < 0.02);
  }

  // Constant 1/2 for burgers_shifted: f_l(1/2) = f_r(1/2) and u_x = 0.
  {
    Grid g(-30.0, 30.0, 3000);
    auto w = GridFunction::sample(g, [](double x) { return std::abs(x) <= 20.0 ? 0.5 : 0.0; });
    Flux b = fixture("burgers_shifted");
    ResolventSolution s = resolvent_contractive(w, b, params(0.01, 1.0));
    CHECK(interface_residual(s.u, b, 1.0) < 1e-5);
  }

  // traffic_jump under h-refinement: the defect roughly halves.
  {
    std::mt19937_64 rng(31);
    double coarse_sum = 0.0, fine_sum = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      PiecewiseConstant pc = random_steps(rng, -2.0, 2.0, 6);
      for (int lvl = 0; lvl < 2; ++lvl) {
        Grid g(-5.0, 5.0, lvl == 0 ? 1250 : 2500);
        GridFunction w = sample_piecewise(g, pc);
        ResolventParams p = params(0.1, 0.1);
        p.accel = Accel::newton_krylov;
        ResolventSolution s = resolvent(w, tj, p);
        (lvl == 0 ? coarse_sum : fine_sum) += interface_residual(s.u, tj, 0.1);
      }
    }
    CHECK(fine_sum < coarse_sum);
    const double ratio = coarse_sum / fine_sum;
    INFO("interface residual refinement ratio " << ratio);
    CHECK(ratio > 1.3);
    CHECK(ratio < 3.5);
  }
}
