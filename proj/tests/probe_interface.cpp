// Scratch probe: interface-residual convergence order at acceptance params.
#include <cstdio>
#include <random>

#include "dflux/resolvent.hpp"
#include "dflux/shapes.hpp"

using namespace dflux;

int main() {
  Flux tj = fixture("traffic_jump");
  std::mt19937_64 rng(42);
  std::vector<PiecewiseConstant> ws;
  for (int i = 0; i < 8; ++i) ws.push_back(random_steps(rng, -2.0, 2.0, 8));

  for (double h : {8e-3, 4e-3, 2e-3, 1e-3}) {
    Grid g(-5.0, 5.0, static_cast<int>(10.0 / h));
    double sum = 0.0;
    for (auto& pc : ws) {
      GridFunction w = sample_piecewise(g, pc);
      ResolventParams p;
      p.lambda = 0.1;
      p.epsilon = 0.1;
      p.accel = Accel::newton_krylov;
      p.fp_tol = 1e-12;
      ResolventSolution s = resolvent(w, tj, p);
      sum += interface_residual(s.u, tj, 0.1);
    }
    std::printf("h = %g  mean residual = %.6e\n", h, sum / ws.size());
  }
  return 0;
}
