#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dflux/flux.hpp"

using namespace dflux;

TEST_CASE("eval splits exactly at the interface") {
  Flux f = fixture("burgers_shifted");
  CHECK(f.value(-1.0, 0.5) == Catch::Approx(0.125));  // (u-1)^2/2
  CHECK(f.value(1.0, 0.5) == Catch::Approx(0.125));   // u^2/2
  CHECK(f.value(0.0, 0.25) == Catch::Approx(0.28125));     // x = 0 belongs to the left branch
  CHECK(f.value(1e-300, 0.25) == Catch::Approx(0.03125));  // any x > 0 is the right branch

  // f1 fixtures vanish at u = 0 on both sides.
  for (const char* name : {"traffic", "traffic_jump", "traffic_84"}) {
    Flux t = fixture(name);
    CHECK(t.value(-3.0, 0.0) == 0.0);
    CHECK(t.value(3.0, 0.0) == 0.0);
  }
}

TEST_CASE("validate checks Lipschitz bounds and endpoints") {
  CHECK(validate(fixture("traffic")).all_pass());
  CHECK(validate(fixture("traffic_jump")).all_pass());

  // The 6.4 pair with an understated bound: sup |f_l'| = 8 > 4.
  Flux bad("traffic_84_understated", Poly{0.0, 8.0, -8.0}, Poly{0.0, 4.0, -4.0}, 4.0);
  ValidationReport rep = validate(bad);
  CHECK_FALSE(rep.lipschitz_left.pass);
  CHECK(rep.lipschitz_left.worst_value > 4.0);
  CHECK(rep.lipschitz_right.pass);

  // With the exact bound it passes the Lipschitz clause.
  CHECK(validate(fixture("traffic_84")).lipschitz_ok());
}

TEST_CASE("fixture endpoint checks") {
  // burgers_shifted violates both f1 identities; it is f0-only.
  Flux b = fixture("burgers_shifted");
  CHECK_FALSE(b.satisfies_f1_endpoints());
  CHECK(b.left(1.0) == Catch::Approx(0.0));
  CHECK(b.right(1.0) == Catch::Approx(0.5));
  CHECK_FALSE(validate(b).f1_endpoints.pass);

  CHECK(fixture("traffic").satisfies_f1_endpoints());
  CHECK(fixture("traffic_jump").satisfies_f1_endpoints());
  CHECK(fixture("traffic_jump").left(1.0) == Catch::Approx(0.0));
  CHECK(fixture("traffic_jump").right(1.0) == Catch::Approx(0.0));
}

TEST_CASE("builtin fixture registry") {
  auto all = builtin_fixtures();
  REQUIRE(all.size() >= 4);
  CHECK_THROWS_AS(fixture("no_such_flux"), UnsupportedFluxError);
  CHECK(fixture("traffic_jump").lipschitz() == Catch::Approx(2.0));
  CHECK(fixture("traffic_84").lipschitz() == Catch::Approx(8.0));
}

TEST_CASE("mollified flux") {
  Flux b = fixture("burgers_shifted");
  CHECK_THROWS_AS(mollify(fixture("traffic"), 0.1), UnsupportedFluxError);
  CHECK_THROWS_AS(mollify(b, 0.0), ParameterError);

  const double delta = 0.1;
  MollifiedFlux m = mollify(b, delta);

  // Equals the unmollified flux outside [-delta, delta].
  for (double u : {0.0, 0.3, 0.8, 1.0}) {
    CHECK(m.value(-2.0 * delta, u) == Catch::Approx(0.5 * (u - 1.0) * (u - 1.0)));
    CHECK(m.value(2.0 * delta, u) == Catch::Approx(0.5 * u * u));
  }

  // Vanishes along u_m(x) = 1 - H(x) for every x.
  for (double x : {-0.2, -0.05, 0.0, 0.03, 0.09, 0.5}) {
    CHECK(m.value(x, m.zero_level(x)) == Catch::Approx(0.0).margin(1e-15));
  }

  // Transition is monotone and hits {0,1} outside [-delta, delta].
  CHECK(m.transition(-delta) == 0.0);
  CHECK(m.transition(delta) == 1.0);
  double prev = -1.0;
  for (int k = 0; k <= 50; ++k) {
    double t = m.transition(-delta + 2.0 * delta * k / 50.0);
    CHECK(t >= prev - 1e-15);
    prev = t;
  }
}

TEST_CASE("negated flux wrapper flips values and derivatives") {
  Flux t = fixture("traffic");
  NegatedFlux<Flux> n{t};
  CHECK(n.value(-1.0, 0.25) == Catch::Approx(-t.value(-1.0, 0.25)));
  CHECK(n.deriv_u(2.0, 0.25) == Catch::Approx(-t.deriv_u(2.0, 0.25)));
  CHECK(n.lipschitz() == t.lipschitz());
}
