#include "splat/sp_engine.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "splat/oracle.hpp"
#include "splat/peeling.hpp"
#include "splat/rng.hpp"
#include "util.hpp"

using namespace splat;

namespace {

Formula single_clause3() {
  return make_formula(3, {{1, 2, 3}});
}

}  // namespace

TEST_CASE("random init is seeded, strictly interior, one value per edge") {
  Formula f = demo_formula();
  SpEngine a(f, 0.7, 42);
  SpEngine b(f, 0.7, 42);
  a.init_random();
  b.init_random();
  CHECK(a.eta() == b.eta());
  CHECK((int)a.eta().size() == f.num_edges());
  for (double e : a.eta()) {
    CHECK(e > 0.0);
    CHECK(e < 1.0);
  }

  SpEngine c(f, 0.7, 43);
  c.init_random();
  CHECK(a.eta() != c.eta());

  CHECK_THROWS_AS(SpEngine(f, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(SpEngine(f, -0.1, 1), std::invalid_argument);
}

TEST_CASE("single clause: pi triples and the one-sweep fixed point") {
  // With one clause no variable hears from anywhere else, so pi = (1-rho,
  // 0, 1) on every edge and the update lands on ((1-rho)/(2-rho))^(k-1)
  // regardless of the starting messages.
  Formula f = single_clause3();

  SpEngine eng(f, 0.3, 7);
  eng.init_random();
  for (int e = 0; e < f.num_edges(); ++e) {
    PiTriple p = eng.pi(e);
    CHECK(p.u == 0.7);
    CHECK(p.s == 0.0);
    CHECK(p.star == 1.0);
  }
  eng.sweep();
  double q = 0.7 / 1.7;
  for (double e : eng.eta()) CHECK(e == doctest::Approx(q * q).epsilon(1e-15));
  CHECK(eng.sweep() == 0.0);  // already at the fixed point

  SpOutcome zero = sp_run(f, 0.0, 1e-9, 50, 11);
  CHECK(zero.converged);
  // (1/2)^2 per edge at rho = 0

  SpEngine z(f, 0.0, 11);
  z.init_random();
  z.sweep();
  for (double e : z.eta()) CHECK(e == 0.25);

  SpOutcome pure = sp_run(f, 1.0, 1e-9, 50, 11);
  CHECK(pure.converged);
  for (const FieldTriple& ft : pure.fields) {
    CHECK(ft.p0 == 0.0);
    CHECK(ft.p1 == 0.0);
    CHECK(ft.pstar == 1.0);
  }
}

TEST_CASE("a variable outside every clause gets the empty-product belief") {
  Formula f = make_formula(3, {{1, 2}});  // x2 is isolated
  double rho = 0.4;
  SpOutcome out = sp_run(f, rho, 1e-9, 100, 5);
  REQUIRE(out.converged);
  double z = (1.0 - rho) * 2.0 + 1.0;
  CHECK(out.fields[2].p0 == doctest::Approx((1.0 - rho) / z).epsilon(1e-14));
  CHECK(out.fields[2].p1 == doctest::Approx((1.0 - rho) / z).epsilon(1e-14));
  CHECK(out.fields[2].pstar == doctest::Approx(1.0 / z).epsilon(1e-14));
  CHECK(out.fields[2].bias() == doctest::Approx(0.0));
}

TEST_CASE("assignment start freezes onto the peeling core") {
  // Fixture whose only non-trivial core is 000**.
  Formula f = core_pentad();

  CoreFixedPoint fp = sp_fixed_point_from_assignment(f, pa("00001"));
  CHECK(to_string(fp.core) == "000**");
  CHECK(fp.fields[0].p0 == 1.0);
  CHECK(fp.fields[1].p0 == 1.0);
  CHECK(fp.fields[2].p0 == 1.0);
  CHECK(fp.fields[3].pstar == 1.0);
  CHECK(fp.fields[4].pstar == 1.0);

  // A core start is already frozen material: the output is the core itself.
  CoreFixedPoint self = sp_fixed_point_from_assignment(f, pa("000**"));
  CHECK(to_string(self.core) == "000**");

  // An assignment that peels to nothing freezes onto the all-star core.
  CoreFixedPoint triv = sp_fixed_point_from_assignment(chain_pair(), pa("1111"));
  CHECK(triv.core == PartialAssignment::all_star(4));
  for (const FieldTriple& ft : triv.fields) CHECK(ft.pstar == 1.0);

  CHECK_THROWS_AS(sp_fixed_point_from_assignment(f, pa("10000")),
                  std::invalid_argument);
}

TEST_CASE("assignment start matches peeling on random instances") {
  Rng rng(900);
  int tested = 0;
  for (int t = 0; t < 40 && tested < 20; ++t) {
    int n = 5 + (int)rng.below(16);
    double alpha = 1.0 + 3.2 * rng.unit();
    Formula f = random_ksat(n, 3, alpha, rng.bits());
    auto sat = find_satisfying(f, rng.bits());
    if (!sat) continue;
    PartialAssignment x = PartialAssignment::of(*sat);
    CoreFixedPoint fp = sp_fixed_point_from_assignment(f, x);
    CoreResult peeled = peel_to_core(f, x, rng.bits());
    CHECK(fp.core == peeled.core);
    ++tested;
  }
  CHECK(tested == 20);
}

TEST_CASE("messages stay in range and under the per-edge cap") {
  Rng rng(311);
  for (double rho : {0.0, 0.3, 0.7, 1.0}) {
    Formula f = random_ksat(30, 3, 3.5, rng.bits());
    SpEngine eng(f, rho, rng.bits());
    eng.init_random();
    for (int t = 0; t < 50; ++t) eng.sweep();
    for (double e : eng.eta()) {
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
    CHECK(eng.worst_bound_gap() <= 1e-12);
  }
}

TEST_CASE("below the hard regime most random starts settle") {
  int converged = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Formula f = random_ksat(50, 3, 3.0, derive_seed(200, seed));
    SpOutcome out = sp_run(f, 1.0, 1e-3, 1000, seed);
    if (out.converged) ++converged;
  }
  CHECK(converged >= 9);
}

TEST_CASE("runs are reproducible sweep by sweep") {
  Formula f = random_ksat(25, 3, 4.0, 77);
  SpEngine a(f, 0.9, 123);
  SpEngine b(f, 0.9, 123);
  a.init_random();
  b.init_random();
  for (int t = 0; t < 5; ++t) {
    CHECK(a.sweep() == b.sweep());
  }
  CHECK(a.eta() == b.eta());
}

TEST_CASE("contradictory forcing is reported, not papered over") {
  // Two opposing unit clauses force x0 both ways. The messages themselves
  // stay defined (a unit clause warns unconditionally), but x0's beliefs
  // have nothing to normalize.
  Formula units(1, {{Lit{0, 0}}, {Lit{0, 1}}});
  SpEngine eng(units, 1.0, 3);
  eng.init_random();
  eng.sweep();
  CHECK(eng.eta() == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(eng.fields(), std::runtime_error);

  // Routing the conflict through a third clause starves that clause's pi
  // triple instead, which kills the sweep itself.
  Formula routed(2, {{Lit{0, 0}}, {Lit{0, 1}}, {Lit{0, 0}, Lit{1, 0}}});
  SpEngine r(routed, 0.5, 4);
  r.init_random();
  CHECK_THROWS_AS((r.sweep(), r.sweep()), std::runtime_error);
}

TEST_CASE("probe records the saturation trajectory") {
  // One clause at rho = 1 drops every message to zero on the first sweep.
  std::vector<double> traj = metastability_probe(single_clause3(), 1.0, 1e-3, 3, 9);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0] == 0.0);
  CHECK(traj[2] == 0.0);

  // Near rho = 1 a near-zero start stays away from saturation on short
  // horizons for most seeds.
  int quiet = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Formula f = random_ksat(200, 3, 4.2, derive_seed(400, seed));
    std::vector<double> t = metastability_probe(f, 0.99, 1e-3, 8, seed);
    REQUIRE(t.size() == 8);
    double peak = 0.0;
    for (double v : t) peak = std::max(peak, v);
    if (peak < 0.5) ++quiet;
  }
  CHECK(quiet >= 4);

  // rho away from 1: trajectory is recorded, nothing asserted about it.
  std::vector<double> free_run =
      metastability_probe(random_ksat(60, 3, 4.0, 5), 0.5, 1e-3, 4, 6);
  CHECK(free_run.size() == 4);

  CHECK_THROWS_AS(metastability_probe(single_clause3(), 0.0, 1e-3, 3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(metastability_probe(single_clause3(), 1.0, 1.5, 3, 1),
                  std::invalid_argument);
}

TEST_CASE("scaled start stays below its ceiling") {
  Formula f = random_ksat(40, 3, 4.0, 21);
  SpEngine eng(f, 0.9, 2);
  eng.init_scaled_random(1e-3);
  CHECK(eng.max_eta() < 1e-3);
  CHECK(eng.max_eta() > 0.0);
  CHECK_THROWS_AS(eng.init_scaled_random(0.0), std::invalid_argument);
}

TEST_CASE("damped sweeps land on the same fixed point") {
  Formula f = single_clause3();
  SpEngine eng(f, 0.0, 15);
  eng.init_random();
  eng.set_damping(0.5);
  for (int t = 0; t < 60; ++t) eng.sweep();
  for (double e : eng.eta()) CHECK(e == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(eng.set_damping(1.0), std::invalid_argument);
}

TEST_CASE("field rows serialize with full precision") {
  std::ostringstream out;
  write_sp_fields_csv(out, {{0.25, 0.5, 0.25}, {1.0, 0.0, 0.0}});
  CHECK(out.str() ==
        "var,mu0,mu1,mustar,bias\n"
        "0,0.25,0.5,0.25,0.25\n"
        "1,1,0,0,1\n");
}
