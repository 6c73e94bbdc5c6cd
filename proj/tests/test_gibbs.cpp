#include "splat/gibbs.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "splat/oracle.hpp"
#include "splat/rng.hpp"
#include "util.hpp"

using namespace splat;

namespace {

// base-3 state index, variable 0 least significant; matches the oracle's
// enumeration order.
size_t idx3(const PartialAssignment& x) {
  size_t r = 0, p = 1;
  for (int i = 0; i < x.size(); ++i) {
    r += p * x[i];
    p *= 3;
  }
  return r;
}

// Valid states reachable from all-star along single-site moves of positive
// conditional weight, as a membership mask over base-3 indices.
std::vector<char> reachable_states(const Formula& f, const WeightParams& w) {
  int n = f.num_vars();
  size_t span = 1;
  for (int i = 0; i < n; ++i) span *= 3;
  std::vector<char> seen(span, 0);
  std::deque<PartialAssignment> queue{PartialAssignment::all_star(n)};
  seen[idx3(queue.front())] = 1;
  while (!queue.empty()) {
    PartialAssignment x = queue.front();
    queue.pop_front();
    for (int i = 0; i < n; ++i) {
      std::array<double, 3> cw = conditional_weights(f, x, i, w);
      for (uint8_t b = 0; b < 3; ++b) {
        if (b == x[i] || cw[b] <= 0.0) continue;
        PartialAssignment y = x;
        y[i] = b;
        if (!seen[idx3(y)]) {
          seen[idx3(y)] = 1;
          queue.push_back(y);
        }
      }
    }
  }
  return seen;
}

}  // namespace

TEST_CASE("conditional of a single clause splits by status weights") {
  Formula f(3, {{Lit{0, 0}, Lit{1, 0}, Lit{2, 0}}});
  WeightParams w{0.3, 0.6};
  std::array<double, 3> cw = conditional_weights(f, pa("1**"), 0, w);
  // either non-star value leaves the site unconstrained beside two stars
  CHECK(cw[kZero] == w.omega_o * w.omega_star * w.omega_star);
  CHECK(cw[kOne] == w.omega_o * w.omega_star * w.omega_star);
  CHECK(cw[kStar] == w.omega_star * w.omega_star * w.omega_star);

  CHECK_THROWS_AS(conditional_weights(f, pa("000"), 0, w),
                  std::invalid_argument);
}

TEST_CASE("an isolated variable weighs its own three statuses") {
  Formula f(2, {{Lit{0, 0}}});  // x1 sits outside the lone unit clause
  WeightParams w{0.2, 0.7};
  std::array<double, 3> cw = conditional_weights(f, pa("1*"), 1, w);
  CHECK(cw[kZero] == w.omega_o);
  CHECK(cw[kOne] == w.omega_o);
  CHECK(cw[kStar] == w.omega_star);
}

TEST_CASE("a unique satisfier can neither flip nor star out") {
  Formula f(3, {{Lit{0, 0}, Lit{1, 0}, Lit{2, 0}}});
  WeightParams w{0.3, 0.6};
  // x0 alone satisfies the clause and no star is left to absorb a retreat
  std::array<double, 3> cw = conditional_weights(f, pa("100"), 0, w);
  CHECK(cw[kZero] == 0.0);
  CHECK(cw[kStar] == 0.0);
  CHECK(cw[kOne] > 0.0);
}

TEST_CASE("conditional ratios reproduce the assignment weight") {
  Rng rng(4243);
  for (int t = 0; t < 10; ++t) {
    int n = 3 + (int)rng.below(4);
    Formula f = random_ksat(n, 3, 1.6, rng.bits());
    WeightParams w = t % 2 ? WeightParams::from_rho(0.8)
                           : WeightParams{0.35, 0.55};
    EnumerationTable table = enumerate_valid(f, w);
    for (size_t s = 0; s < table.assignments.size(); s += 3) {
      const PartialAssignment& x = table.assignments[s];
      if (!assignment_valid(f, x)) continue;
      for (int i = 0; i < n; ++i) {
        std::array<double, 3> cw = conditional_weights(f, x, i, w);
        std::array<double, 3> full{};
        for (uint8_t b = 0; b < 3; ++b) {
          PartialAssignment y = x;
          y[i] = b;
          full[b] = weight(f, y, w);
          // zero conditional exactly where the move breaks a clause
          CHECK((cw[b] == 0.0) == (full[b] == 0.0));
        }
        // cross-ratios agree: the factors outside the neighborhood cancel
        for (int b = 0; b < 3; ++b)
          for (int c = b + 1; c < 3; ++c) {
            CAPTURE(t);
            CAPTURE(i);
            CHECK(cw[(size_t)b] * full[(size_t)c] ==
                  doctest::Approx(cw[(size_t)c] * full[(size_t)b])
                      .epsilon(1e-12));
          }
      }
    }
  }
}

TEST_CASE("single site transitions obey detailed balance") {
  Rng rng(616);
  for (int t = 0; t < 6; ++t) {
    int n = 3 + (int)rng.below(4);  // up to 6
    Formula f = random_ksat(n, 3, 1.5, rng.bits());
    WeightParams w = t % 2 ? WeightParams::from_rho(0.7)
                           : WeightParams{0.35, 0.55};
    EnumerationTable table = enumerate_valid(f, w);
    for (size_t s = 0; s < table.assignments.size(); ++s) {
      if (table.weights[s] == 0.0) continue;
      const PartialAssignment& x = table.assignments[s];
      for (int i = 0; i < n; ++i) {
        std::array<double, 3> cw = conditional_weights(f, x, i, w);
        double total = cw[0] + cw[1] + cw[2];
        for (uint8_t b = 0; b < 3; ++b) {
          if (b == x[i] || cw[b] == 0.0) continue;
          PartialAssignment y = x;
          y[i] = b;
          std::array<double, 3> cwy = conditional_weights(f, y, i, w);
          double toty = cwy[0] + cwy[1] + cwy[2];
          double forth = weight(f, x, w) * (cw[b] / total);
          double back = weight(f, y, w) * (cwy[x[i]] / toty);
          CAPTURE(t);
          CAPTURE(i);
          CHECK(std::fabs(forth - back) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("long runs settle on the reachable slice of the weight") {
  struct Case {
    Formula f;
    uint64_t seed;
    double locked_away;  // weight fraction the walk cannot reach
  };
  // The pentad walls off its non-trivial core behind constrained variables,
  // so nearly a third of the weight is unreachable from all-star; the two
  // random instances are fully connected.
  std::vector<Case> cases;
  cases.push_back({core_pentad(), 11, 0.3003});
  cases.push_back({random_ksat(6, 3, 2.0, 31), 12, 0.0});
  cases.push_back({random_ksat(7, 3, 1.8, 101), 14, 0.0});
  WeightParams w = WeightParams::from_rho(0.7);

  for (size_t c = 0; c < cases.size(); ++c) {
    CAPTURE(c);
    const Formula& f = cases[c].f;
    int n = f.num_vars();
    EnumerationTable table = enumerate_valid(f, w);
    std::vector<char> seen = reachable_states(f, w);

    size_t span = 1;
    for (int i = 0; i < n; ++i) span *= 3;
    std::vector<double> target(span, 0.0);
    double mass_in = 0.0, mass_out = 0.0;
    for (size_t s = 0; s < table.assignments.size(); ++s) {
      size_t id = idx3(table.assignments[s]);
      if (seen[id]) {
        target[id] = table.weights[s];
        mass_in += table.weights[s];
      } else {
        mass_out += table.weights[s];
      }
    }
    CHECK(mass_out / table.z ==
          doctest::Approx(cases[c].locked_away).epsilon(1e-2));

    GibbsChain chain(f, w, cases[c].seed);
    int64_t steps = 400000LL * n, burn = steps / 5;
    std::vector<int64_t> count(span, 0);
    for (int64_t t = 0; t < steps; ++t) {
      chain.step();
      if (t >= burn) ++count[idx3(chain.state())];
    }
    chain.audit();
    double tv = 0.0;
    for (size_t s = 0; s < span; ++s)
      tv += std::fabs((double)count[s] / (double)(steps - burn) -
                      target[s] / mass_in);
    CHECK(tv / 2 < 0.05);
  }
}

TEST_CASE("occupancy frequencies match the oracle marginals") {
  Formula f = random_ksat(7, 3, 1.8, 105);
  WeightParams w = WeightParams::from_rho(0.6);
  // fully connected state space, checked by reachability
  EnumerationTable table = enumerate_valid(f, w);
  std::vector<char> seen = reachable_states(f, w);
  for (size_t s = 0; s < table.assignments.size(); ++s)
    REQUIRE(seen[idx3(table.assignments[s])] == 1);

  std::vector<std::array<double, 3>> exact = exact_marginals(f, w);
  GibbsEstimates est = gibbs_run(f, w, 100000LL * 7, 100000LL * 7 / 5, 21);
  for (int i = 0; i < 7; ++i) {
    double tv = 0.0;
    for (int b = 0; b < 3; ++b)
      tv += std::fabs(est.tau[(size_t)i][(size_t)b] - exact[(size_t)i][(size_t)b]);
    CAPTURE(i);
    CHECK(tv / 2 < 0.05);
  }
}

TEST_CASE("a clause-free chain settles on the bare site weights") {
  Formula f(3, {});
  GibbsEstimates half = gibbs_run(f, {0.5, 0.5}, 300000, 60000, 7);
  for (int i = 0; i < 3; ++i)
    for (int b = 0; b < 3; ++b)
      CHECK(std::fabs(half.tau[(size_t)i][(size_t)b] - 1.0 / 3.0) < 0.02);

  // omega_star twice omega_o tilts the stationary split to (1/4, 1/4, 1/2)
  GibbsEstimates tilted = gibbs_run(f, WeightParams::from_rho(2.0 / 3.0),
                                    300000, 60000, 8);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::fabs(tilted.tau[(size_t)i][kZero] - 0.25) < 0.02);
    CHECK(std::fabs(tilted.tau[(size_t)i][kOne] - 0.25) < 0.02);
    CHECK(std::fabs(tilted.tau[(size_t)i][kStar] - 0.5) < 0.02);
  }
}

TEST_CASE("occupancy counters cover every recorded step") {
  Formula f = random_ksat(9, 3, 2.5, 77);
  WeightParams w = WeightParams::from_rho(0.5);
  GibbsChain chain(f, w, 5);
  CHECK_THROWS_AS(chain.tau(0), std::runtime_error);
  for (int t = 0; t < 500; ++t) chain.step();
  chain.start_recording();
  for (int t = 0; t < 2500; ++t) chain.step();
  CHECK(chain.recorded() == 2500);
  for (int i = 0; i < 9; ++i) {
    std::array<double, 3> tau = chain.tau(i);
    CHECK(tau[0] + tau[1] + tau[2] == doctest::Approx(1.0).epsilon(1e-12));
  }

  GibbsEstimates a = gibbs_run(f, w, 4000, 800, 99);
  GibbsEstimates b = gibbs_run(f, w, 4000, 800, 99);
  GibbsEstimates c = gibbs_run(f, w, 4000, 800, 100);
  CHECK(a.tau == b.tau);
  CHECK(a.tau != c.tau);
  CHECK_THROWS_AS(gibbs_run(f, w, 100, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(gibbs_run(f, w, 100, -1, 1), std::invalid_argument);
}

TEST_CASE("a weightless start stays put while time advances") {
  Formula f(3, {{Lit{0, 0}, Lit{1, 0}, Lit{2, 0}}});
  GibbsChain chain(f, {0.5, 0.0}, 3);
  chain.start_recording();
  for (int t = 0; t < 1000; ++t) chain.step();
  CHECK(chain.state() == PartialAssignment::all_star(3));
  CHECK(chain.recorded() == 1000);
  std::array<double, 3> tau = chain.tau(0);
  CHECK(tau[kZero] == 0.0);
  CHECK(tau[kOne] == 0.0);
  CHECK(tau[kStar] == 1.0);
  chain.audit();
}

TEST_CASE("incremental caches survive a long audited run") {
  Formula f = random_ksat(30, 3, 4.0, 5150);
  GibbsChain chain(f, WeightParams::from_rho(0.9), 99);
  for (int t = 0; t < 10000; ++t) {
    chain.step();
    if ((t + 1) % 1000 == 0) chain.audit();
  }
  CHECK(assignment_valid(f, chain.state()));
}

TEST_CASE("negative weights are rejected") {
  Formula f(2, {{Lit{0, 0}, Lit{1, 0}}});
  CHECK_THROWS_AS(GibbsChain(f, {-0.1, 0.5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(GibbsChain(f, {0.5, -0.1}, 1), std::invalid_argument);
}

TEST_CASE("top-k comparison averages the most biased sites") {
  GibbsEstimates est;
  est.tau = {{0.5, 0.5, 0.0}, {0.2, 0.2, 0.6}, {0.3, 0.3, 0.4}};
  std::vector<FieldTriple> same = {
      {0.5, 0.5, 0.0}, {0.2, 0.2, 0.6}, {0.3, 0.3, 0.4}};
  CHECK(compare_topk(same, est, 3) == 0.0);

  // maximal disagreement: propagation all bias +1, sampler all bias -1
  GibbsEstimates flipped;
  flipped.tau = {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}};
  std::vector<FieldTriple> sure = {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  CHECK(compare_topk(sure, flipped, 2) == 2.0);

  // selection takes |p0 - p1| descending, so x2 (0.1) is left out at k=2
  GibbsEstimates zero;
  zero.tau = {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}};
  std::vector<FieldTriple> mixed = {
      {0.9, 0.0, 0.1}, {0.0, 0.8, 0.2}, {0.1, 0.0, 0.9}};
  CHECK(compare_topk(mixed, zero, 2) == doctest::Approx(0.85).epsilon(1e-15));

  CHECK_THROWS_AS(compare_topk(mixed, zero, 0), std::invalid_argument);
  CHECK_THROWS_AS(compare_topk(mixed, zero, 4), std::invalid_argument);
  CHECK_THROWS_AS(compare_topk(sure, zero, 1), std::invalid_argument);
}

TEST_CASE("sampler csv rows are stable") {
  GibbsEstimates est;
  est.tau = {{0.25, 0.25, 0.5}, {1.0, 0.0, 0.0}};
  std::ostringstream out;
  write_tau_csv(out, est);
  CHECK(out.str() ==
        "var,tau0,tau1,taustar,bias\n"
        "0,0.25,0.25,0.5,0\n"
        "1,1,0,0,1\n");

  std::ostringstream rep;
  write_compare_csv(rep, {{4.25, 0.5, 0.25, 0.125}});
  CHECK(rep.str() ==
        "alpha,sp_rho,gibbs_rho,l1_topk\n"
        "4.25,0.5,0.25,0.125\n");
}
