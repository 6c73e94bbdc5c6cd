#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"

namespace splat {

// Ground-truth machinery for small instances: exhaustive enumeration over
// {0,1,*}^n and exact consequences of it. Everything here is deliberately
// brute force and guarded by size limits; the fast code elsewhere is tested
// against these results.

// All valid partial assignments in ascending base-3 code order (variable 0
// least significant, star digit 2) with their weights. Guarded to n <= 14.
struct EnumerationTable {
  std::vector<PartialAssignment> assignments;
  std::vector<double> weights;
  double z = 0.0;  // total weight, including zero-weight valid entries
};

EnumerationTable enumerate_valid(const Formula& f, const WeightParams& w);

// Exact per-variable marginals (P[0], P[1], P[*]) of the normalized weight
// measure. Throws when every valid assignment has zero weight.
std::vector<std::array<double, 3>> exact_marginals(const Formula& f,
                                                   const WeightParams& w);

// Total weight of the assignments reachable from x by star steps on
// unconstrained variables (x itself included), collected by memoized BFS.
// With omega_o + omega_star == 1 this telescopes to omega_star^(stars of x);
// with omega_o + omega_star < 1 it is bounded below by
// omega_star^stars * (omega_o+omega_star)^(n-stars). x must be valid.
double downset_sum(const Formula& f, const PartialAssignment& x, const WeightParams& w);

// For every z obtained by starring a subset of x's assigned positions, peel
// x constrained to z's star set and check that (a) the set of endpoints is
// exactly the star-step reachable set of x, and (b) each fiber is exactly
// "stars of the endpoint plus any subset of its constrained variables".
// This is the partition structure behind the downset identity.
bool sigma_tau_check(const Formula& f, const PartialAssignment& x);

// Compares assignment weights against their parent-set factor form: clause
// validity factors times, per variable, the sum over admissible parent sets
// (the empty set, or a nonempty subset of same-sign occurrences) of the
// status weight and membership consistency indicators. Every parent set is
// enumerated literally. Guarded to n <= 8 and at most 12 occurrences per
// sign. unique_parent_choice reports whether each variable of each valid
// assignment admitted exactly one consistent parent set.
struct PgenReport {
  double max_abs_diff = 0.0;
  bool unique_parent_choice = true;
};

PgenReport verify_pgen(const Formula& f, const WeightParams& w);

// Peels x under `orders` different random orders and checks they all reach
// the same endpoint.
struct ExactCoreReport {
  PartialAssignment core;
  bool order_independent = true;
};

ExactCoreReport exact_core(const Formula& f, const PartialAssignment& x,
                           int orders = 20, uint64_t seed = 1);

// Complete backtracking search (unit propagation, shortest-clause branching,
// seeded tie-breaking). nullopt means unsatisfiable.
std::optional<std::vector<uint8_t>> find_satisfying(const Formula& f, uint64_t seed);

}  // namespace splat
