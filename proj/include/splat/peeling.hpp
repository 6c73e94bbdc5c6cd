#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"

namespace splat {

// (stars, unconstrained) counts; entry 0 describes the input assignment and
// one entry is appended after every starring step, so stars increase by one
// per entry and the final entry has no unconstrained variables left.
struct PeelTrace {
  std::vector<std::pair<int, int>> steps;
};

struct CoreResult {
  PartialAssignment core;
  bool trivial;  // every position starred
  PeelTrace trace;
};

// Stars a uniformly random unconstrained variable until none remains. The
// input must be valid; each step preserves validity. The endpoint does not
// depend on the order, only the trace does.
CoreResult peel_to_core(const Formula& f, const PartialAssignment& x, uint64_t seed);

// Same process restricted to starring positions in `allowed` (deterministic
// scan order). Returns where the process gets stuck.
PartialAssignment core_restricted(const Formula& f, const PartialAssignment& x,
                                  const std::vector<int>& allowed);

// Iterated pure-literal elimination. success means every clause was
// satisfied by some pure literal; assignment holds those choices with all
// untouched variables starred, and then any completion satisfies f.
struct PureLiteralOutcome {
  bool success;
  PartialAssignment assignment;
};

PureLiteralOutcome pure_literal(const Formula& f);

// Lower bound (alpha*e^2)^(-1/(k-2)) on the fraction of non-star variables
// in any non-trivial core of a random instance; requires k >= 3.
double core_size_floor(double alpha, int k);

void write_trace_csv(std::ostream& out, const PeelTrace& t);
// combined form with a leading run column
void write_traces_csv(std::ostream& out, const std::vector<PeelTrace>& ts);

}  // namespace splat
