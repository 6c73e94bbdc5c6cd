#pragma once

// Shared helpers for the test suites: formula construction from signed
// DIMACS-style literals and a few small fixture formulas used across
// modules.

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"

inline splat::Formula make_formula(int n, const std::vector<std::vector<int>>& cls) {
  std::vector<std::vector<splat::Lit>> out;
  out.reserve(cls.size());
  for (const auto& c : cls) {
    std::vector<splat::Lit> lc;
    for (int l : c)
      lc.push_back({(uint32_t)(std::abs(l) - 1), (uint8_t)(l > 0 ? 0 : 1)});
    out.push_back(lc);
  }
  return splat::Formula(n, out);
}

inline splat::PartialAssignment pa(const std::string& s) {
  return splat::assignment_from_string(s);
}

// 4 clauses over 5 variables; x2 appears in every clause, positively only in
// the second. Used for neighborhood bookkeeping checks.
inline splat::Formula demo_formula() {
  return make_formula(5, {{1, -2, -3}, {-1, 2, 4}, {-2, 3, 5}, {-2, 4, 5}});
}

// Two chained clauses; every satisfying assignment peels down to all stars.
inline splat::Formula chain_pair() {
  return make_formula(4, {{-1, -2, 3}, {2, -3, -4}});
}

// Five clauses over five variables with a non-trivial core: starring from
// (0,0,0,0,1) gets stuck at (0,0,0,*,*).
inline splat::Formula core_pentad() {
  return make_formula(5, {{-1, 2, 3}, {1, -2, 3}, {2, -3, 1}, {2, -3, 5}, {1, 5, -4}});
}

// Two clauses overlapping in x2,x3; fixture for the weighted-sum identity.
inline splat::Formula overlap_pair() {
  return make_formula(4, {{1, 2, 3}, {-2, -3, 4}});
}
