#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splat/formula.hpp"

namespace splat {

// Values of a partial assignment cell. kStar marks an unassigned ("joker")
// position.
inline constexpr uint8_t kZero = 0;
inline constexpr uint8_t kOne = 1;
inline constexpr uint8_t kStar = 2;

struct PartialAssignment {
  std::vector<uint8_t> v;

  static PartialAssignment all_star(int n) {
    return {std::vector<uint8_t>((size_t)n, kStar)};
  }
  static PartialAssignment of(const std::vector<uint8_t>& full) { return {full}; }

  int size() const { return (int)v.size(); }
  uint8_t operator[](int i) const { return v[(size_t)i]; }
  uint8_t& operator[](int i) { return v[(size_t)i]; }
  bool operator==(const PartialAssignment&) const = default;
};

// Text form: one character per variable, '0', '1' or '*'.
std::string to_string(const PartialAssignment& x);
PartialAssignment assignment_from_string(const std::string& s);
PartialAssignment read_assignment_file(const std::string& path, int expect_n);
void write_assignment_file(const PartialAssignment& x, const std::string& path);

// Per-clause view of a partial assignment. A clause is invalid when every
// literal is falsified, or when exactly one position is starred and all
// others are falsified (the star would be forced). constrained_var is set
// when one variable satisfies the clause and no other position is free.
struct ClauseStatus {
  bool valid;
  int sat_count;
  int star_count;
  std::optional<int> constrained_var;
};

ClauseStatus clause_status(const Formula& f, const PartialAssignment& x, int a);

bool assignment_valid(const Formula& f, const PartialAssignment& x);

// Fast check for star-free assignments (vector of 0/1 values).
bool satisfies(const Formula& f, const std::vector<uint8_t>& x);

enum class VarStatus : uint8_t { Star, Constrained, Unconstrained };

// Classification of every variable under a valid partial assignment:
// starred, constrained (it alone satisfies some clause whose other
// variables are all falsified) or unconstrained. parents[i] lists the
// clauses certifying the constraint. Throws on invalid assignments.
struct StatusReport {
  std::vector<VarStatus> status;
  std::vector<int> stars;          // S_*
  std::vector<int> constrained;    // S_c
  std::vector<int> unconstrained;  // S_o
  std::vector<std::vector<int>> parents;

  int n_star() const { return (int)stars.size(); }
  int n_constrained() const { return (int)constrained.size(); }
  int n_unconstrained() const { return (int)unconstrained.size(); }
};

StatusReport classify(const Formula& f, const PartialAssignment& x);

// Assignment weights: 1 per constrained variable, omega_o per unconstrained,
// omega_star per star. from_rho gives the one-parameter family
// (1-rho, rho); rho=0 concentrates on full satisfying assignments, rho=1 on
// assignments with no unconstrained variables.
struct WeightParams {
  double omega_o = 0.0;
  double omega_star = 1.0;

  static WeightParams from_rho(double rho) { return {1.0 - rho, rho}; }
};

// Product weight of a valid assignment, 0 for invalid ones.
double weight(const Formula& f, const PartialAssignment& x, const WeightParams& w);
// log of the same, -inf where weight is 0; safe at large n.
double log_weight(const Formula& f, const PartialAssignment& x, const WeightParams& w);

}  // namespace splat
