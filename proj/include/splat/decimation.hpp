#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"
#include "splat/sp_engine.hpp"

namespace splat {

// Knobs of the marginalization-decimation pipeline. The propagation runs at
// rho; each round fixes the beta fraction (at least one) of the variables
// the formula still touches, most biased first; once every bias drops under
// bias_tol the leftover formula goes to walksat with a flip budget scaled
// by the fraction of variables still unset.
struct SolverConfig {
  double rho = 0.95;
  double beta = 0.01;
  double bias_tol = 0.05;
  double sp_tol = 1e-3;
  int sp_max_sweeps = 1000;
  int restarts = 3;  // extra propagation attempts per round before giving up
  double noise = 0.5;
  int64_t walksat_max_flips = 100000;  // base budget for a full-size remainder
  uint64_t seed = 0;
};

enum class SolveStatus { Sat, Contradiction, SpNonconvergence, WalksatExhausted };

std::string to_string(SolveStatus s);

struct RoundLog {
  int fixed_count;  // variables set this round, unit propagations included
  double max_bias;
  int sweeps;
  bool operator==(const RoundLog&) const = default;
};

struct SolveReport {
  SolveStatus status = SolveStatus::WalksatExhausted;
  PartialAssignment assignment;  // full 0/1 assignment when status is Sat
  std::vector<RoundLog> rounds;
  int64_t walksat_flips = 0;
  bool operator==(const SolveReport&) const = default;
};

// The variables to fix this round with their values: max(1, ceil(beta *
// occurring)) picks among the variables the formula still touches, largest
// |p0 - p1| first, ties to the lower index; each value is the heavier side,
// ties to 0. Empty when no variable occurs. Requires beta in (0,1] and one
// field triple per variable.
std::vector<std::pair<int, int>> decimate_round(
    const Formula& f, const std::vector<FieldTriple>& fields, double beta);

struct WalksatOutcome {
  bool sat = false;
  std::vector<uint8_t> assignment;
  int64_t flips = 0;
};

// Random start; each flip picks a uniformly random unsatisfied clause, then
// with probability noise a uniformly random variable of it, otherwise one
// that breaks the fewest currently-satisfied clauses (ties uniformly at
// random). Stops on satisfaction or after max_flips.
WalksatOutcome walksat(const Formula& f, uint64_t seed, int64_t max_flips,
                       double noise);

// Runs the full pipeline and re-verifies any accepted assignment against
// the input formula. Every failure mode is a status, never an exception;
// only out-of-range config values throw.
SolveReport solve(const Formula& f, const SolverConfig& cfg);

// Line per round, then the walksat tally and the final status.
void write_solve_log(std::ostream& out, const SolveReport& rep);

}  // namespace splat
