#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"

namespace splat {

// Wider scalar for reruns of the message recursions where double rounding
// noise would drown the quantity under test: two chaotic trajectories that
// agree to ~1e-16 per sweep can drift arbitrarily far apart over a hundred
// sweeps, so the engines below are templated on the scalar and the lockstep
// comparison instantiates them at quad precision. Everything user-facing
// runs the double instantiation.
using Wide = __float128;

// Normalized belief triple of one variable: mass on 0, on 1, and on the
// joker value. bias() is the quantity decimation ranks variables by.
struct FieldTriple {
  double p0 = 0.0;
  double p1 = 0.0;
  double pstar = 0.0;

  double bias() const { return p0 > p1 ? p0 - p1 : p1 - p0; }
};

// Relative mass a variable sends to one of its clauses: on unsatisfying it,
// on satisfying it, and on starring out.
struct PiTriple {
  double u = 0.0;
  double s = 0.0;
  double star = 0.0;
};

// Child-stream tags shared by both message-passing engines. Using the same
// tags (and the same draws per edge) is what lets two engines built from one
// seed run in lockstep.
inline constexpr uint64_t kMsgInitStream = 0x6d5347494e4954ull;    // message init
inline constexpr uint64_t kSweepOrderStream = 0x53574f52444552ull; // sweep order

// The directed clause->variable edges in a seed-determined random order.
// Every sweep of every engine visits edges in this fixed order.
std::vector<uint32_t> sweep_order(int num_edges, uint64_t seed);

// The eta message recursion with interpolation knob rho in [0,1]: each edge
// a->i carries the probability that clause a needs variable i, and rho sets
// how strongly a variable that no clause needs is pulled toward the joker
// state. Updates are sequential: each edge update rebuilds the pi triples of
// the clause's other variables from the current messages, so new values are
// visible immediately within a sweep. One engine owns one message state;
// a run is single threaded and deterministic given the seed, and separate
// instances may run concurrently.
template <class Real>
class SpEngineT {
 public:
  // Copies the formula; the seed fixes both the sweep order and the random
  // starts below. rho outside [0,1] is rejected.
  SpEngineT(Formula f, double rho, uint64_t seed);

  // Fresh messages, one uniform draw on (0,1) per directed edge. The draws
  // are doubles regardless of Real, so every instantiation consumes the same
  // stream and the starts agree to within one double rounding.
  void init_random();

  // Messages uniform on (0, eps); the near-zero start used by the
  // metastability probe. Requires eps in (0,1).
  void init_scaled_random(double eps);

  // Deterministic start encoding a valid partial assignment: an edge a->i
  // starts at 1 exactly when every other variable of a is assigned the value
  // that fails a. Variables assigned 0/1 send (pi_u, pi_s, pi_star) =
  // (1,0,0) or (0,1,0) by value, starred ones send (0,0,1). Throws
  // std::invalid_argument when x is invalid.
  void init_from_assignment(const PartialAssignment& x);

  // Blend gamma in [0,1) of the previous message into each update; off by
  // default, and left off by every experiment in this repository.
  void set_damping(double gamma);

  // One pass over all edges in the fixed order. Returns the largest change
  // of any message. Throws std::runtime_error when some update divides by an
  // all-zero pi triple (contradictory forcing, the recursion's failure
  // state).
  Real sweep();

  // Sweeps until the largest change drops strictly below tol or max_sweeps
  // passes run; returns the number of sweeps taken. Requires tol > 0.
  int run(double tol, int max_sweeps);
  bool converged() const { return converged_; }

  const Formula& formula() const { return f_; }
  const FactorGraph& graph() const { return g_; }
  double rho() const { return rho_; }

  // The current messages, materialized from the stored complements.
  std::vector<Real> eta() const;
  Real max_eta() const;

  // The pi triple the variable of `edge` currently sends to its clause,
  // rebuilt from the live messages.
  PiTriple pi(int edge) const;

  // Per-variable beliefs from the current messages. Throws
  // std::runtime_error if some variable's normalizer vanishes.
  std::vector<FieldTriple> fields() const;

  // Largest signed excess of any raw update over its per-edge cap
  //   prod_j min(1, (1-rho) + rho * sum of opposing messages into j),
  // taken over every update so far; a healthy recursion keeps this <= 0.
  // Reset to -1 (the smallest possible excess) by every init.
  Real worst_bound_gap() const { return worst_gap_; }

 private:
  // The update equation for one edge, read from the current messages. Also
  // reports the cap the result is checked against. Returns the complement,
  // matching the storage below.
  Real refreshed_mu(int e, Real* bound_out) const;

  Formula f_;
  FactorGraph g_;
  double rho_;
  double damping_ = 0.0;
  uint64_t seed_;
  std::vector<uint32_t> order_;
  // Messages are stored as complements mu = 1 - eta. Saturated runs push
  // eta within a few ulps of 1, where the float grid is absolute and an
  // almost-certain warning keeps only ~2^-53 of its information; the
  // complement lives near 0, where the grid is relative, so the update can
  // be computed entirely in mu without ever rounding against that wall.
  std::vector<Real> mu_;
  Real worst_gap_ = -1.0;
  bool converged_ = false;
};

using SpEngine = SpEngineT<double>;

extern template class SpEngineT<double>;
extern template class SpEngineT<Wide>;

struct SpOutcome {
  bool converged = false;
  int sweeps = 0;
  std::vector<FieldTriple> fields;
};

// Random start, run to tolerance, read the fields. Non-convergence is an
// outcome, not an error.
SpOutcome sp_run(const Formula& f, double rho, double tol, int max_sweeps,
                 uint64_t seed);

struct CoreFixedPoint {
  int sweeps = 0;
  std::vector<FieldTriple> fields;  // exact 0/1 indicator triples
  PartialAssignment core;           // the assignment those indicators spell
};

// Runs the rho = 1 recursion from the deterministic start for x until the
// messages stop changing exactly. Every quantity stays in {0,1}, so the run
// freezes after finitely many sweeps and the fields spell out the core that
// peeling x reaches. Throws std::invalid_argument on invalid x and
// std::runtime_error if the state fails to freeze or to form indicators
// (neither happens for a valid start).
CoreFixedPoint sp_fixed_point_from_assignment(const Formula& f,
                                              const PartialAssignment& x);

// Largest message after each of t_max sweeps, starting from messages uniform
// on (0, eps). Requires rho in (0,1] and eps in (0,1).
std::vector<double> metastability_probe(const Formula& f, double rho,
                                        double eps, int t_max, uint64_t seed);

// "var,mu0,mu1,mustar,bias" rows, one per variable.
void write_sp_fields_csv(std::ostream& out,
                         const std::vector<FieldTriple>& fields);

}  // namespace splat
