#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"
#include "splat/sp_engine.hpp"

namespace splat {

// One message in component form: relative mass on "the sender satisfies the
// clause", "fails it", and "stars out". Used in both directions: for
// clause->variable messages the components describe the receiving variable,
// for variable->clause replies (the R triples) the sending one.
template <class Real>
struct MsgTripleT {
  Real s = 0.0;
  Real u = 0.0;
  Real star = 0.0;

  bool operator==(const MsgTripleT&) const = default;
};

using MsgTriple = MsgTripleT<double>;

// Unnormalized clause->variable triple from the R triples of the clause's
// other variables (empty input means a unit clause and yields (1,0,0)).
// Evaluated in O(count): with A = prod (u_j + star_j) and B = prod u_j, the
// triple is (B, A - B + corr, A - B) where corr collects the one-variable
// swaps sum_k (s_k - star_k) prod_{j != k} u_j.
MsgTriple combine_clause(const MsgTriple* r, int count);

// Variable->clause R triple from six neighbor products: over the clauses
// that want the variable the same way the receiver does, as/au/ax =
// prod (s+star), prod u, prod star, and ds/du/dx over the clauses that want
// the opposite value. Empty products are 1.
MsgTriple combine_variable(double as, double au, double ax, double ds,
                           double du, double dx, const WeightParams& w);

// Belief propagation over clause->variable triples, weighted by the
// unconstrained/star weights. Same sequential schedule and seed discipline
// as the eta engine, which is what makes the two comparable edge for edge,
// and templated on the scalar for the same reason that one is.
template <class Real>
class BpEngineT {
 public:
  // Copies the formula; the seed fixes the sweep order and the starts below.
  // Weights outside [0,1] are rejected.
  BpEngineT(Formula f, WeightParams w, uint64_t seed);

  // Fresh random messages: three uniform draws per edge, normalized.
  void init_random();

  // Start with u and star components equal on every edge (they then stay
  // equal whenever omega_o + omega_star == 1) and the s component placed so
  // that s/(s+u) reproduces the draw an eta engine with the same seed starts
  // from. One draw per edge, same stream as SpEngineT::init_random.
  void init_matched();

  // One pass over all edges in the fixed order; each update rebuilds the R
  // triples of the clause's other variables from the current messages.
  // Messages are normalized to sum 1 as they are written. Returns the
  // largest componentwise change. Throws std::runtime_error when an update
  // produces an all-zero triple.
  Real sweep();

  // Sweeps until the change drops strictly below tol or max_sweeps passes
  // run; returns the number of sweeps taken. Requires tol > 0.
  int run(double tol, int max_sweeps);
  bool converged() const { return converged_; }

  const Formula& formula() const { return f_; }
  const FactorGraph& graph() const { return g_; }
  const WeightParams& weights() const { return w_; }

  const std::vector<MsgTripleT<Real>>& messages() const { return msg_; }

  // The R triple the variable of `edge` currently sends to its clause.
  MsgTripleT<Real> variable_message(int edge) const;

  // Per-variable beliefs (mass on 0, 1, star) from the current messages.
  // Throws std::runtime_error if some variable's normalizer vanishes.
  std::vector<FieldTriple> fields() const;

 private:
  MsgTripleT<Real> refreshed_message(int e) const;

  Formula f_;
  FactorGraph g_;
  WeightParams w_;
  uint64_t seed_;
  std::vector<uint32_t> order_;
  std::vector<MsgTripleT<Real>> msg_;
  // s + star per message, maintained on every write. The R products consume
  // that sum once per neighbor visit, so computing it at write time takes
  // one add per sweep instead of one per visit; the value is bit-identical
  // either way.
  std::vector<Real> sstar_;
  mutable std::vector<MsgTripleT<Real>> scratch_;  // R triples during update
  bool converged_ = false;
};

using BpEngine = BpEngineT<double>;

extern template class BpEngineT<double>;
extern template class BpEngineT<Wide>;

struct BpOutcome {
  bool converged = false;
  int sweeps = 0;
  std::vector<FieldTriple> fields;
};

// Random start, run to tolerance, read the fields. Non-convergence is an
// outcome, not an error.
BpOutcome bp_run(const Formula& f, const WeightParams& w, double tol,
                 int max_sweeps, uint64_t seed);

// Outcome of running the eta recursion at rho and triplet propagation at
// weights (1-rho, rho) side by side from matched starts, one sweep each in
// the shared edge order, comparing after every sweep. Both engines run at
// quad precision: the trajectories are chaotic in non-convergent regimes,
// and the comparison is meaningful only while accumulated rounding noise
// stays far below the reported gap.
struct ReductionReport {
  // max over sweeps and edges of |eta - s/(s+u)|, the gap between the two
  // engines' views of the same message
  double max_discrepancy = 0.0;
  // max over sweeps and edges of |u - star| on the triplet side; stays 0
  // when the weights are complementary
  double star_gap = 0.0;
  // worst cap excess seen by the eta engine during the run (see
  // SpEngineT::worst_bound_gap)
  double sp_bound_gap = -1.0;
};

ReductionReport reduction_check(const Formula& f, double rho, int sweeps,
                                uint64_t seed);

// "var,f0,f1,fstar,bias" rows, one per variable.
void write_bp_fields_csv(std::ostream& out,
                         const std::vector<FieldTriple>& fields);

}  // namespace splat
