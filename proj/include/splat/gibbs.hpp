#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "splat/assignment.hpp"
#include "splat/formula.hpp"
#include "splat/rng.hpp"
#include "splat/sp_engine.hpp"

namespace splat {

// Unnormalized conditional weight of each value b in {0,1,*} at site i with
// the rest of x held fixed, indexed by kZero, kOne, kStar. An entry is zero
// when x_i = b would invalidate a clause of i; otherwise it multiplies the
// status weights of i and of every variable sharing a clause with i,
// evaluated under x_i = b. Only those statuses can move when x_i does, so
// the remaining factors of the assignment weight cancel between candidates.
// Throws std::invalid_argument on an invalid x.
std::array<double, 3> conditional_weights(const Formula& f,
                                          const PartialAssignment& x, int i,
                                          const WeightParams& w);

// Single-site sampler over valid partial assignments. Each step picks a
// site uniformly at random and redraws its value from the conditional
// above. Per-clause satisfied and starred literal counts are maintained
// incrementally, so a step costs the distance-two neighborhood of the site
// rather than a pass over the formula.
class GibbsChain {
 public:
  // Starts at the all-star assignment, which is valid for every formula.
  // Negative weights are rejected.
  GibbsChain(Formula f, WeightParams w, uint64_t seed);

  // One transition. When every candidate weighs zero the site keeps its
  // value and time still advances; that only happens if the start state
  // itself has weight zero (for instance omega_star = 0 from all-star),
  // since a positive-weight state is never left for a zero-weight one.
  void step();

  // Clears the occupancy counters and credits them from the next step on.
  void start_recording();

  // Occupancy frequency of each value at variable i, measured over the
  // states reached by the recorded steps. Throws std::runtime_error before
  // the first recorded step.
  std::array<double, 3> tau(int i) const;

  const PartialAssignment& state() const { return x_; }
  int64_t recorded() const { return recorded_; }
  const Formula& formula() const { return f_; }

  // The conditional the next step would draw from at site i, computed from
  // the incremental counts. Agrees with conditional_weights exactly: both
  // multiply the same status factors in the same order.
  std::array<double, 3> conditional(int i) const;

  // Recomputes the per-clause counts from the bare assignment and checks
  // them, the assignment's validity, and every site's conditional against
  // the scratch implementation. Throws std::runtime_error on any mismatch.
  void audit() const;

 private:
  double status_weight(int var, uint8_t value) const;

  Formula f_;
  FactorGraph g_;
  WeightParams w_;
  Rng rng_;
  PartialAssignment x_;
  std::vector<int> sat_;   // satisfied literals per clause
  std::vector<int> star_;  // starred literals per clause
  std::vector<std::vector<int>> nbrs_;  // sorted clause neighbors, self excluded

  // conditional() overlays candidate counts for the site's clauses on top
  // of the cached ones; mark_ maps a clause to its overlay slot, -1 when
  // untouched. Scratch only, so conditional() can stay const.
  mutable std::vector<int> mark_;
  mutable std::vector<int> csat_;
  mutable std::vector<int> cstar_;

  // Occupancy is credited lazily: since_[i] remembers the recorded-step
  // count at variable i's last value change, and the gap is added to the
  // old value's counter when the next change lands. tau() folds in the
  // still-open tail, so per variable the counters sum to recorded_ exactly.
  std::vector<std::array<int64_t, 3>> occ_;
  std::vector<int64_t> since_;
  int64_t recorded_ = 0;
  bool recording_ = false;
};

struct GibbsEstimates {
  std::vector<std::array<double, 3>> tau;

  double bias(int i) const {
    return tau[(size_t)i][kZero] - tau[(size_t)i][kOne];
  }
};

// Runs a fresh chain from all-star for `steps` transitions and estimates
// occupancies from the last steps - burn_in of them. Requires
// steps > burn_in >= 0. Deterministic given the seed.
GibbsEstimates gibbs_run(const Formula& f, const WeightParams& w,
                         int64_t steps, int64_t burn_in, uint64_t seed);

// Mean absolute difference between the propagation bias p0 - p1 and the
// sampled bias tau0 - tau1 over the k variables where the propagation is
// most biased (ties to the smaller index). Requires 0 < k <= n and matching
// lengths.
double compare_topk(const std::vector<FieldTriple>& sp_fields,
                    const GibbsEstimates& est, int k);

// "var,tau0,tau1,taustar,bias" rows, one per variable.
void write_tau_csv(std::ostream& out, const GibbsEstimates& est);

struct CompareRow {
  double alpha;
  double sp_rho;
  double gibbs_rho;
  double l1_topk;
};

// "alpha,sp_rho,gibbs_rho,l1_topk" rows.
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);

}  // namespace splat
