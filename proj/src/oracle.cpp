#include "splat/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "splat/peeling.hpp"
#include "splat/rng.hpp"

namespace splat {

namespace {

// Assignments reachable from x by repeatedly starring a then-unconstrained
// variable, x first; overlapping branches are deduplicated so each point is
// produced once.
std::vector<PartialAssignment> reachable_set(const Formula& f,
                                             const PartialAssignment& x,
                                             size_t cap) {
  std::set<std::string> seen{to_string(x)};
  std::vector<PartialAssignment> out{x};
  for (size_t head = 0; head < out.size(); ++head) {
    PartialAssignment y = out[head];  // the vector may grow while we scan
    for (int i : classify(f, y).unconstrained) {
      PartialAssignment next = y;
      next[i] = kStar;
      if (!seen.insert(to_string(next)).second) continue;
      if (out.size() >= cap)
        throw std::invalid_argument("reachable set larger than the guard allows");
      out.push_back(next);
    }
  }
  return out;
}

// visits {0,1,*}^n in ascending base-3 code order, variable 0 least
// significant, star encoded as digit 2
template <typename F>
void for_each_ternary(int n, F&& fn) {
  PartialAssignment x{std::vector<uint8_t>((size_t)n, 0)};
  for (;;) {
    fn((const PartialAssignment&)x);
    int i = 0;
    while (i < n && x[i] == kStar) x[i++] = 0;
    if (i == n) return;
    x[i]++;
  }
}

}  // namespace

EnumerationTable enumerate_valid(const Formula& f, const WeightParams& w) {
  int n = f.num_vars();
  if (n > 14) throw std::invalid_argument("enumerate_valid: n > 14");
  EnumerationTable t;
  for_each_ternary(n, [&](const PartialAssignment& x) {
    if (!assignment_valid(f, x)) return;
    double wt = weight(f, x, w);
    t.assignments.push_back(x);
    t.weights.push_back(wt);
    t.z += wt;
  });
  return t;
}

std::vector<std::array<double, 3>> exact_marginals(const Formula& f,
                                                   const WeightParams& w) {
  int n = f.num_vars();
  if (n > 14) throw std::invalid_argument("exact_marginals: n > 14");
  std::vector<std::array<double, 3>> acc((size_t)n, {0.0, 0.0, 0.0});
  double z = 0.0;
  for_each_ternary(n, [&](const PartialAssignment& x) {
    double wt = weight(f, x, w);
    if (wt == 0.0) return;
    z += wt;
    for (int i = 0; i < n; ++i) acc[i][x[i]] += wt;
  });
  if (!(z > 0.0))
    throw std::runtime_error("exact_marginals: all valid assignments weigh zero");
  for (auto& a : acc)
    for (double& v : a) v /= z;
  return acc;
}

double downset_sum(const Formula& f, const PartialAssignment& x, const WeightParams& w) {
  if (!assignment_valid(f, x))
    throw std::invalid_argument("downset_sum: assignment is not valid");
  double total = 0.0;
  for (const PartialAssignment& y : reachable_set(f, x, 1u << 22))
    total += weight(f, y, w);
  return total;
}

bool sigma_tau_check(const Formula& f, const PartialAssignment& x) {
  if (!assignment_valid(f, x))
    throw std::invalid_argument("sigma_tau_check: assignment is not valid");
  std::vector<int> assigned;
  for (int i = 0; i < x.size(); ++i)
    if (x[i] != kStar) assigned.push_back(i);
  if (assigned.size() > 16)
    throw std::invalid_argument("sigma_tau_check: too many assigned positions");
  size_t count = 1u << assigned.size();

  // position of each variable inside `assigned`
  std::vector<int> slot(x.size(), -1);
  for (size_t b = 0; b < assigned.size(); ++b) slot[assigned[b]] = (int)b;

  // group the starring patterns by where restricted peeling gets stuck
  std::map<std::string, std::vector<uint32_t>> fibers;
  std::vector<int> allowed;
  for (uint32_t mask = 0; mask < count; ++mask) {
    allowed.clear();
    for (int i = 0; i < x.size(); ++i)
      if (x[i] == kStar) allowed.push_back(i);
    for (size_t b = 0; b < assigned.size(); ++b)
      if ((mask >> b) & 1) allowed.push_back(assigned[b]);
    PartialAssignment y = core_restricted(f, x, allowed);
    fibers[to_string(y)].push_back(mask);
  }

  // the image of the grouping must be exactly the star-step reachable set
  std::set<std::string> reach;
  for (const PartialAssignment& y : reachable_set(f, x, 1u << 22))
    reach.insert(to_string(y));
  if (reach.size() != fibers.size()) return false;
  for (const auto& [key, got] : fibers)
    if (reach.count(key) == 0) return false;

  for (auto& [key, got] : fibers) {
    PartialAssignment y = assignment_from_string(key);
    StatusReport r = classify(f, y);
    uint32_t star_mask = 0, con_mask = 0;
    for (int i : r.stars)
      if (slot[i] >= 0) star_mask |= 1u << slot[i];
    for (int i : r.constrained)
      if (slot[i] >= 0) con_mask |= 1u << slot[i];
    // predicted fiber: star everything y starred, plus any constrained subset
    std::vector<uint32_t> want;
    for (uint32_t mask = 0; mask < count; ++mask)
      if ((mask & star_mask) == star_mask && (mask & ~star_mask & ~con_mask) == 0)
        want.push_back(mask);
    std::sort(got.begin(), got.end());
    if (got != want) return false;
  }
  return true;
}

PgenReport verify_pgen(const Formula& f, const WeightParams& w) {
  int n = f.num_vars();
  if (n > 8) throw std::invalid_argument("verify_pgen: n > 8");
  FactorGraph g = neighborhoods(f);
  for (int i = 0; i < n; ++i)
    if (g.plus(i).size() > 12 || g.minus(i).size() > 12)
      throw std::invalid_argument("verify_pgen: variable degree too high");

  PgenReport rep;
  int m = f.num_clauses();
  std::vector<ClauseStatus> st((size_t)m);
  for_each_ternary(n, [&](const PartialAssignment& x) {
    double direct = weight(f, x, w);

    bool all_valid = true;
    for (int a = 0; a < m; ++a) {
      st[a] = clause_status(f, x, a);
      all_valid = all_valid && st[a].valid;
    }
    double factored = 0.0;
    if (all_valid) {
      factored = 1.0;
      for (int i = 0; i < n; ++i) {
        auto plus = g.plus(i), minus = g.minus(i);
        // which of i's clauses currently pin i as their sole support
        uint32_t con_plus = 0, con_minus = 0;
        for (size_t b = 0; b < plus.size(); ++b)
          if (st[plus[b].clause].constrained_var == (int)i) con_plus |= 1u << b;
        for (size_t b = 0; b < minus.size(); ++b)
          if (st[minus[b].clause].constrained_var == (int)i) con_minus |= 1u << b;

        // sum over every admissible parent set: empty, or a nonempty subset
        // of one sign class; each choice is checked literally against the
        // membership indicators
        double sum = 0.0;
        int nonzero = 0;
        if (con_plus == 0 && con_minus == 0) {
          sum += x[i] == kStar ? w.omega_star : w.omega_o;
          nonzero++;
        }
        for (uint32_t s = 1; s < (1u << plus.size()); ++s)
          if (s == con_plus && con_minus == 0) {
            sum += 1.0;
            nonzero++;
          }
        for (uint32_t s = 1; s < (1u << minus.size()); ++s)
          if (s == con_minus && con_plus == 0) {
            sum += 1.0;
            nonzero++;
          }
        if (nonzero != 1) rep.unique_parent_choice = false;
        factored *= sum;
      }
    }
    rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(direct - factored));
  });
  return rep;
}

ExactCoreReport exact_core(const Formula& f, const PartialAssignment& x,
                           int orders, uint64_t seed) {
  if (orders < 1) throw std::invalid_argument("exact_core: orders must be positive");
  ExactCoreReport rep;
  rep.core = peel_to_core(f, x, derive_seed(seed, 0)).core;
  for (int t = 1; t < orders; ++t)
    if (peel_to_core(f, x, derive_seed(seed, (uint64_t)t)).core != rep.core)
      rep.order_independent = false;
  return rep;
}

namespace {

bool dpll(const Formula& f, Rng& rng, std::vector<int8_t>& fixed) {
  if (f.num_clauses() == 0) return true;
  int best = 0;
  for (int a = 1; a < f.num_clauses(); ++a)
    if (f.clause_size(a) < f.clause_size(best)) best = a;
  auto c = f.clause(best);
  const Lit& pick = c[rng.below(c.size())];
  for (int attempt = 0; attempt < 2; ++attempt) {
    int val = attempt == 0 ? 1 - pick.j : pick.j;
    SimplifyOutcome out = condition(f, (int)pick.var, val);
    if (out.contradiction) continue;
    fixed[pick.var] = (int8_t)val;
    for (auto [v, b] : out.units) fixed[v] = (int8_t)b;
    if (dpll(out.f, rng, fixed)) return true;
    fixed[pick.var] = -1;
    for (auto [v, b] : out.units) fixed[v] = -1;
  }
  return false;
}

}  // namespace

std::optional<std::vector<uint8_t>> find_satisfying(const Formula& f, uint64_t seed) {
  Rng rng(seed);
  std::vector<int8_t> fixed(f.num_vars(), -1);
  if (!dpll(f, rng, fixed)) return std::nullopt;
  std::vector<uint8_t> out(f.num_vars());
  for (int i = 0; i < f.num_vars(); ++i)
    out[i] = fixed[i] < 0 ? 0 : (uint8_t)fixed[i];
  return out;
}

}  // namespace splat
