#include "splat/peeling.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "splat/rng.hpp"

namespace splat {

namespace {

// Incremental peeling state. Starring an unconstrained variable can only
// turn constrained variables into unconstrained ones (a clause with a new
// star never pins anything), so clause counters and per-variable parent
// counts are enough to run the whole process in O(total degree).
struct Peeler {
  const Formula& f;
  FactorGraph g;
  PartialAssignment x;
  std::vector<int> sat_cnt, star_cnt, pc;
  std::vector<int> parent_of;  // unique satisfying variable per clause, -1 if none
  int n_star = 0;

  Peeler(const Formula& formula, const PartialAssignment& start)
      : f(formula), g(neighborhoods(formula)), x(start) {
    int n = f.num_vars(), m = f.num_clauses();
    if (x.size() != n) throw std::invalid_argument("peel: assignment length mismatch");
    sat_cnt.assign(m, 0);
    star_cnt.assign(m, 0);
    parent_of.assign(m, -1);
    pc.assign(n, 0);
    for (int i = 0; i < n; ++i)
      if (x[i] == kStar) n_star++;
    for (int a = 0; a < m; ++a) {
      int sat_var = -1;
      for (const Lit& l : f.clause(a)) {
        uint8_t b = x[(int)l.var];
        if (b == kStar)
          star_cnt[a]++;
        else if (b != l.j) {
          sat_cnt[a]++;
          sat_var = (int)l.var;
        }
      }
      if (sat_cnt[a] == 0 && star_cnt[a] < 2)
        throw std::invalid_argument("peel: assignment invalidates clause " +
                                    std::to_string(a));
      if (sat_cnt[a] == 1 && star_cnt[a] == 0) {
        parent_of[a] = sat_var;
        pc[sat_var]++;
      }
    }
  }

  bool unconstrained(int i) const { return x[i] != kStar && pc[i] == 0; }

  // Stars variable i; reports variables that just lost their last parent.
  template <typename OnFreed>
  void star(int i, OnFreed&& on_freed) {
    uint8_t old = x[i];
    x[i] = kStar;
    n_star++;
    for (const FactorGraph::Occ& o : g.of(i)) {
      int a = (int)o.clause;
      if (old != o.j)
        sat_cnt[a]--;
      star_cnt[a]++;
      int p = parent_of[a];
      if (p >= 0) {
        parent_of[a] = -1;
        if (--pc[p] == 0 && x[p] != kStar) on_freed(p);
      }
    }
  }
};

}  // namespace

CoreResult peel_to_core(const Formula& f, const PartialAssignment& x, uint64_t seed) {
  Peeler p(f, x);
  Rng rng(seed);
  int n = f.num_vars();

  std::vector<int> pool;
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i)
    if (p.unconstrained(i)) {
      pos[i] = (int)pool.size();
      pool.push_back(i);
    }

  CoreResult r;
  r.trace.steps.emplace_back(p.n_star, (int)pool.size());
  while (!pool.empty()) {
    int t = (int)rng.below(pool.size());
    int i = pool[t];
    pool[t] = pool.back();
    pos[pool[t]] = t;
    pool.pop_back();
    pos[i] = -1;
    p.star(i, [&](int freed) {
      pos[freed] = (int)pool.size();
      pool.push_back(freed);
    });
    r.trace.steps.emplace_back(p.n_star, (int)pool.size());
  }
  r.core = p.x;
  r.trivial = p.n_star == n;
  return r;
}

PartialAssignment core_restricted(const Formula& f, const PartialAssignment& x,
                                  const std::vector<int>& allowed) {
  Peeler p(f, x);
  std::vector<uint8_t> ok(f.num_vars(), 0);
  for (int i : allowed) {
    if (i < 0 || i >= f.num_vars())
      throw std::invalid_argument("core_restricted: variable out of range");
    ok[i] = 1;
  }
  std::vector<int> queue;
  for (int i : allowed)
    if (p.unconstrained(i)) queue.push_back(i);
  size_t head = 0;
  while (head < queue.size()) {
    int i = queue[head++];
    p.star(i, [&](int freed) {
      if (ok[freed]) queue.push_back(freed);
    });
  }
  return p.x;
}

PureLiteralOutcome pure_literal(const Formula& f) {
  FactorGraph g = neighborhoods(f);
  int n = f.num_vars(), m = f.num_clauses();
  std::vector<int> pos_cnt(n), neg_cnt(n);
  for (int i = 0; i < n; ++i) {
    pos_cnt[i] = (int)g.plus(i).size();
    neg_cnt[i] = (int)g.minus(i).size();
  }
  std::vector<uint8_t> clause_gone(m, 0);
  PureLiteralOutcome out{false, PartialAssignment::all_star(n)};

  std::vector<int> queue;
  auto maybe_queue = [&](int i) {
    if (out.assignment[i] != kStar) return;
    int tot = pos_cnt[i] + neg_cnt[i];
    if (tot > 0 && (pos_cnt[i] == 0 || neg_cnt[i] == 0)) queue.push_back(i);
  };
  for (int i = 0; i < n; ++i) maybe_queue(i);

  size_t head = 0;
  int gone = 0;
  while (head < queue.size()) {
    int i = queue[head++];
    if (out.assignment[i] != kStar) continue;
    if (pos_cnt[i] + neg_cnt[i] == 0) continue;  // occurrences vanished meanwhile
    int val = pos_cnt[i] > 0 ? 1 : 0;
    out.assignment[i] = (uint8_t)val;
    for (const FactorGraph::Occ& o : g.of(i)) {
      int a = (int)o.clause;
      if (clause_gone[a]) continue;
      // every remaining occurrence of i has the pure polarity, so this
      // clause is satisfied by the choice just made
      clause_gone[a] = 1;
      gone++;
      for (const Lit& l : f.clause(a)) {
        if ((int)l.var == i) continue;
        (l.j == 0 ? pos_cnt[l.var] : neg_cnt[l.var])--;
        maybe_queue((int)l.var);
      }
    }
    pos_cnt[i] = neg_cnt[i] = 0;
  }
  out.success = gone == m;
  return out;
}

double core_size_floor(double alpha, int k) {
  if (k < 3) throw std::invalid_argument("core_size_floor: needs k >= 3");
  if (!(alpha > 0)) throw std::invalid_argument("core_size_floor: alpha must be positive");
  return std::pow(alpha * std::exp(2.0), -1.0 / (k - 2));
}

void write_trace_csv(std::ostream& out, const PeelTrace& t) {
  out << "stars,unconstrained\n";
  for (auto [s, u] : t.steps) out << s << ',' << u << '\n';
}

void write_traces_csv(std::ostream& out, const std::vector<PeelTrace>& ts) {
  out << "run,stars,unconstrained\n";
  for (size_t r = 0; r < ts.size(); ++r)
    for (auto [s, u] : ts[r].steps) out << r << ',' << s << ',' << u << '\n';
}

}  // namespace splat
