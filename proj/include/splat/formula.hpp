#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace splat {

// One clause-variable incidence. j is the value of var that FAILS to satisfy
// the clause, so j == 0 encodes the positive literal (satisfied by var = 1)
// and j == 1 the negated one. 1 - j is the satisfying value.
struct Lit {
  uint32_t var;
  uint8_t j;
  bool operator==(const Lit&) const = default;
};

// CNF formula over variables 0..n-1, clauses stored flat in CSR form.
// Clauses may repeat; variables within one clause are distinct and clauses
// are nonempty (both enforced at construction).
class Formula {
 public:
  Formula() = default;
  Formula(int n, const std::vector<std::vector<Lit>>& clauses);

  int num_vars() const { return n_; }
  int num_clauses() const { return (int)offs_.size() - 1; }
  // total clause-variable incidences; also the size of the edge id space
  // shared by all message-passing state (edge e belongs to edge_lit(e).var)
  int num_edges() const { return (int)lits_.size(); }

  std::span<const Lit> clause(int a) const {
    return {lits_.data() + offs_[a], lits_.data() + offs_[a + 1]};
  }
  int clause_size(int a) const { return (int)(offs_[a + 1] - offs_[a]); }
  uint32_t clause_begin(int a) const { return offs_[a]; }
  const Lit& edge_lit(int e) const { return lits_[(size_t)e]; }

  bool operator==(const Formula&) const = default;

 private:
  int n_ = 0;
  std::vector<uint32_t> offs_ = {0};
  std::vector<Lit> lits_;
};

// Variable-side view of the clause-variable incidence graph.
struct FactorGraph {
  struct Occ {
    uint32_t clause;
    uint32_t edge;  // edge id in the formula's flat literal array
    uint8_t j;
  };
  std::vector<uint32_t> offs;        // per-variable slice into occ
  std::vector<Occ> occ;              // j == 0 entries first within each slice
  std::vector<uint32_t> pos_count;   // occurrences with j == 0 per variable
  std::vector<uint32_t> edge_clause; // owning clause of each edge id

  std::span<const Occ> of(int i) const {
    return {occ.data() + offs[i], occ.data() + offs[i + 1]};
  }
  // clauses satisfied by x_i = 1 (variable appears unnegated)
  std::span<const Occ> plus(int i) const {
    return {occ.data() + offs[i], occ.data() + offs[i] + pos_count[i]};
  }
  // clauses satisfied by x_i = 0
  std::span<const Occ> minus(int i) const {
    return {occ.data() + offs[i] + pos_count[i], occ.data() + offs[i + 1]};
  }
  int degree(int i) const { return (int)(offs[i + 1] - offs[i]); }
};

FactorGraph neighborhoods(const Formula& f);

// DIMACS CNF. Parse errors throw std::runtime_error with a message naming
// the offending construct; duplicate variables within a clause and empty
// clauses are rejected.
Formula parse_dimacs(std::istream& in);
Formula parse_dimacs_file(const std::string& path);
void write_dimacs(const Formula& f, std::ostream& out);
void write_dimacs_file(const Formula& f, const std::string& path);

// Random k-SAT: round(alpha*n) clauses drawn with replacement, each over k
// distinct variables with independently uniform signs. Requires n >= k >= 2
// and alpha > 0.
Formula random_ksat(int n, int k, double alpha, uint64_t seed);

// Random formula whose clause-variable incidence graph is a forest: every
// clause takes 2 or 3 variables from distinct components of the graph built
// so far and merges them, so no cycle can close. Signs are uniform. Useful
// wherever message passing must be exact. Requires n >= 2.
Formula random_tree_formula(int n, uint64_t seed);

// Result of fixing one variable: the reduced formula (same variable space,
// the fixed and any unit-implied variables no longer occur), the implied
// assignments in propagation order, and whether an empty clause was derived.
// On contradiction the formula has no clauses and units holds the
// propagations made before the conflict.
struct SimplifyOutcome {
  Formula f;
  std::vector<std::pair<int, int>> units;
  bool contradiction = false;
};

SimplifyOutcome condition(const Formula& f, int var, int value);

}  // namespace splat
