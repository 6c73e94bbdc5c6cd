#include "splat/formula.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "splat/rng.hpp"

namespace splat {

Formula::Formula(int n, const std::vector<std::vector<Lit>>& clauses) : n_(n) {
  if (n < 0) throw std::invalid_argument("formula: negative variable count");
  offs_.reserve(clauses.size() + 1);
  size_t total = 0;
  for (const auto& c : clauses) total += c.size();
  lits_.reserve(total);
  std::vector<uint32_t> seen(n, UINT32_MAX);
  for (size_t a = 0; a < clauses.size(); ++a) {
    if (clauses[a].empty())
      throw std::invalid_argument("formula: empty clause " + std::to_string(a));
    for (const Lit& l : clauses[a]) {
      if (l.var >= (uint32_t)n)
        throw std::invalid_argument("formula: variable out of range in clause " +
                                    std::to_string(a));
      if (l.j > 1) throw std::invalid_argument("formula: bad sign bit");
      if (seen[l.var] == a)
        throw std::invalid_argument("formula: repeated variable in clause " +
                                    std::to_string(a));
      seen[l.var] = (uint32_t)a;
      lits_.push_back(l);
    }
    offs_.push_back((uint32_t)lits_.size());
  }
}

FactorGraph neighborhoods(const Formula& f) {
  int n = f.num_vars();
  FactorGraph g;
  g.offs.assign(n + 1, 0);
  g.pos_count.assign(n, 0);
  g.edge_clause.assign(f.num_edges(), 0);
  for (int a = 0; a < f.num_clauses(); ++a)
    for (const Lit& l : f.clause(a)) {
      g.offs[l.var + 1]++;
      if (l.j == 0) g.pos_count[l.var]++;
    }
  for (int i = 0; i < n; ++i) g.offs[i + 1] += g.offs[i];
  g.occ.resize(f.num_edges());
  // two cursors per variable so positive occurrences land first
  std::vector<uint32_t> cur_pos(n), cur_neg(n);
  for (int i = 0; i < n; ++i) {
    cur_pos[i] = g.offs[i];
    cur_neg[i] = g.offs[i] + g.pos_count[i];
  }
  for (int a = 0; a < f.num_clauses(); ++a) {
    uint32_t e = f.clause_begin(a);
    for (const Lit& l : f.clause(a)) {
      g.edge_clause[e] = (uint32_t)a;
      uint32_t& cur = l.j == 0 ? cur_pos[l.var] : cur_neg[l.var];
      g.occ[cur++] = {(uint32_t)a, e, l.j};
      ++e;
    }
  }
  return g;
}

Formula parse_dimacs(std::istream& in) {
  std::string tok;
  int n = -1, m = -1;
  // header, allowing leading comment lines
  while (in >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (tok == "p") break;
    throw std::runtime_error("dimacs: expected 'p cnf' header, got '" + tok + "'");
  }
  if (tok != "p") throw std::runtime_error("dimacs: missing header");
  if (!(in >> tok) || tok != "cnf")
    throw std::runtime_error("dimacs: header format is not 'p cnf'");
  if (!(in >> n >> m) || n < 0 || m < 0)
    throw std::runtime_error("dimacs: bad variable or clause count");

  std::vector<std::vector<Lit>> clauses;
  clauses.reserve(std::min(m, 1 << 20));
  std::vector<Lit> cur;
  while (in >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    long lit;
    size_t pos = 0;
    try {
      lit = std::stol(tok, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("dimacs: bad literal '" + tok + "'");
    }
    if (pos != tok.size())
      throw std::runtime_error("dimacs: bad literal '" + tok + "'");
    if (lit == 0) {
      if (cur.empty())
        throw std::runtime_error("dimacs: empty clause " +
                                 std::to_string(clauses.size()));
      clauses.push_back(cur);
      cur.clear();
      continue;
    }
    long v = std::labs(lit);
    if (v > n)
      throw std::runtime_error("dimacs: literal " + tok + " out of range");
    cur.push_back({(uint32_t)(v - 1), (uint8_t)(lit > 0 ? 0 : 1)});
  }
  if (!cur.empty()) throw std::runtime_error("dimacs: unterminated clause");
  if ((int)clauses.size() != m)
    throw std::runtime_error("dimacs: header promises " + std::to_string(m) +
                             " clauses, found " + std::to_string(clauses.size()));
  return Formula(n, clauses);  // rechecks ranges, rejects duplicate vars
}

Formula parse_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_dimacs(in);
}

void write_dimacs(const Formula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  for (int a = 0; a < f.num_clauses(); ++a) {
    for (const Lit& l : f.clause(a)) {
      long v = (long)l.var + 1;
      out << (l.j ? -v : v) << ' ';
    }
    out << "0\n";
  }
}

void write_dimacs_file(const Formula& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_dimacs(f, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Formula random_ksat(int n, int k, double alpha, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("random_ksat: k must be at least 2");
  if (n < k) throw std::invalid_argument("random_ksat: need n >= k");
  if (!(alpha > 0)) throw std::invalid_argument("random_ksat: alpha must be positive");
  long m = std::lround(alpha * n);
  Rng rng(seed);
  std::vector<std::vector<Lit>> clauses((size_t)m);
  std::vector<uint32_t> picked(k);
  for (long a = 0; a < m; ++a) {
    for (int t = 0; t < k; ++t) {
      uint32_t v;
      bool dup;
      do {
        v = (uint32_t)rng.below((uint64_t)n);
        dup = false;
        for (int s = 0; s < t; ++s)
          if (picked[s] == v) dup = true;
      } while (dup);
      picked[t] = v;
      clauses[a].push_back({v, (uint8_t)(rng.coin() ? 1 : 0)});
    }
  }
  return Formula(n, clauses);
}

namespace {

// Path-halving find for the small union-find used by the tree generator.
int uf_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

Formula random_tree_formula(int n, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_tree_formula: need n >= 2");
  Rng rng(seed);
  std::vector<int> parent((size_t)n);
  std::iota(parent.begin(), parent.end(), 0);
  int components = n;
  // Stop somewhere between 1 component (a spanning forest of clauses) and
  // n - 1 so isolated variables and multi-tree forests both show up.
  int target = 1 + (int)rng.below((uint64_t)(n - 1));
  std::vector<std::vector<Lit>> clauses;
  std::vector<uint32_t> picked;
  while (components > target) {
    int width = (components >= 3 && rng.coin()) ? 3 : 2;
    picked.clear();
    for (int tries = 0; (int)picked.size() < width && tries < 200 * n; ++tries) {
      uint32_t v = (uint32_t)rng.below((uint64_t)n);
      int root = uf_root(parent, (int)v);
      bool fresh = true;
      for (uint32_t u : picked)
        if (uf_root(parent, (int)u) == root) fresh = false;
      if (fresh) picked.push_back(v);
    }
    if ((int)picked.size() < 2) break;
    std::vector<Lit> clause;
    for (uint32_t v : picked) clause.push_back({v, (uint8_t)(rng.coin() ? 1 : 0)});
    clauses.push_back(std::move(clause));
    int base = uf_root(parent, (int)picked[0]);
    for (size_t t = 1; t < picked.size(); ++t) {
      parent[uf_root(parent, (int)picked[t])] = base;
      --components;
    }
  }
  return Formula(n, clauses);
}

SimplifyOutcome condition(const Formula& f, int var, int value) {
  if (var < 0 || var >= f.num_vars())
    throw std::invalid_argument("condition: variable out of range");
  if (value != 0 && value != 1)
    throw std::invalid_argument("condition: value must be 0 or 1");

  FactorGraph g = neighborhoods(f);
  int m = f.num_clauses();
  std::vector<int8_t> assigned(f.num_vars(), -1);
  std::vector<uint8_t> satisfied(m, 0);
  std::vector<int> remaining(m);
  for (int a = 0; a < m; ++a) remaining[a] = f.clause_size(a);

  SimplifyOutcome out;
  std::vector<std::pair<int, int>> queue{{var, value}};
  assigned[var] = (int8_t)value;
  size_t head = 0;
  while (head < queue.size()) {
    auto [v, val] = queue[head++];
    for (const FactorGraph::Occ& o : g.of(v)) {
      int a = (int)o.clause;
      if (satisfied[a]) continue;
      if (val != o.j) {
        satisfied[a] = 1;
        continue;
      }
      if (--remaining[a] == 0) {
        out.contradiction = true;
        out.units.assign(queue.begin() + 1, queue.end());
        out.f = Formula(f.num_vars(), {});
        return out;
      }
      if (remaining[a] == 1) {
        // the one literal left must be unassigned: assigned variables have
        // already walked their occurrence lists
        for (const Lit& l : f.clause(a)) {
          if (assigned[l.var] == -1) {
            int forced = 1 - l.j;
            assigned[l.var] = (int8_t)forced;
            queue.emplace_back((int)l.var, forced);
            break;
          }
        }
      }
    }
  }
  out.units.assign(queue.begin() + 1, queue.end());

  std::vector<std::vector<Lit>> kept;
  kept.reserve(m);
  std::vector<Lit> c;
  for (int a = 0; a < m; ++a) {
    if (satisfied[a]) continue;
    c.clear();
    for (const Lit& l : f.clause(a))
      if (assigned[l.var] == -1) c.push_back(l);
    kept.push_back(c);
  }
  out.f = Formula(f.num_vars(), kept);
  return out;
}

}  // namespace splat
