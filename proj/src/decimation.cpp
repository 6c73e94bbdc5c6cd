#include "splat/decimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "splat/rng.hpp"

namespace splat {

namespace {

constexpr uint64_t kRoundStream = 0x53505f524f554e44ull;    // "SP_ROUND"
constexpr uint64_t kWalksatStream = 0x57414c4b53415421ull;  // "WALKSAT!"

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat:
      return "sat";
    case SolveStatus::Contradiction:
      return "contradiction";
    case SolveStatus::SpNonconvergence:
      return "sp-nonconvergence";
    case SolveStatus::WalksatExhausted:
      return "walksat-exhausted";
  }
  throw std::invalid_argument("to_string: unknown solve status");
}

std::vector<std::pair<int, int>> decimate_round(
    const Formula& f, const std::vector<FieldTriple>& fields, double beta) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("decimate_round: fraction must lie in (0,1]");
  if ((int)fields.size() != f.num_vars())
    throw std::invalid_argument("decimate_round: one field triple per variable");

  std::vector<char> occurs((size_t)f.num_vars(), 0);
  for (int a = 0; a < f.num_clauses(); ++a)
    for (const Lit& l : f.clause(a)) occurs[l.var] = 1;
  std::vector<int> pool;
  for (int i = 0; i < f.num_vars(); ++i)
    if (occurs[(size_t)i]) pool.push_back(i);
  if (pool.empty()) return {};

  int want = (int)std::ceil(beta * (double)pool.size());
  want = std::clamp(want, 1, (int)pool.size());
  std::sort(pool.begin(), pool.end(), [&](int a, int b) {
    double ba = fields[(size_t)a].bias();
    double bb = fields[(size_t)b].bias();
    return ba != bb ? ba > bb : a < b;
  });

  std::vector<std::pair<int, int>> picks;
  picks.reserve((size_t)want);
  for (int t = 0; t < want; ++t) {
    int i = pool[(size_t)t];
    picks.emplace_back(i, fields[(size_t)i].p1 > fields[(size_t)i].p0 ? 1 : 0);
  }
  return picks;
}

WalksatOutcome walksat(const Formula& f, uint64_t seed, int64_t max_flips,
                       double noise) {
  if (!(noise >= 0.0) || noise > 1.0)
    throw std::invalid_argument("walksat: noise must lie in [0,1]");
  if (max_flips < 0)
    throw std::invalid_argument("walksat: negative flip budget");

  const int n = f.num_vars();
  const int m = f.num_clauses();
  FactorGraph g = neighborhoods(f);
  Rng rng(seed);

  WalksatOutcome out;
  out.assignment.resize((size_t)n);
  for (auto& v : out.assignment) v = rng.coin() ? 1 : 0;

  // Clause satisfier counts plus a swap-with-last index over the unsatisfied
  // set, so picking a clause and maintaining the set are both constant time.
  std::vector<int> satcnt((size_t)m, 0);
  std::vector<int> unsat;
  std::vector<int> pos((size_t)m, -1);
  auto add_unsat = [&](int a) {
    pos[(size_t)a] = (int)unsat.size();
    unsat.push_back(a);
  };
  auto drop_unsat = [&](int a) {
    int p = pos[(size_t)a];
    int last = unsat.back();
    unsat[(size_t)p] = last;
    pos[(size_t)last] = p;
    unsat.pop_back();
    pos[(size_t)a] = -1;
  };
  for (int a = 0; a < m; ++a) {
    for (const Lit& l : f.clause(a)) satcnt[(size_t)a] += out.assignment[l.var] != l.j;
    if (satcnt[(size_t)a] == 0) add_unsat(a);
  }

  while (!unsat.empty() && out.flips < max_flips) {
    int a = unsat[(size_t)rng.below(unsat.size())];
    std::span<const Lit> cl = f.clause(a);
    uint32_t v;
    if (rng.unit() < noise) {
      v = cl[(size_t)rng.below(cl.size())].var;
    } else {
      int best = std::numeric_limits<int>::max();
      int ties = 0;
      v = cl[0].var;
      for (const Lit& l : cl) {
        int breaks = 0;
        uint8_t cur = out.assignment[l.var];
        for (const FactorGraph::Occ& oc : g.of((int)l.var))
          breaks += oc.j != cur && satcnt[(size_t)oc.clause] == 1;
        if (breaks < best) {
          best = breaks;
          v = l.var;
          ties = 1;
        } else if (breaks == best && rng.below((uint64_t)++ties) == 0) {
          v = l.var;
        }
      }
    }
    uint8_t old = out.assignment[v];
    out.assignment[v] = old ^ 1u;
    for (const FactorGraph::Occ& oc : g.of((int)v)) {
      if (oc.j != old) {
        if (--satcnt[(size_t)oc.clause] == 0) add_unsat(oc.clause);
      } else {
        if (++satcnt[(size_t)oc.clause] == 1) drop_unsat(oc.clause);
      }
    }
    ++out.flips;
  }
  out.sat = unsat.empty();
  return out;
}

SolveReport solve(const Formula& f, const SolverConfig& cfg) {
  if (!(cfg.rho >= 0.0) || cfg.rho > 1.0)
    throw std::invalid_argument("solve: rho must lie in [0,1]");
  if (!(cfg.beta > 0.0) || cfg.beta > 1.0)
    throw std::invalid_argument("solve: beta must lie in (0,1]");
  if (!(cfg.bias_tol >= 0.0))
    throw std::invalid_argument("solve: negative bias tolerance");
  if (!(cfg.sp_tol > 0.0))
    throw std::invalid_argument("solve: propagation tolerance must be positive");
  if (cfg.sp_max_sweeps < 1)
    throw std::invalid_argument("solve: need at least one sweep");
  if (cfg.restarts < 0)
    throw std::invalid_argument("solve: negative restart budget");
  if (!(cfg.noise >= 0.0) || cfg.noise > 1.0)
    throw std::invalid_argument("solve: noise must lie in [0,1]");
  if (cfg.walksat_max_flips < 0)
    throw std::invalid_argument("solve: negative flip budget");

  const int n = f.num_vars();
  Formula g = f;
  std::vector<int8_t> fixed((size_t)n, -1);
  SolveReport rep;

  for (int round = 0; g.num_clauses() > 0; ++round) {
    SpOutcome sp;
    bool converged = false;
    for (int attempt = 0; attempt <= cfg.restarts && !converged; ++attempt) {
      uint64_t tag = kRoundStream ^ ((uint64_t)round << 16) ^ (uint64_t)attempt;
      try {
        sp = sp_run(g, cfg.rho, cfg.sp_tol, cfg.sp_max_sweeps,
                    derive_seed(cfg.seed, tag));
        converged = sp.converged;
      } catch (const std::runtime_error&) {
        // a degenerate normalizer burns a restart, same as non-convergence
      }
    }
    if (!converged) {
      rep.status = SolveStatus::SpNonconvergence;
      return rep;
    }

    double max_bias = 0.0;
    for (const FieldTriple& t : sp.fields) max_bias = std::max(max_bias, t.bias());
    rep.rounds.push_back({0, max_bias, sp.sweeps});
    if (max_bias < cfg.bias_tol) break;

    int placed = 0;
    for (auto [var, val] : decimate_round(g, sp.fields, cfg.beta)) {
      if (fixed[(size_t)var] != -1) continue;  // already unit-propagated away
      SimplifyOutcome sim = condition(g, var, val);
      fixed[(size_t)var] = (int8_t)val;
      ++placed;
      for (auto [uv, uval] : sim.units) {
        if (fixed[(size_t)uv] == -1) {
          fixed[(size_t)uv] = (int8_t)uval;
          ++placed;
        }
      }
      g = std::move(sim.f);
      if (sim.contradiction) {
        rep.rounds.back().fixed_count = placed;
        rep.status = SolveStatus::Contradiction;
        return rep;
      }
    }
    rep.rounds.back().fixed_count = placed;
  }

  int remaining = 0;
  for (int8_t v : fixed) remaining += v == -1;
  int64_t budget = (int64_t)std::ceil((double)cfg.walksat_max_flips *
                                      (double)remaining / (double)std::max(n, 1));
  WalksatOutcome wo =
      walksat(g, derive_seed(cfg.seed, kWalksatStream), budget, cfg.noise);
  rep.walksat_flips = wo.flips;
  if (!wo.sat) {
    rep.status = SolveStatus::WalksatExhausted;
    return rep;
  }

  std::vector<uint8_t> full((size_t)n);
  for (int i = 0; i < n; ++i) {
    full[(size_t)i] = fixed[(size_t)i] != -1 ? (uint8_t)fixed[(size_t)i]
                                             : wo.assignment[(size_t)i];
  }
  if (!satisfies(f, full))
    throw std::runtime_error("solve: accepted assignment fails the input formula");
  rep.status = SolveStatus::Sat;
  rep.assignment = PartialAssignment::of(full);
  return rep;
}

void write_solve_log(std::ostream& out, const SolveReport& rep) {
  for (size_t r = 0; r < rep.rounds.size(); ++r) {
    const RoundLog& lg = rep.rounds[r];
    out << "round " << r + 1 << ": fixed=" << lg.fixed_count
        << " max_bias=" << lg.max_bias << " sweeps=" << lg.sweeps << "\n";
  }
  out << "walksat: flips=" << rep.walksat_flips << "\n";
  out << "status: " << to_string(rep.status) << "\n";
}

}  // namespace splat
