#include "splat/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace splat {

namespace {

// Weight of one variable's status: constrained variables always count 1.
double status_factor(VarStatus st, const WeightParams& w) {
  switch (st) {
    case VarStatus::Star: return w.omega_star;
    case VarStatus::Constrained: return 1.0;
    default: return w.omega_o;
  }
}

// Status of var holding `value`, read off per-clause counts supplied by
// `counts`, which maps a clause index to its (sat, star) pair. A non-star
// variable is constrained when some clause is satisfied by it alone with no
// stars left.
template <class Counts>
VarStatus status_from_counts(const FactorGraph& g, int var, uint8_t value,
                             Counts&& counts) {
  if (value == kStar) return VarStatus::Star;
  for (const FactorGraph::Occ& oc : g.of(var)) {
    if (value == oc.j) continue;  // this literal is falsified, not ours to pin
    auto [sat, star] = counts((int)oc.clause);
    if (sat == 1 && star == 0) return VarStatus::Constrained;
  }
  return VarStatus::Unconstrained;
}

}  // namespace

std::array<double, 3> conditional_weights(const Formula& f,
                                          const PartialAssignment& x, int i,
                                          const WeightParams& w) {
  if (!assignment_valid(f, x))
    throw std::invalid_argument("gibbs: conditional of an invalid assignment");

  // Clauses of i and the sorted neighbor set, gathered by one formula scan.
  std::vector<int> home;
  std::vector<int> nbrs;
  for (int a = 0; a < f.num_clauses(); ++a) {
    std::span<const Lit> c = f.clause(a);
    bool mine = false;
    for (const Lit& l : c) mine |= (int)l.var == i;
    if (!mine) continue;
    home.push_back(a);
    for (const Lit& l : c)
      if ((int)l.var != i) nbrs.push_back((int)l.var);
  }
  std::sort(nbrs.begin(), nbrs.end());
  nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());

  FactorGraph g = neighborhoods(f);
  PartialAssignment y = x;
  std::array<double, 3> out{};
  for (uint8_t b : {kZero, kOne, kStar}) {
    y[i] = b;
    bool ok = true;
    for (int a : home) ok = ok && clause_status(f, y, a).valid;
    if (!ok) continue;

    auto counts = [&](int a) {
      ClauseStatus cs = clause_status(f, y, a);
      return std::pair<int, int>(cs.sat_count, cs.star_count);
    };
    // Factor order matters only for bitwise agreement with the chain's
    // incremental path: site first, then neighbors ascending.
    double prod = status_factor(status_from_counts(g, i, b, counts), w);
    for (int j : nbrs)
      prod *= status_factor(status_from_counts(g, j, y[j], counts), w);
    out[b] = prod;
  }
  return out;
}

GibbsChain::GibbsChain(Formula f, WeightParams w, uint64_t seed)
    : f_(std::move(f)),
      g_(neighborhoods(f_)),
      w_(w),
      rng_(seed),
      x_(PartialAssignment::all_star(f_.num_vars())),
      sat_((size_t)f_.num_clauses(), 0),
      star_((size_t)f_.num_clauses(), 0),
      nbrs_((size_t)f_.num_vars()),
      mark_((size_t)f_.num_clauses(), -1),
      occ_((size_t)f_.num_vars(), {0, 0, 0}),
      since_((size_t)f_.num_vars(), 0) {
  if (w.omega_o < 0.0 || w.omega_star < 0.0)
    throw std::invalid_argument("gibbs: negative status weight");
  for (int a = 0; a < f_.num_clauses(); ++a)
    star_[(size_t)a] = (int)f_.clause(a).size();
  for (int i = 0; i < f_.num_vars(); ++i) {
    std::vector<int>& nb = nbrs_[(size_t)i];
    for (const FactorGraph::Occ& oc : g_.of(i))
      for (const Lit& l : f_.clause((int)oc.clause))
        if ((int)l.var != i) nb.push_back((int)l.var);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

std::array<double, 3> GibbsChain::conditional(int i) const {
  const std::span<const FactorGraph::Occ> occs = g_.of(i);
  csat_.resize(occs.size());
  cstar_.resize(occs.size());
  for (size_t t = 0; t < occs.size(); ++t) mark_[occs[t].clause] = (int)t;

  auto counts = [&](int a) {
    int t = mark_[(size_t)a];
    return t < 0 ? std::pair<int, int>(sat_[(size_t)a], star_[(size_t)a])
                 : std::pair<int, int>(csat_[(size_t)t], cstar_[(size_t)t]);
  };

  uint8_t old = x_[i];
  std::array<double, 3> out{};
  for (uint8_t b : {kZero, kOne, kStar}) {
    bool ok = true;
    for (size_t t = 0; t < occs.size(); ++t) {
      int a = (int)occs[t].clause;
      int sat = sat_[(size_t)a];
      int star = star_[(size_t)a];
      if (old == kStar) --star;
      else if (old != occs[t].j) --sat;
      if (b == kStar) ++star;
      else if (b != occs[t].j) ++sat;
      csat_[t] = sat;
      cstar_[t] = star;
      if (sat == 0 && star < 2) { ok = false; break; }
    }
    if (!ok) continue;

    double prod = status_factor(status_from_counts(g_, i, b, counts), w_);
    for (int j : nbrs_[(size_t)i])
      prod *= status_factor(status_from_counts(g_, j, x_[j], counts), w_);
    out[b] = prod;
  }

  for (const FactorGraph::Occ& oc : occs) mark_[oc.clause] = -1;
  return out;
}

void GibbsChain::step() {
  int s = (int)rng_.below((uint64_t)f_.num_vars());
  std::array<double, 3> cw = conditional(s);
  double total = cw[0] + cw[1] + cw[2];
  uint8_t old = x_[s];
  uint8_t next = old;
  if (total > 0.0) {
    double u = rng_.unit() * total;
    next = u < cw[0] ? kZero : (u < cw[0] + cw[1] ? kOne : kStar);
  }
  if (next != old) {
    if (recording_) {
      occ_[(size_t)s][old] += recorded_ - since_[(size_t)s];
      since_[(size_t)s] = recorded_;
    }
    for (const FactorGraph::Occ& oc : g_.of(s)) {
      if (old == kStar) --star_[oc.clause];
      else if (old != oc.j) --sat_[oc.clause];
      if (next == kStar) ++star_[oc.clause];
      else if (next != oc.j) ++sat_[oc.clause];
    }
    x_[s] = next;
  }
  if (recording_) ++recorded_;
}

void GibbsChain::start_recording() {
  recording_ = true;
  recorded_ = 0;
  std::fill(occ_.begin(), occ_.end(), std::array<int64_t, 3>{0, 0, 0});
  std::fill(since_.begin(), since_.end(), 0);
}

std::array<double, 3> GibbsChain::tau(int i) const {
  if (recorded_ <= 0)
    throw std::runtime_error("gibbs: tau before any recorded step");
  std::array<int64_t, 3> c = occ_[(size_t)i];
  c[x_[i]] += recorded_ - since_[(size_t)i];  // still-open run at the current value
  return {(double)c[0] / (double)recorded_, (double)c[1] / (double)recorded_,
          (double)c[2] / (double)recorded_};
}

void GibbsChain::audit() const {
  if (!assignment_valid(f_, x_))
    throw std::runtime_error("gibbs: chain left the valid set");
  for (int a = 0; a < f_.num_clauses(); ++a) {
    ClauseStatus cs = clause_status(f_, x_, a);
    if (cs.sat_count != sat_[(size_t)a] || cs.star_count != star_[(size_t)a])
      throw std::runtime_error("gibbs: stale counts at clause " +
                               std::to_string(a));
  }
  StatusReport rep = classify(f_, x_);
  auto cached = [&](int a) {
    return std::pair<int, int>(sat_[(size_t)a], star_[(size_t)a]);
  };
  for (int i = 0; i < f_.num_vars(); ++i) {
    if (status_from_counts(g_, i, x_[i], cached) != rep.status[(size_t)i])
      throw std::runtime_error("gibbs: stale status at x" + std::to_string(i));
    if (conditional(i) != conditional_weights(f_, x_, i, w_))
      throw std::runtime_error("gibbs: conditional mismatch at x" +
                               std::to_string(i));
  }
}

GibbsEstimates gibbs_run(const Formula& f, const WeightParams& w,
                         int64_t steps, int64_t burn_in, uint64_t seed) {
  if (burn_in < 0 || steps <= burn_in)
    throw std::invalid_argument("gibbs: need steps > burn_in >= 0");
  GibbsChain chain(f, w, seed);
  for (int64_t t = 0; t < steps; ++t) {
    if (t == burn_in) chain.start_recording();
    chain.step();
  }
  GibbsEstimates est;
  est.tau.resize((size_t)f.num_vars());
  for (int i = 0; i < f.num_vars(); ++i) est.tau[(size_t)i] = chain.tau(i);
  return est;
}

double compare_topk(const std::vector<FieldTriple>& sp_fields,
                    const GibbsEstimates& est, int k) {
  int n = (int)sp_fields.size();
  if (est.tau.size() != sp_fields.size())
    throw std::invalid_argument("gibbs: bias lists differ in length");
  if (k <= 0 || k > n)
    throw std::invalid_argument("gibbs: top-k count out of range");
  std::vector<int> order((size_t)n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ba = sp_fields[(size_t)a].bias();
    double bb = sp_fields[(size_t)b].bias();
    return ba != bb ? ba > bb : a < b;
  });
  double sum = 0.0;
  for (int t = 0; t < k; ++t) {
    int i = order[(size_t)t];
    double sp = sp_fields[(size_t)i].p0 - sp_fields[(size_t)i].p1;
    sum += std::abs(sp - est.bias(i));
  }
  return sum / (double)k;
}

void write_tau_csv(std::ostream& out, const GibbsEstimates& est) {
  auto old = out.precision(17);
  out << "var,tau0,tau1,taustar,bias\n";
  for (size_t i = 0; i < est.tau.size(); ++i)
    out << i << ',' << est.tau[i][kZero] << ',' << est.tau[i][kOne] << ','
        << est.tau[i][kStar] << ',' << est.bias((int)i) << '\n';
  out.precision(old);
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  auto old = out.precision(17);
  out << "alpha,sp_rho,gibbs_rho,l1_topk\n";
  for (const CompareRow& r : rows)
    out << r.alpha << ',' << r.sp_rho << ',' << r.gibbs_rho << ','
        << r.l1_topk << '\n';
  out.precision(old);
}

}  // namespace splat
