#include "splat/sp_engine.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "splat/rng.hpp"

namespace splat {

namespace {
// Floor for freshly computed positive complements, at the grid spacing just
// below 1. Deep saturation drives messages within ulps of 1, and recovery
// from saturation is multiplicative in exactly how far from 1 each message
// was pinned, so the floor is the same per-scalar constant the triple engine
// floors its normalized components at: both recursions then pin a saturated
// edge to the identical value and climb back out of saturation together.
// Only positive values are lifted; a certain warning keeps its exact zero
// complement, so all-integer runs stay exact and contradictions still
// surface. Spelled out per scalar because numeric_limits<__float128> is not
// specialized on this toolchain and its epsilon() silently evaluates to
// zero.
template <class Real>
inline constexpr Real msg_floor = Real(0x1p-53);
template <>
inline constexpr Wide msg_floor<Wide> = Wide(0x1p-113);
}  // namespace

std::vector<uint32_t> sweep_order(int num_edges, uint64_t seed) {
  std::vector<uint32_t> order((size_t)num_edges);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, kSweepOrderStream));
  rng.shuffle(order);
  return order;
}

template <class Real>
SpEngineT<Real>::SpEngineT(Formula f, double rho, uint64_t seed)
    : f_(std::move(f)),
      g_(neighborhoods(f_)),
      rho_(rho),
      seed_(seed),
      order_(sweep_order(f_.num_edges(), seed)),
      mu_((size_t)f_.num_edges(), Real(1)) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("sp: rho must lie in [0,1]");
}

template <class Real>
void SpEngineT<Real>::init_random() {
  Rng rng(derive_seed(seed_, kMsgInitStream));
  for (Real& m : mu_) m = Real(1) - rng.open_unit();
  worst_gap_ = -1.0;
  converged_ = false;
}

template <class Real>
void SpEngineT<Real>::init_scaled_random(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("sp: eps must lie in (0,1)");
  Rng rng(derive_seed(seed_, kMsgInitStream));
  for (Real& m : mu_) m = Real(1) - Real(eps) * rng.open_unit();
  worst_gap_ = -1.0;
  converged_ = false;
}

template <class Real>
void SpEngineT<Real>::init_from_assignment(const PartialAssignment& x) {
  classify(f_, x);  // rejects invalid or wrong-length x
  for (int a = 0; a < f_.num_clauses(); ++a) {
    // x_v == lit.j means v is assigned the value that fails the clause;
    // kStar never compares equal to a sign bit.
    int against = 0;
    for (const Lit& l : f_.clause(a))
      if (x[l.var] == l.j) ++against;
    int size = f_.clause_size(a);
    for (uint32_t e = f_.clause_begin(a); e < f_.clause_begin(a + 1); ++e) {
      const Lit& l = f_.edge_lit((int)e);
      int others = against - (x[l.var] == l.j ? 1 : 0);
      mu_[e] = (others == size - 1) ? Real(0) : Real(1);
    }
  }
  worst_gap_ = -1.0;
  converged_ = false;
}

template <class Real>
void SpEngineT<Real>::set_damping(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("sp: damping must lie in [0,1)");
  damping_ = gamma;
}

template <class Real>
Real SpEngineT<Real>::refreshed_mu(int e, Real* bound_out) const {
  int a = (int)g_.edge_clause[(size_t)e];
  // The update multiplies one factor in [0,1] per other variable of the
  // clause. Carrying the complement instead, mu = 1 - prod_j factor_j grows
  // by mu <- mu*(1 - nu_j) + nu_j per factor complement nu_j: every term is
  // nonnegative, so a run of factors within an ulp of 1 accumulates without
  // ever rounding against that wall.
  Real mu = 0.0;
  Real bound = 1.0;
  for (uint32_t ee = f_.clause_begin(a); ee < f_.clause_begin(a + 1); ++ee) {
    if ((int)ee == e) continue;
    const Lit& lj = f_.edge_lit((int)ee);
    Real hold_same = 1.0;   // clauses wanting x_j the same way a does
    Real hold_other = 1.0;  // clauses wanting the opposite value
    Real sum_mu = 0.0;
    int other_count = 0;
    for (const FactorGraph::Occ& oc : g_.of((int)lj.var)) {
      if (oc.clause == (uint32_t)a) continue;
      if (oc.j == lj.j) {
        hold_same *= mu_[oc.edge];
      } else {
        hold_other *= mu_[oc.edge];
        sum_mu += mu_[oc.edge];
        ++other_count;
      }
    }
    Real pi_u = (1.0 - rho_ * hold_other) * hold_same;
    // pi_s + pi_star = (1 - hold_same)*hold_other + hold_same*hold_other,
    // so the triple's total is pi_u + hold_other and the factor's
    // complement 1 - pi_u / total reduces to the quotient below.
    Real denom = pi_u + hold_other;
    if (denom == 0.0)
      throw std::runtime_error("sp: pi triple of x" + std::to_string(lj.var) +
                               " -> clause " + std::to_string(a) +
                               " is all zero (contradictory forcing)");
    Real nu = hold_other / denom;
    mu = mu * (1.0 - nu) + nu;
    // sum of the opposing messages, folded as count minus the complements
    Real cap = (1.0 - rho_) + rho_ * (Real(other_count) - sum_mu);
    bound *= cap < Real(1) ? cap : Real(1);
  }
  if (bound_out) *bound_out = bound;
  if (mu > 0.0 && mu < msg_floor<Real>) mu = msg_floor<Real>;
  return mu;
}

template <class Real>
Real SpEngineT<Real>::sweep() {
  Real max_delta = 0.0;
  for (uint32_t e : order_) {
    Real bound = 1.0;
    Real fresh = refreshed_mu((int)e, &bound);
    Real gap = (Real(1) - fresh) - bound;  // the cap applies to the message
    if (gap > worst_gap_) worst_gap_ = gap;
    Real next = damping_ == 0.0
                    ? fresh
                    : (1.0 - damping_) * fresh + damping_ * mu_[e];
    Real delta = next > mu_[e] ? next - mu_[e] : mu_[e] - next;
    if (delta > max_delta) max_delta = delta;
    mu_[e] = next;
  }
  return max_delta;
}

template <class Real>
int SpEngineT<Real>::run(double tol, int max_sweeps) {
  if (!(tol > 0.0)) throw std::invalid_argument("sp: tol must be positive");
  converged_ = false;
  int t = 0;
  while (t < max_sweeps) {
    ++t;
    if (sweep() < Real(tol)) {
      converged_ = true;
      break;
    }
  }
  return t;
}

template <class Real>
std::vector<Real> SpEngineT<Real>::eta() const {
  std::vector<Real> out(mu_.size());
  for (size_t e = 0; e < mu_.size(); ++e) out[e] = Real(1) - mu_[e];
  return out;
}

template <class Real>
Real SpEngineT<Real>::max_eta() const {
  Real m = 1.0;
  for (Real v : mu_)
    if (v < m) m = v;
  return Real(1) - m;
}

template <class Real>
PiTriple SpEngineT<Real>::pi(int edge) const {
  int a = (int)g_.edge_clause[(size_t)edge];
  const Lit& li = f_.edge_lit(edge);
  Real hold_same = 1.0;
  Real hold_other = 1.0;
  for (const FactorGraph::Occ& oc : g_.of((int)li.var)) {
    if (oc.clause == (uint32_t)a) continue;
    if (oc.j == li.j)
      hold_same *= mu_[oc.edge];
    else
      hold_other *= mu_[oc.edge];
  }
  return {(double)((1.0 - rho_ * hold_other) * hold_same),
          (double)((1.0 - hold_same) * hold_other),
          (double)(hold_same * hold_other)};
}

template <class Real>
std::vector<FieldTriple> SpEngineT<Real>::fields() const {
  std::vector<FieldTriple> out((size_t)f_.num_vars());
  for (int i = 0; i < f_.num_vars(); ++i) {
    Real hold_plus = 1.0;   // no warning from clauses x_i = 1 satisfies
    Real hold_minus = 1.0;  // likewise for x_i = 0
    for (const FactorGraph::Occ& oc : g_.of(i))
      (oc.j == 0 ? hold_plus : hold_minus) *= mu_[oc.edge];
    Real m0 = (1.0 - rho_ * hold_minus) * hold_plus;
    Real m1 = (1.0 - rho_ * hold_plus) * hold_minus;
    Real ms = hold_plus * hold_minus;
    Real z = m0 + m1 + ms;
    if (z == 0.0)
      throw std::runtime_error("sp: beliefs of x" + std::to_string(i) +
                               " have zero normalizer");
    out[(size_t)i] = {(double)(m0 / z), (double)(m1 / z), (double)(ms / z)};
  }
  return out;
}

template class SpEngineT<double>;
template class SpEngineT<Wide>;

SpOutcome sp_run(const Formula& f, double rho, double tol, int max_sweeps,
                 uint64_t seed) {
  SpEngine eng(f, rho, seed);
  eng.init_random();
  int t = eng.run(tol, max_sweeps);
  return {eng.converged(), t, eng.fields()};
}

CoreFixedPoint sp_fixed_point_from_assignment(const Formula& f,
                                              const PartialAssignment& x) {
  SpEngine eng(f, 1.0, 0);
  eng.init_from_assignment(x);
  // The state space is finite (every message is 0 or 1), so an exact freeze
  // is the right stopping rule. The cap only guards against a cycling bug.
  int cap = f.num_vars() + f.num_clauses() + 16;
  int t = 0;
  bool frozen = false;
  while (t < cap) {
    ++t;
    if (eng.sweep() == 0.0) {
      frozen = true;
      break;
    }
  }
  if (!frozen)
    throw std::runtime_error("sp: state did not freeze within " +
                             std::to_string(cap) + " sweeps");
  std::vector<FieldTriple> flds = eng.fields();
  std::vector<uint8_t> core(flds.size());
  for (size_t i = 0; i < flds.size(); ++i) {
    const FieldTriple& ft = flds[i];
    if (ft.p0 == 1.0 && ft.p1 == 0.0 && ft.pstar == 0.0)
      core[i] = kZero;
    else if (ft.p1 == 1.0 && ft.p0 == 0.0 && ft.pstar == 0.0)
      core[i] = kOne;
    else if (ft.pstar == 1.0 && ft.p0 == 0.0 && ft.p1 == 0.0)
      core[i] = kStar;
    else
      throw std::runtime_error("sp: frozen beliefs of x" + std::to_string(i) +
                               " are not an indicator");
  }
  return {t, std::move(flds), PartialAssignment{std::move(core)}};
}

std::vector<double> metastability_probe(const Formula& f, double rho,
                                        double eps, int t_max, uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("sp: probe needs rho in (0,1]");
  SpEngine eng(f, rho, seed);
  eng.init_scaled_random(eps);  // validates eps
  std::vector<double> traj;
  traj.reserve((size_t)t_max);
  for (int t = 0; t < t_max; ++t) {
    eng.sweep();
    traj.push_back(eng.max_eta());
  }
  return traj;
}

void write_sp_fields_csv(std::ostream& out,
                         const std::vector<FieldTriple>& fields) {
  auto old = out.precision(17);
  out << "var,mu0,mu1,mustar,bias\n";
  for (size_t i = 0; i < fields.size(); ++i)
    out << i << ',' << fields[i].p0 << ',' << fields[i].p1 << ','
        << fields[i].pstar << ',' << fields[i].bias() << '\n';
  out.precision(old);
}

}  // namespace splat
