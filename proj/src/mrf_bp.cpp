#include "splat/mrf_bp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "splat/rng.hpp"

namespace splat {

namespace {

template <class Real>
Real mag(Real v) {
  return v < 0 ? -v : v;
}

// Deep saturation shrinks the small message components multiplicatively
// sweep after sweep, and once a product of them underflows to an exact
// zero the zero sticks and later surfaces as a spurious zero-mass reply.
// Normalized components are therefore floored at the scalar's spacing
// just below one, the same magnitude the eta recursion saturates at, so
// both recursions pin a saturated edge at the same value and climb back
// out of saturation together. Only positive values are lifted: genuine
// zeros pass through, so all-integer runs stay exact and real
// contradictions still drain a message to nothing.
template <class Real>
inline constexpr Real msg_floor = Real(0x1p-53);
template <>
inline constexpr Wide msg_floor<Wide> = Wide(0x1p-113);

template <class Real>
Real lift(Real v) {
  return v > 0.0 && v < msg_floor<Real> ? msg_floor<Real> : v;
}

template <class Real>
MsgTripleT<Real> clause_reply(const MsgTripleT<Real>* r, int count) {
  Real fail = 1.0;  // prod u_j
  for (int j = 0; j < count; ++j) fail *= r[j].u;
  // star = prod (u_j + star_j) - prod u_j, telescoped into a sum of
  // nonnegative products. The direct difference absorbs a tiny star_j into
  // u_j and rounds to an exact zero the true recursion never reaches, and
  // that zero then cascades into zero-mass messages downstream.
  Real pre = 1.0;   // prod_{j<k} (u_j + star_j)
  Real star = 0.0;  // pre minus prod_{j<k} u_j, grown without subtraction
  for (int k = 0; k < count; ++k) {
    star = star * r[k].u + pre * r[k].star;
    pre *= r[k].u + r[k].star;
  }
  // corr = sum_k (s_k - star_k) prod_{j != k} u_j, folded left to right:
  // after step k, corr covers the terms with k' <= k and run = prod u_{<=k}.
  // Kept as star + corr rather than expanded: when every s_k equals star_k
  // bitwise the fold yields an exact zero, so u inherits star exactly.
  Real corr = 0.0;
  Real run = 1.0;
  for (int k = 0; k < count; ++k) {
    corr = corr * r[k].u + (r[k].s - r[k].star) * run;
    run *= r[k].u;
  }
  MsgTripleT<Real> out;
  out.s = fail;
  out.star = star;
  out.u = star + corr;
  if (out.u < 0.0) out.u = 0.0;  // corr can round a hair past -star
  return out;
}

template <class Real>
MsgTripleT<Real> variable_reply(Real as, Real au, Real ax, Real ds, Real du,
                                Real dx, const WeightParams& w) {
  Real smooth = 1.0 - Real(w.omega_o);
  MsgTripleT<Real> out;
  out.s = du * as;
  out.u = au * (ds - smooth * dx);  // ds >= dx factor by factor, so >= 0
  // Grouped so the correction vanishes exactly when the star and fail
  // products agree, as they do under complementary weights.
  out.star = out.s + ax * (w.omega_star * dx - smooth * du);
  if (out.star < 0.0) out.star = 0.0;
  return out;
}

}  // namespace

MsgTriple combine_clause(const MsgTriple* r, int count) {
  return clause_reply(r, count);
}

MsgTriple combine_variable(double as, double au, double ax, double ds,
                           double du, double dx, const WeightParams& w) {
  return variable_reply(as, au, ax, ds, du, dx, w);
}

template <class Real>
BpEngineT<Real>::BpEngineT(Formula f, WeightParams w, uint64_t seed)
    : f_(std::move(f)),
      g_(neighborhoods(f_)),
      w_(w),
      seed_(seed),
      order_(sweep_order(f_.num_edges(), seed)),
      msg_((size_t)f_.num_edges()),
      sstar_((size_t)f_.num_edges(), Real(0)) {
  if (!(w.omega_o >= 0.0 && w.omega_o <= 1.0 && w.omega_star >= 0.0 &&
        w.omega_star <= 1.0))
    throw std::invalid_argument("bp: weights must lie in [0,1]");
}

template <class Real>
void BpEngineT<Real>::init_random() {
  Rng rng(derive_seed(seed_, kMsgInitStream));
  for (size_t e = 0; e < msg_.size(); ++e) {
    Real a = rng.open_unit();
    Real b = rng.open_unit();
    Real c = rng.open_unit();
    Real total = a + b + c;
    msg_[e] = {a / total, b / total, c / total};
    sstar_[e] = msg_[e].s + msg_[e].star;
  }
  converged_ = false;
}

template <class Real>
void BpEngineT<Real>::init_matched() {
  Rng rng(derive_seed(seed_, kMsgInitStream));
  for (size_t e = 0; e < msg_.size(); ++e) {
    Real u = rng.open_unit();  // the eta engine's starting value
    Real rest = (1.0 - u) / (2.0 - u);
    msg_[e] = {u / (2.0 - u), rest, rest};
    sstar_[e] = msg_[e].s + msg_[e].star;
  }
  converged_ = false;
}

template <class Real>
MsgTripleT<Real> BpEngineT<Real>::variable_message(int e) const {
  uint32_t a = g_.edge_clause[(size_t)e];
  const Lit& li = f_.edge_lit(e);
  Real as = 1.0, au = 1.0, ax = 1.0;  // clauses wanting x the same way
  Real ds = 1.0, du = 1.0, dx = 1.0;  // clauses wanting the opposite
  for (const FactorGraph::Occ& oc : g_.of((int)li.var)) {
    if (oc.clause == a) continue;
    const MsgTripleT<Real>& m = msg_[oc.edge];
    if (oc.j == li.j) {
      as *= sstar_[oc.edge];
      au *= m.u;
      ax *= m.star;
    } else {
      ds *= sstar_[oc.edge];
      du *= m.u;
      dx *= m.star;
    }
  }
  return variable_reply(as, au, ax, ds, du, dx, w_);
}

template <class Real>
MsgTripleT<Real> BpEngineT<Real>::refreshed_message(int e) const {
  int a = (int)g_.edge_clause[(size_t)e];
  scratch_.clear();
  for (uint32_t ee = f_.clause_begin(a); ee < f_.clause_begin(a + 1); ++ee)
    if ((int)ee != e) scratch_.push_back(variable_message((int)ee));
  return clause_reply(scratch_.data(), (int)scratch_.size());
}

template <class Real>
Real BpEngineT<Real>::sweep() {
  Real max_delta = 0.0;
  for (uint32_t e : order_) {
    MsgTripleT<Real> raw = refreshed_message((int)e);
    Real total = raw.s + raw.u + raw.star;
    if (total == 0.0) {
      const Lit& li = f_.edge_lit((int)e);
      throw std::runtime_error(
          "bp: message of clause " + std::to_string(g_.edge_clause[e]) +
          " -> x" + std::to_string(li.var) + " has no mass");
    }
    MsgTripleT<Real> next{lift(raw.s / total), lift(raw.u / total),
                          lift(raw.star / total)};
    const MsgTripleT<Real>& old = msg_[e];
    Real d = mag(next.s - old.s);
    d = std::max(d, mag(next.u - old.u));
    d = std::max(d, mag(next.star - old.star));
    if (d > max_delta) max_delta = d;
    msg_[e] = next;
    sstar_[e] = next.s + next.star;
  }
  return max_delta;
}

template <class Real>
int BpEngineT<Real>::run(double tol, int max_sweeps) {
  if (!(tol > 0.0)) throw std::invalid_argument("bp: tol must be positive");
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
std::vector<FieldTriple> BpEngineT<Real>::fields() const {
  Real smooth = 1.0 - Real(w_.omega_o);
  std::vector<FieldTriple> out((size_t)f_.num_vars());
  for (int i = 0; i < f_.num_vars(); ++i) {
    Real ps_p = 1.0, pu_p = 1.0, px_p = 1.0;  // over clauses x_i=1 satisfies
    Real ps_m = 1.0, pu_m = 1.0, px_m = 1.0;  // over clauses x_i=0 satisfies
    for (const FactorGraph::Occ& oc : g_.of(i)) {
      const MsgTripleT<Real>& m = msg_[oc.edge];
      if (oc.j == 0) {
        ps_p *= sstar_[oc.edge];
        pu_p *= m.u;
        px_p *= m.star;
      } else {
        ps_m *= sstar_[oc.edge];
        pu_m *= m.u;
        px_m *= m.star;
      }
    }
    Real f0 = pu_p * (ps_m - smooth * px_m);
    Real f1 = pu_m * (ps_p - smooth * px_p);
    Real fs = w_.omega_star * px_p * px_m;
    Real z = f0 + f1 + fs;
    if (z == 0.0)
      throw std::runtime_error("bp: beliefs of x" + std::to_string(i) +
                               " have zero normalizer");
    out[(size_t)i] = {(double)(f0 / z), (double)(f1 / z), (double)(fs / z)};
  }
  return out;
}

template class BpEngineT<double>;
template class BpEngineT<Wide>;

BpOutcome bp_run(const Formula& f, const WeightParams& w, double tol,
                 int max_sweeps, uint64_t seed) {
  BpEngine eng(f, w, seed);
  eng.init_random();
  int t = eng.run(tol, max_sweeps);
  return {eng.converged(), t, eng.fields()};
}

ReductionReport reduction_check(const Formula& f, double rho, int sweeps,
                                uint64_t seed) {
  SpEngineT<Wide> sp(f, rho, seed);
  sp.init_random();
  BpEngineT<Wide> bp(f, WeightParams::from_rho(rho), seed);
  bp.init_matched();

  Wide discrepancy = 0.0;
  Wide star_gap = 0.0;
  auto scan = [&] {
    const std::vector<Wide> eta = sp.eta();
    const std::vector<MsgTripleT<Wide>>& msg = bp.messages();
    for (size_t e = 0; e < eta.size(); ++e) {
      Wide pinned = msg[e].s + msg[e].u;
      Wide ratio = pinned == 0.0 ? Wide(0) : msg[e].s / pinned;
      discrepancy = std::max(discrepancy, mag(eta[e] - ratio));
      star_gap = std::max(star_gap, mag(msg[e].u - msg[e].star));
    }
  };
  scan();
  for (int t = 0; t < sweeps; ++t) {
    sp.sweep();
    bp.sweep();
    scan();
  }
  return {(double)discrepancy, (double)star_gap, (double)sp.worst_bound_gap()};
}

void write_bp_fields_csv(std::ostream& out,
                         const std::vector<FieldTriple>& fields) {
  auto old = out.precision(17);
  out << "var,f0,f1,fstar,bias\n";
  for (size_t i = 0; i < fields.size(); ++i)
    out << i << ',' << fields[i].p0 << ',' << fields[i].p1 << ','
        << fields[i].pstar << ',' << fields[i].bias() << '\n';
  out.precision(old);
}

}  // namespace splat
