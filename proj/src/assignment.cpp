#include "splat/assignment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace splat {

std::string to_string(const PartialAssignment& x) {
  std::string s;
  s.reserve(x.v.size());
  for (uint8_t b : x.v) s.push_back(b == kStar ? '*' : (char)('0' + b));
  return s;
}

PartialAssignment assignment_from_string(const std::string& s) {
  PartialAssignment x;
  x.v.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '0': x.v.push_back(kZero); break;
      case '1': x.v.push_back(kOne); break;
      case '*': x.v.push_back(kStar); break;
      default:
        throw std::runtime_error(std::string("assignment: bad character '") + c + "'");
    }
  }
  return x;
}

PartialAssignment read_assignment_file(const std::string& path, int expect_n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  PartialAssignment x = assignment_from_string(line);
  if (expect_n >= 0 && x.size() != expect_n)
    throw std::runtime_error("assignment in " + path + " has " +
                             std::to_string(x.size()) + " positions, formula has " +
                             std::to_string(expect_n));
  return x;
}

void write_assignment_file(const PartialAssignment& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_string(x) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

ClauseStatus clause_status(const Formula& f, const PartialAssignment& x, int a) {
  ClauseStatus st{true, 0, 0, std::nullopt};
  int sat_var = -1;
  for (const Lit& l : f.clause(a)) {
    uint8_t b = x[(int)l.var];
    if (b == kStar) {
      st.star_count++;
    } else if (b != l.j) {
      st.sat_count++;
      sat_var = (int)l.var;
    }
  }
  if (st.sat_count == 0)
    st.valid = st.star_count >= 2;
  if (st.valid && st.sat_count == 1 && st.star_count == 0)
    st.constrained_var = sat_var;
  return st;
}

bool assignment_valid(const Formula& f, const PartialAssignment& x) {
  if (x.size() != f.num_vars()) return false;
  for (int a = 0; a < f.num_clauses(); ++a)
    if (!clause_status(f, x, a).valid) return false;
  return true;
}

bool satisfies(const Formula& f, const std::vector<uint8_t>& x) {
  if ((int)x.size() != f.num_vars()) return false;
  for (int a = 0; a < f.num_clauses(); ++a) {
    bool sat = false;
    for (const Lit& l : f.clause(a))
      if (x[l.var] != l.j) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

StatusReport classify(const Formula& f, const PartialAssignment& x) {
  if (x.size() != f.num_vars())
    throw std::invalid_argument("classify: assignment length mismatch");
  StatusReport r;
  int n = f.num_vars();
  r.status.assign(n, VarStatus::Unconstrained);
  r.parents.assign(n, {});
  for (int i = 0; i < n; ++i)
    if (x[i] == kStar) r.status[i] = VarStatus::Star;
  for (int a = 0; a < f.num_clauses(); ++a) {
    ClauseStatus st = clause_status(f, x, a);
    if (!st.valid)
      throw std::invalid_argument("classify: assignment invalidates clause " +
                                  std::to_string(a));
    if (st.constrained_var) {
      r.status[*st.constrained_var] = VarStatus::Constrained;
      r.parents[*st.constrained_var].push_back(a);
    }
  }
  for (int i = 0; i < n; ++i) switch (r.status[i]) {
      case VarStatus::Star: r.stars.push_back(i); break;
      case VarStatus::Constrained: r.constrained.push_back(i); break;
      case VarStatus::Unconstrained: r.unconstrained.push_back(i); break;
    }
  return r;
}

double weight(const Formula& f, const PartialAssignment& x, const WeightParams& w) {
  if (!assignment_valid(f, x)) return 0.0;
  StatusReport r = classify(f, x);
  double prod = 1.0;
  for (int k = 0; k < r.n_unconstrained(); ++k) prod *= w.omega_o;
  for (int k = 0; k < r.n_star(); ++k) prod *= w.omega_star;
  return prod;
}

double log_weight(const Formula& f, const PartialAssignment& x, const WeightParams& w) {
  if (!assignment_valid(f, x))
    return -std::numeric_limits<double>::infinity();
  StatusReport r = classify(f, x);
  // skip absent factors: 0 * log(0) would be NaN, the weight is just 1
  double lw = 0.0;
  if (r.n_unconstrained() > 0) lw += r.n_unconstrained() * std::log(w.omega_o);
  if (r.n_star() > 0) lw += r.n_star() * std::log(w.omega_star);
  return lw;
}

}  // namespace splat
