#pragma once
// Reference Buchberger: dense map representation, every pair reduced, no
// selection strategy or criteria. Slow on purpose; shares no code with the
// library beyond the Poly type used at the boundary.

#include <algorithm>
#include <map>
#include <vector>

#include <gmpxx.h>

#include "charflow/poly.hpp"

namespace oracle {

using Exp = std::vector<int>;

// grevlex: higher total degree wins; on ties the smaller last differing exponent wins.
inline bool grevlex_less(const Exp& a, const Exp& b) {
  int da = 0, db = 0;
  for (int e : a) da += e;
  for (int e : b) db += e;
  if (da != db) return da < db;
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

struct Cmp {
  bool operator()(const Exp& a, const Exp& b) const { return grevlex_less(a, b); }
};

using P = std::map<Exp, mpq_class, Cmp>;

inline P from_poly(const charflow::Poly& f) {
  P out;
  for (const auto& t : f.terms()) {
    Exp e(f.nvars());
    for (std::size_t i = 0; i < f.nvars(); ++i) e[i] = t.mono.exp[i];
    out[e] = t.coeff;
  }
  return out;
}

inline charflow::Poly to_poly(const P& f, std::size_t n) {
  std::vector<charflow::Term> terms;
  for (const auto& [e, c] : f) {
    charflow::Monomial m;
    for (std::size_t i = 0; i < n; ++i) m.exp[i] = static_cast<std::uint16_t>(e[i]);
    terms.push_back({m, c});
  }
  return charflow::Poly::from_terms(n, std::move(terms));
}

inline void add_scaled(P& f, const P& g, const Exp& shift, const mpq_class& c) {
  for (const auto& [e, a] : g) {
    Exp s(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) s[i] = e[i] + shift[i];
    mpq_class v = f[s] + c * a;
    if (v == 0) f.erase(s); else f[s] = v;
  }
}

inline bool divides(const Exp& a, const Exp& b) {
  for (std::size_t i = 0; i < a.size(); ++i) if (a[i] > b[i]) return false;
  return true;
}

inline P remainder(P f, const std::vector<P>& G) {
  P r;
  while (!f.empty()) {
    auto lt = *f.rbegin();
    bool done = false;
    for (const auto& g : G) {
      if (g.empty()) continue;
      const auto& gl = *g.rbegin();
      if (!divides(gl.first, lt.first)) continue;
      Exp shift(lt.first.size());
      for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = lt.first[i] - gl.first[i];
      add_scaled(f, g, shift, -lt.second / gl.second);
      done = true;
      break;
    }
    if (!done) {
      r[lt.first] = lt.second;
      f.erase(lt.first);
    }
  }
  return r;
}

inline P spoly(const P& f, const P& g) {
  const auto& a = *f.rbegin();
  const auto& b = *g.rbegin();
  Exp l(a.first.size());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = std::max(a.first[i], b.first[i]);
  Exp sa(l.size()), sb(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) { sa[i] = l[i] - a.first[i]; sb[i] = l[i] - b.first[i]; }
  P out;
  add_scaled(out, f, sa, 1 / a.second);
  add_scaled(out, g, sb, -1 / b.second);
  return out;
}

/// Reduced grevlex Groebner basis, sorted by descending leading monomial.
inline std::vector<charflow::Poly> groebner(const std::vector<charflow::Poly>& gens, std::size_t n) {
  std::vector<P> G;
  for (const auto& g : gens) if (!g.is_zero()) G.push_back(from_poly(g));
  if (G.empty()) return {};
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t i = 0; i < G.size() && !added; ++i)
      for (std::size_t j = i + 1; j < G.size() && !added; ++j) {
        P r = remainder(spoly(G[i], G[j]), G);
        if (!r.empty()) { G.push_back(r); added = true; }
      }
  }
  // minimalize
  std::vector<P> M;
  for (std::size_t i = 0; i < G.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < G.size() && !drop; ++j) {
      if (i == j) continue;
      const Exp& li = G[i].rbegin()->first;
      const Exp& lj = G[j].rbegin()->first;
      if (divides(lj, li) && (li != lj || j < i)) drop = true;
    }
    if (!drop) M.push_back(G[i]);
  }
  std::vector<charflow::Poly> out;
  for (std::size_t i = 0; i < M.size(); ++i) {
    std::vector<P> others;
    for (std::size_t j = 0; j < M.size(); ++j) if (j != i) others.push_back(M[j]);
    P lead;
    lead[M[i].rbegin()->first] = M[i].rbegin()->second;
    P tail = M[i];
    tail.erase(M[i].rbegin()->first);
    P r = remainder(tail, others);
    r[lead.begin()->first] = lead.begin()->second;
    mpq_class c = r.rbegin()->second;
    for (auto& [e, v] : r) v /= c;
    out.push_back(to_poly(r, n));
  }
  std::sort(out.begin(), out.end(), [](const charflow::Poly& a, const charflow::Poly& b) {
    return charflow::grevlex_greater(a.leading_term().mono, b.leading_term().mono);
  });
  return out;
}

}  // namespace oracle
