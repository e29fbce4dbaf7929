#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "unstalg/algebra.hpp"

namespace unstalg {

namespace structural_detail {

inline std::vector<OpCode> thin(const Operad& P, int n, size_t cap, const std::function<bool(const OpCode&)>& keep) {
  std::vector<OpCode> all;
  for (auto& c : P.basis(n))
    if (!keep || keep(c)) all.push_back(c);
  if (all.size() <= cap) return all;
  std::vector<OpCode> out;
  for (size_t j = 0; j < cap; ++j) out.push_back(all[j * all.size() / cap]);
  return out;
}

inline int min_arity(const Operad& P) { return P.basis(0).empty() ? 1 : 0; }

}  // namespace structural_detail

struct AxiomCase {
  std::string label;
  OperadPtr P;
  int max_arity;
  std::function<bool(const OpCode&)> keep;  // restricts unbounded bases
};

inline std::vector<AxiomCase> standard_axiom_cases(int max_arity = 6) {
  auto lev = [](LevelKind k, u32 p, int b = 0) { return std::make_shared<LevelOperad>(k, p, b); };
  auto small_levels = [](const OpCode& c) {
    return std::all_of(c.data.begin(), c.data.end(), [](int l) { return l <= 1; });
  };
  auto small_exps = [](const OpCode& c) {
    auto e = CompositeOperad::exps(c);
    return std::all_of(e.begin(), e.end(), [](int x) { return x >= -1 && x <= 1; });
  };
  const int m = max_arity;
  std::vector<AxiomCase> cs;
  for (u32 p : {2u, 3u}) {
    std::string s = std::to_string(p);
    cs.push_back({"uCom_" + s, lev(LevelKind::UCom, p), m, {}});
    cs.push_back({"Com_" + s, lev(LevelKind::Com, p), m, {}});
    cs.push_back({"Lev_" + s, lev(LevelKind::Lev, p), m, {}});
    cs.push_back({"T2Lev_" + s, lev(LevelKind::TqLev, p, 2), m, {}});
    cs.push_back({"MagCom_" + s, std::make_shared<MagComOperad>(p), m, {}});
    cs.push_back({"uCom_" + s + "oD", std::make_shared<CompositeOperad>(lev(LevelKind::UCom, p), UnaryVariant::free_d(1)),
                  m, {}});
  }
  cs.push_back({"Pi", lev(LevelKind::Pi, 2, 4), m, small_levels});
  cs.push_back({"ComoQ2D", std::make_shared<CompositeOperad>(lev(LevelKind::Com, 2), UnaryVariant::qs(2)), m, {}});
  cs.push_back({"ComoT1D", std::make_shared<CompositeOperad>(lev(LevelKind::Com, 3), UnaryVariant::tq(1)), m, {}});
  cs.push_back({"LevoDpm", std::make_shared<CompositeOperad>(lev(LevelKind::Lev, 2), UnaryVariant::dpm(-3, 3)), std::min(m, 4),
                small_exps});
  return cs;
}

// Unit laws, sequential and parallel associativity, and both equivariance laws on
// thinned bases. Composites whose total arity exceeds max_arity are skipped.
inline CheckReport check_operad_axioms(const AxiomCase& c, size_t per_arity = 5, unsigned seed = 5) {
  using structural_detail::thin;
  CheckReport rep;
  const Operad& P = *c.P;
  const int lo = structural_detail::min_arity(P);
  const int top = c.max_arity;
  std::mt19937 rng(seed);
  std::vector<std::vector<OpCode>> S(top + 1);
  for (int n = lo; n <= top; ++n) S[n] = thin(P, n, per_arity, c.keep);
  auto same = [&](const std::optional<OpCode>& a, const std::optional<OpCode>& b, const char* what) {
    ++rep.checks;
    if (a != b) rep.fail(c.label + ": " + what);
  };
  for (int n = lo; n <= top; ++n)
    for (auto& mu : S[n]) {
      same(P.compose(P.unit(), 0, mu), mu, "left unit");
      for (int i = 0; i < n; ++i) same(P.compose(mu, i, P.unit()), mu, "right unit");
    }
  for (int a = std::max(1, lo); a <= top; ++a)
    for (int b = lo; a + b - 1 <= top; ++b)
      for (int k = lo; k <= top && a + b + k - 2 <= top; ++k)
        for (auto& mu : S[a])
          for (auto& nu : S[b])
            for (auto& ka : S[k])
              for (int i = 0; i < a; ++i) {
                for (int j = 0; j < b; ++j) {
                  auto l1 = P.compose(mu, i, nu);
                  auto r1 = P.compose(nu, j, ka);
                  same(l1 ? P.compose(*l1, i + j, ka) : std::nullopt, r1 ? P.compose(mu, i, *r1) : std::nullopt,
                       "sequential associativity");
                }
                for (int t = i + 1; t < a; ++t) {
                  auto l1 = P.compose(mu, i, nu);
                  auto r1 = P.compose(mu, t, ka);
                  same(l1 ? P.compose(*l1, t + b - 1, ka) : std::nullopt, r1 ? P.compose(*r1, i, nu) : std::nullopt,
                       "parallel associativity");
                }
              }
  for (int a = std::max(1, lo); a <= top; ++a)
    for (int m = lo; a + m - 1 <= top; ++m)
      for (auto& mu : S[a])
        for (auto& nu : S[m]) {
          Perm sg = identity_perm(a), s2 = identity_perm(a), tau = identity_perm(m);
          std::shuffle(sg.begin(), sg.end(), rng);
          std::shuffle(s2.begin(), s2.end(), rng);
          std::shuffle(tau.begin(), tau.end(), rng);
          same(P.act(P.act(mu, sg), s2), P.act(mu, compose_perm(sg, s2)), "action");
          for (int i = 0; i < a; ++i) {
            const int ci = sg[i];
            auto pos = [&](int t) { return t < ci ? t : t + m - 1; };
            Perm s3(a + m - 1);
            for (int j = 0; j < i; ++j) s3[j] = pos(sg[j]);
            for (int k = 0; k < m; ++k) s3[i + k] = ci + k;
            for (int j = i + m; j < a + m - 1; ++j) s3[j] = pos(sg[j - m + 1]);
            auto inner = P.compose(mu, ci, nu);
            same(P.compose(P.act(mu, sg), i, nu), inner ? std::optional<OpCode>(P.act(*inner, s3)) : std::nullopt,
                 "left equivariance");
            Perm t3 = identity_perm(a + m - 1);
            for (int k = 0; k < m; ++k) t3[i + k] = i + tau[k];
            auto in2 = P.compose(mu, i, nu);
            same(P.compose(mu, i, P.act(nu, tau)), in2 ? std::optional<OpCode>(P.act(*in2, t3)) : std::nullopt,
                 "right equivariance");
          }
        }
  return rep;
}

// every partial composite of level sequences satisfying the summation condition
// satisfies it again
inline CheckReport check_level_closure(u32 p, int max_arity = 5) {
  CheckReport rep;
  LevelOperad L(LevelKind::Lev, p);
  for (int a = 1; a <= max_arity; ++a)
    for (int b = 1; a + b - 1 <= max_arity; ++b)
      for (auto& J : L.basis(a))
        for (auto& K : L.basis(b))
          for (int i = 0; i < a; ++i) {
            ++rep.checks;
            auto c = L.compose(J, i, K);
            if (!c || !sc_check(c->data, p)) rep.fail("composite leaves Lev_" + std::to_string(p));
          }
  return rep;
}

// uCom o D against the partition operad: exponents of d become levels. Checks
// injectivity, compatibility with composition and surjectivity onto bounded levels.
inline CheckReport check_partition_identification(u32 p, int max_arity = 5, int max_exp = 2) {
  CheckReport rep;
  CompositeOperad ud(std::make_shared<LevelOperad>(LevelKind::UCom, p), UnaryVariant::free_d(max_exp));
  LevelOperad pi(LevelKind::Pi, p, 2 * max_exp);
  for (int a = 0; a <= max_arity; ++a) {
    auto ba = ud.basis(a);
    std::set<std::vector<int>> image;
    for (auto& x : ba) image.insert(CompositeOperad::exps(x));
    ++rep.checks;
    if (image.size() != ba.size()) rep.fail("exponent map not injective in arity " + std::to_string(a));
    std::set<std::vector<int>> bounded;
    for (auto& x : pi.basis(a))
      if (std::all_of(x.data.begin(), x.data.end(), [&](int l) { return l <= max_exp; })) bounded.insert(x.data);
    ++rep.checks;
    if (bounded != image) rep.fail("exponent map not onto bounded levels in arity " + std::to_string(a));
  }
  for (int a = 1; a <= max_arity; ++a)
    for (int b = 0; a + b - 1 <= max_arity; ++b) {
      auto A = structural_detail::thin(ud, a, 40, {}), B = structural_detail::thin(ud, b, 40, {});
      for (auto& x : A)
        for (auto& y : B)
          for (int i = 0; i < a; ++i) {
            auto ex = CompositeOperad::exps(x), ey = CompositeOperad::exps(y);
            ++rep.checks;
            auto c = ud.compose(x, i, y);
            auto d = pi.compose({a, ex}, i, {b, ey});
            if (!c || !d || CompositeOperad::exps(*c) != d->data) rep.fail("composition not preserved");
          }
    }
  return rep;
}

// (x + y)^{*p} = x^{*p} + y^{*p} against the multilinear expansion, on random pairs
inline CheckReport check_star_power_additivity(const OperadPtr& P, int pairs = 100, unsigned seed = 1) {
  CheckReport rep;
  const u32 p = P->prime();
  Fp f(p);
  std::vector<Letter> L{{"x0", 1, 0, kOverflowLetter}, {"x1", 1, 0, kOverflowLetter}, {"x2", 2, 0, kOverflowLetter}};
  FreeAlgebra A(P, L, P->star(), false);
  std::vector<Mono> pool;
  A.enumerate(A.all_ids(), 2, {}, [&](const Mono& m) { pool.push_back(m); });
  if (pool.empty()) {
    rep.fail("no degree-2 monomials");
    return rep;
  }
  std::mt19937 rng(seed);
  for (int trial = 0; trial < pairs; ++trial) {
    Elem x, y;
    for (auto& m : pool) {
      if (rng() % 2) add_to(x, m, 1 + rng() % (p - 1), f);
      if (rng() % 2) add_to(y, m, 1 + rng() % (p - 1), f);
    }
    Elem sum = x;
    axpy(sum, 1, y, f);
    std::vector<std::pair<Mono, u32>> terms(sum.begin(), sum.end());
    Elem full;
    const int k = static_cast<int>(terms.size());
    std::vector<int> pick(p, 0);
    std::function<void(int)> rec = [&](int j) {
      if (j == static_cast<int>(p)) {
        std::vector<Mono> parts;
        u32 c = 1;
        for (int t : pick) {
          parts.push_back(terms[t].first);
          c = f.mul(c, terms[t].second);
        }
        if (auto r = A.compose(*P->star(), parts)) add_to(full, *r, c, f);
        return;
      }
      for (int t = 0; t < k; ++t) {
        pick[j] = t;
        rec(j + 1);
      }
    };
    if (k) rec(0);
    Elem rhs = A.star_power(x);
    axpy(rhs, 1, A.star_power(y), f);
    ++rep.checks;
    if (full != rhs) rep.fail(P->name() + ": star power not additive");
  }
  return rep;
}

// the ideal generated by the split Frobenius relations equals the one generated on
// letters, and, for central stars, the full ideal of the quotient
inline CheckReport check_frobenius_ideals(const OperadPtr& P, const std::vector<int>& gens, int N) {
  auto fr = frobenius_free(P->prime(), gens, N);
  UnstableQuotient D(P, P->star(), false, fr, Strategy::Direct);
  IdealSpan E(D.algebra_ptr(), D.kept_letters(), N, frobenius_split_generators(D.algebra(), fr));
  IdealSpan X(D.algebra_ptr(), D.kept_letters(), N, frobenius_letter_generators(D.algebra(), fr));
  CheckReport rep = compare_ideals(E, X);
  if (is_central(*P, single(*P->star()), 3).central) {
    auto all = compare_ideals(X, D.ideal());
    rep.checks += all.checks;
    if (!all.pass) rep.fail(all.detail);
  }
  if (!rep.pass) rep.detail = P->name() + ": " + rep.detail;
  return rep;
}

}  // namespace unstalg
