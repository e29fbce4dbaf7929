#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "unstalg/algebra.hpp"

namespace unstalg {

// F_p[x_i : lo <= i <= hi] with |x_i| = 1 (unit degree), weight p^i, and the shifted
// action P^1 x_i = x_{i-1}^p. With zero_below, x_{lo-1} = 0 (the Brown-Gitler algebra,
// lo = 0); otherwise leaving the window is an error.
class ShiftedPolynomials {
 public:
  using Exps = std::vector<int>;  // exponent of x_{lo + j} at position j
  using Poly = std::map<Exps, u32>;

  ShiftedPolynomials(u32 p, int lo, int hi, bool zero_below) : f_(p), lo_(lo), hi_(hi), zero_below_(zero_below) {
    if (hi < lo) throw std::invalid_argument("empty index window");
    if (hi - lo > 40) throw std::invalid_argument("index window too wide for exact weights");
    pw_.assign(hi - lo + 1, 1);
    for (int j = 1; j <= hi - lo; ++j) pw_[j] = pw_[j - 1] * p;
  }

  u32 prime() const { return f_.p; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int width() const { return hi_ - lo_ + 1; }

  // weights are scaled by p^{-lo}: x_i has scaled weight p^{i - lo}
  i64 scaled(int i) const { return pw_.at(i - lo_); }
  // scaled value of num * p^k
  i64 scaled_weight(i64 num, int k) const {
    int e = k - lo_;
    if (e < 0) {
      i64 den = 1;
      for (int j = 0; j < -e; ++j) den *= f_.p;
      if (num % den) throw std::invalid_argument("weight below the window resolution");
      return num / den;
    }
    i64 r = num;
    for (int j = 0; j < e; ++j) r *= f_.p;
    return r;
  }
  i64 weight(const Exps& m) const {
    i64 w = 0;
    for (int j = 0; j < width(); ++j) w += m[j] * pw_[j];
    return w;
  }
  int degree(const Exps& m) const {
    int d = 0;
    for (int a : m) d += a;
    return d;
  }
  Exps gen(int i) const {
    Exps m(width(), 0);
    m.at(i - lo_) = 1;
    return m;
  }
  std::string to_string(const Exps& m) const {
    std::string s;
    for (int j = 0; j < width(); ++j)
      if (m[j]) s += (s.empty() ? "" : " ") + std::string("x") + std::to_string(lo_ + j) + (m[j] > 1 ? "^" + std::to_string(m[j]) : "");
    return s.empty() ? "1" : s;
  }

  // P^j by the Cartan formula over the shifted action on generators
  Poly act(int j, const Exps& m) const {
    Poly out;
    const int w = width();
    Exps r = m;
    std::function<void(int, int, u32)> rec = [&](int t, int left, u32 coeff) {
      if (t == w) {
        if (left == 0) add(out, r, coeff);
        return;
      }
      const int a = m[t];
      for (int b = 0; b <= std::min(a, left); ++b) {
        u32 c = binomial_mod_p(a, b, f_.p);
        if (!c) continue;
        if (b > 0 && t == 0) {
          if (zero_below_) break;
          throw std::out_of_range("shifted action leaves the index window at x" + std::to_string(lo_));
        }
        r[t] -= b;
        if (b) r[t - 1] += static_cast<int>(f_.p) * b;
        rec(t + 1, left - b, f_.mul(coeff, c));
        r[t] += b;
        if (b) r[t - 1] -= static_cast<int>(f_.p) * b;
      }
    };
    rec(0, j, 1);
    return out;
  }
  Poly act(int j, const Poly& f) const {
    Poly out;
    for (auto& [m, c] : f)
      for (auto& [n, x] : act(j, m)) add(out, n, f_.mul(c, x));
    return out;
  }

  Exps mul(const Exps& a, const Exps& b) const {
    Exps r(width());
    for (int j = 0; j < width(); ++j) r[j] = a[j] + b[j];
    return r;
  }
  // d: x_i -> x_{i-1}; nullopt when the image is zero
  std::optional<Exps> shift(const Exps& m) const {
    if (m[0]) {
      if (zero_below_) return std::nullopt;
      throw std::out_of_range("d leaves the index window");
    }
    Exps r(width(), 0);
    for (int j = 1; j < width(); ++j) r[j - 1] = m[j];
    return r;
  }
  // internal p-ary operation d(t_1 ... t_p)
  std::optional<Exps> internal_product(const std::vector<Exps>& ts) const {
    if (ts.size() != f_.p) throw std::invalid_argument("internal product takes p inputs");
    for (auto& t : ts)
      if (weight(t) != weight(ts[0])) throw std::invalid_argument("internal product needs equal weights");
    Exps m(width(), 0);
    for (auto& t : ts) m = mul(m, t);
    return shift(m);
  }

  // monomials of exact scaled weight w and degree d
  std::vector<Exps> slice(i64 w, int d) const {
    std::vector<Exps> out;
    Exps m(width(), 0);
    std::function<void(int, i64, int)> rec = [&](int j, i64 wl, int dl) {
      if (j < 0) {
        if (wl == 0 && dl == 0) out.push_back(m);
        return;
      }
      if (wl > static_cast<i64>(dl) * pw_[j]) return;  // even all-top letters cannot reach the weight
      if (j == 0) {
        if (wl == dl) {
          m[0] = dl;
          out.push_back(m);
          m[0] = 0;
        }
        return;
      }
      for (int a = std::min<i64>(dl, wl / pw_[j]); a >= 0; --a) {
        m[j] = a;
        rec(j - 1, wl - a * pw_[j], dl - a);
      }
      m[j] = 0;
    };
    rec(width() - 1, w, d);
    std::sort(out.begin(), out.end());
    return out;
  }

  void add(Poly& f, const Exps& m, u32 c) const {
    if (!c) return;
    auto [it, ins] = f.emplace(m, c);
    if (!ins) {
      it->second = f_.add(it->second, c);
      if (!it->second) f.erase(it);
    }
  }

 private:
  Fp f_;
  int lo_, hi_;
  bool zero_below_;
  std::vector<i64> pw_;
};

// A weight slice of ShiftedPolynomials as an unstable module (J'(2n) or K'(2n)).
class WeightSlice : public GradedModule {
 public:
  WeightSlice(ShiftedPolynomials R, i64 scaled_weight, int N) : R_(std::move(R)), w_(scaled_weight), N_(N) {
    basis_.resize(N + 1);
    for (int d = 0; d <= N; ++d) {
      basis_[d] = R_.slice(w_, d);
      for (size_t x = 0; x < basis_[d].size(); ++x) index_[basis_[d][x]] = static_cast<int>(x);
    }
  }
  u32 prime() const override { return R_.prime(); }
  int max_degree() const override { return N_; }
  int dim(int d) const override { return d < 0 || d > N_ ? 0 : static_cast<int>(basis_[d].size()); }
  SparseVec act(int i, int d, int idx) const override {
    SparseVec v;
    for (auto& [m, c] : R_.act(i, basis_[d][idx])) v.emplace_back(index_.at(m), c);
    std::sort(v.begin(), v.end());
    return v;
  }
  std::string label(int d, int idx) const override { return R_.to_string(basis_[d][idx]); }
  const ShiftedPolynomials& ring() const { return R_; }
  const ShiftedPolynomials::Exps& monomial(int d, int idx) const { return basis_[d][idx]; }
  int index_of(const ShiftedPolynomials::Exps& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
  }

 private:
  ShiftedPolynomials R_;
  i64 w_;
  int N_;
  std::vector<std::vector<ShiftedPolynomials::Exps>> basis_;
  std::map<ShiftedPolynomials::Exps, int> index_;
};

// J'(2n): weight n (unit weights), indices 0..q with p^q >= n
inline std::shared_ptr<WeightSlice> brown_gitler_component(u32 p, i64 n, int N) {
  int q = 0;
  for (i64 t = 1; t < n; t *= p) ++q;
  ShiftedPolynomials R(p, 0, std::max(q, 0), true);
  return std::make_shared<WeightSlice>(R, n, N);
}

// index window for weight num * p^k up to unit degree N: the lowest index reachable in
// degree N, one more for the action, and the highest index of the weight
inline std::pair<int, int> carlsson_window(u32 p, i64 num, int k, int N) {
  int top = k;
  for (i64 t = num; t >= static_cast<i64>(p); t /= p) ++top;
  int lo = top - (N - 1) / static_cast<int>(p - 1) - 2;
  return {lo, top};
}

// K'(2n) for n = num * p^k
inline std::shared_ptr<WeightSlice> carlsson_component(u32 p, i64 num, int k, int N, std::optional<std::pair<int, int>> window = {}) {
  auto [lo, hi] = window ? *window : carlsson_window(p, num, k, N);
  auto need = carlsson_window(p, num, k, N);
  if (lo > need.first || hi < need.second)
    throw std::out_of_range("index window [" + std::to_string(lo) + "," + std::to_string(hi) +
                            "] too small for this weight and truncation");
  ShiftedPolynomials R(p, lo, hi, false);
  return std::make_shared<WeightSlice>(R, R.scaled_weight(num, k), N);
}

// ---------------------------------------------------------------------------
// identifications

struct ClassicalReport : CheckReport {
  std::vector<u64> dims_quotient, dims_classical;
};

namespace classical_detail {

inline void compare_dims(ClassicalReport& rep, int d, u64 a, u64 b) {
  rep.dims_quotient.push_back(a);
  rep.dims_classical.push_back(b);
  ++rep.checks;
  if (a != b) rep.fail("degree " + std::to_string(d) + ": quotient " + std::to_string(a) + " vs " + std::to_string(b));
}

// pseudo-random p-tuples of basis indices with total degree <= N
template <class Dim>
std::vector<std::vector<std::pair<int, int>>> sample_tuples(u32 p, int N, Dim dim, int count, u32 seed,
                                                            bool equal_degree = false) {
  std::mt19937 rng(seed);
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<int> degs;
  for (int d = 1; d <= N; ++d)
    if (dim(d) > 0) degs.push_back(d);
  if (degs.empty()) return out;
  for (int t = 0; t < count * 20 && static_cast<int>(out.size()) < count; ++t) {
    std::vector<std::pair<int, int>> tup;
    int total = 0;
    int d0 = degs[rng() % degs.size()];
    for (u32 j = 0; j < p; ++j) {
      int d = equal_degree ? d0 : degs[rng() % degs.size()];
      total += d;
      tup.emplace_back(d, static_cast<int>(rng() % dim(d)));
    }
    if (total <= N) out.push_back(tup);
  }
  return out;
}

}  // namespace classical_detail

// K'(2) against K_{Lev_p}(F'(2)): (l; iota, ..., iota) -> prod x_{-l_j}. With q >= 0 the
// operad is T_qLev_p and the target J'(2p^q), via prod x_{q - l_j}.
inline ClassicalReport verify_level_identification(u32 p, int N, int q = -1) {
  using namespace classical_detail;
  ClassicalReport rep;
  auto F2 = free_unstable_module(p, 1, N);
  if (q == 0) {
    // T_0Lev_p is concentrated in arity one, so the quotient is F'(2)/Im P_0 = <iota> and J'(2) = <x_0>
    auto S = sigma_omega(*F2).quotient;
    auto J = brown_gitler_component(p, 1, N);
    for (int d = 0; d <= N; ++d) {
      compare_dims(rep, d, S->dim(d), J->dim(d));
      for (const GradedModule* M : {static_cast<const GradedModule*>(S.get()), static_cast<const GradedModule*>(J.get())})
        for (int x = 0; x < M->dim(d); ++x)
          for (int i = 1; d + M->step(i) <= N; ++i) {
            ++rep.checks;
            if (!M->act(i, d, x).empty()) rep.fail("P^" + std::to_string(i) + " nonzero on " + M->label(d, x));
          }
    }
    return rep;
  }
  OperadPtr P = q < 0 ? make_operad("lev", p) : make_operad("tqlev", p, q);
  UnstableQuotient K(P, P->star(), false, letters_from_module(F2));
  std::shared_ptr<WeightSlice> T;
  if (q < 0) T = carlsson_component(p, 1, 0, N);
  else {
    i64 w = 1;
    for (int j = 0; j < q; ++j) w *= p;
    T = brown_gitler_component(p, w, N);
  }
  const ShiftedPolynomials& R = T->ring();
  const int offset = q < 0 ? 0 : q;
  auto phi = [&](const Mono& m) {
    ShiftedPolynomials::Exps e(R.width(), 0);
    for (int l : m.op.data) e.at(offset - l - R.lo())++;
    return e;
  };
  if (!K.ideal_vanishes()) rep.fail("ideal is not zero although the star is central and P_0 injective");
  for (int d = 0; d <= N; ++d) {
    compare_dims(rep, d, K.dim_u64(d), static_cast<u64>(T->dim(d)));
    if (d == 0) continue;
    std::set<ShiftedPolynomials::Exps> image;
    for (auto& m : K.basis(d)) {
      auto e = phi(m);
      if (T->index_of(e) < 0) rep.fail("image of " + K.algebra().to_string(m) + " is outside the slice");
      image.insert(e);
    }
    ++rep.checks;
    if (image.size() != K.basis(d).size()) rep.fail("map is not injective in degree " + std::to_string(d));
  }
  // A'-equivariance on every basis element
  for (int d = 1; d <= N; ++d)
    for (int x = 0; x < K.dim(d); ++x)
      for (int i = 1; d + K.step(i) <= N; ++i) {
        ++rep.checks;
        ShiftedPolynomials::Poly lhs;
        for (auto& [y, c] : K.act(i, d, x)) R.add(lhs, phi(K.basis(d + K.step(i))[y]), c);
        auto rhs = R.act(i, phi(K.basis(d)[x]));
        if (lhs != rhs) rep.fail("P^" + std::to_string(i) + " differs on " + K.label(d, x));
      }
  // the star corresponds to the internal product
  const OpCode star = *P->star();
  for (auto& tup : sample_tuples(p, N, [&](int d) { return K.dim(d); }, 300, 17)) {
    std::vector<Mono> parts;
    std::vector<ShiftedPolynomials::Exps> ims;
    for (auto [d, x] : tup) {
      parts.push_back(K.basis(d)[x]);
      ims.push_back(phi(parts.back()));
    }
    ++rep.checks;
    auto lhs = K.algebra().compose(star, parts);
    auto rhs = R.internal_product(ims);
    if (lhs.has_value() != rhs.has_value() || (lhs && phi(*lhs) != *rhs)) rep.fail("products differ");
  }
  auto um = check_unstable_module(*T);
  rep.checks += um.checks;
  if (!um.pass) rep.fail(um.detail);
  return rep;
}

// Projection T_{q+1}Lev -> T_qLev against d: J'(2p^{q+1}) -> J'(2p^q).
inline ClassicalReport verify_cofiltration(u32 p, int q, int N) {
  using namespace classical_detail;
  ClassicalReport rep;
  i64 w = 1;
  for (int j = 0; j < q; ++j) w *= p;
  auto hiJ = brown_gitler_component(p, w * p, N);
  auto loJ = brown_gitler_component(p, w, N);
  const auto& Rh = hiJ->ring();
  const auto& Rl = loJ->ring();
  auto down = [&](const ShiftedPolynomials::Exps& m) -> std::optional<ShiftedPolynomials::Exps> {
    auto s = Rh.shift(m);
    if (!s) return s;
    s->resize(Rl.width());
    return s;
  };
  // x_{q+1} -> x_q
  ++rep.checks;
  auto g = down(Rh.gen(q + 1));
  if (!g || *g != Rl.gen(q)) rep.fail("generator is not sent to x_q");
  // A'-equivariance
  for (int d = 1; d <= N; ++d)
    for (int x = 0; x < hiJ->dim(d); ++x) {
      const auto& m = hiJ->monomial(d, x);
      auto dm = down(m);
      if (dm && loJ->index_of(*dm) < 0) rep.fail("image outside J'(2p^q)");
      for (int i = 1; d + hiJ->step(i) <= N; ++i) {
        ++rep.checks;
        ShiftedPolynomials::Poly lhs;
        for (auto& [n, c] : Rh.act(i, m))
          if (auto dn = down(n)) Rl.add(lhs, *dn, c);
        ShiftedPolynomials::Poly rhs = dm ? Rl.act(i, *dm) : ShiftedPolynomials::Poly{};
        if (lhs != rhs) rep.fail("d does not commute with P^" + std::to_string(i) + " on " + Rh.to_string(m));
      }
    }
  // internal products
  for (auto& tup : sample_tuples(p, N, [&](int d) { return hiJ->dim(d); }, 300, 29)) {
    std::vector<ShiftedPolynomials::Exps> hs, ls;
    bool zero = false;
    for (auto [d, x] : tup) {
      hs.push_back(hiJ->monomial(d, x));
      auto dm = down(hs.back());
      if (!dm) zero = true;
      else ls.push_back(*dm);
    }
    ++rep.checks;
    auto a = Rh.internal_product(hs);
    std::optional<ShiftedPolynomials::Exps> lhs = a ? down(*a) : std::nullopt;
    std::optional<ShiftedPolynomials::Exps> rhs = zero ? std::nullopt : Rl.internal_product(ls);
    if (lhs != rhs) rep.fail("d does not commute with internal products");
  }
  // the square with the operadic projection
  auto P1 = make_operad("tqlev", p, q + 1);
  auto F2 = free_unstable_module(p, 1, N);
  UnstableQuotient K1(P1, P1->star(), false, letters_from_module(F2));
  for (int d = 1; d <= N; ++d)
    for (auto& m : K1.basis(d)) {
      ++rep.checks;
      ShiftedPolynomials::Exps e(Rh.width(), 0);
      for (int l : m.op.data) e.at(q + 1 - l)++;
      const bool survives = std::all_of(m.op.data.begin(), m.op.data.end(), [&](int l) { return l <= q; });
      auto dm = down(e);
      if (survives != dm.has_value()) rep.fail("projection and d disagree on " + K1.algebra().to_string(m));
      if (survives) {
        ShiftedPolynomials::Exps f(Rl.width(), 0);
        for (int l : m.op.data) f.at(q - l)++;
        if (f != *dm) rep.fail("projection and d disagree on " + K1.algebra().to_string(m));
      }
    }
  return rep;
}

// The Carlsson algebra against K_{uCom o D+-}(F'(2)) with the star (X_p; d, ..., d):
// d^e iota -> x_{-e}. Checked on the given weights num * p^k.
inline ClassicalReport verify_carlsson(u32 p, int N, const std::vector<std::pair<i64, int>>& weights) {
  using namespace classical_detail;
  ClassicalReport rep;
  int lo = 0, hi = 0;
  for (auto [num, k] : weights) {
    auto w = carlsson_window(p, num, k, N);
    lo = std::min(lo, w.first);
    hi = std::max(hi, w.second);
  }
  // exponents e = -i
  const int elo = -hi, ehi = -lo;
  auto F2 = free_unstable_module(p, 1, N);
  auto var = UnaryVariant::dpm(elo, ehi);
  // d^e P^I iota has weight p^{k - e}, k = log_p of the degree; scaled by p^{ehi}
  auto weight = [p, ehi](int e, int deg, int) {
    i64 w = 1;
    int k = 0;
    for (int t = deg; t > 1; t /= static_cast<int>(p)) ++k;
    for (int j = 0; j < k - e + ehi; ++j) w *= p;
    return w;
  };
  auto P = make_operad("ucom", p);
  UnstableQuotient K(P, P->star(), true, letters_from_module(F2, var, weight));
  ShiftedPolynomials R(p, lo, hi, false);
  const auto& L = K.algebra().letters();
  auto phi = [&](const Mono& m) {
    ShiftedPolynomials::Exps e(R.width(), 0);
    for (int x : m.word) {
      if (L[x].degree != 1) throw std::logic_error("unexpected letter " + L[x].name);
      const int ex = elo + x / static_cast<int>(K.generating().letters.size() / var.exponents().size());
      e.at(-ex - lo)++;
    }
    return e;
  };
  ++rep.checks;
  if (!K.ideal_vanishes()) rep.fail("ideal is not zero");
  for (auto [num, k] : weights) {
    const i64 target = R.scaled_weight(num, k);
    // letter weights are scaled by p^{ehi} = p^{-lo}, the same scale as R
    for (int d = 0; d <= N; ++d) {
      MonoFilter f;
      f.weight_target = target;
      std::vector<Mono> monos;
      K.algebra().enumerate(K.kept_letters(), d, f, [&](const Mono& m) { monos.push_back(m); });
      auto slice = R.slice(target, d);
      compare_dims(rep, d, monos.size(), slice.size());
      std::set<ShiftedPolynomials::Exps> image;
      for (auto& m : monos) image.insert(phi(m));
      ++rep.checks;
      if (image != std::set<ShiftedPolynomials::Exps>(slice.begin(), slice.end()))
        rep.fail("map is not onto the weight slice in degree " + std::to_string(d));
      for (auto& m : monos) {
        for (int i = 1; d + K.step(i) <= N; ++i) {
          ++rep.checks;
          ShiftedPolynomials::Poly lhs;
          try {
            for (auto& [n, c] : K.act_free(i, m)) R.add(lhs, phi(n), c);
            if (lhs != R.act(i, phi(m))) rep.fail("P^" + std::to_string(i) + " differs on " + K.algebra().to_string(m));
          } catch (const std::out_of_range& e) {
            rep.fail(std::string("window overflow: ") + e.what());
          }
        }
        // d acts letterwise
        ++rep.checks;
        try {
          auto sm = K.algebra().shift(m);
          auto rs = R.shift(phi(m));
          if (sm.has_value() != rs.has_value() || (sm && phi(*sm) != *rs)) rep.fail("d differs");
        } catch (const std::out_of_range&) {
        }
      }
    }
  }
  // products of pairs are polynomial products
  std::mt19937 rng(41);
  std::vector<Mono> pool;
  for (int d = 1; d <= N / 2; ++d)
    K.algebra().enumerate(K.kept_letters(), d, {}, [&](const Mono& m) {
      if (pool.size() < 4000) pool.push_back(m);
    });
  const OpCode X2{2, {0, 0}};
  for (int t = 0; t < 300 && !pool.empty(); ++t) {
    const Mono& a = pool[rng() % pool.size()];
    const Mono& b = pool[rng() % pool.size()];
    ++rep.checks;
    auto ab = K.algebra().compose(X2, {a, b});
    if (!ab || phi(*ab) != R.mul(phi(a), phi(b))) rep.fail("products differ");
  }
  return rep;
}

// The direct sum of J'(2p^i), i <= q, against K for T_qLev_p o T_qD with (star; d, ..., d).
// Only dimensions are compared; the identification of the two sides is not claimed here.
inline ClassicalReport verify_brown_gitler_sum(u32 p, int q, int N) {
  using namespace classical_detail;
  ClassicalReport rep;
  auto F2 = free_unstable_module(p, 1, N);
  auto P = make_operad("tqlev", p, q);
  UnstableQuotient K(P, P->star(), true, letters_from_module(F2, UnaryVariant::tq(q)));
  std::vector<std::shared_ptr<WeightSlice>> parts;
  i64 w = 1;
  for (int i = 0; i <= q; ++i, w *= p) parts.push_back(brown_gitler_component(p, w, N));
  for (int d = 0; d <= N; ++d) {
    u64 c = 0;
    for (auto& J : parts) c += J->dim(d);
    compare_dims(rep, d, K.dim_u64(d), c);
  }
  return rep;
}

}  // namespace unstalg
