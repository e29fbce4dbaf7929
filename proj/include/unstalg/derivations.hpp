#pragma once

#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "unstalg/algebra.hpp"

namespace unstalg {

// S(P, V) with V = F_p^n in unit degree 1 and P^i := D_i, the higher derivation extending
// D_1 v_b = sum_a M(a, b) (star; v_a, ..., v_a). D_i replaces i letters of a monomial by D_1.
class TwistedAlgebra : public GradedModule {
 public:
  TwistedAlgebra(OperadPtr P, FpMatrix M, int N, size_t cap = 400000) : M_(std::move(M)), N_(N) {
    if (M_.rows() != M_.cols()) throw std::invalid_argument("endomorphism must be square");
    if (!P->star()) throw std::invalid_argument("operad has no star operation");
    const int n = M_.rows();
    std::vector<Letter> L;
    for (int a = 0; a < n; ++a) L.push_back({"v" + std::to_string(a), 1, 0, kOverflowLetter});
    alg_ = std::make_shared<FreeAlgebra>(P, L, P->star(), false);
    const Fp& f = alg_->field();
    d1_.resize(n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        if (M_(a, b))
          if (auto t = alg_->star_power(alg_->letter(a))) add_to(d1_[b], *t, M_(a, b), f);
    basis_.resize(N + 1);
    index_.resize(N + 1);
    for (int d = 0; d <= N; ++d) {
      alg_->enumerate(alg_->all_ids(), d, {}, [&](const Mono& m) {
        if (basis_[d].size() >= cap) throw std::runtime_error("degree " + std::to_string(d) + " is too large");
        index_[d].emplace(m, static_cast<int>(basis_[d].size()));
        basis_[d].push_back(m);
      });
    }
  }

  u32 prime() const override { return alg_->prime(); }
  int max_degree() const override { return N_; }
  int dim(int d) const override { return d < 0 || d > N_ ? 0 : static_cast<int>(basis_[d].size()); }
  SparseVec act(int i, int d, int idx) const override {
    if (i == 0) return unit_vec(idx);
    return coords(d + step(i), derivation(i, basis_[d][idx]));
  }
  std::string label(int d, int idx) const override { return alg_->to_string(basis_[d][idx]); }

  // D_i by the subset formula
  Elem derivation(int i, const Mono& m) const {
    Elem out;
    const int k = static_cast<int>(m.word.size());
    if (i == 0) return {{m, 1}};
    if (i > k) return out;
    const Fp& f = alg_->field();
    std::vector<Mono> parts(k);
    std::function<void(int, int, u32)> rec = [&](int j, int left, u32 c) {
      if (j == k) {
        if (left == 0)
          if (auto r = alg_->compose(m.op, parts)) add_to(out, *r, c, f);
        return;
      }
      if (k - j > left) {
        parts[j] = alg_->letter(m.word[j]);
        rec(j + 1, left, c);
      }
      if (left > 0)
        for (auto& [t, x] : d1_[m.word[j]]) {
          parts[j] = t;
          rec(j + 1, left - 1, f.mul(c, x));
        }
    };
    rec(0, i, 1);
    return out;
  }
  Elem derivation(int i, const Elem& e) const {
    Elem out;
    for (auto& [m, c] : e) axpy(out, c, derivation(i, m), alg_->field());
    return out;
  }

  SparseVec coords(int d, const Elem& e) const {
    SparseVec v;
    for (auto& [m, c] : e) v.emplace_back(index_.at(d).at(m), c);
    std::sort(v.begin(), v.end());
    return v;
  }
  const std::vector<Mono>& basis(int d) const { return basis_.at(d); }
  const FreeAlgebra& algebra() const { return *alg_; }
  const FpMatrix& matrix() const { return M_; }
  const Elem& d1(int letter) const { return d1_.at(letter); }

 private:
  FpMatrix M_;
  int N_;
  AlgebraPtr alg_;
  std::vector<Elem> d1_;
  std::vector<std::vector<Mono>> basis_;
  std::vector<std::unordered_map<Mono, int, MonoHash>> index_;
};

struct AdemLayers : CheckReport {
  bool layer_a = true, layer_b = true, layer_c = true;
  bool agree() const { return layer_a == layer_b; }
};

namespace derivation_detail {

using Bivar = std::map<std::pair<int, int>, u32>;  // s^a t^b

inline Bivar bmul(const Bivar& x, const Bivar& y, const Fp& f) {
  Bivar r;
  for (auto& [a, c] : x)
    for (auto& [b, e] : y) {
      auto& z = r[{a.first + b.first, a.second + b.second}];
      z = f.add(z, f.mul(c, e));
    }
  for (auto it = r.begin(); it != r.end();) it = it->second ? std::next(it) : r.erase(it);
  return r;
}
inline Bivar bpow(const Bivar& x, int e, const Fp& f) {
  Bivar r{{{0, 0}, 1}};
  for (int j = 0; j < e; ++j) r = bmul(r, x, f);
  return r;
}

// u(s, t) = sum_{k < p} s^{p-k} t^k, so that u(s, t) + t^p and t u(s, t) are symmetric
inline Bivar bm_u(u32 p, bool swap) {
  Bivar u;
  for (u32 k = 0; k < p; ++k) {
    std::pair<int, int> e{static_cast<int>(p - k), static_cast<int>(k)};
    if (swap) std::swap(e.first, e.second);
    u[e] = 1;
  }
  return u;
}

}  // namespace derivation_detail

// Layer (a): D_i D_1 = (i+1) D_{i+1} on generators for i < p. Layer (b): all Adem relations and
// instability as operator identities in degrees <= N. Layer (c): P(u(s,t)) P(t^p) = P(u(t,s)) P(s^p)
// on every basis element of degree <= bm_degree, expanded to degree N.
inline AdemLayers check_adem_operators(const GradedModule& A, int bm_degree = 1) {
  using namespace derivation_detail;
  AdemLayers rep;
  const u32 p = A.prime();
  const Fp f(p);
  const int N = A.max_degree();
  for (int x = 0; x < A.dim(1); ++x) {
    SparseVec v = unit_vec(x);
    SparseVec d1v = *apply_word(A, {1}, 1, v);
    for (u32 i = 1; i < p && 1 + A.step(i + 1) <= N; ++i) {
      ++rep.checks;
      SparseVec lhs = *apply_word(A, {static_cast<int>(i)}, 1 + A.step(1), d1v);
      SparseVec rhs;
      axpy(rhs, static_cast<u32>((i + 1) % p), *apply_word(A, {static_cast<int>(i + 1)}, 1, v), f);
      if (lhs != rhs) {
        rep.layer_a = false;
        rep.fail("layer a: D_" + std::to_string(i) + "D_1 on " + A.label(1, x));
      }
    }
  }
  auto b = check_unstable_module(A);
  rep.checks += b.checks;
  if (!b.pass) {
    rep.layer_b = false;
    rep.fail("layer b: " + b.detail);
  }
  // Bullett-Macdonald
  const Bivar u = bm_u(p, false), us = bm_u(p, true);
  for (int e = 1; e <= std::min(bm_degree, N); ++e)
    for (int x = 0; x < A.dim(e); ++x) {
      std::map<std::pair<int, int>, SparseVec> lhs, rhs;
      for (int j = 0; e + A.step(j) <= N; ++j)
        for (int i = 0; e + A.step(i + j) <= N; ++i) {
          SparseVec w = *apply_word(A, {i, j}, e, unit_vec(x));
          if (w.empty()) continue;
          Bivar cl = bmul(bpow(u, i, f), Bivar{{{0, static_cast<int>(p) * j}, 1}}, f);
          Bivar cr = bmul(bpow(us, i, f), Bivar{{{static_cast<int>(p) * j, 0}, 1}}, f);
          for (auto& [m, c] : cl) axpy(lhs[m], c, w, f);
          for (auto& [m, c] : cr) axpy(rhs[m], c, w, f);
        }
      for (auto* side : {&lhs, &rhs})
        for (auto it = side->begin(); it != side->end();) it = it->second.empty() ? side->erase(it) : std::next(it);
      ++rep.checks;
      if (lhs != rhs) {
        rep.layer_c = false;
        rep.fail("layer c: Bullett-Macdonald fails on " + A.label(e, x));
      }
    }
  return rep;
}

// Higher Leibniz rule on random compositions mu(u_1, ..., u_k) against the subset formula
inline CheckReport check_higher_leibniz(const TwistedAlgebra& A, int samples, u32 seed) {
  CheckReport rep;
  const FreeAlgebra& alg = A.algebra();
  const Fp& f = alg.field();
  const u32 p = A.prime();
  std::mt19937 rng(seed);
  const int N = A.max_degree();
  for (int t = 0; t < samples; ++t) {
    const int k = 1 + static_cast<int>(rng() % 3);
    std::vector<Mono> us;
    int deg = 0;
    for (int j = 0; j < k; ++j) {
      int d = 1 + static_cast<int>(rng() % std::max(1, N / (2 * k)));
      if (A.dim(d) == 0) d = 1;
      us.push_back(A.basis(d)[rng() % A.dim(d)]);
      deg += d;
    }
    auto ops = alg.operad().basis(k);
    if (ops.empty()) continue;
    const OpCode mu = ops[rng() % ops.size()];
    auto m = alg.compose(mu, us);
    if (!m) continue;
    for (int i = 0; deg + static_cast<int>(i * (p - 1)) <= N && i <= deg; ++i) {
      ++rep.checks;
      Elem direct;
      std::vector<int> js(k, 0);
      std::function<void(int, int)> rec = [&](int j, int left) {
        if (j == k - 1) {
          js[j] = left;
          std::vector<Elem> parts;
          for (int r = 0; r < k; ++r) parts.push_back(A.derivation(js[r], us[r]));
          // multilinear composition
          std::vector<Mono> sel(k);
          std::function<void(int, u32)> expand = [&](int r, u32 c) {
            if (r == k) {
              if (auto z = alg.compose(mu, sel)) add_to(direct, *z, c, f);
              return;
            }
            for (auto& [mm, cc] : parts[r]) {
              sel[r] = mm;
              expand(r + 1, f.mul(c, cc));
            }
          };
          expand(0, 1);
          return;
        }
        for (int a = 0; a <= left; ++a) {
          js[j] = a;
          rec(j + 1, left - a);
        }
      };
      rec(0, i);
      if (direct != A.derivation(i, *m)) rep.fail("Leibniz rule fails on " + alg.to_string(*m) + " at D_" + std::to_string(i));
    }
  }
  return rep;
}

// P_0 t = (M t)^{star p} on every basis element, M acting letterwise
inline CheckReport check_top_power(const TwistedAlgebra& A) {
  CheckReport rep;
  const FreeAlgebra& alg = A.algebra();
  const auto& M = A.matrix();
  std::vector<Elem> img(M.rows());
  for (int b = 0; b < M.rows(); ++b)
    for (int a = 0; a < M.rows(); ++a) add_to(img[b], alg.letter(a), M(a, b), alg.field());
  const u32 p = A.prime();
  for (int d = 1; static_cast<int>(p) * d <= A.max_degree(); ++d)
    for (int x = 0; x < A.dim(d); ++x) {
      ++rep.checks;
      Elem Mt = alg.substitute_letters(A.basis(d)[x], [&](int l) -> const Elem& { return img[l]; });
      if (A.act(d, d, x) != A.coords(p * d, alg.star_power(Mt))) rep.fail("P_0 differs from the star power on " + A.label(d, x));
    }
  return rep;
}

inline std::vector<int> kernel_profile(const FpMatrix& M, int r) {
  std::vector<int> out;
  FpMatrix P = FpMatrix::identity(M.prime(), M.rows());
  for (int i = 1; i <= r; ++i) {
    P = P * M;
    out.push_back(M.rows() - rank(P));
  }
  return out;
}

// U'-isomorphism invariants: dims of the indecomposables A / sum_i P^i A and of the joint kernel
// of all P^i, i >= 1, that stay inside the truncation
struct InvariantDims {
  std::vector<int> indecomposable, primitive;
  auto operator<=>(const InvariantDims&) const = default;
};

inline InvariantDims invariant_dims(const GradedModule& A) {
  InvariantDims r;
  const u32 p = A.prime();
  const int N = A.max_degree();
  for (int d = 0; d <= N; ++d) {
    SparseEchelon im(p);
    for (int i = 1; d - A.step(i) >= 0; ++i)
      for (int x = 0; x < A.dim(d - A.step(i)); ++x) im.insert(A.act(i, d - A.step(i), x));
    r.indecomposable.push_back(A.dim(d) - im.rank());
  }
  // primitives only where every P^i with i <= d lands in the truncation
  for (int d = 0; d + A.step(d) <= N; ++d) {
    int rows = 0;
    for (int i = 1; i <= d; ++i) rows += A.dim(d + A.step(i));
    FpMatrix K(p, rows, A.dim(d));
    for (int x = 0; x < A.dim(d); ++x) {
      int off = 0;
      for (int i = 1; i <= d; ++i) {
        for (auto& [y, c] : A.act(i, d, x)) K(off + y, x) = c;
        off += A.dim(d + A.step(i));
      }
    }
    r.primitive.push_back(A.dim(d) - rank(K));
  }
  return r;
}

// all similarity classes of n x n matrices over F_p via rational canonical forms
inline std::vector<FpMatrix> canonical_form_representatives(u32 p, int n) {
  const Fp f(p);
  using Poly = std::vector<u32>;  // monic, low degree first
  auto monic = [&](int deg) {
    std::vector<Poly> out;
    u64 total = 1;
    for (int j = 0; j < deg; ++j) total *= p;
    for (u64 c = 0; c < total; ++c) {
      Poly q(deg + 1, 0);
      u64 t = c;
      for (int j = 0; j < deg; ++j, t /= p) q[j] = static_cast<u32>(t % p);
      q[deg] = 1;
      out.push_back(q);
    }
    return out;
  };
  auto divides = [&](const Poly& a, Poly b) {
    while (b.size() >= a.size()) {
      u32 c = b.back();
      const size_t sh = b.size() - a.size();
      for (size_t j = 0; j < a.size(); ++j) b[sh + j] = f.sub(b[sh + j], f.mul(c, a[j]));
      b.pop_back();
    }
    return std::all_of(b.begin(), b.end(), [](u32 x) { return x == 0; });
  };
  std::vector<FpMatrix> out;
  std::vector<Poly> chain;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      FpMatrix m(p, n, n);
      int off = 0;
      for (auto& q : chain) {
        const int k = static_cast<int>(q.size()) - 1;
        for (int j = 1; j < k; ++j) m(off + j, off + j - 1) = 1;
        for (int j = 0; j < k; ++j) m(off + j, off + k - 1) = f.neg(q[j]);
        off += k;
      }
      out.push_back(m);
      return;
    }
    for (int deg = 1; deg <= left; ++deg)
      for (auto& q : monic(deg)) {
        // invariant factors q_1 | q_2 | ...
        if (!chain.empty() && !divides(chain.back(), q)) continue;
        chain.push_back(q);
        rec(left - deg);
        chain.pop_back();
      }
  };
  rec(n);
  return out;
}

// exhaustive when p^{n^2} <= 4096, otherwise `samples` seeded matrices plus canonical forms
inline std::vector<FpMatrix> endomorphisms(u32 p, int n, u32 seed, int samples = 200) {
  std::vector<FpMatrix> out;
  u64 total = 1;
  for (int j = 0; j < n * n; ++j) total *= p;
  if (total <= 4096) {
    for (u64 c = 0; c < total; ++c) {
      FpMatrix m(p, n, n);
      u64 t = c;
      for (int j = 0; j < n * n; ++j, t /= p) m(j / n, j % n) = static_cast<u32>(t % p);
      out.push_back(m);
    }
    return out;
  }
  std::mt19937 rng(seed);
  for (int s = 0; s < samples; ++s) {
    FpMatrix m(p, n, n);
    for (int j = 0; j < n * n; ++j) m(j / n, j % n) = rng() % p;
    out.push_back(m);
  }
  for (auto& m : canonical_form_representatives(p, n)) out.push_back(m);
  return out;
}

struct ClassificationRecord {
  FpMatrix M;
  std::vector<int> profile;
  std::vector<int> graded;  // dim S_M in each unit degree
  InvariantDims dims;
  bool adem_pass = false;
  bool kernel_identity = false;
};

struct ClassificationReport : CheckReport {
  std::vector<ClassificationRecord> records;
  int classes = 0;
  bool separated = false;  // some pair of distinct profiles differs in invariant dims
};

// Ker M^j = Ker of P^{p^{j-1}} ... P^p P^1 on V
inline bool kernel_identity(const TwistedAlgebra& A, int j) {
  const int n = A.matrix().rows();
  const u32 p = A.prime();
  int deg = 1;
  std::vector<int> word;
  for (int r = 0; r < j; ++r) {
    word.insert(word.begin(), deg);
    deg *= static_cast<int>(p);
  }
  if (deg > A.max_degree()) throw std::out_of_range("composite leaves the truncation");
  FpMatrix C(p, A.dim(deg), n);
  for (int x = 0; x < n; ++x) {
    SparseVec img = *apply_word(A, word, 1, unit_vec(x));
    for (auto& [y, c] : img) C(y, x) = c;
  }
  FpMatrix Mj = FpMatrix::identity(p, n);
  for (int r = 0; r < j; ++r) Mj = Mj * A.matrix();
  auto k1 = kernel_basis(C), k2 = kernel_basis(Mj);
  if (k1.size() != k2.size()) return false;
  // same subspace: k1 is killed by M^j
  for (auto& v : k1) {
    auto w = Mj.apply(v);
    if (std::any_of(w.begin(), w.end(), [](u32 x) { return x != 0; })) return false;
  }
  return true;
}

inline ClassificationReport classification_experiment(OperadPtr P, u32 p, int n, int N, u32 seed, int max_j = 3) {
  ClassificationReport rep;
  auto Ms = endomorphisms(p, n, seed);
  rep.records.resize(Ms.size());
  for (size_t k = 0; k < Ms.size(); ++k) {
    TwistedAlgebra A(P, Ms[k], N);
    auto& r = rep.records[k];
    r.M = Ms[k];
    r.profile = kernel_profile(Ms[k], n + 1);
    r.dims = invariant_dims(A);
    for (int d = 0; d <= N; ++d) r.graded.push_back(A.dim(d));
    auto adem = check_adem_operators(A);
    r.adem_pass = adem.pass;
    r.kernel_identity = true;
    int deg = 1;
    for (int j = 1; j <= max_j; ++j) {
      deg *= static_cast<int>(p);
      if (deg > N) break;
      r.kernel_identity = r.kernel_identity && kernel_identity(A, j);
    }
    rep.checks += 2;
    if (!r.adem_pass) rep.fail("Adem check fails for M #" + std::to_string(k));
    if (!r.kernel_identity) rep.fail("kernel identity fails for M #" + std::to_string(k));
  }
  std::map<std::vector<int>, InvariantDims> by_profile;
  for (auto& r : rep.records) {
    auto [it, ins] = by_profile.emplace(r.profile, r.dims);
    ++rep.checks;
    if (!ins && !(it->second == r.dims)) rep.fail("equal kernel profiles with different invariant dims");
  }
  rep.classes = static_cast<int>(by_profile.size());
  for (auto a = by_profile.begin(); a != by_profile.end(); ++a)
    for (auto b = std::next(a); b != by_profile.end(); ++b)
      if (!(a->second == b->second)) rep.separated = true;
  ++rep.checks;
  if (rep.classes > 1 && !rep.separated) rep.fail("no pair of kernel-profile classes is separated");
  return rep;
}

// S_M and S_{AM} for invertible A commuting with M have the same invariant dims
inline CheckReport verify_commuting_twists(OperadPtr P, const FpMatrix& M, int N) {
  CheckReport rep;
  const u32 p = M.prime();
  const int n = M.rows();
  auto base = invariant_dims(TwistedAlgebra(P, M, N));
  for (auto& A : endomorphisms(p, n, 7)) {
    if (rank(A) != n || !(A * M == M * A)) continue;
    ++rep.checks;
    if (!(invariant_dims(TwistedAlgebra(P, A * M, N)) == base)) rep.fail("S_M and S_{AM} differ");
  }
  return rep;
}

// a copy of A with one action entry changed: P^1 on the first basis element y in the support of
// P^1 v_0 gains the first basis element of its target degree
inline std::shared_ptr<ModuleData> mutate_action(const GradedModule& A) {
  auto T = ModuleData::tabulate(A);
  auto v = A.act(1, 1, 0);
  if (v.empty()) throw std::invalid_argument("P^1 vanishes on the first generator");
  const int y = v.front().first, d = 1 + A.step(1);
  const int t = d + A.step(1);
  if (t > A.max_degree() || A.dim(t) == 0) throw std::invalid_argument("no room for a mutation");
  SparseVec w = A.act(1, d, y);
  const Fp f(A.prime());
  axpy(w, 1, unit_vec(0), f);
  T->set_action(1, d, y, w);
  return T;
}

}  // namespace unstalg
