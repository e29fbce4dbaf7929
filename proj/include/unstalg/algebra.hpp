#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "unstalg/operad.hpp"
#include "unstalg/steenrod.hpp"

namespace unstalg {

// A monomial (mu; x_1, ..., x_n) of S(P, M) in canonical form.
struct Mono {
  OpCode op;
  std::vector<int> word;
  auto operator<=>(const Mono&) const = default;
  bool operator==(const Mono&) const = default;
};

struct MonoHash {
  size_t operator()(const Mono& m) const noexcept {
    u64 h = 1469598103934665603ull ^ static_cast<u64>(m.op.arity);
    auto mix = [&](int v) {
      h ^= static_cast<u64>(static_cast<u32>(v));
      h *= 1099511628211ull;
    };
    for (int v : m.op.data) mix(v);
    mix(-7);
    for (int v : m.word) mix(v);
    return static_cast<size_t>(h);
  }
};

using Elem = std::map<Mono, u32>;

inline void add_to(Elem& e, const Mono& m, u32 c, const Fp& f) {
  if (!c) return;
  auto [it, ins] = e.emplace(m, c);
  if (!ins) {
    it->second = f.add(it->second, c);
    if (!it->second) e.erase(it);
  }
}
inline void axpy(Elem& acc, u32 c, const Elem& v, const Fp& f) {
  if (!c) return;
  for (auto& [m, x] : v) add_to(acc, m, f.mul(c, x), f);
}
inline Elem sub(const Elem& a, const Elem& b, const Fp& f) {
  Elem r = a;
  axpy(r, f.neg(1), b, f);
  return r;
}

inline constexpr int kZeroLetter = -1;      // d applied to the letter gives zero
inline constexpr int kOverflowLetter = -2;  // d leaves the configured exponent window

struct Letter {
  std::string name;
  int degree = 1;
  i64 weight = 0;
  int dshift = kOverflowLetter;  // letter id of d.x
};

class FreeAlgebra {
 public:
  // star: a Sigma_p-invariant basis element of P(p); with star_shifts the
  // p-th power also applies d to every letter, i.e. the star is (star; d, ..., d).
  FreeAlgebra(OperadPtr P, std::vector<Letter> letters, std::optional<OpCode> star, bool star_shifts = false)
      : P_(std::move(P)), f_(P_->prime()), letters_(std::move(letters)), star_(std::move(star)),
        star_shifts_(star_shifts) {
    for (auto& l : letters_) info_.push_back({l.degree, l.weight});
    if (star_ && !is_symmetric(*P_, single(*star_)))
      throw std::invalid_argument("star operation is not invariant under the symmetric group");
  }

  const Operad& operad() const { return *P_; }
  OperadPtr operad_ptr() const { return P_; }
  u32 prime() const { return f_.p; }
  const Fp& field() const { return f_; }
  const std::vector<Letter>& letters() const { return letters_; }
  const std::vector<LetterInfo>& info() const { return info_; }
  const std::optional<OpCode>& star() const { return star_; }
  bool star_shifts() const { return star_shifts_; }

  int degree(const Mono& m) const {
    int d = 0;
    for (int x : m.word) d += info_.at(x).degree;
    return d;
  }
  i64 weight(const Mono& m) const {
    i64 w = 0;
    for (int x : m.word) w += info_.at(x).weight;
    return w;
  }

  Mono canon(const OpCode& op, const std::vector<int>& word) const {
    std::vector<i64> keys(word.begin(), word.end());
    Perm o = P_->canonical_order(op, keys);
    Mono r{P_->act(op, o), std::vector<int>(word.size())};
    for (size_t j = 0; j < word.size(); ++j) r.word[j] = word[o[j]];
    return r;
  }

  Mono letter(int id) const { return {P_->unit(), {id}}; }
  Elem letter_elem(int id) const { return {{letter(id), 1}}; }

  // mu(t_1, ..., t_k)
  std::optional<Mono> compose(const OpCode& mu, const std::vector<Mono>& parts) const {
    std::vector<OpCode> ops;
    std::vector<int> word;
    for (auto& t : parts) {
      ops.push_back(t.op);
      word.insert(word.end(), t.word.begin(), t.word.end());
    }
    auto c = compose_total(*P_, mu, ops);
    if (!c) return std::nullopt;
    return canon(*c, word);
  }

  // d applied to every letter
  std::optional<Mono> shift(const Mono& m) const {
    Mono r = m;
    for (auto& x : r.word) {
      int y = letters_.at(x).dshift;
      if (y == kZeroLetter) return std::nullopt;
      if (y == kOverflowLetter) throw std::out_of_range("d leaves the exponent window on letter " + letters_[x].name);
      x = y;
    }
    return canon(r.op, r.word);
  }

  std::optional<Mono> star_power(const Mono& t) const {
    if (!star_) throw std::logic_error("no star operation configured");
    auto r = compose(*star_, std::vector<Mono>(star_->arity, t));
    if (!r || !star_shifts_) return r;
    return shift(*r);
  }
  // additive in characteristic p because the star is fully symmetric
  Elem star_power(const Elem& e) const {
    Elem r;
    for (auto& [m, c] : e)
      if (auto s = star_power(m)) add_to(r, *s, c, f_);
    return r;
  }

  // mu(x_1^{*p}, ..., x_k^{*p}) for a monomial mu(x_1, ..., x_k)
  std::optional<Mono> letterwise_power(const Mono& u) const {
    std::vector<Mono> parts;
    for (int x : u.word) {
      auto s = star_power(letter(x));
      if (!s) return std::nullopt;
      parts.push_back(*s);
    }
    return compose(u.op, parts);
  }

  // the monomial ctx with its input at `pos` replaced by g
  Elem substitute(const Mono& ctx, int pos, const Elem& g) const {
    Elem r;
    for (auto& [nu, c] : g) {
      auto code = P_->compose(ctx.op, pos, nu.op);
      if (!code) continue;
      std::vector<int> w(ctx.word.begin(), ctx.word.begin() + pos);
      w.insert(w.end(), nu.word.begin(), nu.word.end());
      w.insert(w.end(), ctx.word.begin() + pos + 1, ctx.word.end());
      add_to(r, canon(*code, w), c, f_);
    }
    return r;
  }

  // Multilinear substitution of an element for every letter.
  Elem substitute_letters(const Mono& m, const std::function<const Elem&(int)>& image) const {
    Elem out;
    const int k = static_cast<int>(m.word.size());
    std::vector<Mono> parts(k);
    std::function<void(int, u32)> rec = [&](int j, u32 coeff) {
      if (j == k) {
        if (auto r = compose(m.op, parts)) add_to(out, *r, coeff, f_);
        return;
      }
      for (auto& [t, c] : image(m.word[j])) {
        parts[j] = t;
        rec(j + 1, f_.mul(coeff, c));
      }
    };
    rec(0, 1);
    return out;
  }

  // Cartan formula for P^i, given the action on letters.
  Elem cartan(int i, const Mono& m, const std::function<SparseVec(int, int)>& act) const {
    Elem out;
    if (i == 0) {
      out[m] = 1;
      return out;
    }
    const int k = static_cast<int>(m.word.size());
    std::vector<int> cap(k + 1, 0);
    for (int j = k - 1; j >= 0; --j) cap[j] = cap[j + 1] + info_[m.word[j]].degree;
    if (cap[0] < i) return out;
    std::vector<int> w(k);
    std::function<void(int, int, u32)> rec = [&](int j, int left, u32 coeff) {
      if (j == k) {
        if (left == 0) add_to(out, canon(m.op, w), coeff, f_);
        return;
      }
      const int x = m.word[j];
      const int top = std::min(left, info_[x].degree);
      for (int a = std::max(0, left - cap[j + 1]); a <= top; ++a) {
        if (a == 0) {
          w[j] = x;
          rec(j + 1, left, coeff);
          continue;
        }
        for (auto& [y, c] : act(a, x)) {
          w[j] = y;
          rec(j + 1, left - a, f_.mul(coeff, c));
        }
      }
    };
    rec(0, i, 1);
    return out;
  }

  void enumerate(const std::vector<int>& ids, int degree, const MonoFilter& filt,
                 const std::function<void(const Mono&)>& cb) const {
    P_->enumerate(info_, ids, degree, filt, [&](const OpCode& c, const std::vector<int>& w) { cb(Mono{c, w}); });
  }
  // monomials over ids plus one extra letter (id = letters().size()) of degree zdeg occurring exactly once
  void enumerate_contexts(const std::vector<int>& ids, int zdeg, int degree,
                          const std::function<void(const Mono&)>& cb) const {
    auto info = info_;
    const int z = static_cast<int>(info.size());
    info.push_back({zdeg, 0});
    auto ids2 = ids;
    ids2.push_back(z);
    MonoFilter filt;
    filt.marked = z;
    filt.marked_count = 1;
    P_->enumerate(info, ids2, degree, filt, [&](const OpCode& c, const std::vector<int>& w) { cb(Mono{c, w}); });
  }
  std::vector<std::vector<u64>> count(const std::vector<int>& ids, int maxdeg, int wmod = 1) const {
    return P_->count(info_, ids, maxdeg, wmod);
  }
  std::vector<int> all_ids() const {
    std::vector<int> r(letters_.size());
    std::iota(r.begin(), r.end(), 0);
    return r;
  }

  std::string to_string(const Mono& m) const {
    std::string s = unstalg::to_string(m.op) + "(";
    for (size_t j = 0; j < m.word.size(); ++j) s += (j ? "," : "") + letters_.at(m.word[j]).name;
    return s + ")";
  }

 private:
  OperadPtr P_;
  Fp f_;
  std::vector<Letter> letters_;
  std::vector<LetterInfo> info_;
  std::optional<OpCode> star_;
  bool star_shifts_;
};

using AlgebraPtr = std::shared_ptr<const FreeAlgebra>;

// ---------------------------------------------------------------------------
// Operadic ideals, degree by degree.

struct DegreeSpan {
  std::vector<Mono> basis;
  std::unordered_map<Mono, int, MonoHash> index;
  SparseEchelon ech;
  bool materialized = false;
};

class IdealSpan {
 public:
  IdealSpan(AlgebraPtr alg, std::vector<int> ids, int N, std::map<int, std::vector<Elem>> gens, size_t cap = 400000)
      : alg_(std::move(alg)), ids_(std::move(ids)), N_(N), cap_(cap), spans_(N + 1) {
    for (auto& [d, list] : gens)
      for (auto& g : list)
        if (!g.empty() && d <= N_) gens_[d].push_back(g);
    for (auto& s : spans_) s.ech = SparseEchelon(alg_->prime());
  }

  const FreeAlgebra& algebra() const { return *alg_; }
  const std::vector<int>& ids() const { return ids_; }
  int max_degree() const { return N_; }
  bool has_generators() const { return !gens_.empty(); }
  const std::map<int, std::vector<Elem>>& generators() const { return gens_; }
  int min_generator_degree() const { return gens_.empty() ? N_ + 1 : gens_.begin()->first; }
  bool trivially_zero(int d) const { return d < min_generator_degree(); }

  // basis, index and ideal echelon of degree d (built on first use)
  const DegreeSpan& at(int d) const {
    std::lock_guard<std::mutex> lk(mu_);
    DegreeSpan& s = spans_.at(d);
    if (s.materialized) return s;
    alg_->enumerate(ids_, d, {}, [&](const Mono& m) {
      if (s.basis.size() >= cap_)
        throw std::runtime_error("degree " + std::to_string(d) + " has more than " + std::to_string(cap_) +
                                 " monomials; lower the truncation");
      s.index.emplace(m, static_cast<int>(s.basis.size()));
      s.basis.push_back(m);
    });
    for (auto& [e, list] : gens_) {
      if (e > d) break;
      alg_->enumerate_contexts(ids_, e, d, [&](const Mono& ctx) {
        const int z = static_cast<int>(alg_->letters().size());
        int pos = static_cast<int>(std::find(ctx.word.begin(), ctx.word.end(), z) - ctx.word.begin());
        for (auto& g : list) s.ech.insert(vec_unlocked(s, alg_->substitute(ctx, pos, g)));
      });
    }
    s.materialized = true;
    return s;
  }

  int rank(int d) const { return trivially_zero(d) ? 0 : at(d).ech.rank(); }

  SparseVec vec(int d, const Elem& e) const {
    const DegreeSpan& s = at(d);
    return vec_unlocked(s, e);
  }
  bool contains_vec(int d, const SparseVec& v) const { return at(d).ech.reduce(v).empty(); }
  bool contains(int d, const Elem& e) const {
    if (e.empty()) return true;
    return at(d).ech.reduce(vec(d, e)).empty();
  }

 private:
  SparseVec vec_unlocked(const DegreeSpan& s, const Elem& e) const {
    SparseVec v;
    for (auto& [m, c] : e) {
      auto it = s.index.find(m);
      if (it == s.index.end()) throw std::logic_error("monomial outside the basis: " + alg_->to_string(m));
      v.emplace_back(it->second, c);
    }
    std::sort(v.begin(), v.end());
    return v;
  }

  AlgebraPtr alg_;
  std::vector<int> ids_;
  int N_;
  size_t cap_;
  std::map<int, std::vector<Elem>> gens_;
  mutable std::mutex mu_;
  mutable std::vector<DegreeSpan> spans_;
};

// ---------------------------------------------------------------------------
// Generating modules of the quotient constructions.

struct GeneratingModule {
  u32 p = 2;
  int N = 0;  // unit degree truncation
  std::vector<Letter> letters;
  std::function<SparseVec(int, int)> action;  // P^i on a letter; empty for plain Frobenius spaces
  std::function<SparseVec(int)> frobenius;    // degree-multiplying-by-p map on letters

  std::vector<int> of_degree(int d) const {
    std::vector<int> r;
    for (size_t j = 0; j < letters.size(); ++j)
      if (letters[j].degree == d) r.push_back(static_cast<int>(j));
    return r;
  }
};

// The letters of a module, optionally decorated by exponents d^e; the A'-action
// and P_0 act on the module factor.
inline GeneratingModule letters_from_module(ModulePtr M, std::optional<UnaryVariant> var = std::nullopt,
                                            std::function<i64(int /*exp*/, int /*deg*/, int /*idx*/)> weight = {}) {
  GeneratingModule g;
  g.p = M->prime();
  g.N = M->max_degree();
  std::vector<std::pair<int, int>> base;
  std::map<std::pair<int, int>, int> base_index;
  for (int d = 1; d <= g.N; ++d)
    for (int x = 0; x < M->dim(d); ++x) {
      base_index[{d, x}] = static_cast<int>(base.size());
      base.emplace_back(d, x);
    }
  if (M->dim(0) > 0) throw std::invalid_argument("generating module must be connected (nothing in degree 0)");
  std::vector<int> exps = var ? var->exponents() : std::vector<int>{0};
  const int nb = static_cast<int>(base.size());
  std::map<int, int> exp_index;
  for (size_t e = 0; e < exps.size(); ++e) exp_index[exps[e]] = static_cast<int>(e);
  for (size_t e = 0; e < exps.size(); ++e)
    for (int b = 0; b < nb; ++b) {
      auto [d, x] = base[b];
      Letter l;
      l.name = (var ? "d" + std::to_string(exps[e]) + "." : "") + M->label(d, x);
      l.degree = d;
      l.weight = weight ? weight(exps[e], d, x) : 0;
      if (var) {
        int ne = exps[e] + 1;
        std::optional<int> r;
        bool overflow = false;
        try {
          r = var->reduce(ne);
        } catch (const std::out_of_range&) {
          overflow = true;
        }
        if (overflow || (r && !exp_index.count(*r))) l.dshift = kOverflowLetter;
        else if (!r) l.dshift = kZeroLetter;
        else l.dshift = exp_index[*r] * nb + b;
      }
      g.letters.push_back(l);
    }
  g.action = [M, base, base_index, nb](int i, int id) {
    const int e = id / nb;
    auto [d, x] = base[id % nb];
    SparseVec out;
    if (d + M->step(i) > M->max_degree()) return out;
    for (auto& [y, c] : M->act(i, d, x)) out.emplace_back(e * nb + base_index.at({d + M->step(i), y}), c);
    std::sort(out.begin(), out.end());
    return out;
  };
  auto act = g.action;
  g.frobenius = [base, nb, act](int id) { return act(base[id % nb].first, id); };
  return g;
}

// Fr(V): letters b^{[p^k]} for generators b of the given unit degrees.
inline GeneratingModule frobenius_free(u32 p, const std::vector<int>& gen_degrees, int N) {
  GeneratingModule g;
  g.p = p;
  g.N = N;
  std::vector<std::pair<int, int>> key;  // (generator, k)
  for (size_t b = 0; b < gen_degrees.size(); ++b) {
    if (gen_degrees[b] < 1) throw std::invalid_argument("Frobenius generators need positive degree");
    i64 deg = gen_degrees[b];
    for (int k = 0; deg <= N; ++k, deg *= p) {
      g.letters.push_back({"v" + std::to_string(b) + "^[" + std::to_string(p) + "^" + std::to_string(k) + "]",
                           static_cast<int>(deg), 0, kOverflowLetter});
      key.emplace_back(static_cast<int>(b), k);
    }
  }
  std::map<std::pair<int, int>, int> index;
  for (size_t j = 0; j < key.size(); ++j) index[key[j]] = static_cast<int>(j);
  g.frobenius = [key, index](int id) {
    auto [b, k] = key[id];
    auto it = index.find({b, k + 1});
    if (it == index.end()) return SparseVec{};
    return SparseVec{{it->second, 1}};
  };
  return g;
}

// ---------------------------------------------------------------------------
// S(P, M) modulo the operadic ideal generated by F(t) - t^{*p}, where F is P_0
// (the unstable construction K) or a Frobenius map (the construction A).
//
// Eliminate: in each degree the image of F on letters is row reduced; every
// pivot letter e is rewritten through its preimage y as rho(y)^{*p} minus
// non-pivot letters, and kernel vectors z of F contribute rho(z)^{*p}. The
// quotient is then S(P, C) over the non-pivot letters C modulo the ideal
// generated by those kernel powers and by mu(c_1^{*p}, ...) - mu(c_1, ...)^{*p}.
// Direct: the ideal is spanned in S(P, M) itself from all generators.

enum class Strategy { Eliminate, Direct };

class UnstableQuotient : public GradedModule {
 public:
  UnstableQuotient(OperadPtr P, std::optional<OpCode> star, bool star_shifts, GeneratingModule M,
                   Strategy strategy = Strategy::Eliminate, size_t cap = 400000, int wmod = 1)
      : M_(std::move(M)), strategy_(strategy), wmod_(std::max(1, wmod)) {
    if (!star) throw std::invalid_argument(P->name() + " has no distinguished p-ary operation");
    std::vector<Letter> kept_letters;
    std::vector<Letter> all;
    for (auto& l : M_.letters) all.push_back(l);
    for (auto& l : all)
      if (l.degree < 1) throw std::invalid_argument("letters of degree 0 are not supported");
    alg_ = std::make_shared<FreeAlgebra>(P, all, star, star_shifts);
    const int N = M_.N;
    const int p = static_cast<int>(M_.p);
    Fp f(M_.p);
    std::map<int, std::vector<Elem>> gens;
    if (strategy_ == Strategy::Direct) {
      kept_ = alg_->all_ids();
      rho_.resize(all.size());
      for (int id : kept_) rho_[id] = alg_->letter_elem(id);
      central_ = is_central(*P, single(*star), std::min(4, p + 1)).central;
      for (int d = 1; d * p <= N; ++d)
        alg_->enumerate(kept_, d, {}, [&](const Mono& t) {
          Elem g = frob_monomial(t);
          if (auto s = alg_->star_power(t)) add_to(g, *s, f.neg(1), f);
          if (!g.empty()) gens[d * p].push_back(std::move(g));
        });
    } else {
      std::vector<char> pivot(all.size(), 0);
      struct Row {
        int letter;
        std::vector<std::pair<int, u32>> y;       // preimage over letters
        std::vector<std::pair<int, u32>> others;  // non-pivot entries of F(y)
      };
      std::map<int, Row> rows;
      std::vector<std::pair<int, std::vector<std::pair<int, u32>>>> kernel;  // (degree, vector)
      for (int d = 1; d * p <= N; ++d) {
        auto src = M_.of_degree(d), tgt = M_.of_degree(d * p);
        if (src.empty()) continue;
        std::map<int, int> tpos;
        for (size_t j = 0; j < tgt.size(); ++j) tpos[tgt[j]] = static_cast<int>(j);
        FpMatrix F(M_.p, static_cast<int>(tgt.size()), static_cast<int>(src.size()));
        for (size_t b = 0; b < src.size(); ++b)
          for (auto& [y, c] : M_.frobenius(src[b])) F(tpos.at(y), static_cast<int>(b)) = c;
        ImageData im = image_with_preimages(F);
        for (size_t r = 0; r < im.rows.size(); ++r) {
          Row row;
          row.letter = tgt[im.pivots[r]];
          for (size_t b = 0; b < src.size(); ++b)
            if (im.preimages[r][b]) row.y.emplace_back(src[b], im.preimages[r][b]);
          pivot[row.letter] = 1;
          rows[row.letter] = row;
        }
        for (size_t r = 0; r < im.rows.size(); ++r) {
          Row& row = rows[tgt[im.pivots[r]]];
          for (size_t j = 0; j < tgt.size(); ++j)
            if (im.rows[r][j] && !pivot[tgt[j]]) row.others.emplace_back(tgt[j], im.rows[r][j]);
        }
        for (auto& z : im.kernel) {
          std::vector<std::pair<int, u32>> v;
          for (size_t b = 0; b < src.size(); ++b)
            if (z[b]) v.emplace_back(src[b], z[b]);
          kernel.emplace_back(d, v);
        }
      }
      for (size_t id = 0; id < all.size(); ++id)
        if (!pivot[id]) kept_.push_back(static_cast<int>(id));
      rho_.resize(all.size());
      std::vector<int> order(all.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return all[a].degree < all[b].degree; });
      for (int id : order) {
        if (!pivot[id]) {
          rho_[id] = alg_->letter_elem(id);
          continue;
        }
        const Row& row = rows.at(id);
        // letters whose rewriting leaves the exponent window stay unusable
        try {
          Elem y;
          for (auto& [l, c] : row.y) axpy(y, c, rho_letter(l), f);
          Elem r = alg_->star_power(y);
          for (auto& [l, c] : row.others) add_to(r, alg_->letter(l), f.neg(c), f);
          rho_[id] = std::move(r);
        } catch (const std::out_of_range&) {
          rho_[id].reset();
        }
      }
      for (auto& [d, v] : kernel) {
        Elem z;
        for (auto& [l, c] : v) axpy(z, c, rho_letter(l), f);
        Elem g = alg_->star_power(z);
        if (!g.empty()) gens[d * p].push_back(std::move(g));
      }
      // mu(c^{*p}, ...) = mu(c, ...)^{*p} identically when the star is central
      central_ = is_central(*P, single(*star), std::min(4, p + 1)).central;
      for (int d = 1; d * p <= N && !central_; ++d)
        alg_->enumerate(kept_, d, {}, [&](const Mono& u) {
          Elem g;
          if (auto a = alg_->letterwise_power(u)) add_to(g, *a, 1, f);
          if (auto b = alg_->star_power(u)) add_to(g, *b, f.neg(1), f);
          if (!g.empty()) {
            ++defects_;
            gens[d * p].push_back(std::move(g));
          }
        });
    }
    ideal_ = std::make_unique<IdealSpan>(alg_, kept_, N, gens, cap);
    counts_ = alg_->count(kept_, N, wmod_);
  }

  // GradedModule
  u32 prime() const override { return M_.p; }
  int max_degree() const override { return M_.N; }
  int dim(int d) const override {
    if (d < 0 || d > M_.N) return 0;
    u64 c = 0;
    for (auto v : counts_[d]) c += v;
    return static_cast<int>(c - static_cast<u64>(ideal_->rank(d)));
  }
  u64 dim_u64(int d) const {
    u64 c = 0;
    for (auto v : counts_[d]) c += v;
    return c - static_cast<u64>(ideal_->rank(d));
  }
  // dimension of the weight-w part (weights mod the wmod given at construction)
  u64 dim_weight(int d, int w) const {
    u64 c = counts_[d][w];
    if (ideal_->trivially_zero(d)) return c;
    const DegreeSpan& s = ideal_->at(d);
    for (auto& row : s.ech.rows())
      if (mod_floor(alg_->weight(s.basis[row.front().first]), wmod_) == w) --c;
    return c;
  }
  int weight_modulus() const { return wmod_; }

  SparseVec act(int i, int d, int idx) const override {
    if (!M_.action) throw std::logic_error("no A'-action on a plain Frobenius quotient");
    const Mono& u = basis(d).at(idx);
    return coords(d + step(i), rho(alg_->cartan(i, u, M_.action)));
  }
  std::string label(int d, int idx) const override { return alg_->to_string(basis(d).at(idx)); }

  const FreeAlgebra& algebra() const { return *alg_; }
  AlgebraPtr algebra_ptr() const { return alg_; }
  const GeneratingModule& generating() const { return M_; }
  const IdealSpan& ideal() const { return *ideal_; }
  const std::vector<int>& kept_letters() const { return kept_; }
  Strategy strategy() const { return strategy_; }
  long defect_count() const { return defects_; }
  const std::vector<std::vector<u64>>& free_counts() const { return counts_; }
  u64 free_count(int d) const {
    u64 c = 0;
    for (auto v : counts_[d]) c += v;
    return c;
  }
  bool ideal_vanishes() const { return !ideal_->has_generators(); }
  const Elem& rho_letter(int id) const {
    if (!rho_.at(id)) throw std::out_of_range("letter " + M_.letters[id].name + " rewrites outside the exponent window");
    return *rho_[id];
  }
  bool star_central() const { return central_; }

  // rewrite an element of S(P, M) into S(P, C)
  Elem rho(const Elem& e) const {
    if (strategy_ == Strategy::Direct) return e;
    Fp f(M_.p);
    Elem out;
    for (auto& [m, c] : e) {
      bool plain = std::all_of(m.word.begin(), m.word.end(), [&](int x) { return is_kept(x); });
      if (plain) add_to(out, m, c, f);
      else axpy(out, c, alg_->substitute_letters(m, [&](int x) -> const Elem& { return rho_letter(x); }), f);
    }
    return out;
  }
  Elem rho(const Mono& m) const { return rho(Elem{{m, 1}}); }

  // P^i then rho, without reduction modulo the ideal
  Elem act_free(int i, const Mono& u) const { return rho(alg_->cartan(i, u, M_.action)); }

  // quotient basis of degree d: monomials of S(P, C) not pivots of the ideal
  const std::vector<Mono>& basis(int d) const {
    std::lock_guard<std::mutex> lk(bmu_);
    auto it = qbasis_.find(d);
    if (it != qbasis_.end()) return it->second.monos;
    const DegreeSpan& s = ideal_->at(d);
    QBasis q;
    q.pos.assign(s.basis.size(), -1);
    for (size_t j = 0; j < s.basis.size(); ++j)
      if (!s.ech.is_pivot(static_cast<int>(j))) {
        q.pos[j] = static_cast<int>(q.monos.size());
        q.monos.push_back(s.basis[j]);
      }
    return qbasis_.emplace(d, std::move(q)).first->second.monos;
  }

  // coordinates in the quotient basis of an element of S(P, C)^d
  SparseVec coords(int d, const Elem& e) const {
    if (d > M_.N) throw std::out_of_range("degree beyond the truncation");
    basis(d);
    const DegreeSpan& s = ideal_->at(d);
    SparseVec r = s.ech.reduce(ideal_->vec(d, e));
    const QBasis& q = qbasis_.at(d);
    SparseVec out;
    for (auto& [j, c] : r) out.emplace_back(q.pos[j], c);
    return out;
  }
  bool is_kept(int id) const { return std::binary_search(kept_.begin(), kept_.end(), id); }

 private:
  // F(t) on a monomial: P_0 by the Cartan formula, or the Frobenius letterwise
  Elem frob_monomial(const Mono& t) const {
    if (M_.action) return alg_->cartan(alg_->degree(t), t, M_.action);
    std::map<int, Elem> img;
    for (int x : t.word) {
      Elem e;
      for (auto& [y, c] : M_.frobenius(x)) add_to(e, alg_->letter(y), c, alg_->field());
      img[x] = e;
    }
    return alg_->substitute_letters(t, [&](int x) -> const Elem& { return img.at(x); });
  }

  struct QBasis {
    std::vector<Mono> monos;
    std::vector<int> pos;
  };

  GeneratingModule M_;
  Strategy strategy_;
  int wmod_;
  std::shared_ptr<FreeAlgebra> alg_;
  std::vector<int> kept_;
  std::vector<std::optional<Elem>> rho_;
  bool central_ = false;
  std::unique_ptr<IdealSpan> ideal_;
  std::vector<std::vector<u64>> counts_;
  long defects_ = 0;
  mutable std::mutex bmu_;
  mutable std::map<int, QBasis> qbasis_;
};

// ---------------------------------------------------------------------------
// free algebra on a module, with the Cartan action, as a graded module

class FreeAlgebraModule : public GradedModule {
 public:
  FreeAlgebraModule(AlgebraPtr alg, GeneratingModule M, size_t cap = 400000)
      : alg_(std::move(alg)), M_(std::move(M)), span_(alg_, alg_->all_ids(), M_.N, {}, cap) {}
  u32 prime() const override { return M_.p; }
  int max_degree() const override { return M_.N; }
  int dim(int d) const override { return static_cast<int>(span_.at(d).basis.size()); }
  SparseVec act(int i, int d, int idx) const override {
    return span_.vec(d + step(i), alg_->cartan(i, span_.at(d).basis[idx], M_.action));
  }
  std::string label(int d, int idx) const override { return alg_->to_string(span_.at(d).basis[idx]); }
  const IdealSpan& span() const { return span_; }
  const FreeAlgebra& algebra() const { return *alg_; }

 private:
  AlgebraPtr alg_;
  GeneratingModule M_;
  IdealSpan span_;
};

// ---------------------------------------------------------------------------
// checks on the quotients

inline Elem to_elem(const DegreeSpan& s, const SparseVec& v) {
  Elem e;
  for (auto& [j, c] : v) e.emplace(s.basis[j], c);
  return e;
}

// The ideal span of a Direct quotient is stable under every P^i staying in the truncation.
inline CheckReport check_ideal_stability(const UnstableQuotient& K) {
  CheckReport rep;
  if (K.strategy() != Strategy::Direct) throw std::logic_error("stability is checked on the Direct span");
  const IdealSpan& I = K.ideal();
  const auto& act = K.generating().action;
  for (int d = I.min_generator_degree(); d <= K.max_degree(); ++d) {
    const DegreeSpan& s = I.at(d);
    for (auto& row : s.ech.rows()) {
      Elem g = to_elem(s, row);
      for (int i = 1; d + K.step(i) <= K.max_degree(); ++i) {
        ++rep.checks;
        Elem image;
        for (auto& [m, c] : g) axpy(image, c, K.algebra().cartan(i, m, act), K.algebra().field());
        if (!I.contains(d + K.step(i), image))
          rep.fail("P^" + std::to_string(i) + " leaves the ideal in degree " + std::to_string(d));
      }
    }
  }
  return rep;
}

// same ideal component in every degree (both spans must live on the same monomials)
inline CheckReport compare_ideals(const IdealSpan& a, const IdealSpan& b) {
  CheckReport rep;
  const int N = std::min(a.max_degree(), b.max_degree());
  for (int d = 0; d <= N; ++d) {
    ++rep.checks;
    if (a.rank(d) != b.rank(d)) {
      rep.fail("ranks differ in degree " + std::to_string(d) + ": " + std::to_string(a.rank(d)) + " vs " +
               std::to_string(b.rank(d)));
      continue;
    }
    if (a.rank(d) == 0) continue;
    const DegreeSpan& sa = a.at(d);
    const DegreeSpan& sb = b.at(d);
    for (auto& row : sa.ech.rows())
      if (!b.contains(d, to_elem(sa, row))) rep.fail("ideal spans differ in degree " + std::to_string(d));
    for (auto& row : sb.ech.rows())
      if (!a.contains(d, to_elem(sb, row))) rep.fail("ideal spans differ in degree " + std::to_string(d));
  }
  return rep;
}

struct IsoReport {
  bool central = false, invariant = false, reduced = false, connected = false;
  bool pass = false;  // the comparison map is bijective in every degree <= N
  int first_mismatch = -1;
  std::vector<u64> dims_quotient, dims_free;
  bool cross_checked = false;
  std::string detail;
};

// dims of S(P, V) for graded letters without action
inline std::vector<u64> free_dims(OperadPtr P, const std::vector<int>& degrees, int N) {
  std::vector<LetterInfo> info;
  std::vector<int> ids;
  for (size_t j = 0; j < degrees.size(); ++j) {
    if (degrees[j] > N) continue;
    info.push_back({degrees[j], 0});
    ids.push_back(static_cast<int>(info.size()) - 1);
  }
  auto c = P->count(info, ids, N, 1);
  std::vector<u64> out(N + 1, 0);
  for (int d = 0; d <= N; ++d)
    for (auto v : c[d]) out[d] += v;
  return out;
}

inline std::vector<int> letter_degrees(const GradedModule& M) {
  std::vector<int> r;
  for (int d = 1; d <= M.max_degree(); ++d)
    for (int x = 0; x < M.dim(d); ++x) r.push_back(d);
  return r;
}

// K^*_P(M) against S(P, Sigma Omega M) through psi_s, where s is the graded section
// of sigma_omega. The map is the identity on monomials over the section letters
// followed by the quotient map, so it is bijective in degree d exactly when the
// ideal component vanishes there. With direct_upto >= 0 the map is also computed
// into the Direct quotient S(P, M)/I degree by degree and its rank is checked.
inline IsoReport verify_iso(OperadPtr P, ModulePtr M, int direct_upto = -1, size_t cap = 400000) {
  IsoReport r;
  const int N = M->max_degree();
  auto star = P->star();
  if (!star) {
    r.detail = P->name() + " has no distinguished operation";
    return r;
  }
  auto cen = is_central(*P, single(*star), std::min(4, static_cast<int>(P->prime()) + 1));
  r.central = cen.central;
  r.invariant = cen.invariant;
  r.reduced = is_reduced(*M);
  r.connected = M->dim(0) == 0;
  if (!r.connected) {
    r.detail = "generating module has classes in degree 0";
    return r;
  }
  auto so = sigma_omega(*M);
  r.dims_free = free_dims(P, letter_degrees(*so.quotient), N);
  UnstableQuotient K(P, star, false, letters_from_module(M), Strategy::Eliminate, cap);
  r.dims_quotient.assign(N + 1, 0);
  r.pass = true;
  for (int d = 0; d <= N; ++d) {
    r.dims_quotient[d] = K.dim_u64(d);
    const bool ok = K.ideal().rank(d) == 0 && r.dims_quotient[d] == r.dims_free[d];
    if (!ok && r.pass) {
      r.pass = false;
      r.first_mismatch = d;
      r.detail = "degree " + std::to_string(d) + ": quotient " + std::to_string(r.dims_quotient[d]) + " vs free " +
                 std::to_string(r.dims_free[d]);
    }
  }
  if (direct_upto >= 0) {
    r.cross_checked = true;
    const int Nd = std::min(N, direct_upto);
    // the Direct quotient is computed on the truncated module
    auto T = std::make_shared<ModuleData>(M->prime(), Nd);
    for (int d = 0; d <= Nd; ++d)
      for (int x = 0; x < M->dim(d); ++x) T->add_basis(d, M->label(d, x));
    for (int d = 0; d <= Nd; ++d)
      for (int x = 0; x < M->dim(d); ++x)
        for (int i = 1; d + M->step(i) <= Nd; ++i) T->set_action(i, d, x, M->act(i, d, x));
    UnstableQuotient D(P, star, false, letters_from_module(T), Strategy::Direct, cap);
    // section letters, as letter ids of the truncated module
    std::vector<int> section_ids;
    int offset = 0;
    for (int d = 1; d <= Nd; ++d) {
      for (int x : so.section[d]) section_ids.push_back(offset + x);
      offset += T->dim(d);
    }
    std::vector<int> ids = section_ids;
    for (int d = 0; d <= Nd; ++d) {
      std::vector<SparseVec> cols;
      D.algebra().enumerate(ids, d, {}, [&](const Mono& u) { cols.push_back(D.coords(d, {{u, 1}})); });
      SparseEchelon e(M->prime());
      for (auto& c : cols) e.insert(c);
      const bool bij = e.rank() == static_cast<int>(cols.size()) && e.rank() == D.dim(d);
      const bool agree = static_cast<u64>(D.dim(d)) == r.dims_quotient[d];
      if ((!bij || !agree) && r.pass) {
        r.pass = false;
        r.first_mismatch = d;
        r.detail = "Direct check fails in degree " + std::to_string(d);
      }
      if (!agree && r.detail.empty()) r.detail = "strategies disagree in degree " + std::to_string(d);
    }
  }
  if (r.pass && r.detail.empty()) r.detail = "bijective through degree " + std::to_string(N);
  return r;
}

// A^*_P(Fr V) against S(P, V).
struct FrobeniusReport {
  bool central = false;
  bool pass = false;
  int first_mismatch = -1;
  std::vector<u64> dims_quotient, dims_free;
  std::string detail;
};

inline FrobeniusReport verify_frobenius(OperadPtr P, const std::vector<int>& gen_degrees, int N,
                                        size_t cap = 400000) {
  FrobeniusReport r;
  auto star = P->star();
  if (!star) throw std::invalid_argument(P->name() + " has no distinguished operation");
  r.central = is_central(*P, single(*star), std::min(4, static_cast<int>(P->prime()) + 1)).central;
  UnstableQuotient A(P, star, false, frobenius_free(P->prime(), gen_degrees, N), Strategy::Eliminate, cap);
  r.dims_free = free_dims(P, gen_degrees, N);
  r.dims_quotient.assign(N + 1, 0);
  r.pass = true;
  for (int d = 0; d <= N; ++d) {
    r.dims_quotient[d] = A.dim_u64(d);
    if (r.dims_quotient[d] != r.dims_free[d] && r.pass) {
      r.pass = false;
      r.first_mismatch = d;
      r.detail = "degree " + std::to_string(d) + ": quotient " + std::to_string(r.dims_quotient[d]) + " vs free " +
                 std::to_string(r.dims_free[d]);
    }
  }
  if (r.pass) r.detail = "dimensions agree through degree " + std::to_string(N);
  return r;
}

// E(V): b^{[p^k]} - b^{*p^k} as generators over S(P, Fr V)
inline std::map<int, std::vector<Elem>> frobenius_split_generators(const FreeAlgebra& alg, const GeneratingModule& fr) {
  const int n = static_cast<int>(fr.letters.size());
  std::vector<int> next(n, -1);
  std::vector<char> hit(n, 0);
  for (int j = 0; j < n; ++j) {
    auto v = fr.frobenius(j);
    if (v.empty()) continue;
    if (v.size() != 1 || v[0].second != 1) throw std::invalid_argument("not a free Frobenius space");
    next[j] = v[0].first;
    hit[v[0].first] = 1;
  }
  std::map<int, std::vector<Elem>> gens;
  Fp f(alg.prime());
  for (int b = 0; b < n; ++b) {
    if (hit[b]) continue;
    std::optional<Mono> t = alg.letter(b);
    for (int j = next[b]; j >= 0; j = next[j]) {
      if (t) t = alg.star_power(*t);
      Elem g = alg.letter_elem(j);
      if (t) add_to(g, *t, f.neg(1), f);
      gens[fr.letters[j].degree].push_back(g);
    }
  }
  return gens;
}

// X(M): x^{[p]} - x^{*p} on letters only
inline std::map<int, std::vector<Elem>> frobenius_letter_generators(const FreeAlgebra& alg, const GeneratingModule& fr) {
  std::map<int, std::vector<Elem>> gens;
  Fp f(alg.prime());
  for (size_t j = 0; j < fr.letters.size(); ++j) {
    const int d = fr.letters[j].degree * static_cast<int>(alg.prime());
    if (d > fr.N) continue;
    Elem g;
    for (auto& [y, c] : fr.frobenius(static_cast<int>(j))) add_to(g, alg.letter(y), c, f);
    if (auto s = alg.star_power(alg.letter(static_cast<int>(j)))) add_to(g, *s, f.neg(1), f);
    gens[d].push_back(g);
  }
  return gens;
}

// ---------------------------------------------------------------------------
// helpers over operad families

inline OperadPtr make_operad(const std::string& name, u32 p, int bound = 0) {
  if (name == "ucom") return std::make_shared<LevelOperad>(LevelKind::UCom, p);
  if (name == "com") return std::make_shared<LevelOperad>(LevelKind::Com, p);
  if (name == "lev") return std::make_shared<LevelOperad>(LevelKind::Lev, p);
  if (name == "tqlev") return std::make_shared<LevelOperad>(LevelKind::TqLev, p, bound);
  if (name == "pi") return std::make_shared<LevelOperad>(LevelKind::Pi, p, bound);
  if (name == "magcom") return std::make_shared<MagComOperad>(p);
  throw std::invalid_argument("unknown operad '" + name + "'");
}

}  // namespace unstalg
