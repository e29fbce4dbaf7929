#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "unstalg/fp.hpp"

namespace unstalg {

// A basis element of an operad: its arity plus an operad-specific code.
struct OpCode {
  int arity = 0;
  std::vector<int> data;
  auto operator<=>(const OpCode&) const = default;
  bool operator==(const OpCode&) const = default;
};

// 0-based permutation; sigma[j] is the image of j.
using Perm = std::vector<int>;

inline Perm identity_perm(int n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}
// (s*t)(j) = s(t(j))
inline Perm compose_perm(const Perm& s, const Perm& t) {
  Perm r(t.size());
  for (size_t j = 0; j < t.size(); ++j) r[j] = s[t[j]];
  return r;
}
inline Perm inverse_perm(const Perm& s) {
  Perm r(s.size());
  for (size_t j = 0; j < s.size(); ++j) r[s[j]] = static_cast<int>(j);
  return r;
}

// Block transposition of a p x n grid: i*n + k goes to k*p + i.
inline Perm sigma_block_perm(int p, int n) {
  if (p < 1 || n < 0) throw std::invalid_argument("sigma_block_perm needs p >= 1, n >= 0");
  Perm s(static_cast<size_t>(p) * n);
  for (int i = 0; i < p; ++i)
    for (int k = 0; k < n; ++k) s[i * n + k] = k * p + i;
  return s;
}

// Letters seen by the monomial enumerators: degree in grading units and an
// additive integer weight.
struct LetterInfo {
  int degree = 1;
  i64 weight = 0;
};

struct MonoFilter {
  int marked = -1;       // letter id whose occurrences are constrained
  int marked_count = 0;  // exact number of occurrences of `marked`
  std::optional<i64> weight_target;  // exact total weight
  i64 weight_mod = 0;                // with weight_residue: total weight mod m
  i64 weight_residue = 0;
};

inline i64 mod_floor(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

using MonoCallback = std::function<void(const OpCode&, const std::vector<int>&)>;

class Operad {
 public:
  virtual ~Operad() = default;
  virtual std::string name() const = 0;
  virtual u32 prime() const = 0;
  virtual OpCode unit() const = 0;
  // partial composition a o_i b (0-based slot); nullopt means the composite is zero
  virtual std::optional<OpCode> compose(const OpCode& a, int i, const OpCode& b) const = 0;
  // right action: the result is a.sigma
  virtual OpCode act(const OpCode& a, const Perm& sigma) const = 0;
  virtual std::vector<OpCode> basis(int n) const = 0;
  virtual std::optional<OpCode> star() const { return std::nullopt; }
  // An ordering `order` of the inputs such that (act(code, order), keys o order)
  // is the canonical representative of the orbit of (code, keys).
  virtual Perm canonical_order(const OpCode& code, const std::vector<i64>& keys) const = 0;

  // Canonical monomials (code, word) of total degree `degree` over the letters `ids`.
  virtual void enumerate(const std::vector<LetterInfo>&, const std::vector<int>& /*ids*/, int /*degree*/,
                         const MonoFilter&, const MonoCallback&) const {
    throw std::logic_error(name() + ": monomial enumeration not available");
  }
  // counts[d][w] of canonical monomials by degree and weight mod wmod
  virtual std::vector<std::vector<u64>> count(const std::vector<LetterInfo>&, const std::vector<int>& /*ids*/,
                                              int /*maxdeg*/, int /*wmod*/) const {
    throw std::logic_error(name() + ": monomial counting not available");
  }
};

using OperadPtr = std::shared_ptr<const Operad>;

// ---------------------------------------------------------------------------
// Operads whose basis elements are level functions [n] -> N.

inline bool sc_check(const std::vector<int>& levels, u32 p) {
  if (levels.empty()) return false;
  int top = *std::max_element(levels.begin(), levels.end());
  std::vector<i64> u(top + 1, 0);
  for (int l : levels) {
    if (l < 0) return false;
    ++u[l];
  }
  // mass left at level j, measured in units of p^{-j}
  i64 mass = 1;
  for (int j = 0; j <= top; ++j) {
    mass -= u[j];
    if (mass < 0) return false;
    if (j < top) mass *= p;
    if (mass > static_cast<i64>(levels.size())) return false;
  }
  return mass == 0;
}

// all level multisets (u_0, u_1, ...) satisfying the summation condition with n inputs
inline std::vector<std::vector<int>> sc_level_counts(u32 p, int n, int max_level) {
  std::vector<std::vector<int>> out;
  std::vector<int> u;
  std::function<void(i64, int)> rec = [&](i64 mass, int left) {
    if (mass == 0) {
      if (left == 0) out.push_back(u);
      return;
    }
    if (mass > left || static_cast<int>(u.size()) > max_level) return;
    for (i64 take = std::min<i64>(mass, left); take >= 0; --take) {
      u.push_back(static_cast<int>(take));
      rec((mass - take) * p, left - static_cast<int>(take));
      u.pop_back();
    }
  };
  rec(1, n);
  return out;
}

inline void distinct_arrangements(std::vector<int> multiset, const std::function<void(const std::vector<int>&)>& f) {
  std::sort(multiset.begin(), multiset.end());
  do {
    f(multiset);
  } while (std::next_permutation(multiset.begin(), multiset.end()));
}

// Basis of Lev_p(n): level functions satisfying the summation condition.
inline std::vector<std::vector<int>> lev_basis(u32 p, int n, int max_level) {
  if (p < 2) throw std::invalid_argument("lev_basis needs a prime");
  int needed = n >= 1 ? (n - 1) / static_cast<int>(p - 1) : 0;
  if (max_level < needed)
    throw std::invalid_argument("max_level " + std::to_string(max_level) + " can exclude solutions; need at least " +
                                std::to_string(needed));
  std::vector<std::vector<int>> out;
  for (const auto& u : sc_level_counts(p, n, max_level)) {
    std::vector<int> ms;
    for (size_t j = 0; j < u.size(); ++j) ms.insert(ms.end(), u[j], static_cast<int>(j));
    distinct_arrangements(ms, [&](const std::vector<int>& l) { out.push_back(l); });
  }
  std::sort(out.begin(), out.end());
  return out;
}

enum class LevelKind { Unit, UCom, Com, Pi, Lev, TqLev };

class LevelOperad : public Operad {
 public:
  // bound: max level for Pi, q for TqLev, unused otherwise
  LevelOperad(LevelKind kind, u32 p, int bound = 0) : kind_(kind), p_(p), bound_(bound) {
    if (!is_prime(p)) throw std::invalid_argument("operad characteristic must be prime");
    if ((kind == LevelKind::Pi || kind == LevelKind::TqLev) && bound < 0)
      throw std::invalid_argument("level bound must be nonnegative");
  }

  LevelKind kind() const { return kind_; }
  int bound() const { return bound_; }

  std::string name() const override {
    switch (kind_) {
      case LevelKind::Unit: return "Unit";
      case LevelKind::UCom: return "uCom";
      case LevelKind::Com: return "Com";
      case LevelKind::Pi: return "Pi[L=" + std::to_string(bound_) + "]";
      case LevelKind::Lev: return "Lev_" + std::to_string(p_);
      case LevelKind::TqLev: return "T" + std::to_string(bound_) + "Lev_" + std::to_string(p_);
    }
    return "?";
  }
  u32 prime() const override { return p_; }
  OpCode unit() const override { return {1, {0}}; }

  bool valid(const OpCode& a) const {
    if (static_cast<int>(a.data.size()) != a.arity) return false;
    switch (kind_) {
      case LevelKind::Unit: return a.arity == 1 && a.data[0] == 0;
      case LevelKind::UCom:
      case LevelKind::Com:
        if (kind_ == LevelKind::Com && a.arity == 0) return false;
        return std::all_of(a.data.begin(), a.data.end(), [](int l) { return l == 0; });
      case LevelKind::Pi:
        return std::all_of(a.data.begin(), a.data.end(), [&](int l) { return l >= 0 && l <= bound_; });
      case LevelKind::Lev: return sc_check(a.data, p_);
      case LevelKind::TqLev:
        return sc_check(a.data, p_) && *std::max_element(a.data.begin(), a.data.end()) <= bound_;
    }
    return false;
  }

  std::optional<OpCode> compose(const OpCode& a, int i, const OpCode& b) const override {
    if (i < 0 || i >= a.arity) throw std::out_of_range(name() + ": composition slot out of range");
    OpCode r;
    r.arity = a.arity + b.arity - 1;
    r.data.reserve(r.arity);
    for (int j = 0; j < i; ++j) r.data.push_back(a.data[j]);
    for (int k = 0; k < b.arity; ++k) r.data.push_back(a.data[i] + b.data[k]);
    for (int j = i + 1; j < a.arity; ++j) r.data.push_back(a.data[j]);
    if (kind_ == LevelKind::Pi)
      for (int l : r.data)
        if (l > bound_) throw std::out_of_range(name() + ": composite exceeds the configured level bound");
    if (kind_ == LevelKind::TqLev)
      for (int l : r.data)
        if (l > bound_) return std::nullopt;
    return r;
  }

  OpCode act(const OpCode& a, const Perm& sigma) const override {
    OpCode r{a.arity, std::vector<int>(a.arity)};
    for (int j = 0; j < a.arity; ++j) r.data[j] = a.data[sigma[j]];
    return r;
  }

  std::vector<OpCode> basis(int n) const override {
    std::vector<OpCode> out;
    if (n < 0) return out;
    switch (kind_) {
      case LevelKind::Unit:
        if (n == 1) out.push_back(unit());
        break;
      case LevelKind::UCom:
        out.push_back({n, std::vector<int>(n, 0)});
        break;
      case LevelKind::Com:
        if (n >= 1) out.push_back({n, std::vector<int>(n, 0)});
        break;
      case LevelKind::Pi: {
        std::vector<int> l(n, 0);
        while (true) {
          out.push_back({n, l});
          int j = n - 1;
          while (j >= 0 && l[j] == bound_) l[j--] = 0;
          if (j < 0) break;
          ++l[j];
        }
        break;
      }
      case LevelKind::Lev:
      case LevelKind::TqLev: {
        int ml = n >= 1 ? (n - 1) / static_cast<int>(p_ - 1) : 0;
        for (auto& l : lev_basis(p_, n, ml)) {
          OpCode c{n, l};
          if (valid(c)) out.push_back(c);
        }
        break;
      }
    }
    return out;
  }

  std::optional<OpCode> star() const override {
    switch (kind_) {
      case LevelKind::UCom:
      case LevelKind::Com: return OpCode{static_cast<int>(p_), std::vector<int>(p_, 0)};
      case LevelKind::Lev: return OpCode{static_cast<int>(p_), std::vector<int>(p_, 1)};
      case LevelKind::TqLev:
        if (bound_ >= 1) return OpCode{static_cast<int>(p_), std::vector<int>(p_, 1)};
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  Perm canonical_order(const OpCode& code, const std::vector<i64>& keys) const override {
    Perm order = identity_perm(code.arity);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      if (code.data[x] != code.data[y]) return code.data[x] < code.data[y];
      return keys[x] < keys[y];
    });
    return order;
  }

  void enumerate(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int degree, const MonoFilter& filt,
                 const MonoCallback& cb) const override;
  std::vector<std::vector<u64>> count(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int maxdeg,
                                      int wmod) const override;

 private:
  LevelKind kind_;
  u32 p_;
  int bound_;
};

// ---------------------------------------------------------------------------
// MagCom_p: rooted trees with fully symmetric p-ary nodes. Prefix code: -1 is
// an internal node followed by its p children; a leaf is its 0-based label.

namespace tree_detail {

struct Node {
  int label = -1;  // leaf label, -1 for internal nodes
  std::vector<Node> kids;
  int min_label = 0;
};

inline Node parse(const std::vector<int>& code, size_t& pos, int p) {
  if (pos >= code.size()) throw std::invalid_argument("truncated tree code");
  Node n;
  int v = code[pos++];
  if (v >= 0) {
    n.label = v;
    n.min_label = v;
    return n;
  }
  for (int k = 0; k < p; ++k) n.kids.push_back(parse(code, pos, p));
  n.min_label = n.kids[0].min_label;
  for (auto& c : n.kids) n.min_label = std::min(n.min_label, c.min_label);
  return n;
}

inline void sort_by_min(Node& n) {
  for (auto& c : n.kids) sort_by_min(c);
  std::sort(n.kids.begin(), n.kids.end(), [](const Node& a, const Node& b) { return a.min_label < b.min_label; });
}

inline void emit(const Node& n, std::vector<int>& out) {
  if (n.label >= 0) {
    out.push_back(n.label);
    return;
  }
  out.push_back(-1);
  for (auto& c : n.kids) emit(c, out);
}

inline void relabel(Node& n, const std::function<int(int)>& f) {
  if (n.label >= 0) {
    n.label = f(n.label);
    n.min_label = n.label;
    return;
  }
  for (auto& c : n.kids) relabel(c, f);
  n.min_label = n.kids[0].min_label;
  for (auto& c : n.kids) n.min_label = std::min(n.min_label, c.min_label);
}

// decorated serialization used to order subtrees with letter keys
inline std::vector<i64> decorated(const Node& n, const std::vector<i64>& keys, std::vector<int>& leaf_order) {
  if (n.label >= 0) {
    leaf_order.push_back(n.label);
    return {keys[n.label]};
  }
  std::vector<std::pair<std::vector<i64>, std::vector<int>>> parts;
  for (auto& c : n.kids) {
    std::vector<int> lo;
    auto s = decorated(c, keys, lo);
    parts.emplace_back(std::move(s), std::move(lo));
  }
  std::stable_sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<i64> out{-1};
  for (auto& pr : parts) {
    out.insert(out.end(), pr.first.begin(), pr.first.end());
    leaf_order.insert(leaf_order.end(), pr.second.begin(), pr.second.end());
  }
  return out;
}

inline int depth_fill(const Node& n, int depth, std::vector<int>& levels) {
  if (n.label >= 0) {
    levels[n.label] = depth;
    return 1;
  }
  int c = 0;
  for (auto& k : n.kids) c += depth_fill(k, depth + 1, levels);
  return c;
}

}  // namespace tree_detail

class MagComOperad : public Operad {
 public:
  explicit MagComOperad(u32 p) : p_(p) {
    if (!is_prime(p)) throw std::invalid_argument("operad characteristic must be prime");
  }
  std::string name() const override { return "MagCom_" + std::to_string(p_); }
  u32 prime() const override { return p_; }
  OpCode unit() const override { return {1, {0}}; }

  OpCode canonicalize(const OpCode& a) const {
    size_t pos = 0;
    auto t = tree_detail::parse(a.data, pos, static_cast<int>(p_));
    tree_detail::sort_by_min(t);
    OpCode r{a.arity, {}};
    tree_detail::emit(t, r.data);
    return r;
  }

  std::optional<OpCode> compose(const OpCode& a, int i, const OpCode& b) const override {
    if (i < 0 || i >= a.arity) throw std::out_of_range(name() + ": composition slot out of range");
    if (b.arity == 0) return std::nullopt;
    const int m = b.arity;
    std::vector<int> out;
    for (int v : a.data) {
      if (v < 0) out.push_back(v);
      else if (v < i) out.push_back(v);
      else if (v > i) out.push_back(v + m - 1);
      else
        for (int w : b.data) out.push_back(w < 0 ? w : w + i);
    }
    return canonicalize({a.arity + m - 1, out});
  }

  OpCode act(const OpCode& a, const Perm& sigma) const override {
    Perm inv = inverse_perm(sigma);
    OpCode r{a.arity, a.data};
    for (auto& v : r.data)
      if (v >= 0) v = inv[v];
    return canonicalize(r);
  }

  std::vector<OpCode> basis(int n) const override {
    std::vector<OpCode> out;
    if (n < 1) return out;
    std::vector<int> labels(n);
    std::iota(labels.begin(), labels.end(), 0);
    for (auto& code : trees_on(labels)) out.push_back({n, code});
    std::sort(out.begin(), out.end());
    return out;
  }

  std::optional<OpCode> star() const override {
    OpCode s{static_cast<int>(p_), {-1}};
    for (u32 k = 0; k < p_; ++k) s.data.push_back(static_cast<int>(k));
    return s;
  }

  Perm canonical_order(const OpCode& code, const std::vector<i64>& keys) const override {
    size_t pos = 0;
    auto t = tree_detail::parse(code.data, pos, static_cast<int>(p_));
    std::vector<int> order;
    tree_detail::decorated(t, keys, order);
    return order;
  }

  // depth of every leaf: the operad map MagCom_p -> Lev_p sending the generator to the star
  std::vector<int> leaf_depths(const OpCode& code) const {
    size_t pos = 0;
    auto t = tree_detail::parse(code.data, pos, static_cast<int>(p_));
    std::vector<int> levels(code.arity, 0);
    tree_detail::depth_fill(t, 0, levels);
    return levels;
  }

  void enumerate(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int degree, const MonoFilter& filt,
                 const MonoCallback& cb) const override;
  std::vector<std::vector<u64>> count(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int maxdeg,
                                      int wmod) const override;

 private:
  // canonical codes of all trees whose leaves are exactly `labels` (sorted)
  std::vector<std::vector<int>> trees_on(const std::vector<int>& labels) const {
    std::vector<std::vector<int>> out;
    if (labels.size() == 1) {
      out.push_back({labels[0]});
      return out;
    }
    // unordered set partitions into p nonempty blocks; block order = order of minima
    const int n = static_cast<int>(labels.size());
    std::vector<int> block(n, -1);
    std::function<void(int, int)> rec = [&](int j, int used) {
      if (n - j < static_cast<int>(p_) - used) return;
      if (j == n) {
        if (used != static_cast<int>(p_)) return;
        std::vector<std::vector<int>> parts(p_);
        for (int t = 0; t < n; ++t) parts[block[t]].push_back(labels[t]);
        std::vector<std::vector<std::vector<int>>> sub;
        for (auto& part : parts) {
          sub.push_back(trees_on(part));
          if (sub.back().empty()) return;
        }
        std::vector<size_t> idx(p_, 0);
        while (true) {
          std::vector<int> code{-1};
          for (u32 k = 0; k < p_; ++k) code.insert(code.end(), sub[k][idx[k]].begin(), sub[k][idx[k]].end());
          out.push_back(code);
          int k = static_cast<int>(p_) - 1;
          while (k >= 0 && ++idx[k] == sub[k].size()) idx[k--] = 0;
          if (k < 0) break;
        }
        return;
      }
      for (int b = 0; b < used; ++b) {
        block[j] = b;
        rec(j + 1, used);
      }
      if (used < static_cast<int>(p_)) {
        block[j] = used;
        rec(j + 1, used + 1);
      }
    };
    rec(0, 0);
    return out;
  }

  u32 p_;
};

// ---------------------------------------------------------------------------
// Composites P o D with the unary operad D = F[d] or one of its quotients.

struct UnaryVariant {
  enum Kind { D, QsD, TqD, Dpm } kind = D;
  int param = 0;  // max enumerated exponent for D, s for QsD, q for TqD
  int lo = -8, hi = 8;  // window for Dpm

  static UnaryVariant free_d(int maxexp) { return {D, maxexp, 0, 0}; }
  static UnaryVariant qs(int s) { return {QsD, s, 0, 0}; }
  static UnaryVariant tq(int q) { return {TqD, q, 0, 0}; }
  static UnaryVariant dpm(int lo = -8, int hi = 8) { return {Dpm, 0, lo, hi}; }

  std::string name() const {
    switch (kind) {
      case D: return "D";
      case QsD: return "Q" + std::to_string(param) + "D";
      case TqD: return "T" + std::to_string(param) + "D";
      case Dpm: return "D+-[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    }
    return "?";
  }
  // reduced exponent, or nullopt when d^e is zero
  std::optional<int> reduce(int e) const {
    switch (kind) {
      case D:
        if (e < 0) throw std::out_of_range("negative exponent in D");
        return e;
      case QsD: return static_cast<int>(mod_floor(e, param));
      case TqD:
        if (e > param) return std::nullopt;
        return e;
      case Dpm:
        if (e < lo || e > hi) throw std::out_of_range("exponent " + std::to_string(e) + " outside the window " + name());
        return e;
    }
    return e;
  }
  std::vector<int> exponents() const {
    std::vector<int> out;
    switch (kind) {
      case D:
        for (int e = 0; e <= param; ++e) out.push_back(e);
        break;
      case QsD:
        for (int e = 0; e < param; ++e) out.push_back(e);
        break;
      case TqD:
        for (int e = 0; e <= param; ++e) out.push_back(e);
        break;
      case Dpm:
        for (int e = lo; e <= hi; ++e) out.push_back(e);
        break;
    }
    return out;
  }
};

// Basis (mu; d^{k_1}, ..., d^{k_n}); code data = inner data followed by the n exponents.
class CompositeOperad : public Operad {
 public:
  CompositeOperad(OperadPtr inner, UnaryVariant v, int star_exp = 1)
      : inner_(std::move(inner)), v_(v), star_exp_(star_exp) {
    if (v.kind == UnaryVariant::QsD && v.param < 1) throw std::invalid_argument("Q_sD needs s >= 1");
  }

  const Operad& inner() const { return *inner_; }
  const UnaryVariant& variant() const { return v_; }

  std::string name() const override { return inner_->name() + "o" + v_.name(); }
  u32 prime() const override { return inner_->prime(); }

  static OpCode split_inner(const OpCode& a) {
    return {a.arity, std::vector<int>(a.data.begin(), a.data.end() - a.arity)};
  }
  static std::vector<int> exps(const OpCode& a) { return {a.data.end() - a.arity, a.data.end()}; }
  static OpCode join(const OpCode& in, const std::vector<int>& e) {
    OpCode r = in;
    r.data.insert(r.data.end(), e.begin(), e.end());
    return r;
  }

  OpCode unit() const override { return join(inner_->unit(), {0}); }

  std::optional<OpCode> compose(const OpCode& a, int i, const OpCode& b) const override {
    auto in = inner_->compose(split_inner(a), i, split_inner(b));
    if (!in) return std::nullopt;
    auto ea = exps(a), eb = exps(b);
    std::vector<int> e;
    for (int j = 0; j < i; ++j) e.push_back(ea[j]);
    for (int k = 0; k < b.arity; ++k) {
      auto r = v_.reduce(ea[i] + eb[k]);
      if (!r) return std::nullopt;
      e.push_back(*r);
    }
    for (int j = i + 1; j < a.arity; ++j) e.push_back(ea[j]);
    return join(*in, e);
  }

  OpCode act(const OpCode& a, const Perm& sigma) const override {
    auto ea = exps(a);
    std::vector<int> e(a.arity);
    for (int j = 0; j < a.arity; ++j) e[j] = ea[sigma[j]];
    return join(inner_->act(split_inner(a), sigma), e);
  }

  std::vector<OpCode> basis(int n) const override {
    std::vector<OpCode> out;
    auto ex = v_.exponents();
    for (auto& b : inner_->basis(n)) {
      std::vector<size_t> idx(n, 0);
      while (true) {
        std::vector<int> e(n);
        for (int j = 0; j < n; ++j) e[j] = ex[idx[j]];
        out.push_back(join(b, e));
        int j = n - 1;
        while (j >= 0 && ++idx[j] == ex.size()) idx[j--] = 0;
        if (j < 0) break;
      }
    }
    return out;
  }

  std::optional<OpCode> star() const override {
    auto s = inner_->star();
    if (!s) return std::nullopt;
    auto r = v_.reduce(star_exp_);
    if (!r) return std::nullopt;
    return join(*s, std::vector<int>(s->arity, *r));
  }

  Perm canonical_order(const OpCode& code, const std::vector<i64>& keys) const override {
    auto e = exps(code);
    std::vector<i64> k2(code.arity);
    for (int j = 0; j < code.arity; ++j) k2[j] = ((static_cast<i64>(e[j]) + 1024) << 40) | keys[j];
    return inner_->canonical_order(split_inner(code), k2);
  }

 private:
  OperadPtr inner_;
  UnaryVariant v_;
  int star_exp_;
};

// ---------------------------------------------------------------------------
// Linear combinations of basis elements.

using OperadElement = std::map<OpCode, u32>;

inline void add_term(OperadElement& e, const OpCode& c, u32 coeff, const Fp& f) {
  if (!coeff) return;
  auto [it, ins] = e.emplace(c, coeff);
  if (!ins) {
    it->second = f.add(it->second, coeff);
    if (!it->second) e.erase(it);
  }
}

inline OperadElement compose_elem(const Operad& P, const OperadElement& a, int i, const OperadElement& b) {
  Fp f(P.prime());
  OperadElement r;
  for (auto& [x, cx] : a)
    for (auto& [y, cy] : b)
      if (auto c = P.compose(x, i, y)) add_term(r, *c, f.mul(cx, cy), f);
  return r;
}

// mu(nu_1, ..., nu_k): the inputs of nu_j form the j-th consecutive block
inline std::optional<OpCode> compose_total(const Operad& P, const OpCode& mu, const std::vector<OpCode>& nus) {
  if (static_cast<int>(nus.size()) != mu.arity) throw std::invalid_argument("compose_total: arity mismatch");
  std::optional<OpCode> r = mu;
  for (int i = mu.arity - 1; i >= 0 && r; --i) r = P.compose(*r, i, nus[i]);
  return r;
}

inline OperadElement compose_total_elem(const Operad& P, const OperadElement& mu, const std::vector<OperadElement>& nus) {
  OperadElement r = mu;
  for (int i = static_cast<int>(nus.size()) - 1; i >= 0; --i) r = compose_elem(P, r, i, nus[i]);
  return r;
}

inline OperadElement act_elem(const Operad& P, const OperadElement& a, const Perm& s) {
  Fp f(P.prime());
  OperadElement r;
  for (auto& [x, c] : a) add_term(r, P.act(x, s), c, f);
  return r;
}

inline OperadElement single(const OpCode& c) { return {{c, 1}}; }

inline int element_arity(const OperadElement& e) {
  if (e.empty()) throw std::invalid_argument("zero element has no arity");
  int n = e.begin()->first.arity;
  for (auto& [c, v] : e)
    if (c.arity != n) throw std::invalid_argument("mixed arities in operad element");
  return n;
}

inline bool is_symmetric(const Operad& P, const OperadElement& e) {
  int n = element_arity(e);
  for (int j = 0; j + 1 < n; ++j) {
    Perm t = identity_perm(n);
    std::swap(t[j], t[j + 1]);
    if (act_elem(P, e, t) != e) return false;
  }
  return true;
}

struct CentralityResult {
  bool central = true;
  bool invariant = true;
  std::optional<OpCode> violation;
  std::string message;
};

// Interchange relation star(mu, ..., mu) = mu(star, ..., star).sigma_{p,n} on basis elements.
inline CentralityResult is_central(const Operad& P, const OperadElement& star, int max_arity) {
  CentralityResult res;
  const int p = element_arity(star);
  if (!is_symmetric(P, star)) {
    res.central = res.invariant = false;
    res.message = "operation is not invariant under the symmetric group";
    return res;
  }
  for (int n = 0; n <= max_arity; ++n) {
    Perm sigma = sigma_block_perm(p, n);
    for (auto& mu : P.basis(n)) {
      OperadElement m = single(mu);
      auto lhs = compose_total_elem(P, star, std::vector<OperadElement>(p, m));
      auto rhs = act_elem(P, compose_total_elem(P, m, std::vector<OperadElement>(n, star)), sigma);
      if (lhs != rhs) {
        res.central = false;
        res.violation = mu;
        res.message = "interchange fails in arity " + std::to_string(n);
        return res;
      }
    }
  }
  return res;
}

inline OperadElement star_k(const Operad& P, const OperadElement& star, int k) {
  if (k < 0) throw std::invalid_argument("star_k needs k >= 0");
  const int p = element_arity(star);
  OperadElement cur = single(P.unit());
  for (int j = 0; j < k; ++j) cur = compose_total_elem(P, star, std::vector<OperadElement>(p, cur));
  return cur;
}

inline bool is_nonnilpotent_up_to(const Operad& P, const OperadElement& star, int k) {
  for (int j = 0; j <= k; ++j)
    if (star_k(P, star, j).empty()) return false;
  return true;
}

// Builds a MagCom_p tree from an SC level function by repeatedly merging the
// first p nodes of maximal level into one node a level higher.
inline std::optional<OpCode> lev_to_tree(const std::vector<int>& levels, u32 p) {
  struct Item {
    int level;
    std::vector<int> code;
    int min_label;
  };
  std::vector<Item> items;
  for (size_t j = 0; j < levels.size(); ++j) items.push_back({levels[j], {static_cast<int>(j)}, static_cast<int>(j)});
  if (items.empty()) return std::nullopt;
  while (items.size() > 1) {
    int top = 0;
    for (auto& it : items) top = std::max(top, it.level);
    if (top == 0) return std::nullopt;
    std::vector<size_t> pick;
    for (size_t j = 0; j < items.size() && pick.size() < p; ++j)
      if (items[j].level == top) pick.push_back(j);
    if (pick.size() < p) return std::nullopt;
    Item merged{top - 1, {-1}, items[pick[0]].min_label};
    for (size_t j : pick) {
      merged.code.insert(merged.code.end(), items[j].code.begin(), items[j].code.end());
      merged.min_label = std::min(merged.min_label, items[j].min_label);
    }
    std::vector<Item> rest;
    for (size_t j = 0; j < items.size(); ++j) {
      if (j == pick[0]) rest.push_back(merged);
      else if (std::find(pick.begin(), pick.end(), j) == pick.end()) rest.push_back(items[j]);
    }
    items = std::move(rest);
  }
  if (items[0].level != 0) return std::nullopt;
  MagComOperad mag(p);
  return mag.canonicalize({static_cast<int>(levels.size()), items[0].code});
}

inline std::string to_string(const OpCode& c) {
  std::ostringstream os;
  os << "[" << c.arity << ":";
  for (size_t j = 0; j < c.data.size(); ++j) os << (j ? "," : "") << c.data[j];
  os << "]";
  return os.str();
}

// ---------------------------------------------------------------------------
// monomial enumeration and counting

inline void LevelOperad::enumerate(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int degree,
                                   const MonoFilter& filt, const MonoCallback& cb) const {
  if (degree < 0) return;
  int mindeg = 1 << 30;
  for (int id : ids) mindeg = std::min(mindeg, info[id].degree);
  if (ids.empty()) mindeg = 1 << 30;
  if (mindeg <= 0) throw std::invalid_argument(name() + ": letters of degree <= 0 give infinite components");
  i64 minw = 0, maxw = 0;
  bool first = true;
  for (int id : ids) {
    if (first) { minw = maxw = info[id].weight; first = false; }
    minw = std::min(minw, info[id].weight);
    maxw = std::max(maxw, info[id].weight);
  }
  const bool exact = filt.weight_target.has_value();
  if (exact && minw < 0) throw std::invalid_argument("exact weight targets need nonnegative weights");

  // suffix bounds on letter weights, for pruning exact targets when all letters sit in one level
  std::vector<i64> suf_min(ids.size() + 1, std::numeric_limits<i64>::max()), suf_max(ids.size() + 1, 0);
  for (size_t s = ids.size(); s-- > 0;) {
    suf_min[s] = std::min(suf_min[s + 1], info[ids[s]].weight);
    suf_max[s] = std::max(suf_max[s + 1], info[ids[s]].weight);
  }
  const bool one_level = kind_ == LevelKind::UCom || kind_ == LevelKind::Com || kind_ == LevelKind::Unit;

  std::vector<int> lv, word;
  int marked_seen = 0;
  i64 weight = 0;

  auto finish = [&]() {
    if (filt.marked >= 0 && marked_seen != filt.marked_count) return;
    if (exact && weight != *filt.weight_target) return;
    if (filt.weight_mod > 0 && mod_floor(weight, filt.weight_mod) != mod_floor(filt.weight_residue, filt.weight_mod))
      return;
    cb(OpCode{static_cast<int>(lv.size()), lv}, word);
  };

  // choose letters at the current level, then continue with `next`
  std::function<void(int, size_t, int, int, const std::function<void(int)>&)> level_letters =
      [&](int level, size_t start, int take, int deg_left, const std::function<void(int)>& next) {
        if (take == 0) {
          next(deg_left);
          return;
        }
        if (take * mindeg > deg_left) return;
        if (exact && one_level) {
          const i64 need = *filt.weight_target - weight;
          if (need < take * suf_min[start] || need > take * suf_max[start]) return;
        }
        for (size_t s = start; s < ids.size(); ++s) {
          int id = ids[s];
          int dg = info[id].degree;
          if (dg > deg_left) continue;
          if (filt.marked == id && marked_seen >= filt.marked_count) continue;
          if (exact && weight + info[id].weight > *filt.weight_target) continue;
          lv.push_back(level);
          word.push_back(id);
          weight += info[id].weight;
          if (filt.marked == id) ++marked_seen;
          level_letters(level, s, take - 1, deg_left - dg, next);
          if (filt.marked == id) --marked_seen;
          weight -= info[id].weight;
          word.pop_back();
          lv.pop_back();
        }
      };

  switch (kind_) {
    case LevelKind::Unit:
      level_letters(0, 0, 1, degree, [&](int left) {
        if (left == 0) finish();
      });
      return;
    case LevelKind::UCom:
    case LevelKind::Com: {
      int lo = kind_ == LevelKind::Com ? 1 : 0;
      for (int u = lo; u * mindeg <= degree; ++u)
        level_letters(0, 0, u, degree, [&](int left) {
          if (left == 0) finish();
        });
      return;
    }
    case LevelKind::Pi: {
      std::function<void(int, int)> lvl = [&](int level, int left) {
        if (level > bound_) {
          if (left == 0) finish();
          return;
        }
        for (int u = 0; u * mindeg <= left; ++u)
          level_letters(level, 0, u, left, [&](int l2) { lvl(level + 1, l2); });
      };
      lvl(0, degree);
      return;
    }
    case LevelKind::Lev:
    case LevelKind::TqLev: {
      const int qmax = kind_ == LevelKind::TqLev ? bound_ : (1 << 30);
      std::function<void(int, i64, int)> lvl = [&](int level, i64 mass, int left) {
        if (mass == 0) {
          if (left == 0) finish();
          return;
        }
        if (level > qmax) return;
        if (mass * mindeg > left) return;
        i64 lowest = level == qmax ? mass : 0;
        for (i64 u = mass; u >= lowest; --u) {
          i64 rest = (mass - u) * p_;
          level_letters(level, 0, static_cast<int>(u), left, [&](int l2) {
            if (rest * mindeg > l2) return;
            lvl(level + 1, rest, l2);
          });
        }
      };
      lvl(0, 1, degree);
      return;
    }
  }
}

// multiset tables H[u][e][w]: multisets of u letters with degree e and weight w mod wmod
inline std::vector<std::vector<std::vector<u64>>> multiset_table(const std::vector<LetterInfo>& info,
                                                                 const std::vector<int>& ids, int maxdeg, int wmod,
                                                                 int maxsize) {
  std::vector<std::vector<std::vector<u64>>> H(maxsize + 1,
                                               std::vector<std::vector<u64>>(maxdeg + 1, std::vector<u64>(wmod, 0)));
  H[0][0][0] = 1;
  for (int id : ids) {
    const int dg = info[id].degree;
    const int w = static_cast<int>(mod_floor(info[id].weight, wmod));
    // unbounded multiplicity of this letter: standard in-place forward update
    for (int u = 1; u <= maxsize; ++u)
      for (int e = dg; e <= maxdeg; ++e)
        for (int x = 0; x < wmod; ++x) {
          int px = static_cast<int>(mod_floor(x - w, wmod));
          H[u][e][x] += H[u - 1][e - dg][px];
        }
  }
  return H;
}

inline std::vector<std::vector<u64>> LevelOperad::count(const std::vector<LetterInfo>& info,
                                                        const std::vector<int>& ids, int maxdeg, int wmod) const {
  if (wmod < 1) wmod = 1;
  std::vector<std::vector<u64>> out(maxdeg + 1, std::vector<u64>(wmod, 0));
  int mindeg = 1 << 30;
  for (int id : ids) mindeg = std::min(mindeg, info[id].degree);
  if (ids.empty()) {
    if (kind_ == LevelKind::UCom || kind_ == LevelKind::Pi) out[0][0] = 1;
    return out;
  }
  if (mindeg <= 0) throw std::invalid_argument(name() + ": letters of degree <= 0 give infinite components");
  const int U = maxdeg / mindeg;
  auto H = multiset_table(info, ids, maxdeg, wmod, U);
  switch (kind_) {
    case LevelKind::Unit:
      if (U >= 1)
        for (int e = 0; e <= maxdeg; ++e)
          for (int x = 0; x < wmod; ++x) out[e][x] = H[1][e][x];
      return out;
    case LevelKind::UCom:
    case LevelKind::Com:
      for (int u = kind_ == LevelKind::Com ? 1 : 0; u <= U; ++u)
        for (int e = 0; e <= maxdeg; ++e)
          for (int x = 0; x < wmod; ++x) out[e][x] += H[u][e][x];
      return out;
    case LevelKind::Pi: {
      std::vector<std::vector<u64>> one(maxdeg + 1, std::vector<u64>(wmod, 0));
      for (int u = 0; u <= U; ++u)
        for (int e = 0; e <= maxdeg; ++e)
          for (int x = 0; x < wmod; ++x) one[e][x] += H[u][e][x];
      out[0][0] = 1;
      for (int level = 0; level <= bound_; ++level) {
        std::vector<std::vector<u64>> nxt(maxdeg + 1, std::vector<u64>(wmod, 0));
        for (int a = 0; a <= maxdeg; ++a)
          for (int x = 0; x < wmod; ++x) {
            if (!out[a][x]) continue;
            for (int b = 0; a + b <= maxdeg; ++b)
              for (int y = 0; y < wmod; ++y) nxt[a + b][(x + y) % wmod] += out[a][x] * one[b][y];
          }
        out = std::move(nxt);
      }
      return out;
    }
    case LevelKind::Lev:
    case LevelKind::TqLev: {
      const int qmax = kind_ == LevelKind::TqLev ? bound_ : (1 << 30);
      // state[mass][deg][w]
      std::vector<std::vector<std::vector<u64>>> st(U + 1,
                                                    std::vector<std::vector<u64>>(maxdeg + 1, std::vector<u64>(wmod, 0)));
      st[1][0][0] = 1;
      for (int level = 0; level <= qmax; ++level) {
        std::vector<std::vector<std::vector<u64>>> nxt(
            U + 1, std::vector<std::vector<u64>>(maxdeg + 1, std::vector<u64>(wmod, 0)));
        bool any = false;
        for (int mass = 1; mass <= U; ++mass)
          for (int d = 0; d <= maxdeg; ++d)
            for (int x = 0; x < wmod; ++x) {
              u64 c = st[mass][d][x];
              if (!c) continue;
              int lowest = level == qmax ? mass : 0;
              for (int u = lowest; u <= mass; ++u) {
                i64 rest = static_cast<i64>(mass - u) * p_;
                for (int e = u * mindeg; d + e <= maxdeg; ++e)
                  for (int y = 0; y < wmod; ++y) {
                    u64 h = H[u][e][y];
                    if (!h) continue;
                    int nd = d + e, nw = (x + y) % wmod;
                    if (rest == 0) {
                      out[nd][nw] += c * h;
                    } else if (rest * mindeg <= maxdeg - nd && rest <= U) {
                      nxt[rest][nd][nw] += c * h;
                      any = true;
                    }
                  }
              }
            }
        st = std::move(nxt);
        if (!any) break;
      }
      return out;
    }
  }
  return out;
}

inline void MagComOperad::enumerate(const std::vector<LetterInfo>& info, const std::vector<int>& ids, int degree,
                                    const MonoFilter& filt, const MonoCallback& cb) const {
  if (degree <= 0) return;
  for (int id : ids)
    if (info[id].degree <= 0) throw std::invalid_argument(name() + ": letters must have positive degree");
  const bool marked = filt.marked >= 0;
  const int zmax = marked ? filt.marked_count : 0;
  // trees[d][z]: decorated serializations (leaf = letter id) of degree d with z marked leaves
  struct T {
    std::vector<i64> ser;
    int deg, z;
    i64 weight;
  };
  std::vector<std::vector<std::vector<T>>> trees(degree + 1, std::vector<std::vector<T>>(zmax + 1));
  std::vector<T> all;  // every tree so far, sorted by serialization per insertion batch
  for (int d = 1; d <= degree; ++d) {
    std::vector<T> fresh;
    for (int id : ids)
      if (info[id].degree == d) {
        int z = (marked && id == filt.marked) ? 1 : 0;
        if (z <= zmax) fresh.push_back({{id}, d, z, info[id].weight});
      }
    // nondecreasing p-tuples (by serialization) from smaller trees
    std::vector<const T*> cand;
    for (auto& t : all)
      if (t.deg <= d - static_cast<int>(p_ - 1)) cand.push_back(&t);
    std::sort(cand.begin(), cand.end(), [](const T* a, const T* b) { return a->ser < b->ser; });
    std::vector<const T*> pick;
    std::function<void(size_t, int, int)> rec = [&](size_t start, int left, int zs) {
      if (static_cast<int>(pick.size()) == static_cast<int>(p_)) {
        if (left != 0) return;
        T t{{-1}, d, zs, 0};
        for (auto* c : pick) {
          t.ser.insert(t.ser.end(), c->ser.begin(), c->ser.end());
          t.weight += c->weight;
        }
        fresh.push_back(std::move(t));
        return;
      }
      int remaining = static_cast<int>(p_) - static_cast<int>(pick.size());
      for (size_t s = start; s < cand.size(); ++s) {
        const T* c = cand[s];
        if (c->deg > left - (remaining - 1)) continue;
        if (zs + c->z > zmax) continue;
        pick.push_back(c);
        rec(s, left - c->deg, zs + c->z);
        pick.pop_back();
      }
    };
    rec(0, d, 0);
    for (auto& t : fresh) all.push_back(t);
    if (d == degree) {
      for (auto& t : fresh) {
        if (marked && t.z != filt.marked_count) continue;
        if (filt.weight_target && t.weight != *filt.weight_target) continue;
        if (filt.weight_mod > 0 && mod_floor(t.weight, filt.weight_mod) != mod_floor(filt.weight_residue, filt.weight_mod))
          continue;
        OpCode code;
        std::vector<int> word;
        for (i64 v : t.ser) {
          if (v < 0) code.data.push_back(-1);
          else {
            code.data.push_back(static_cast<int>(word.size()));
            word.push_back(static_cast<int>(v));
          }
        }
        code.arity = static_cast<int>(word.size());
        cb(code, word);
      }
    }
  }
}

inline std::vector<std::vector<u64>> MagComOperad::count(const std::vector<LetterInfo>& info,
                                                         const std::vector<int>& ids, int maxdeg, int wmod) const {
  if (wmod < 1) wmod = 1;
  const int p = static_cast<int>(p_);
  std::vector<std::vector<u64>> T(maxdeg + 1, std::vector<u64>(wmod, 0));
  // G[k][d][w]: multisets of k trees among the degrees already finalized
  std::vector<std::vector<std::vector<u64>>> G(p + 1, std::vector<std::vector<u64>>(maxdeg + 1, std::vector<u64>(wmod, 0)));
  G[0][0][0] = 1;
  auto binom_mult = [](u64 t, int c) {  // C(t + c - 1, c)
    u64 r = 1;
    for (int i = 1; i <= c; ++i) r = r * (t + static_cast<u64>(i) - 1) / static_cast<u64>(i);
    return r;
  };
  for (int d = 1; d <= maxdeg; ++d) {
    for (int id : ids)
      if (info[id].degree == d) T[d][mod_floor(info[id].weight, wmod)] += 1;
    for (int x = 0; x < wmod; ++x) T[d][x] += G[p][d][x];
    // fold the types of degree d into G
    for (int x = 0; x < wmod; ++x) {
      u64 t = T[d][x];
      if (!t) continue;
      auto NG = G;
      for (int k = 0; k <= p; ++k)
        for (int e = 0; e <= maxdeg; ++e)
          for (int y = 0; y < wmod; ++y) {
            u64 g = G[k][e][y];
            if (!g) continue;
            for (int c = 1; k + c <= p && e + c * d <= maxdeg; ++c) {
              int ny = static_cast<int>((y + static_cast<i64>(c) * x) % wmod);
              NG[k + c][e + c * d][ny] += g * binom_mult(t, c);
            }
          }
      G = std::move(NG);
    }
  }
  return T;
}

}  // namespace unstalg
