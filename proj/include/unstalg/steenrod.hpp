#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "unstalg/fp.hpp"

namespace unstalg {

// Degrees are measured in grading units: one unit is 2 for odd p and 1 for
// p = 2, so P^i raises the unit degree by i(p-1) and kills classes of unit
// degree < i.
inline int grading_unit(u32 p) { return p == 2 ? 1 : 2; }

using Admissible = std::vector<int>;               // (i_1, ..., i_k), all positive
using SteenrodElement = std::map<Admissible, u32>;  // admissible basis expansion

inline bool is_admissible(const Admissible& I, u32 p) {
  for (size_t h = 0; h + 1 < I.size(); ++h)
    if (I[h] < static_cast<int>(p) * I[h + 1]) return false;
  for (int i : I)
    if (i <= 0) return false;
  return true;
}

// Excess as printed in the source formula 2(i_1 - p i_2) + ... + 2(i_{k-1} - p i_k).
// Diagnostic only: bases are built by instability pruning.
inline i64 excess(const Admissible& I, u32 p) {
  i64 e = 0;
  for (size_t h = 0; h + 1 < I.size(); ++h) e += 2 * (I[h] - static_cast<i64>(p) * I[h + 1]);
  return e;
}

// Unit-degree excess i_1 - (p-1)(i_2 + ... + i_k); P^I survives on a class of
// unit degree n iff this is <= n.
inline i64 unit_excess(const Admissible& I, u32 p) {
  if (I.empty()) return 0;
  i64 e = I[0];
  for (size_t h = 1; h < I.size(); ++h) e -= static_cast<i64>(p - 1) * I[h];
  return e;
}

// Adem relation coefficients for P^a P^b with a < p b:
// P^a P^b = sum_t (-1)^{a+t} C((p-1)(b-t)-1, a-pt) P^{a+b-t} P^t
inline std::vector<std::pair<int, u32>> adem_terms(int a, int b, u32 p) {
  Fp f(p);
  std::vector<std::pair<int, u32>> out;
  for (int t = 0; static_cast<i64>(p) * t <= a; ++t) {
    i64 top = static_cast<i64>(p - 1) * (b - t) - 1;
    i64 bot = a - static_cast<i64>(p) * t;
    if (top < 0) continue;
    u32 c = binomial_mod_p(static_cast<u64>(top), static_cast<u64>(bot), p);
    if ((a + t) % 2) c = f.neg(c);
    if (c) out.emplace_back(t, c);
  }
  return out;
}

class SteenrodAlgebra {
 public:
  explicit SteenrodAlgebra(u32 p) : f_(p) {}
  u32 prime() const { return f_.p; }

  // Rewrites P^{w_1} ... P^{w_k} in the admissible basis. Zero entries are
  // identities. `leftmost` chooses which inadmissible pair is rewritten first.
  SteenrodElement reduce(const std::vector<int>& word, bool leftmost = true) const {
    Admissible w;
    for (int i : word) {
      if (i < 0) throw std::invalid_argument("negative Steenrod index");
      if (i > 0) w.push_back(i);
    }
    if (leftmost) {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(w);
      if (it != memo_.end()) return it->second;
    }
    SteenrodElement r = reduce_impl(w, leftmost);
    if (leftmost) {
      std::lock_guard<std::mutex> lk(mu_);
      memo_.emplace(w, r);
    }
    return r;
  }

  // unit degree of P^I
  int degree(const Admissible& I) const {
    int d = 0;
    for (int i : I) d += i * static_cast<int>(f_.p - 1);
    return d;
  }

 private:
  SteenrodElement reduce_impl(const Admissible& w, bool leftmost) const {
    const int p = static_cast<int>(f_.p);
    int at = -1;
    if (leftmost) {
      for (size_t h = 0; h + 1 < w.size(); ++h)
        if (w[h] < p * w[h + 1]) { at = static_cast<int>(h); break; }
    } else {
      for (int h = static_cast<int>(w.size()) - 2; h >= 0; --h)
        if (w[h] < p * w[h + 1]) { at = h; break; }
    }
    if (at < 0) return {{w, 1}};
    SteenrodElement out;
    for (auto [t, c] : adem_terms(w[at], w[at + 1], f_.p)) {
      std::vector<int> nw(w.begin(), w.begin() + at);
      nw.push_back(w[at] + w[at + 1] - t);
      if (t > 0) nw.push_back(t);
      nw.insert(nw.end(), w.begin() + at + 2, w.end());
      for (auto& [J, cj] : reduce(nw, leftmost)) {
        u32& slot = out[J];
        slot = f_.add(slot, f_.mul(c, cj));
        if (!slot) out.erase(J);
      }
    }
    return out;
  }

  Fp f_;
  mutable std::mutex mu_;
  mutable std::map<Admissible, SteenrodElement> memo_;
};

inline SteenrodElement adem_reduce(const std::vector<int>& word, u32 p) {
  static std::mutex m;
  static std::map<u32, std::unique_ptr<SteenrodAlgebra>> cache;
  SteenrodAlgebra* A;
  {
    std::lock_guard<std::mutex> lk(m);
    auto& slot = cache[p];
    if (!slot) slot = std::make_unique<SteenrodAlgebra>(p);
    A = slot.get();
  }
  return A->reduce(word);
}

// ---------------------------------------------------------------------------
// Truncated graded modules with an action of the powers P^i.

class GradedModule {
 public:
  virtual ~GradedModule() = default;
  virtual u32 prime() const = 0;
  virtual int max_degree() const = 0;  // unit degree truncation
  virtual int dim(int d) const = 0;
  // P^i on basis element idx of unit degree d; lands in degree d + i(p-1)
  virtual SparseVec act(int i, int d, int idx) const = 0;
  virtual std::string label(int d, int idx) const { return "b" + std::to_string(d) + "_" + std::to_string(idx); }
  int step(int i) const { return i * static_cast<int>(prime() - 1); }
};

inline void axpy(SparseVec& acc, u32 c, const SparseVec& v, const Fp& f) {
  if (!c || v.empty()) return;
  SparseVec out;
  out.reserve(acc.size() + v.size());
  size_t i = 0, j = 0;
  while (i < acc.size() || j < v.size()) {
    if (j == v.size() || (i < acc.size() && acc[i].first < v[j].first)) out.push_back(acc[i++]);
    else if (i == acc.size() || v[j].first < acc[i].first) {
      out.emplace_back(v[j].first, f.mul(c, v[j].second));
      ++j;
    } else {
      u32 s = f.add(acc[i].second, f.mul(c, v[j].second));
      if (s) out.emplace_back(acc[i].first, s);
      ++i;
      ++j;
    }
  }
  acc.swap(out);
}

inline SparseVec apply_power(const GradedModule& M, int i, int d, const SparseVec& v) {
  if (i == 0) return v;
  Fp f(M.prime());
  SparseVec out;
  for (auto& [idx, c] : v) axpy(out, c, M.act(i, d, idx), f);
  return out;
}

// apply P^{w_1} ... P^{w_k} (rightmost first); nullopt if a step leaves the truncation
inline std::optional<SparseVec> apply_word(const GradedModule& M, const std::vector<int>& word, int d, SparseVec v) {
  for (int h = static_cast<int>(word.size()) - 1; h >= 0; --h) {
    int nd = d + M.step(word[h]);
    if (nd > M.max_degree()) return std::nullopt;
    v = apply_power(M, word[h], d, v);
    d = nd;
  }
  return v;
}

// P_0 on unit degree d is P^d.
inline SparseVec P0_apply(const GradedModule& M, int d, const SparseVec& v) { return apply_power(M, d, d, v); }

inline SparseVec unit_vec(int idx) { return {{idx, 1}}; }

struct CheckReport {
  bool pass = true;
  std::string detail;
  long checks = 0;
  void fail(const std::string& msg) {
    if (pass) detail = msg;
    pass = false;
  }
};

// Instability, P^0 = id and every relation P^aP^b = sum ... with a < pb on every
// degree of the truncation.
inline CheckReport check_unstable_module(const GradedModule& M, int max_sum = -1) {
  CheckReport rep;
  const u32 p = M.prime();
  const int N = M.max_degree();
  Fp f(p);
  for (int d = 0; d <= N; ++d)
    for (int x = 0; x < M.dim(d); ++x) {
      // instability
      for (int i = d + 1; d + M.step(i) <= N; ++i) {
        ++rep.checks;
        if (!M.act(i, d, x).empty()) rep.fail("instability fails: P^" + std::to_string(i) + " on " + M.label(d, x));
      }
      // Adem
      for (int b = 1; d + M.step(b) <= N; ++b)
        for (int a = 1; a < static_cast<int>(p) * b && d + M.step(a + b) <= N; ++a) {
          if (max_sum >= 0 && a + b > max_sum) break;
          ++rep.checks;
          auto lhs = apply_word(M, {a, b}, d, unit_vec(x));
          SparseVec rhs;
          for (auto [t, c] : adem_terms(a, b, p)) {
            auto term = apply_word(M, {a + b - t, t}, d, unit_vec(x));
            axpy(rhs, c, *term, f);
          }
          if (*lhs != rhs)
            rep.fail("Adem relation P^" + std::to_string(a) + "P^" + std::to_string(b) + " fails on " + M.label(d, x));
        }
    }
  return rep;
}

// Explicit module given by tables.
class ModuleData : public GradedModule {
 public:
  ModuleData(u32 p, int N) : p_(p), N_(N), labels_(N + 1) {}

  u32 prime() const override { return p_; }
  int max_degree() const override { return N_; }
  int dim(int d) const override { return d < 0 || d > N_ ? 0 : static_cast<int>(labels_[d].size()); }
  SparseVec act(int i, int d, int idx) const override {
    if (i == 0) return unit_vec(idx);
    auto it = table_.find(key(i, d, idx));
    return it == table_.end() ? SparseVec{} : it->second;
  }
  std::string label(int d, int idx) const override { return labels_[d][idx]; }

  int add_basis(int d, std::string name) {
    labels_.at(d).push_back(std::move(name));
    return static_cast<int>(labels_[d].size()) - 1;
  }
  void set_action(int i, int d, int idx, SparseVec v) {
    if (v.empty()) table_.erase(key(i, d, idx));
    else table_[key(i, d, idx)] = std::move(v);
  }

  // tabulates any module
  static std::shared_ptr<ModuleData> tabulate(const GradedModule& M) {
    auto r = std::make_shared<ModuleData>(M.prime(), M.max_degree());
    for (int d = 0; d <= M.max_degree(); ++d)
      for (int x = 0; x < M.dim(d); ++x) r->add_basis(d, M.label(d, x));
    for (int d = 0; d <= M.max_degree(); ++d)
      for (int x = 0; x < M.dim(d); ++x)
        for (int i = 1; d + M.step(i) <= M.max_degree(); ++i) r->set_action(i, d, x, M.act(i, d, x));
    return r;
  }

 private:
  static std::tuple<int, int, int> key(int i, int d, int idx) { return {i, d, idx}; }
  u32 p_;
  int N_;
  std::vector<std::vector<std::string>> labels_;
  std::map<std::tuple<int, int, int>, SparseVec> table_;
};

using ModulePtr = std::shared_ptr<const GradedModule>;

inline std::string admissible_label(const Admissible& I, int gen_degree, u32 p) {
  std::string s;
  for (int i : I) s += "P" + std::to_string(i);
  s += (s.empty() ? "" : ".") + std::string("i") + std::to_string(gen_degree * grading_unit(p));
  return s;
}

// Free unstable module on one class of unit degree n (F'(2n); F(n) at p = 2).
class FreeUnstableModule : public GradedModule {
 public:
  FreeUnstableModule(u32 p, int n, int N) : p_(p), n_(n), N_(N), basis_(N + 1) {
    if (n < 0) throw std::invalid_argument("generator degree must be nonnegative");
    if (n <= N) {
      std::vector<int> rev;  // sequence built right to left
      std::function<void(int, int)> rec = [&](int cur, int low) {
        Admissible I(rev.rbegin(), rev.rend());
        basis_[cur].push_back(I);
        for (int i = low; i <= cur; ++i) {
          int nd = cur + i * static_cast<int>(p_ - 1);
          if (nd > N_) break;
          rev.push_back(i);
          rec(nd, i * static_cast<int>(p_));
          rev.pop_back();
        }
      };
      rec(n, 1);
      for (auto& b : basis_) std::sort(b.begin(), b.end());
      for (int d = 0; d <= N_; ++d)
        for (size_t x = 0; x < basis_[d].size(); ++x) index_[basis_[d][x]] = static_cast<int>(x);
    }
  }

  u32 prime() const override { return p_; }
  int max_degree() const override { return N_; }
  int dim(int d) const override { return d < 0 || d > N_ ? 0 : static_cast<int>(basis_[d].size()); }
  int generator_degree() const { return n_; }
  const Admissible& sequence(int d, int idx) const { return basis_[d][idx]; }

  // instability simulation: P^I applied right to left to the generator never hits i > degree
  bool survives(const Admissible& I) const {
    int cur = n_;
    for (int h = static_cast<int>(I.size()) - 1; h >= 0; --h) {
      if (I[h] > cur) return false;
      cur += I[h] * static_cast<int>(p_ - 1);
    }
    return true;
  }

  SparseVec act(int i, int d, int idx) const override {
    if (i == 0) return unit_vec(idx);
    int nd = d + step(i);
    if (nd > N_) throw std::out_of_range("action leaves the truncation");
    std::vector<int> w{i};
    const auto& I = basis_[d][idx];
    w.insert(w.end(), I.begin(), I.end());
    SparseVec out;
    for (auto& [J, c] : adem_reduce(w, p_)) {
      if (!survives(J)) continue;
      out.emplace_back(index_.at(J), c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::string label(int d, int idx) const override { return admissible_label(basis_[d][idx], n_, p_); }

 private:
  u32 p_;
  int n_, N_;
  std::vector<std::vector<Admissible>> basis_;
  std::map<Admissible, int> index_;
};

inline std::shared_ptr<ModuleData> free_unstable_module(u32 p, int n, int N) {
  return ModuleData::tabulate(FreeUnstableModule(p, n, N));
}

// One class in unit degree 1 with trivial positive action (double suspension of F'(0)).
inline std::shared_ptr<ModuleData> sigma_sq_f0(u32 p, int N) {
  auto m = std::make_shared<ModuleData>(p, N);
  if (N >= 1) m->add_basis(1, "s2i0");
  return m;
}

inline std::shared_ptr<ModuleData> zero_module(u32 p, int N) { return std::make_shared<ModuleData>(p, N); }

inline std::shared_ptr<ModuleData> direct_sum(const std::vector<ModulePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("direct sum of nothing");
  const u32 p = parts[0]->prime();
  int N = parts[0]->max_degree();
  for (auto& m : parts) N = std::min(N, m->max_degree());
  auto r = std::make_shared<ModuleData>(p, N);
  std::vector<std::vector<int>> offset(parts.size(), std::vector<int>(N + 1, 0));
  for (int d = 0; d <= N; ++d) {
    int off = 0;
    for (size_t k = 0; k < parts.size(); ++k) {
      offset[k][d] = off;
      for (int x = 0; x < parts[k]->dim(d); ++x) r->add_basis(d, parts[k]->label(d, x) + "#" + std::to_string(k));
      off += parts[k]->dim(d);
    }
  }
  for (size_t k = 0; k < parts.size(); ++k)
    for (int d = 0; d <= N; ++d)
      for (int x = 0; x < parts[k]->dim(d); ++x)
        for (int i = 1; d + parts[k]->step(i) <= N; ++i) {
          auto v = parts[k]->act(i, d, x);
          for (auto& e : v) e.first += offset[k][d + parts[k]->step(i)];
          r->set_action(i, d, offset[k][d] + x, v);
        }
  return r;
}

inline std::shared_ptr<ModuleData> direct_power(const ModulePtr& m, int s) {
  return direct_sum(std::vector<ModulePtr>(s, m));
}

// ---------------------------------------------------------------------------
// P_0, reducedness, and the quotient M / Im P_0.

// matrix of P_0 from unit degree d to degree pd (rows: target)
inline FpMatrix p0_matrix(const GradedModule& M, int d) {
  const int pd = d * static_cast<int>(M.prime());
  FpMatrix m(M.prime(), M.dim(pd), M.dim(d));
  for (int x = 0; x < M.dim(d); ++x)
    for (auto& [j, c] : P0_apply(M, d, unit_vec(x))) m(j, x) = c;
  return m;
}

inline bool is_reduced(const GradedModule& M) {
  for (int d = 0; d * static_cast<int>(M.prime()) <= M.max_degree(); ++d) {
    if (d == 0 && M.dim(0) > 0) continue;  // P_0 is the identity there
    if (rank(p0_matrix(M, d)) != M.dim(d)) return false;
  }
  return true;
}

struct SigmaOmega {
  std::shared_ptr<ModuleData> quotient;
  std::vector<std::vector<int>> section;  // section[d][c] = basis index of M mapped to quotient class c
  std::vector<SparseEchelon> image;       // Im P_0 in each degree
  // coordinates of pr(v) in the quotient basis of degree d
  SparseVec project(int d, const SparseVec& v) const {
    SparseVec r = image[d].reduce(v);
    SparseVec out;
    for (auto& [j, c] : r) {
      auto it = std::lower_bound(section[d].begin(), section[d].end(), j);
      out.emplace_back(static_cast<int>(it - section[d].begin()), c);
    }
    return out;
  }
};

inline SigmaOmega sigma_omega(const GradedModule& M) {
  const u32 p = M.prime();
  const int N = M.max_degree();
  SigmaOmega so;
  so.quotient = std::make_shared<ModuleData>(p, N);
  so.section.assign(N + 1, {});
  so.image.assign(N + 1, SparseEchelon(p));
  for (int d = 1; d <= N; ++d) {
    if (d % static_cast<int>(p) == 0)
      for (int x = 0; x < M.dim(d / p); ++x) so.image[d].insert(P0_apply(M, d / p, unit_vec(x)));
  }
  for (int d = 0; d <= N; ++d) {
    // in degree 0, P_0 is the identity and kills everything in the quotient
    if (d == 0) continue;
    for (int x = 0; x < M.dim(d); ++x)
      if (!so.image[d].is_pivot(x)) {
        so.section[d].push_back(x);
        so.quotient->add_basis(d, M.label(d, x));
      }
  }
  for (int d = 1; d <= N; ++d)
    for (size_t c = 0; c < so.section[d].size(); ++c)
      for (int i = 1; d + M.step(i) <= N; ++i)
        so.quotient->set_action(i, d, static_cast<int>(c), so.project(d + M.step(i), M.act(i, d, so.section[d][c])));
  return so;
}

}  // namespace unstalg
