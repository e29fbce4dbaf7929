#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace unstalg {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Arithmetic in F_p on residues in [0, p).
struct Fp {
  u32 p = 2;

  Fp() = default;
  explicit Fp(u32 prime) : p(prime) {
    if (!is_prime(prime)) throw std::invalid_argument("characteristic " + std::to_string(prime) + " is not prime");
  }

  u32 add(u32 a, u32 b) const { u32 s = a + b; return s >= p ? s - p : s; }
  u32 sub(u32 a, u32 b) const { return a >= b ? a - b : a + p - b; }
  u32 neg(u32 a) const { return a ? p - a : 0; }
  u32 mul(u32 a, u32 b) const { return static_cast<u32>(static_cast<u64>(a) * b % p); }
  u32 reduce(i64 v) const {
    i64 r = v % static_cast<i64>(p);
    return static_cast<u32>(r < 0 ? r + p : r);
  }
  u32 pow(u32 a, u64 e) const {
    u32 r = 1 % p;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u32 inv(u32 a) const {
    if (a % p == 0) throw std::domain_error("inverse of zero in F_p");
    return pow(a, p - 2);
  }
};

// C(n, k) mod p by Lucas' theorem.
inline u32 binomial_mod_p(u64 n, u64 k, u32 p) {
  if (k > n) return 0;
  Fp f(p);
  u32 r = 1;
  while (n || k) {
    u64 a = n % p, b = k % p;
    if (b > a) return 0;
    // small binomial via multiplicative formula in F_p
    u32 num = 1, den = 1;
    for (u64 i = 0; i < b; ++i) {
      num = f.mul(num, static_cast<u32>((a - i) % p));
      den = f.mul(den, static_cast<u32>((i + 1) % p));
    }
    r = f.mul(r, f.mul(num, f.inv(den)));
    n /= p;
    k /= p;
  }
  return r;
}

class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(u32 p, int rows, int cols) : f_(p), rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0) {}

  static FpMatrix identity(u32 p, int n) {
    FpMatrix m(p, n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1 % p;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  u32 prime() const { return f_.p; }
  const Fp& field() const { return f_; }

  u32& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  u32 operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](u32 x) { return x == 0; });
  }
  bool operator==(const FpMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

  FpMatrix operator*(const FpMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix shape mismatch in product");
    FpMatrix r(f_.p, rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        u32 x = (*this)(i, k);
        if (!x) continue;
        for (int j = 0; j < o.cols_; ++j) r(i, j) = f_.add(r(i, j), f_.mul(x, o(k, j)));
      }
    return r;
  }
  FpMatrix operator+(const FpMatrix& o) const {
    check_same(o);
    FpMatrix r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = f_.add(a_[i], o.a_[i]);
    return r;
  }
  FpMatrix operator-(const FpMatrix& o) const {
    check_same(o);
    FpMatrix r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = f_.sub(a_[i], o.a_[i]);
    return r;
  }
  FpMatrix scaled(u32 c) const {
    FpMatrix r = *this;
    for (auto& x : r.a_) x = f_.mul(x, c % f_.p);
    return r;
  }
  FpMatrix transpose() const {
    FpMatrix t(f_.p, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  std::vector<u32> apply(const std::vector<u32>& v) const {
    if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("vector length mismatch");
    std::vector<u32> r(rows_, 0);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r[i] = f_.add(r[i], f_.mul((*this)(i, j), v[j]));
    return r;
  }
  std::vector<u32> row(int r) const { return {a_.begin() + static_cast<size_t>(r) * cols_, a_.begin() + static_cast<size_t>(r + 1) * cols_}; }
  std::vector<u32> column(int c) const {
    std::vector<u32> v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
    return v;
  }

 private:
  void check_same(const FpMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
  }
  Fp f_;
  int rows_ = 0, cols_ = 0;
  std::vector<u32> a_;
};

struct RowReduction {
  int rank = 0;
  FpMatrix reduced;
  std::vector<int> pivots;
};

// Reduced row-echelon form; pivots are searched only among the first
// `pivot_cols` columns (all columns when negative), other columns ride along.
inline RowReduction row_reduce(FpMatrix m, int pivot_cols = -1) {
  const Fp& f = m.field();
  if (pivot_cols < 0) pivot_cols = m.cols();
  RowReduction out;
  int r = 0;
  for (int c = 0; c < pivot_cols && r < m.rows(); ++c) {
    int piv = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c)) { piv = i; break; }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
    u32 s = f.inv(m(r, c));
    for (int j = 0; j < m.cols(); ++j) m(r, j) = f.mul(m(r, j), s);
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || !m(i, c)) continue;
      u32 t = m(i, c);
      for (int j = 0; j < m.cols(); ++j) m(i, j) = f.sub(m(i, j), f.mul(t, m(r, j)));
    }
    out.pivots.push_back(c);
    ++r;
  }
  out.rank = r;
  out.reduced = std::move(m);
  return out;
}

inline int rank(const FpMatrix& m) { return row_reduce(m).rank; }

// Basis of the right null space {v : m v = 0}.
inline std::vector<std::vector<u32>> kernel_basis(const FpMatrix& m) {
  RowReduction rr = row_reduce(m);
  const Fp& f = m.field();
  std::vector<char> is_piv(m.cols(), 0);
  for (int c : rr.pivots) is_piv[c] = 1;
  std::vector<std::vector<u32>> basis;
  for (int free = 0; free < m.cols(); ++free) {
    if (is_piv[free]) continue;
    std::vector<u32> v(m.cols(), 0);
    v[free] = 1;
    for (int i = 0; i < rr.rank; ++i) v[rr.pivots[i]] = f.neg(rr.reduced(i, free));
    basis.push_back(std::move(v));
  }
  return basis;
}

// Image of a linear map given by the matrix f (target x source), with one
// preimage per reduced image row and a basis of the kernel.
struct ImageData {
  std::vector<std::vector<u32>> rows;       // reduced image rows (target coordinates)
  std::vector<int> pivots;                  // pivot target index of each row
  std::vector<std::vector<u32>> preimages;  // source vector mapped to rows[i]
  std::vector<std::vector<u32>> kernel;     // source vectors mapped to zero
};

inline ImageData image_with_preimages(const FpMatrix& f) {
  const int t = f.rows(), s = f.cols();
  FpMatrix aug(f.prime(), s, t + s);
  for (int b = 0; b < s; ++b) {
    for (int i = 0; i < t; ++i) aug(b, i) = f(i, b);
    aug(b, t + b) = 1;
  }
  RowReduction rr = row_reduce(aug, t);
  ImageData out;
  for (int r = 0; r < s; ++r) {
    std::vector<u32> left(t), right(s);
    for (int i = 0; i < t; ++i) left[i] = rr.reduced(r, i);
    for (int j = 0; j < s; ++j) right[j] = rr.reduced(r, t + j);
    if (r < rr.rank) {
      out.rows.push_back(std::move(left));
      out.pivots.push_back(rr.pivots[r]);
      out.preimages.push_back(std::move(right));
    } else {
      out.kernel.push_back(std::move(right));
    }
  }
  // rows below the rank have zero left part but the right part is only
  // guaranteed independent, so row-reduce the kernel block for a clean basis
  if (!out.kernel.empty()) {
    FpMatrix k(f.prime(), static_cast<int>(out.kernel.size()), s);
    for (size_t i = 0; i < out.kernel.size(); ++i)
      for (int j = 0; j < s; ++j) k(static_cast<int>(i), j) = out.kernel[i][j];
    RowReduction kr = row_reduce(k);
    out.kernel.clear();
    for (int i = 0; i < kr.rank; ++i) out.kernel.push_back(kr.reduced.row(i));
  }
  return out;
}

// Sorted sparse vector: (index, nonzero coefficient).
using SparseVec = std::vector<std::pair<int, u32>>;

// Incrementally maintained echelon basis of a subspace of F_p^n with sparse rows.
class SparseEchelon {
 public:
  explicit SparseEchelon(u32 p = 2) : f_(p) {}

  int rank() const { return static_cast<int>(rows_.size()); }
  bool is_pivot(int col) const { return pivot_.count(col) != 0; }
  const std::vector<SparseVec>& rows() const { return rows_; }

  // Residue of v modulo the span, supported on non-pivot columns only.
  SparseVec reduce(SparseVec v) const {
    size_t pos = 0;
    SparseVec tmp;
    while (pos < v.size()) {
      auto it = pivot_.find(v[pos].first);
      if (it == pivot_.end()) { ++pos; continue; }
      const SparseVec& row = rows_[it->second];
      u32 a = v[pos].second;
      tmp.clear();
      tmp.insert(tmp.end(), v.begin(), v.begin() + pos);
      size_t i = pos, j = 0;
      while (i < v.size() || j < row.size()) {
        if (j == row.size() || (i < v.size() && v[i].first < row[j].first)) {
          tmp.push_back(v[i++]);
        } else if (i == v.size() || row[j].first < v[i].first) {
          tmp.emplace_back(row[j].first, f_.neg(f_.mul(a, row[j].second)));
          ++j;
        } else {
          u32 c = f_.sub(v[i].second, f_.mul(a, row[j].second));
          if (c) tmp.emplace_back(v[i].first, c);
          ++i;
          ++j;
        }
      }
      v.swap(tmp);
    }
    return v;
  }

  // Adds v to the span; returns false if v was already in it.
  bool insert(SparseVec v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    u32 s = f_.inv(v.front().second);
    for (auto& e : v) e.second = f_.mul(e.second, s);
    pivot_[v.front().first] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(v));
    return true;
  }

 private:
  Fp f_;
  std::vector<SparseVec> rows_;
  std::unordered_map<int, int> pivot_;
};

// The field F_{p^s}: elements are coded by sum c_i p^i over the polynomial
// basis 1, x, ..., x^{s-1} modulo a fixed monic irreducible polynomial.
class FieldExtension {
 public:
  FieldExtension(u32 p, int s) : f_(p), s_(s) {
    if (s < 1) throw std::invalid_argument("extension degree must be positive");
    u64 q = 1;
    for (int i = 0; i < s; ++i) q *= p;
    if (q > (1u << 16)) throw std::invalid_argument("p^s too large to enumerate");
    order_ = static_cast<u32>(q);
    find_modulus();
    find_omega();
    build_normal_basis();
  }

  u32 p() const { return f_.p; }
  int s() const { return s_; }
  u32 order() const { return order_; }
  const std::vector<u32>& modulus() const { return modulus_; }  // c_0..c_s, c_s = 1
  u32 omega() const { return omega_; }

  std::vector<u32> coeffs(u32 a) const {
    std::vector<u32> c(s_);
    for (int i = 0; i < s_; ++i) { c[i] = a % f_.p; a /= f_.p; }
    return c;
  }
  u32 code(const std::vector<u32>& c) const {
    u32 a = 0;
    for (int i = s_ - 1; i >= 0; --i) a = a * f_.p + c[i];
    return a;
  }
  u32 add(u32 a, u32 b) const {
    auto x = coeffs(a), y = coeffs(b);
    for (int i = 0; i < s_; ++i) x[i] = f_.add(x[i], y[i]);
    return code(x);
  }
  u32 scale(u32 c, u32 a) const {
    auto x = coeffs(a);
    for (auto& v : x) v = f_.mul(v, c);
    return code(x);
  }
  u32 mul(u32 a, u32 b) const {
    auto x = coeffs(a), y = coeffs(b);
    std::vector<u32> prod(2 * s_, 0);
    for (int i = 0; i < s_; ++i)
      for (int j = 0; j < s_; ++j) prod[i + j] = f_.add(prod[i + j], f_.mul(x[i], y[j]));
    for (int d = 2 * s_ - 1; d >= s_; --d) {
      u32 c = prod[d];
      if (!c) continue;
      prod[d] = 0;
      for (int i = 0; i < s_; ++i) prod[d - s_ + i] = f_.sub(prod[d - s_ + i], f_.mul(c, modulus_[i]));
    }
    prod.resize(s_);
    return code(prod);
  }
  u32 pow(u32 a, u64 e) const {
    u32 r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u32 frobenius(u32 a) const { return pow(a, f_.p); }

  // phi^i(omega) for the normal basis
  u32 normal_element(int i) const { return normal_[((i % s_) + s_) % s_]; }
  // coordinates of a in the basis {omega, phi omega, ..., phi^{s-1} omega}
  std::vector<u32> normal_coords(u32 a) const { return to_normal_.apply(coeffs(a)); }
  u32 from_normal(const std::vector<u32>& c) const { return code(to_poly_.apply(c)); }
  // Frobenius as a matrix on the normal basis
  const FpMatrix& frobenius_matrix() const { return frob_; }

  bool is_primitive(u32 a) const {
    if (a == 0) return false;
    u32 n = order_ - 1;
    for (u32 d = 2; d <= n; ++d) {
      if (n % d || !is_prime(d)) continue;
      if (pow(a, n / d) == 1) return false;
    }
    return true;
  }
  bool is_normal(u32 a) const {
    FpMatrix m(f_.p, s_, s_);
    u32 x = a;
    for (int i = 0; i < s_; ++i) {
      auto c = coeffs(x);
      for (int r = 0; r < s_; ++r) m(r, i) = c[r];
      x = frobenius(x);
    }
    return rank(m) == s_;
  }

 private:
  bool divides(const std::vector<u32>& g, std::vector<u32> h) const {
    // g monic
    int dg = static_cast<int>(g.size()) - 1;
    for (int d = static_cast<int>(h.size()) - 1; d >= dg; --d) {
      u32 c = h[d];
      if (!c) continue;
      for (int i = 0; i <= dg; ++i) h[d - dg + i] = f_.sub(h[d - dg + i], f_.mul(c, g[i]));
    }
    for (int i = 0; i < dg; ++i)
      if (h[i]) return false;
    return true;
  }
  void find_modulus() {
    // monic polynomials ordered lexicographically by (c_{s-1}, ..., c_0)
    for (u32 t = 0; t < order_; ++t) {
      std::vector<u32> poly(s_ + 1);
      u32 x = t;
      for (int i = 0; i < s_; ++i) { poly[i] = x % f_.p; x /= f_.p; }
      poly[s_] = 1;
      bool irreducible = true;
      for (int dg = 1; dg <= s_ / 2 && irreducible; ++dg) {
        u64 cnt = 1;
        for (int i = 0; i < dg; ++i) cnt *= f_.p;
        for (u64 g = 0; g < cnt && irreducible; ++g) {
          std::vector<u32> gp(dg + 1);
          u64 y = g;
          for (int i = 0; i < dg; ++i) { gp[i] = static_cast<u32>(y % f_.p); y /= f_.p; }
          gp[dg] = 1;
          if (divides(gp, poly)) irreducible = false;
        }
      }
      if (irreducible) { modulus_ = poly; return; }
    }
    throw std::logic_error("no irreducible polynomial found");
  }
  void find_omega() {
    for (u32 a = 1; a < order_; ++a)
      if (is_primitive(a) && is_normal(a)) { omega_ = a; return; }
    throw std::logic_error("no primitive normal element found");
  }
  void build_normal_basis() {
    to_poly_ = FpMatrix(f_.p, s_, s_);
    u32 x = omega_;
    for (int i = 0; i < s_; ++i) {
      normal_.push_back(x);
      auto c = coeffs(x);
      for (int r = 0; r < s_; ++r) to_poly_(r, i) = c[r];
      x = frobenius(x);
    }
    // invert to_poly_
    FpMatrix aug(f_.p, s_, 2 * s_);
    for (int r = 0; r < s_; ++r) {
      for (int c = 0; c < s_; ++c) aug(r, c) = to_poly_(r, c);
      aug(r, s_ + r) = 1;
    }
    RowReduction rr = row_reduce(aug, s_);
    to_normal_ = FpMatrix(f_.p, s_, s_);
    for (int r = 0; r < s_; ++r)
      for (int c = 0; c < s_; ++c) to_normal_(r, c) = rr.reduced(r, s_ + c);
    frob_ = FpMatrix(f_.p, s_, s_);
    for (int i = 0; i < s_; ++i) frob_((i + 1) % s_, i) = 1;
  }

  Fp f_;
  int s_;
  u32 order_ = 0;
  std::vector<u32> modulus_;
  u32 omega_ = 1;
  std::vector<u32> normal_;
  FpMatrix to_poly_, to_normal_, frob_;
};

inline FieldExtension build_field_extension(u32 p, int s) { return FieldExtension(p, s); }

}  // namespace unstalg
