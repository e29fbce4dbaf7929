#pragma once

#include <map>
#include <string>
#include <vector>

#include "unstalg/algebra.hpp"

namespace unstalg {

// An unstable module N with a degree-preserving d, d^s = id, commuting with the action.
struct QsModule {
  ModulePtr M;
  int s = 1;
  std::function<SparseVec(int /*deg*/, int /*idx*/)> dop;
};

inline QsModule trivial_qs(ModulePtr M, int s) {
  return {M, s, [](int, int idx) { return unit_vec(idx); }};
}

// M^{⊕s}, d moving copy c to copy c+1
inline QsModule cyclic_qs(ModulePtr M, int s) {
  std::vector<ModulePtr> parts(s, M);
  ModulePtr S = direct_sum(parts);
  return {S, s, [M, s](int d, int idx) {
            const int n = M->dim(d);
            return unit_vec(((idx / n + 1) % s) * n + idx % n);
          }};
}

// an unstable quotient over P o Q_sD, d acting letterwise
inline QsModule qs_from_quotient(std::shared_ptr<const UnstableQuotient> K, int s) {
  return {K, s, [K](int d, int idx) {
            auto m = K->algebra().shift(K->basis(d).at(idx));
            return m ? K->coords(d, K->rho(*m)) : SparseVec{};
          }};
}

namespace twist_detail {

inline FpMatrix dop_matrix(const QsModule& N, int d) {
  const int n = N.M->dim(d);
  FpMatrix m(N.M->prime(), n, n);
  for (int x = 0; x < n; ++x)
    for (auto& [y, c] : N.dop(d, x)) m(y, x) = c;
  return m;
}

inline FpMatrix act_matrix(const GradedModule& M, int i, int d) {
  const int t = d + M.step(i);
  FpMatrix m(M.prime(), M.dim(t), M.dim(d));
  for (int x = 0; x < M.dim(d); ++x)
    for (auto& [y, c] : M.act(i, d, x)) m(y, x) = c;
  return m;
}

inline FpMatrix power(const FpMatrix& a, int e) {
  FpMatrix r = FpMatrix::identity(a.prime(), a.rows());
  for (int j = 0; j < e; ++j) r = r * a;
  return r;
}

// multiplication by a in the normal coordinates of F_{p^s}
inline FpMatrix mul_matrix(const FieldExtension& F, u32 a) {
  FpMatrix m(F.p(), F.s(), F.s());
  for (int c = 0; c < F.s(); ++c) {
    auto v = F.normal_coords(F.mul(a, F.normal_element(c)));
    for (int r = 0; r < F.s(); ++r) m(r, c) = v[r];
  }
  return m;
}

// A ⊗ B for the (c, x) -> c * dim B + x layout
inline FpMatrix kron(const FpMatrix& A, const FpMatrix& B) {
  FpMatrix r(A.prime(), A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j))
        for (int k = 0; k < B.rows(); ++k)
          for (int l = 0; l < B.cols(); ++l) r(i * B.rows() + k, j * B.cols() + l) = A.field().mul(A(i, j), B(k, l));
  return r;
}

// phi^{-1} in normal coordinates: phi^c omega -> phi^{c-1} omega
inline FpMatrix frobenius_inverse(u32 p, int s) {
  FpMatrix m(p, s, s);
  for (int c = 0; c < s; ++c) m(((c - 1) % s + s) % s, c) = 1;
  return m;
}

}  // namespace twist_detail

inline CheckReport check_qs_module(const QsModule& N) {
  using namespace twist_detail;
  CheckReport rep;
  const GradedModule& M = *N.M;
  for (int d = 0; d <= M.max_degree(); ++d) {
    FpMatrix D = dop_matrix(N, d);
    ++rep.checks;
    if (!(power(D, N.s) == FpMatrix::identity(M.prime(), M.dim(d)))) rep.fail("d^s is not the identity in degree " + std::to_string(d));
    for (int i = 1; d + M.step(i) <= M.max_degree(); ++i) {
      ++rep.checks;
      FpMatrix A = act_matrix(M, i, d);
      if (!(A * D == dop_matrix(N, d + M.step(i)) * A))
        rep.fail("d does not commute with P^" + std::to_string(i) + " in degree " + std::to_string(d));
    }
  }
  return rep;
}

// F_{p^s} ⊗ N as an F_p-module: basis (c, x) for phi^c omega ⊗ x, the action on the second factor.
class ScalarExtension : public GradedModule {
 public:
  ScalarExtension(QsModule N, const FieldExtension& F) : N_(std::move(N)), s_(F.s()) {
    if (F.s() != N_.s) throw std::invalid_argument("extension degree differs from the order of d");
  }
  u32 prime() const override { return N_.M->prime(); }
  int max_degree() const override { return N_.M->max_degree(); }
  int dim(int d) const override { return s_ * N_.M->dim(d); }
  SparseVec act(int i, int d, int idx) const override {
    const int n = N_.M->dim(d), m = N_.M->dim(d + step(i));
    SparseVec v = N_.M->act(i, d, idx % n);
    for (auto& e : v) e.first += (idx / n) * m;
    return v;
  }
  std::string label(int d, int idx) const override {
    const int n = N_.M->dim(d);
    return "phi" + std::to_string(idx / n) + "w*" + N_.M->label(d, idx % n);
  }
  // the diagonal d = phi^{-1} ⊗ d_N
  FpMatrix diagonal_d(int d) const {
    return twist_detail::kron(twist_detail::frobenius_inverse(prime(), s_), twist_detail::dop_matrix(N_, d));
  }
  const QsModule& base() const { return N_; }
  int s() const { return s_; }

 private:
  QsModule N_;
  int s_;
};

// beta(phi^i omega ⊗ x) = phi^i omega ⊗ d^{-i} x from F_{p^s} ⊗ N_triv to F_{p^s} ⊗ N
inline FpMatrix beta_matrix(const QsModule& N, int s, int d) {
  using namespace twist_detail;
  const int n = N.M->dim(d);
  FpMatrix D = dop_matrix(N, d);
  FpMatrix B(N.M->prime(), s * n, s * n);
  for (int c = 0; c < s; ++c) {
    FpMatrix Dc = power(D, ((s - c) % s + s) % s);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) B(c * n + y, c * n + x) = Dc(y, x);
  }
  return B;
}

inline CheckReport verify_beta(const QsModule& N, const FieldExtension& F) {
  using namespace twist_detail;
  CheckReport rep;
  const int s = F.s();
  ScalarExtension E(N, F), T(trivial_qs(N.M, s), F);
  for (int d = 0; d <= N.M->max_degree(); ++d) {
    const int n = N.M->dim(d);
    FpMatrix B = beta_matrix(N, s, d);
    // inverse phi^i omega ⊗ x -> phi^i omega ⊗ d^i x
    FpMatrix D = dop_matrix(N, d);
    FpMatrix Binv(N.M->prime(), s * n, s * n);
    for (int c = 0; c < s; ++c) {
      FpMatrix Dc = power(D, c);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) Binv(c * n + y, c * n + x) = Dc(y, x);
    }
    rep.checks += 3;
    if (!(B * Binv == FpMatrix::identity(N.M->prime(), s * n))) rep.fail("beta inverse fails in degree " + std::to_string(d));
    if (rank(B) != s * n) rep.fail("beta is not bijective in degree " + std::to_string(d));
    if (!(B * T.diagonal_d(d) == E.diagonal_d(d) * B)) rep.fail("beta does not intertwine d in degree " + std::to_string(d));
    for (int i = 1; d + N.M->step(i) <= N.M->max_degree(); ++i) {
      ++rep.checks;
      const int t = d + N.M->step(i);
      if (!(beta_matrix(N, s, t) * act_matrix(T, i, d) == act_matrix(E, i, d) * B))
        rep.fail("beta is not A'-linear in degree " + std::to_string(d));
    }
    // sum_i phi^i omega ⊗ d^{-i} x is d-fixed
    FpMatrix Bq(N.M->prime(), s * n, n);
    for (int x = 0; x < n; ++x)
      for (int c = 0; c < s; ++c)
        for (int y = 0; y < n; ++y) Bq(c * n + y, x) = B(c * n + y, c * n + x);
    rep.checks += 2;
    if (!(E.diagonal_d(d) * Bq == Bq)) rep.fail("beta of fixed points is not fixed in degree " + std::to_string(d));
    if (rank(Bq) != n) rep.fail("beta of fixed points is not injective in degree " + std::to_string(d));
  }
  return rep;
}

// (F_{p^s} ⊗ N)^d with the induced action; the inclusion columns are kept per degree.
class InvariantSubmodule : public GradedModule {
 public:
  explicit InvariantSubmodule(std::shared_ptr<const ScalarExtension> E) : E_(std::move(E)) {
    const u32 p = E_->prime();
    const int N = E_->max_degree();
    incl_.resize(N + 1);
    ech_.resize(N + 1);
    for (int d = 0; d <= N; ++d) {
      FpMatrix D = E_->diagonal_d(d);
      auto ker = kernel_basis(D - FpMatrix::identity(p, D.rows()));
      incl_[d] = ker;
      // solve in the kernel basis: echelon of basis vectors with an identity tag
      const int n = D.rows(), k = static_cast<int>(ker.size());
      FpMatrix aug(p, k, n + k);
      for (int r = 0; r < k; ++r) {
        for (int j = 0; j < n; ++j) aug(r, j) = ker[r][j];
        aug(r, n + r) = 1;
      }
      ech_[d] = row_reduce(aug, n);
    }
  }
  u32 prime() const override { return E_->prime(); }
  int max_degree() const override { return E_->max_degree(); }
  int dim(int d) const override { return d < 0 || d > max_degree() ? 0 : static_cast<int>(incl_[d].size()); }
  SparseVec act(int i, int d, int idx) const override {
    const int t = d + step(i);
    std::vector<u32> img(E_->dim(t), 0);
    Fp f(prime());
    const auto& v = incl_[d][idx];
    for (int x = 0; x < E_->dim(d); ++x)
      if (v[x])
        for (auto& [y, c] : E_->act(i, d, x)) img[y] = f.add(img[y], f.mul(v[x], c));
    return solve(t, img);
  }
  const std::vector<std::vector<u32>>& inclusion(int d) const { return incl_[d]; }
  const ScalarExtension& ambient() const { return *E_; }

  // coordinates of an invariant vector in the kernel basis
  SparseVec solve(int d, std::vector<u32> v) const {
    Fp f(prime());
    const auto& rr = ech_[d];
    const int n = E_->dim(d), k = dim(d);
    std::vector<u32> coef(k, 0);
    for (int r = 0; r < rr.rank; ++r) {
      const int c = rr.pivots[r];
      const u32 a = v[c];
      if (!a) continue;
      for (int j = 0; j < n; ++j) v[j] = f.sub(v[j], f.mul(a, rr.reduced(r, j)));
      for (int j = 0; j < k; ++j) coef[j] = f.add(coef[j], f.mul(a, rr.reduced(r, n + j)));
    }
    if (std::any_of(v.begin(), v.end(), [](u32 x) { return x != 0; }))
      throw std::logic_error("vector is not d-invariant");
    SparseVec out;
    for (int j = 0; j < k; ++j)
      if (coef[j]) out.emplace_back(j, coef[j]);
    return out;
  }

 private:
  std::shared_ptr<const ScalarExtension> E_;
  std::vector<std::vector<std::vector<u32>>> incl_;
  std::vector<RowReduction> ech_;
};

// a ⊗ v -> a v from F_{p^s} ⊗ N_inv to F_{p^s} ⊗ N: bijective, A'-linear, phi^{-1} ⊗ 1 to d
inline CheckReport verify_iota(const InvariantSubmodule& I, const FieldExtension& F) {
  using namespace twist_detail;
  CheckReport rep;
  const ScalarExtension& E = I.ambient();
  const int s = F.s();
  const u32 p = F.p();
  auto iota = [&](int d) {
    const int n = E.base().M->dim(d), k = I.dim(d);
    FpMatrix m(p, s * n, s * k);
    for (int c = 0; c < s; ++c) {
      FpMatrix A = kron(mul_matrix(F, F.normal_element(c)), FpMatrix::identity(p, n));
      for (int x = 0; x < k; ++x) {
        auto col = A.apply(I.inclusion(d)[x]);
        for (int r = 0; r < s * n; ++r) m(r, c * k + x) = col[r];
      }
    }
    return m;
  };
  for (int d = 0; d <= E.max_degree(); ++d) {
    FpMatrix J = iota(d);
    rep.checks += 3;
    if (I.dim(d) != E.base().M->dim(d)) rep.fail("invariants have the wrong dimension in degree " + std::to_string(d));
    if (J.rows() != J.cols() || rank(J) != J.rows()) rep.fail("iota is not bijective in degree " + std::to_string(d));
    FpMatrix Dsrc = kron(frobenius_inverse(p, s), FpMatrix::identity(p, I.dim(d)));
    if (!(J * Dsrc == E.diagonal_d(d) * J)) rep.fail("iota does not intertwine d in degree " + std::to_string(d));
    for (int i = 1; d + E.step(i) <= E.max_degree(); ++i) {
      ++rep.checks;
      const int t = d + E.step(i);
      FpMatrix Ai = act_matrix(I, i, d);
      if (!(iota(t) * kron(FpMatrix::identity(p, s), Ai) == act_matrix(E, i, d) * J))
        rep.fail("iota is not A'-linear in degree " + std::to_string(d));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Twisted quotients

// weight of d^e: p^{-e} mod p^s - 1
inline i64 twist_weight(u32 p, int s, int e) {
  i64 w = 1;
  for (int j = 0; j < ((-e) % s + s) % s; ++j) w *= p;
  return w;
}

inline i64 twist_modulus(u32 p, int s) {
  i64 m = 1;
  for (int j = 0; j < s; ++j) m *= p;
  return m - 1;
}

inline std::shared_ptr<UnstableQuotient> twisted_quotient(OperadPtr P, ModulePtr M, int s, size_t cap = 400000) {
  const u32 p = M->prime();
  auto var = UnaryVariant::qs(s);
  auto g = letters_from_module(M, var, [p, s](int e, int, int) { return twist_weight(p, s, e); });
  return std::make_shared<UnstableQuotient>(P, P->star(), true, std::move(g), Strategy::Eliminate, cap,
                                            static_cast<int>(twist_modulus(p, s)));
}

struct TwistReport : CheckReport {
  std::vector<u64> dims_sum, dims_twisted, dims_free;
  std::vector<std::vector<u64>> weight_dims;  // [degree][weight]
  int basis_degree = -1;                      // basis-level checks ran up to here, counts beyond
};

// K_P(M^{⊕s}) against K_{P o Q_sD}(M) with the star (⋆; d, ..., d), both through the quotient,
// and both against the free algebra on s copies of ΣΩM
inline TwistReport verify_campbell_selick(OperadPtr P, ModulePtr M, int s, size_t cap = 400000) {
  TwistReport rep;
  if (!P->star() || !is_central(*P, single(*P->star()), std::min<int>(4, M->prime() + 1)).central) {
    rep.fail("star not central");
    return rep;
  }
  if (!is_reduced(*M)) {
    rep.fail("module is not reduced");
    return rep;
  }
  const int N = M->max_degree();
  std::vector<ModulePtr> parts(s, M);
  UnstableQuotient A(P, P->star(), false, letters_from_module(direct_sum(parts)), Strategy::Eliminate, cap);
  auto B = twisted_quotient(P, M, s, cap);
  auto so = sigma_omega(*M);
  std::vector<int> degs;
  for (int j = 0; j < s; ++j)
    for (int d : letter_degrees(*so.quotient)) degs.push_back(d);
  rep.dims_free = free_dims(P, degs, N);
  for (int d = 0; d <= N; ++d) {
    rep.dims_sum.push_back(A.dim_u64(d));
    rep.dims_twisted.push_back(B->dim_u64(d));
    rep.checks += 3;
    if (rep.dims_sum[d] != rep.dims_twisted[d])
      rep.fail("degree " + std::to_string(d) + ": " + std::to_string(rep.dims_sum[d]) + " vs " + std::to_string(rep.dims_twisted[d]));
    if (rep.dims_sum[d] != rep.dims_free[d]) rep.fail("sum side differs from the free algebra in degree " + std::to_string(d));
    if (B->free_count(d) != rep.dims_free[d]) rep.fail("twisted free algebra count differs in degree " + std::to_string(d));
  }
  return rep;
}

// Weight components of K_{P o Q_sD}(M): they sum to the total, d matches weight j with pj, and for
// Lev_p the maps g (levels to exponents) and gamma (forget exponents) split K_{Lev_p}(M) off every
// component of weight p^i.
inline TwistReport verify_splitting(OperadPtr P, ModulePtr M, int s, size_t cap = 400000, u64 basis_cap = 150000) {
  TwistReport rep;
  const u32 p = M->prime();
  const int N = M->max_degree();
  const i64 wm = twist_modulus(p, s);
  auto Q = twisted_quotient(P, M, s, cap);
  const FreeAlgebra& alg = Q->algebra();
  auto wt = [&](const Mono& m) { return static_cast<int>(mod_floor(alg.weight(m), wm)); };
  rep.weight_dims.assign(N + 1, std::vector<u64>(wm, 0));
  while (rep.basis_degree < N && Q->free_count(rep.basis_degree + 1) <= basis_cap) ++rep.basis_degree;
  const int B = rep.basis_degree;
  for (int d = 0; d <= N; ++d) {
    u64 tot = 0;
    for (int j = 0; j < wm; ++j) tot += rep.weight_dims[d][j] = Q->dim_weight(d, j);
    rep.dims_twisted.push_back(Q->dim_u64(d));
    rep.checks += 1;
    if (tot != Q->dim_u64(d)) rep.fail("weight components do not sum to the total in degree " + std::to_string(d));
    for (int j = 0; j < wm; ++j) {
      ++rep.checks;
      if (rep.weight_dims[d][j] != rep.weight_dims[d][mod_floor(static_cast<i64>(p) * j, wm)])
        rep.fail("weights " + std::to_string(j) + " and p*" + std::to_string(j) + " differ in degree " + std::to_string(d));
    }
    if (d > B) continue;
    // direct count of basis weights
    std::vector<u64> direct(wm, 0);
    for (auto& m : Q->basis(d)) ++direct[wt(m)];
    ++rep.checks;
    if (direct != rep.weight_dims[d]) rep.fail("weight count mismatch in degree " + std::to_string(d));
    // d: weight j -> weight j/p, bijective on the degree
    const int n = Q->dim(d);
    SparseEchelon D(p);
    for (int x = 0; x < n; ++x) {
      const Mono& m = Q->basis(d)[x];
      auto sm = alg.shift(m);
      if (sm) {
        ++rep.checks;
        if (mod_floor(static_cast<i64>(p) * wt(*sm), wm) != wt(m)) rep.fail("d does not divide the weight by p");
        D.insert(Q->coords(d, Q->rho(*sm)));
      }
    }
    ++rep.checks;
    if (D.rank() != n) rep.fail("d is not invertible in degree " + std::to_string(d));
    // every P^i preserves weight
    for (int x = 0; x < n; ++x)
      for (int i = 1; d + Q->step(i) <= B; ++i)
        for (auto& [y, c] : Q->act(i, d, x)) {
          ++rep.checks;
          if (wt(Q->basis(d + Q->step(i))[y]) != wt(Q->basis(d)[x])) rep.fail("P^" + std::to_string(i) + " changes weight");
        }
  }
  if (P->name() == "uCom") {
    ++rep.checks;
    if (rep.weight_dims[0][0] != 1) rep.fail("unit missing from weight 0");
  }
  const bool lev = P->name().rfind("Lev_", 0) == 0;
  if (!lev) return rep;

  // g and gamma against K_{Lev_p}(M)
  UnstableQuotient K(P, P->star(), false, letters_from_module(M), Strategy::Eliminate, cap);
  const int nb = static_cast<int>(K.generating().letters.size());
  auto gamma = [&](const Mono& m) {
    std::vector<int> w;
    for (int x : m.word) w.push_back(x % nb);
    return K.algebra().canon(m.op, w);
  };
  for (int i = 0; i < s; ++i) {
    const int c = ((-i) % s + s) % s;  // d^c lands in weight p^i
    const int target = static_cast<int>(twist_weight(p, s, c));
    auto g = [&](const Mono& m) {
      std::vector<int> w;
      for (size_t j = 0; j < m.word.size(); ++j) w.push_back(((m.op.data[j] + c) % s) * nb + m.word[j]);
      return alg.canon(m.op, w);
    };
    auto gamma_elem = [&](int d, const SparseVec& v) {
      Elem e;
      for (auto& [y, a] : v) add_to(e, gamma(Q->basis(d)[y]), a, alg.field());
      return K.coords(d, K.rho(e));
    };
    auto g_elem = [&](int d, const SparseVec& v) {
      Elem e;
      for (auto& [y, a] : v) add_to(e, g(K.basis(d)[y]), a, alg.field());
      return Q->coords(d, Q->rho(e));
    };
    for (int d = 0; d <= N; ++d) {
      ++rep.checks;
      if (K.dim_u64(d) > rep.weight_dims[d][d == 0 ? 0 : target]) rep.fail("summand larger than the component");
      if (d > B) continue;
      for (int x = 0; x < K.dim(d); ++x) {
        SparseVec u{{x, 1}};
        SparseVec gu = g_elem(d, u);
        rep.checks += 2;
        for (auto& [y, a] : gu)
          if (wt(Q->basis(d)[y]) != (d == 0 ? 0 : target)) rep.fail("g misses the weight component");
        if (gamma_elem(d, gu) != u) rep.fail("gamma g is not the identity on " + K.label(d, x));
        for (int k = 1; d + K.step(k) <= B; ++k) {
          ++rep.checks;
          if (g_elem(d + K.step(k), K.act(k, d, x)) != [&] {
                SparseVec acc;
                for (auto& [y, a] : gu) axpy(acc, a, Q->act(k, d, y), alg.field());
                return acc;
              }())
            rep.fail("g is not A'-linear on " + K.label(d, x));
        }
      }
      for (int x = 0; x < Q->dim(d); ++x) {
        if (wt(Q->basis(d)[x]) != target) continue;
        SparseVec u{{x, 1}};
        for (int k = 1; d + Q->step(k) <= B; ++k) {
          ++rep.checks;
          SparseVec lhs = gamma_elem(d + Q->step(k), Q->act(k, d, x));
          SparseVec rhs;
          for (auto& [y, a] : gamma_elem(d, u)) axpy(rhs, a, K.act(k, d, y), alg.field());
          if (lhs != rhs) rep.fail("gamma is not A'-linear on " + Q->label(d, x));
        }
      }
    }
  }
  return rep;
}

// Dimension domination of K_P(M) by every weight-p^i component; the weaker form of the
// statement for Com at p = 2, where no operadic section exists.
inline CheckReport verify_component_domination(OperadPtr P, ModulePtr M, int s, size_t cap = 400000) {
  CheckReport rep;
  const u32 p = M->prime();
  auto Q = twisted_quotient(P, M, s, cap);
  UnstableQuotient K(P, P->star(), false, letters_from_module(M), Strategy::Eliminate, cap);
  for (int i = 0; i < s; ++i) {
    const int w = static_cast<int>(twist_weight(p, s, -i));
    for (int d = 1; d <= M->max_degree(); ++d) {
      ++rep.checks;
      if (K.dim_u64(d) > Q->dim_weight(d, w))
        rep.fail("degree " + std::to_string(d) + " weight " + std::to_string(w) + ": " + std::to_string(K.dim_u64(d)) +
                 " > " + std::to_string(Q->dim_weight(d, w)));
    }
  }
  return rep;
}

}  // namespace unstalg
