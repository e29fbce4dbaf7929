#include <gtest/gtest.h>

#include "unstalg/derivations.hpp"

using namespace unstalg;

namespace {

FpMatrix mat(u32 p, int n, std::vector<u32> entries) {
  FpMatrix m(p, n, n);
  for (int j = 0; j < n * n; ++j) m(j / n, j % n) = entries[j];
  return m;
}

// P^i on F_p[v_0, ..., v_{n-1}] with |v| = 2 by the Cartan formula, from exponent vectors
std::map<std::vector<int>, u32> classical_power(u32 p, int i, const std::vector<int>& a) {
  std::map<std::vector<int>, u32> out;
  Fp f(p);
  std::vector<int> e = a;
  std::function<void(size_t, int, u32)> rec = [&](size_t j, int left, u32 c) {
    if (j == a.size()) {
      if (!left) {
        auto& z = out[e];
        z = f.add(z, c);
        if (!z) out.erase(e);
      }
      return;
    }
    for (int b = 0; b <= std::min(a[j], left); ++b) {
      u32 k = binomial_mod_p(a[j], b, p);
      if (!k) continue;
      e[j] = a[j] + static_cast<int>(p - 1) * b;
      rec(j + 1, left - b, f.mul(c, k));
    }
    e[j] = a[j];
  };
  rec(0, i, 1);
  return out;
}

std::vector<int> exponents(const Mono& m, int n) {
  std::vector<int> e(n, 0);
  for (int x : m.word) ++e[x];
  return e;
}

}  // namespace

TEST(TwistedAlgebra, SubsetFormulaExamples) {
  auto P = make_operad("ucom", 2);
  TwistedAlgebra A(P, FpMatrix::identity(2, 1), 8);
  const auto& alg = A.algebra();
  Mono v2 = *alg.compose(OpCode{2, {0, 0}}, {alg.letter(0), alg.letter(0)});
  EXPECT_TRUE(A.derivation(1, v2).empty());  // 2 v^3 = 0
  auto d2 = A.derivation(2, v2);
  ASSERT_EQ(d2.size(), 1u);
  EXPECT_EQ(A.algebra().degree(d2.begin()->first), 4);
  EXPECT_TRUE(A.derivation(3, v2).empty());  // more slots than letters
  EXPECT_EQ(A.derivation(0, v2), (Elem{{v2, 1}}));
}

TEST(TwistedAlgebra, ZeroEndomorphismActsTrivially) {
  for (u32 p : {2u, 3u}) {
    TwistedAlgebra A(make_operad("ucom", p), FpMatrix(p, 2, 2), 8);
    for (int d = 0; d <= 8; ++d)
      for (int x = 0; x < A.dim(d); ++x)
        for (int i = 1; d + A.step(i) <= 8; ++i) EXPECT_TRUE(A.act(i, d, x).empty());
    EXPECT_TRUE(check_adem_operators(A).pass);
  }
}

TEST(TwistedAlgebra, IdentityGivesTheClassicalPolynomialAction) {
  for (u32 p : {2u, 3u, 5u}) {
    const int n = 2, N = p == 2 ? 10 : 13;
    TwistedAlgebra A(make_operad("ucom", p), FpMatrix::identity(p, n), N);
    for (int d = 0; d <= N; ++d)
      for (int x = 0; x < A.dim(d); ++x)
        for (int i = 1; d + A.step(i) <= N; ++i) {
          std::map<std::vector<int>, u32> got;
          for (auto& [y, c] : A.act(i, d, x)) got[exponents(A.basis(d + A.step(i))[y], n)] = c;
          EXPECT_EQ(got, classical_power(p, i, exponents(A.basis(d)[x], n))) << A.label(d, x) << " P^" << i;
        }
  }
}

TEST(TwistedAlgebra, RaisesDegreeByOneStep) {
  TwistedAlgebra A(make_operad("lev", 3), mat(3, 2, {1, 2, 0, 1}), 7);
  for (int b = 0; b < 2; ++b)
    for (auto& [m, c] : A.d1(b)) EXPECT_EQ(A.algebra().degree(m), 3);
}

TEST(TwistedAlgebra, HigherLeibnizRule) {
  for (auto [op, p, N] : {std::tuple{"ucom", 2u, 10}, std::tuple{"lev", 2u, 7}, std::tuple{"ucom", 3u, 9}, std::tuple{"lev", 3u, 7}}) {
    TwistedAlgebra A(make_operad(op, p), mat(p, 2, {1, 1, 0, 1}), N);
    auto r = check_higher_leibniz(A, 60, 5);
    EXPECT_TRUE(r.pass) << op << " " << p << ": " << r.detail;
    EXPECT_GT(r.checks, 30);
  }
}

TEST(TwistedAlgebra, TopPowerIsTheTwistedStarPower) {
  for (auto [op, p, N] : {std::tuple{"ucom", 2u, 10}, std::tuple{"lev", 2u, 8}, std::tuple{"ucom", 3u, 9}, std::tuple{"lev", 3u, 9}}) {
    TwistedAlgebra A(make_operad(op, p), mat(p, 2, {0, 1, 1, 1}), N);
    auto r = check_top_power(A);
    EXPECT_TRUE(r.pass) << op << " " << p << ": " << r.detail;
  }
}

TEST(AdemLayers, AllTwistsPassAtTwo) {
  for (int n : {1, 2}) {
    for (auto& M : endomorphisms(2, n, 1)) {
      TwistedAlgebra A(make_operad("ucom", 2), M, 10);
      auto r = check_adem_operators(A, 3);
      EXPECT_TRUE(r.pass) << r.detail;
      EXPECT_TRUE(r.agree());
    }
  }
}

TEST(AdemLayers, LevelTwistsPass) {
  for (auto [p, N] : {std::pair{2u, 7}, std::pair{3u, 7}}) {
    for (auto& M : canonical_form_representatives(p, 2)) {
      TwistedAlgebra A(make_operad("lev", p), M, N);
      auto r = check_adem_operators(A, 2);
      EXPECT_TRUE(r.pass) << r.detail;
    }
  }
}

TEST(AdemLayers, BullettMacdonaldOnTheClassicalAction) {
  for (u32 p : {2u, 3u}) {
    TwistedAlgebra A(make_operad("ucom", p), FpMatrix::identity(p, 2), p == 2 ? 12 : 13);
    auto r = check_adem_operators(A, 4);
    EXPECT_TRUE(r.layer_c) << r.detail;
  }
}

TEST(AdemLayers, MutationIsDetected) {
  for (u32 p : {2u, 3u}) {
    TwistedAlgebra A(make_operad("ucom", p), mat(p, 2, {1, 1, 0, 1}), p == 2 ? 8 : 9);
    auto bad = mutate_action(A);
    auto r = check_adem_operators(*bad);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.layer_a);
    EXPECT_FALSE(r.layer_b);
    EXPECT_TRUE(r.agree());
  }
}

TEST(KernelProfile, Examples) {
  EXPECT_EQ(kernel_profile(FpMatrix::identity(3, 2), 3), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(kernel_profile(FpMatrix(2, 2, 2), 3), (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(kernel_profile(mat(2, 2, {0, 1, 0, 0}), 3), (std::vector<int>{1, 2, 2}));
  EXPECT_EQ(kernel_profile(mat(3, 3, {0, 1, 0, 0, 0, 1, 0, 0, 0}), 4), (std::vector<int>{1, 2, 3, 3}));
}

TEST(CanonicalForms, CountSimilarityClasses) {
  // q^2 + q classes of 2 x 2 matrices, q^3 + q^2 + q of 3 x 3
  EXPECT_EQ(canonical_form_representatives(2, 2).size(), 6u);
  EXPECT_EQ(canonical_form_representatives(3, 2).size(), 12u);
  EXPECT_EQ(canonical_form_representatives(2, 3).size(), 14u);
  EXPECT_EQ(canonical_form_representatives(2, 1).size(), 2u);
}

TEST(CanonicalForms, EnumerationPolicy) {
  EXPECT_EQ(endomorphisms(2, 2, 0).size(), 16u);
  EXPECT_EQ(endomorphisms(2, 3, 0).size(), 512u);
  EXPECT_EQ(endomorphisms(3, 3, 0).size(), 200u + canonical_form_representatives(3, 3).size());
  // seeded
  auto a = endomorphisms(3, 3, 9), b = endomorphisms(3, 3, 9);
  for (size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(a[k] == b[k]);
}

TEST(Classification, ExhaustiveTwoByTwo) {
  auto r = classification_experiment(make_operad("ucom", 2), 2, 2, 12, 1);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(r.records.size(), 16u);
  EXPECT_EQ(r.classes, 4);  // invertible, zero, nilpotent of rank one, rank one non-nilpotent
  EXPECT_TRUE(r.separated);
}

TEST(Classification, NilpotentAndZeroDiffer) {
  auto P = make_operad("ucom", 2);
  auto a = invariant_dims(TwistedAlgebra(P, FpMatrix(2, 2, 2), 12));
  auto b = invariant_dims(TwistedAlgebra(P, mat(2, 2, {0, 1, 0, 0}), 12));
  EXPECT_FALSE(a == b);
}

TEST(Classification, KernelIdentity) {
  for (auto& M : endomorphisms(2, 2, 0)) {
    TwistedAlgebra A(make_operad("ucom", 2), M, 8);
    for (int j = 1; j <= 3; ++j) EXPECT_TRUE(kernel_identity(A, j));
  }
  TwistedAlgebra B(make_operad("lev", 3), mat(3, 2, {0, 1, 0, 0}), 9);
  EXPECT_TRUE(kernel_identity(B, 1));
  EXPECT_TRUE(kernel_identity(B, 2));
}

TEST(Classification, CommutingCyclicTwists) {
  auto P = make_operad("ucom", 2);
  for (auto& M : endomorphisms(2, 2, 0)) {
    auto r = verify_commuting_twists(P, M, 10);
    EXPECT_TRUE(r.pass) << r.detail;
    EXPECT_GE(r.checks, 1);
  }
  auto r3 = verify_commuting_twists(make_operad("ucom", 3), mat(3, 2, {1, 1, 0, 1}), 9);
  EXPECT_TRUE(r3.pass) << r3.detail;
}
