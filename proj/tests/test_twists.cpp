#include <gtest/gtest.h>

#include "unstalg/twists.hpp"

using namespace unstalg;

TEST(Twists, WeightArithmetic) {
  EXPECT_EQ(twist_modulus(2, 2), 3);
  EXPECT_EQ(twist_modulus(3, 2), 8);
  EXPECT_EQ(twist_weight(2, 2, 0), 1);
  EXPECT_EQ(twist_weight(2, 2, 1), 2);
  EXPECT_EQ(twist_weight(2, 3, 1), 4);  // p^{-1} = p^2 mod 7
  EXPECT_EQ(twist_weight(2, 3, -1), 2);
  // d divides the weight by p
  for (int e = 0; e < 5; ++e) EXPECT_EQ(mod_floor(2 * twist_weight(2, 3, e + 1), 7), twist_weight(2, 3, e));
}

TEST(Twists, CyclicModuleIsQsModule) {
  auto M = free_unstable_module(2, 1, 8);
  auto N = cyclic_qs(M, 3);
  auto r = check_qs_module(N);
  EXPECT_TRUE(r.pass) << r.detail;
  for (int d = 0; d <= 8; ++d) EXPECT_EQ(N.M->dim(d), 3 * M->dim(d));
}

TEST(Twists, BrokenOrderIsRejected) {
  auto M = free_unstable_module(2, 1, 6);
  auto N = cyclic_qs(M, 3);
  N.s = 2;
  EXPECT_FALSE(check_qs_module(N).pass);
}

TEST(Twists, ScalarExtensionMultipliesDimensions) {
  auto M = free_unstable_module(3, 1, 9);
  FieldExtension F(3, 2);
  ScalarExtension E(trivial_qs(M, 2), F);
  for (int d = 0; d <= 9; ++d) EXPECT_EQ(E.dim(d), 2 * M->dim(d));
  auto r = check_qs_module({std::make_shared<ScalarExtension>(E), 2, [&](int d, int idx) {
                              auto D = E.diagonal_d(d);
                              SparseVec v;
                              for (int y = 0; y < D.rows(); ++y)
                                if (D(y, idx)) v.emplace_back(y, D(y, idx));
                              return v;
                            }});
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Twists, BetaIsAnIsomorphism) {
  for (auto [p, s] : {std::pair{2u, 2}, std::pair{2u, 3}, std::pair{3u, 2}}) {
    auto M = free_unstable_module(p, 1, 8);
    FieldExtension F(p, s);
    EXPECT_TRUE(verify_beta(cyclic_qs(M, s), F).pass);
    EXPECT_TRUE(verify_beta(trivial_qs(M, s), F).pass);
  }
}

TEST(Twists, BetaIsIdentityForOneCopy) {
  auto M = free_unstable_module(2, 1, 6);
  for (int d = 0; d <= 6; ++d)
    EXPECT_TRUE(beta_matrix(trivial_qs(M, 1), 1, d) == FpMatrix::identity(2, M->dim(d)));
}

TEST(Twists, InvariantsHaveTheDimensionOfN) {
  for (auto [p, s] : {std::pair{2u, 2}, std::pair{2u, 3}, std::pair{3u, 2}}) {
    auto M = free_unstable_module(p, 1, 8);
    FieldExtension F(p, s);
    for (auto N : {cyclic_qs(M, s), trivial_qs(M, s)}) {
      auto E = std::make_shared<ScalarExtension>(N, F);
      InvariantSubmodule I(E);
      for (int d = 0; d <= 8; ++d) EXPECT_EQ(I.dim(d), N.M->dim(d));
      auto um = check_unstable_module(I);
      EXPECT_TRUE(um.pass) << um.detail;
      auto r = verify_iota(I, F);
      EXPECT_TRUE(r.pass) << r.detail;
    }
  }
}

TEST(Twists, TwistedQuotientCarriesQsStructure) {
  auto M = free_unstable_module(2, 1, 6);
  std::shared_ptr<const UnstableQuotient> Q = twisted_quotient(make_operad("ucom", 2), M, 2);
  auto N = qs_from_quotient(Q, 2);
  auto r = check_qs_module(N);
  EXPECT_TRUE(r.pass) << r.detail;
  FieldExtension F(2, 2);
  EXPECT_TRUE(verify_beta(N, F).pass);
  InvariantSubmodule I(std::make_shared<ScalarExtension>(N, F));
  auto s = verify_iota(I, F);
  EXPECT_TRUE(s.pass) << s.detail;
}

TEST(CampbellSelick, Instances) {
  struct Case {
    const char* op;
    u32 p;
    int s, N;
  };
  for (auto c : {Case{"ucom", 2, 2, 12}, Case{"lev", 2, 2, 12}, Case{"ucom", 2, 3, 12}, Case{"lev", 2, 3, 12},
                 Case{"ucom", 3, 2, 6}, Case{"lev", 3, 2, 6}, Case{"ucom", 2, 1, 8}}) {
    auto r = verify_campbell_selick(make_operad(c.op, c.p), free_unstable_module(c.p, 1, c.N), c.s);
    EXPECT_TRUE(r.pass) << c.op << " p=" << c.p << " s=" << c.s << ": " << r.detail;
    EXPECT_EQ(r.dims_sum, r.dims_twisted);
  }
}

TEST(CampbellSelick, PolynomialOnTwoGenerators) {
  auto r = verify_campbell_selick(make_operad("ucom", 2), free_unstable_module(2, 1, 6), 2);
  EXPECT_EQ(r.dims_sum, (std::vector<u64>{1, 2, 3, 4, 5, 6, 7}));
}

TEST(CampbellSelick, RejectsNonCentralStar) {
  auto r = verify_campbell_selick(make_operad("magcom", 2), free_unstable_module(2, 1, 6), 2);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("star not central"), std::string::npos);
}

TEST(Splitting, WeightComponentsOfThePolynomialAlgebra) {
  // y0^a y1^b with weight a + 2b mod 3
  auto r = verify_splitting(make_operad("ucom", 2), free_unstable_module(2, 1, 6), 2);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(r.weight_dims[0], (std::vector<u64>{1, 0, 0}));
  EXPECT_EQ(r.weight_dims[1], (std::vector<u64>{0, 1, 1}));
  EXPECT_EQ(r.weight_dims[2], (std::vector<u64>{1, 1, 1}));
  EXPECT_EQ(r.weight_dims[3], (std::vector<u64>{2, 1, 1}));
}

TEST(Splitting, LevelSectionAndRetraction) {
  for (auto [p, s, N] : {std::tuple{2u, 2, 12}, std::tuple{2u, 3, 10}, std::tuple{3u, 2, 6}}) {
    auto r = verify_splitting(make_operad("lev", p), free_unstable_module(p, 1, N), s);
    EXPECT_TRUE(r.pass) << p << " " << s << ": " << r.detail;
  }
}

TEST(Splitting, LevelComponentContainsCarlssonDims) {
  // K(1) = 1, 1, 1, 2 in degrees 1..4 sits in the weight-1 component
  auto r = verify_splitting(make_operad("lev", 2), free_unstable_module(2, 1, 4), 2);
  ASSERT_TRUE(r.pass) << r.detail;
  std::vector<u64> k1{0, 1, 1, 1, 2};
  for (int d = 1; d <= 4; ++d) EXPECT_GE(r.weight_dims[d][1], k1[d]) << d;
}

TEST(Splitting, CommutativeComponentsDominate) {
  auto r = verify_component_domination(make_operad("com", 2), free_unstable_module(2, 1, 10), 2);
  EXPECT_TRUE(r.pass) << r.detail;
}
