#include <gtest/gtest.h>

#include <random>
#include <set>

#include "unstalg/operad.hpp"

using namespace unstalg;

namespace {

OperadPtr lev(LevelKind k, u32 p, int b = 0) { return std::make_shared<LevelOperad>(k, p, b); }

// a deterministic thinning of the basis, restricted to small levels/exponents where needed
std::vector<OpCode> sample(const Operad& P, int n, size_t cap, std::function<bool(const OpCode&)> keep = {}) {
  std::vector<OpCode> all;
  for (auto& c : P.basis(n))
    if (!keep || keep(c)) all.push_back(c);
  if (all.size() <= cap) return all;
  std::vector<OpCode> out;
  for (size_t j = 0; j < cap; ++j) out.push_back(all[j * all.size() / cap]);
  return out;
}

struct Case {
  std::string label;
  OperadPtr P;
  int max_arity;
  std::function<bool(const OpCode&)> keep;
};

bool small_levels(const OpCode& c) {
  return std::all_of(c.data.begin(), c.data.end(), [](int l) { return l <= 1; });
}
bool small_exps(const OpCode& c) {
  auto e = CompositeOperad::exps(c);
  return std::all_of(e.begin(), e.end(), [](int x) { return x >= -1 && x <= 1; });
}

std::vector<Case> all_cases() {
  std::vector<Case> cs;
  cs.push_back({"ucom2", lev(LevelKind::UCom, 2), 4, {}});
  cs.push_back({"com3", lev(LevelKind::Com, 3), 4, {}});
  cs.push_back({"pi", lev(LevelKind::Pi, 2, 4), 4, small_levels});
  cs.push_back({"lev2", lev(LevelKind::Lev, 2), 5, {}});
  cs.push_back({"lev3", lev(LevelKind::Lev, 3), 5, {}});
  cs.push_back({"t2lev2", lev(LevelKind::TqLev, 2, 2), 5, {}});
  cs.push_back({"magcom2", std::make_shared<MagComOperad>(2), 4, {}});
  cs.push_back({"magcom3", std::make_shared<MagComOperad>(3), 5, {}});
  cs.push_back({"ucomoD", std::make_shared<CompositeOperad>(lev(LevelKind::UCom, 2), UnaryVariant::free_d(1)), 3, {}});
  cs.push_back({"comoQ2D", std::make_shared<CompositeOperad>(lev(LevelKind::Com, 2), UnaryVariant::qs(2)), 3, {}});
  cs.push_back({"comoT1D", std::make_shared<CompositeOperad>(lev(LevelKind::Com, 3), UnaryVariant::tq(1)), 3, {}});
  cs.push_back({"levoDpm",
                std::make_shared<CompositeOperad>(lev(LevelKind::Lev, 2), UnaryVariant::dpm(-3, 3)), 3, small_exps});
  cs.push_back({"magoQ3D", std::make_shared<CompositeOperad>(std::make_shared<MagComOperad>(2), UnaryVariant::qs(3)),
                3, {}});
  return cs;
}

int min_arity(const Operad& P) {
  return P.basis(0).empty() ? 1 : 0;
}

}  // namespace

TEST(PartitionCompose, Examples) {
  LevelOperad pi(LevelKind::Pi, 2, 5);
  EXPECT_EQ(*pi.compose({1, {0}}, 0, {3, {0, 1, 0}}), (OpCode{3, {0, 1, 0}}));
  EXPECT_EQ(*pi.compose({2, {0, 1}}, 1, {1, {1}}), (OpCode{2, {0, 2}}));
  EXPECT_EQ(*pi.compose({2, {0, 1}}, 0, {2, {0, 0}}), (OpCode{3, {0, 0, 1}}));
  EXPECT_THROW(pi.compose({2, {0, 1}}, 2, {1, {0}}), std::out_of_range);
  EXPECT_THROW(pi.compose({1, {4}}, 0, {1, {3}}), std::out_of_range);
}

// index map lambda_{l,k}: [j] -> [j-1+k] on 1-based labels: identity below l, shift by
// k-1 above l; the block of l is replaced by l..l+k-1.
TEST(PartitionCompose, AgreesWithThreeCaseFormula) {
  LevelOperad small(LevelKind::Pi, 2, 2), pi(LevelKind::Pi, 2, 4);
  for (int j = 1; j <= 3; ++j)
    for (int k = 0; k <= 3; ++k)
      for (auto& J : small.basis(j))
        for (auto& K : small.basis(k))
          for (int l = 1; l <= j; ++l) {
            std::vector<int> expect(j + k - 1);
            for (int x = 1; x <= j + k - 1; ++x) {
              if (x < l) expect[x - 1] = J.data[x - 1];
              else if (x < l + k) expect[x - 1] = J.data[l - 1] + K.data[x - l];
              else expect[x - 1] = J.data[x - k];
            }
            auto r = pi.compose(J, l - 1, K);
            ASSERT_TRUE(r);
            ASSERT_EQ(r->data, expect);
          }
}

TEST(SummationCondition, Examples) {
  EXPECT_TRUE(sc_check({0}, 2));
  EXPECT_TRUE(sc_check({0}, 3));
  EXPECT_TRUE(sc_check({1, 1}, 2));
  EXPECT_FALSE(sc_check({0, 0}, 2));
  EXPECT_TRUE(sc_check({1, 2, 2}, 2));
  EXPECT_TRUE(sc_check({1, 1, 1}, 3));
  EXPECT_FALSE(sc_check({}, 2));
}

TEST(LevBasis, Examples) {
  EXPECT_EQ(lev_basis(2, 1, 0).size(), 1u);
  auto b3 = lev_basis(2, 3, 2);
  EXPECT_EQ(b3.size(), 3u);
  for (auto& l : b3) {
    auto s = l;
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s, (std::vector<int>{1, 2, 2}));
  }
  EXPECT_EQ(lev_basis(3, 2, 5).size(), 0u);
  EXPECT_THROW(lev_basis(2, 4, 2), std::invalid_argument);
}

TEST(LevBasis, MatchesBruteForce) {
  for (u32 p : {2u, 3u}) {
    for (int n = 1; n <= 6; ++n) {
      int L = (n - 1) / static_cast<int>(p - 1);
      std::set<std::vector<int>> brute;
      std::vector<int> l(n, 0);
      while (true) {
        if (sc_check(l, p)) brute.insert(l);
        int j = n - 1;
        while (j >= 0 && l[j] == L + 1) l[j--] = 0;
        if (j < 0) break;
        ++l[j];
      }
      auto b = lev_basis(p, n, L);
      std::set<std::vector<int>> got(b.begin(), b.end());
      EXPECT_EQ(got.size(), b.size());
      EXPECT_EQ(got, brute) << "p=" << p << " n=" << n;
    }
  }
}

TEST(LevBasis, ClosedUnderComposition) {
  for (u32 p : {2u, 3u}) {
    LevelOperad L(LevelKind::Lev, p);
    for (int a = 1; a <= 5; ++a)
      for (int b = 1; a + b - 1 <= 5; ++b)
        for (auto& J : L.basis(a))
          for (auto& K : L.basis(b))
            for (int i = 0; i < a; ++i) ASSERT_TRUE(sc_check(L.compose(J, i, K)->data, p));
  }
}

TEST(BlockPermutation, Examples) {
  EXPECT_EQ(sigma_block_perm(2, 2), (Perm{0, 2, 1, 3}));
  EXPECT_EQ(sigma_block_perm(3, 1), identity_perm(3));
  EXPECT_EQ(sigma_block_perm(2, 3), (Perm{0, 2, 4, 1, 3, 5}));
}

TEST(Centrality, Examples) {
  for (u32 p : {2u, 3u}) {
    LevelOperad ucom(LevelKind::UCom, p);
    EXPECT_TRUE(is_central(ucom, single(*ucom.star()), 4).central);
    LevelOperad levp(LevelKind::Lev, p);
    EXPECT_TRUE(is_central(levp, single(*levp.star()), 4).central);
    CompositeOperad ud(std::make_shared<LevelOperad>(LevelKind::UCom, p), UnaryVariant::free_d(2));
    EXPECT_EQ(*ud.star(), CompositeOperad::join(*ucom.star(), std::vector<int>(p, 1)));
    EXPECT_TRUE(is_central(ud, single(*ud.star()), 3).central);
  }
  MagComOperad mag(2);
  auto r = is_central(mag, single(*mag.star()), 3);
  EXPECT_TRUE(r.invariant);
  EXPECT_FALSE(r.central);
  EXPECT_TRUE(r.violation.has_value());
}

TEST(Centrality, RejectsNonInvariantOperation) {
  LevelOperad pi(LevelKind::Pi, 2, 2);
  auto r = is_central(pi, single({2, {0, 1}}), 2);
  EXPECT_FALSE(r.invariant);
  EXPECT_FALSE(r.central);
}

TEST(StarPowers, Examples) {
  LevelOperad L(LevelKind::Lev, 2);
  auto s = single(*L.star());
  EXPECT_EQ(star_k(L, s, 0), single(L.unit()));
  EXPECT_EQ(star_k(L, s, 1), s);
  EXPECT_EQ(star_k(L, s, 2), single({4, {2, 2, 2, 2}}));
  EXPECT_TRUE(is_nonnilpotent_up_to(L, s, 3));
  LevelOperad T1(LevelKind::TqLev, 2, 1);
  EXPECT_FALSE(is_nonnilpotent_up_to(T1, single(*T1.star()), 2));
}

TEST(StarPowers, SymmetricWhenCentral) {
  std::vector<OperadPtr> ops{lev(LevelKind::UCom, 2), lev(LevelKind::UCom, 3), lev(LevelKind::Lev, 2),
                             lev(LevelKind::Lev, 3),
                             std::make_shared<CompositeOperad>(lev(LevelKind::Com, 2), UnaryVariant::qs(3))};
  for (auto& P : ops)
    for (int k = 0; k <= 2; ++k) EXPECT_TRUE(is_symmetric(*P, star_k(*P, single(*P->star()), k))) << P->name();
}

TEST(Composite, Examples) {
  auto ucom = lev(LevelKind::UCom, 2);
  CompositeOperad ud(ucom, UnaryVariant::free_d(1));
  EXPECT_EQ(ud.basis(2).size(), 4u);
  auto r = ud.compose({2, {0, 0, 1, 1}}, 0, {2, {0, 0, 0, 0}});
  EXPECT_EQ(*r, (OpCode{3, {0, 0, 0, 1, 1, 1}}));
  CompositeOperad q2(lev(LevelKind::Unit, 2), UnaryVariant::qs(2));
  EXPECT_EQ(*q2.compose({1, {0, 1}}, 0, {1, {0, 1}}), q2.unit());
  CompositeOperad t1(ucom, UnaryVariant::tq(1));
  EXPECT_FALSE(t1.compose({1, {0, 1}}, 0, {1, {0, 1}}).has_value());
  CompositeOperad dpm(ucom, UnaryVariant::dpm(-2, 2));
  EXPECT_THROW(dpm.compose({1, {0, 2}}, 0, {1, {0, 1}}), std::out_of_range);
}

// the identification of uCom o D with the partition operad: exponents are levels
TEST(Composite, FreeDMatchesPartitionOperad) {
  CompositeOperad ud(lev(LevelKind::UCom, 2), UnaryVariant::free_d(2));
  LevelOperad pi(LevelKind::Pi, 2, 4);
  for (int a = 0; a <= 3; ++a) {
    auto ba = ud.basis(a);
    std::set<std::vector<int>> image;
    for (auto& x : ba) image.insert(CompositeOperad::exps(x));
    EXPECT_EQ(image.size(), ba.size());
    for (int b = 0; b <= 2; ++b)
      for (auto& x : ba)
        for (auto& y : ud.basis(b))
          for (int i = 0; i < a; ++i) {
            auto c = ud.compose(x, i, y);
            auto d = pi.compose({a, CompositeOperad::exps(x)}, i, {b, CompositeOperad::exps(y)});
            ASSERT_EQ(CompositeOperad::exps(*c), d->data);
          }
  }
  // levels <= 2 in arity 3 on both sides
  std::set<std::vector<int>> pi3;
  for (auto& x : pi.basis(3))
    if (*std::max_element(x.data.begin(), x.data.end()) <= 2) pi3.insert(x.data);
  std::set<std::vector<int>> ud3;
  for (auto& x : ud.basis(3)) ud3.insert(CompositeOperad::exps(x));
  EXPECT_EQ(pi3, ud3);
}

TEST(OperadAxioms, UnitLaws) {
  for (auto& c : all_cases()) {
    const Operad& P = *c.P;
    for (int n = min_arity(P); n <= c.max_arity; ++n)
      for (auto& mu : sample(P, n, 20, c.keep)) {
        ASSERT_EQ(*P.compose(P.unit(), 0, mu), mu) << c.label;
        for (int i = 0; i < n; ++i) ASSERT_EQ(*P.compose(mu, i, P.unit()), mu) << c.label;
      }
  }
}

TEST(OperadAxioms, Associativity) {
  for (auto& c : all_cases()) {
    const Operad& P = *c.P;
    const int lo = min_arity(P);
    for (int a = std::max(1, lo); a <= 3; ++a)
      for (int b = lo; b <= 3; ++b)
        for (int k = lo; k <= 3; ++k) {
          if (a + b + k - 2 > c.max_arity + 1) continue;
          auto A = sample(P, a, 6, c.keep), B = sample(P, b, 6, c.keep), K = sample(P, k, 6, c.keep);
          for (auto& mu : A)
            for (auto& nu : B)
              for (auto& ka : K)
                for (int i = 0; i < a; ++i) {
                  // sequential
                  for (int j = 0; j < b; ++j) {
                    auto l1 = P.compose(mu, i, nu);
                    std::optional<OpCode> lhs = l1 ? P.compose(*l1, i + j, ka) : std::nullopt;
                    auto r1 = P.compose(nu, j, ka);
                    std::optional<OpCode> rhs = r1 ? P.compose(mu, i, *r1) : std::nullopt;
                    ASSERT_EQ(lhs, rhs) << c.label << " sequential " << to_string(mu) << to_string(nu) << to_string(ka);
                  }
                  // parallel
                  for (int t = i + 1; t < a; ++t) {
                    auto l1 = P.compose(mu, i, nu);
                    std::optional<OpCode> lhs = l1 ? P.compose(*l1, t + b - 1, ka) : std::nullopt;
                    auto r1 = P.compose(mu, t, ka);
                    std::optional<OpCode> rhs = r1 ? P.compose(*r1, i, nu) : std::nullopt;
                    ASSERT_EQ(lhs, rhs) << c.label << " parallel";
                  }
                }
        }
  }
}

TEST(OperadAxioms, Equivariance) {
  std::mt19937 rng(5);
  for (auto& c : all_cases()) {
    const Operad& P = *c.P;
    const int lo = min_arity(P);
    for (int a = std::max(1, lo); a <= 3; ++a)
      for (int m = lo; m <= 3; ++m) {
        if (a + m - 1 > c.max_arity + 1) continue;
        for (auto& mu : sample(P, a, 6, c.keep))
          for (auto& nu : sample(P, m, 6, c.keep))
            for (int trial = 0; trial < 3; ++trial) {
              Perm sg = identity_perm(a), tau = identity_perm(m);
              std::shuffle(sg.begin(), sg.end(), rng);
              std::shuffle(tau.begin(), tau.end(), rng);
              // right action is an action
              Perm s2 = identity_perm(a);
              std::shuffle(s2.begin(), s2.end(), rng);
              ASSERT_EQ(P.act(P.act(mu, sg), s2), P.act(mu, compose_perm(sg, s2))) << c.label;
              for (int i = 0; i < a; ++i) {
                // (mu.sigma) o_i nu = (mu o_{sigma(i)} nu) . sigma''
                const int ci = sg[i];
                auto pos = [&](int t) { return t < ci ? t : t + m - 1; };
                Perm s3(a + m - 1);
                for (int j = 0; j < i; ++j) s3[j] = pos(sg[j]);
                for (int k = 0; k < m; ++k) s3[i + k] = ci + k;
                for (int j = i + m; j < a + m - 1; ++j) s3[j] = pos(sg[j - m + 1]);
                auto lhs = P.compose(P.act(mu, sg), i, nu);
                auto inner = P.compose(mu, ci, nu);
                std::optional<OpCode> rhs = inner ? std::optional<OpCode>(P.act(*inner, s3)) : std::nullopt;
                ASSERT_EQ(lhs, rhs) << c.label << " left equivariance";
                // mu o_i (nu.tau) = (mu o_i nu) . tau'
                Perm t3 = identity_perm(a + m - 1);
                for (int k = 0; k < m; ++k) t3[i + k] = i + tau[k];
                auto l2 = P.compose(mu, i, P.act(nu, tau));
                auto in2 = P.compose(mu, i, nu);
                std::optional<OpCode> r2 = in2 ? std::optional<OpCode>(P.act(*in2, t3)) : std::nullopt;
                ASSERT_EQ(l2, r2) << c.label << " right equivariance";
              }
            }
      }
  }
}

TEST(OperadAxioms, CanonicalOrderSortsKeys) {
  std::mt19937 rng(9);
  for (auto& c : all_cases()) {
    const Operad& P = *c.P;
    for (int n = 1; n <= 3; ++n)
      for (auto& mu : sample(P, n, 8, c.keep)) {
        std::vector<i64> keys(n);
        for (auto& k : keys) k = rng() % 3;
        Perm o = P.canonical_order(mu, keys);
        OpCode rep = P.act(mu, o);
        std::vector<i64> k2(n);
        for (int j = 0; j < n; ++j) k2[j] = keys[o[j]];
        // the representative is a fixed point of canonicalization
        Perm o2 = P.canonical_order(rep, k2);
        std::vector<i64> k3(n);
        for (int j = 0; j < n; ++j) k3[j] = k2[o2[j]];
        ASSERT_EQ(P.act(rep, o2), rep) << c.label;
        ASSERT_EQ(k3, k2) << c.label;
        // the orbit representative does not depend on the chosen orbit member
        Perm s = identity_perm(n);
        std::shuffle(s.begin(), s.end(), rng);
        OpCode mu2 = P.act(mu, s);
        std::vector<i64> ks(n);
        for (int j = 0; j < n; ++j) ks[j] = keys[s[j]];
        Perm o4 = P.canonical_order(mu2, ks);
        std::vector<i64> k4(n);
        for (int j = 0; j < n; ++j) k4[j] = ks[o4[j]];
        ASSERT_EQ(P.act(mu2, o4), rep) << c.label;
        ASSERT_EQ(k4, k2) << c.label;
      }
  }
}

TEST(MagCom, BasisSizes) {
  MagComOperad m2(2), m3(3);
  // (2n-3)!! binary trees on n leaves
  EXPECT_EQ(m2.basis(1).size(), 1u);
  EXPECT_EQ(m2.basis(2).size(), 1u);
  EXPECT_EQ(m2.basis(3).size(), 3u);
  EXPECT_EQ(m2.basis(4).size(), 15u);
  EXPECT_EQ(m2.basis(5).size(), 105u);
  EXPECT_EQ(m3.basis(2).size(), 0u);
  EXPECT_EQ(m3.basis(3).size(), 1u);
  EXPECT_EQ(m3.basis(5).size(), 10u);
}

TEST(LevToTree, InvertsLeafDepths) {
  for (u32 p : {2u, 3u}) {
    MagComOperad mag(p);
    for (int n = 1; n <= (p == 2 ? 7 : 9); ++n) {
      auto b = lev_basis(p, n, (n - 1) / static_cast<int>(p - 1));
      std::set<OpCode> images;
      for (auto& l : b) {
        auto t = lev_to_tree(l, p);
        ASSERT_TRUE(t.has_value());
        ASSERT_EQ(mag.leaf_depths(*t), l);
        images.insert(*t);
      }
      EXPECT_EQ(images.size(), b.size());
    }
    EXPECT_FALSE(lev_to_tree({0, 0}, p).has_value());
  }
}

TEST(LevToTree, LeafDepthsIsAnOperadMorphism) {
  for (u32 p : {2u, 3u}) {
    MagComOperad mag(p);
    LevelOperad L(LevelKind::Lev, p);
    EXPECT_EQ(mag.leaf_depths(*mag.star()), L.star()->data);
    for (int a = 1; a <= 4; ++a)
      for (int b = 1; a + b <= 6; ++b)
        for (auto& x : sample(mag, a, 10))
          for (auto& y : sample(mag, b, 10))
            for (int i = 0; i < a; ++i) {
              auto c = *mag.compose(x, i, y);
              auto l = *L.compose({a, mag.leaf_depths(x)}, i, {b, mag.leaf_depths(y)});
              ASSERT_EQ(mag.leaf_depths(c), l.data);
            }
    Perm s{2, 0, 1, 3};
    for (auto& x : mag.basis(4)) ASSERT_EQ(mag.leaf_depths(mag.act(x, s)), L.act({4, mag.leaf_depths(x)}, s).data);
  }
}
