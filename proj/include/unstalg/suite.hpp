#pragma once

#include <chrono>
#include <functional>
#include <sstream>

#include "unstalg/classical.hpp"
#include "unstalg/derivations.hpp"
#include "unstalg/structural.hpp"
#include "unstalg/twists.hpp"

namespace unstalg {

struct SubCheck {
  std::string name;
  bool pass = true;
  long checks = 0;
  double seconds = 0;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string key, name;
  double limit = 0, seconds = 0;
  std::vector<SubCheck> parts;
  bool pass() const {
    if (seconds >= limit) return false;
    for (auto& s : parts)
      if (!s.pass) return false;
    return true;
  }
  long checks() const {
    long c = 0;
    for (auto& s : parts) c += s.checks;
    return c;
  }
  std::string failure() const {
    for (auto& s : parts)
      if (!s.pass) return s.name + ": " + s.detail;
    if (seconds >= limit) return "over the time limit";
    return "";
  }
};

struct SuiteConfig {
  u32 seed = 1;
  int n2 = 16;  // truncation (unit degrees) at p = 2
  int n3 = 27;  // at p = 3, i.e. degree 54
};

namespace suite_detail {

class Recorder {
 public:
  explicit Recorder(CriterionResult& r) : r_(r) {}
  SubCheck& run(const std::string& name, const std::function<void(SubCheck&)>& body) {
    SubCheck s;
    s.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
      body(s);
    } catch (const std::exception& e) {
      s.pass = false;
      s.detail = std::string("exception: ") + e.what();
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r_.parts.push_back(s);
    return r_.parts.back();
  }
  void take(SubCheck& s, const CheckReport& rep) {
    s.checks += rep.checks;
    if (!rep.pass && s.pass) {
      s.pass = false;
      s.detail = rep.detail;
    }
  }
  static void expect(SubCheck& s, bool ok, const std::string& what) {
    ++s.checks;
    if (!ok && s.pass) {
      s.pass = false;
      s.detail = what;
    }
  }

 private:
  CriterionResult& r_;
};

inline std::string dims_str(const std::vector<u64>& v) {
  std::ostringstream o;
  for (size_t j = 0; j < v.size(); ++j) o << (j ? "," : "") << v[j];
  return o.str();
}

inline std::string P(u32 p) { return "p=" + std::to_string(p); }

inline void adem(Recorder& R, const SuiteConfig&) {
  using E = SteenrodElement;
  for (u32 p : {2u, 3u}) {
    SteenrodAlgebra A(p);
    R.run("pairs a < pb with a, b <= 20 reduce to admissible forms, " + P(p), [&](SubCheck& s) {
      for (int a = 1; a <= 20; ++a)
        for (int b = 1; b <= 20; ++b) {
          if (a >= static_cast<int>(p) * b) continue;
          for (auto& [I, c] : A.reduce({a, b})) {
            Recorder::expect(s, is_admissible(I, p) && c != 0, "P^" + std::to_string(a) + "P^" + std::to_string(b));
            Recorder::expect(s, A.degree(I) == (a + b) * static_cast<int>(p - 1), "degree not preserved");
          }
        }
    });
    R.run("length-3 words reduce to the same form in either rewriting order, " + P(p), [&](SubCheck& s) {
      for (int a = 1; a <= 8; ++a)
        for (int b = 1; b <= 8; ++b)
          for (int c = 1; c <= 8; ++c)
            Recorder::expect(s, A.reduce({a, b, c}, true) == A.reduce({a, b, c}, false), "not confluent");
    });
    R.run("reduced forms act as the words on the free unstable module, " + P(p), [&](SubCheck& s) {
      auto F = free_unstable_module(p, 1, p == 2 ? 24 : 30);
      R.take(s, check_unstable_module(*F));
    });
  }
  R.run("known relations", [&](SubCheck& s) {
    SteenrodAlgebra A2(2), A3(3);
    Recorder::expect(s, A2.reduce({1, 1}).empty(), "Sq1Sq1 != 0");
    Recorder::expect(s, A2.reduce({2, 2}) == E{{{3, 1}, 1}}, "Sq2Sq2 != Sq3Sq1");
    Recorder::expect(s, A3.reduce({1, 1}) == E{{{2}, 2}}, "P1P1 != 2P2");
  });
}

inline void centrality(Recorder& R, const SuiteConfig&) {
  for (u32 p : {2u, 3u}) {
    auto row = [&](const std::string& name, const Operad& Q, bool want, int arity) {
      R.run(name + " " + P(p) + (want ? " central" : " not central"), [&](SubCheck& s) {
        auto r = is_central(Q, single(*Q.star()), arity);
        Recorder::expect(s, r.central == want, "centrality differs");
      });
    };
    row("uCom", LevelOperad(LevelKind::UCom, p), true, 4);
    row("Lev", LevelOperad(LevelKind::Lev, p), true, 4);
    row("uComoD", CompositeOperad(std::make_shared<LevelOperad>(LevelKind::UCom, p), UnaryVariant::free_d(2)), true, 3);
    row("T1Lev", LevelOperad(LevelKind::TqLev, p, 1), true, 4);
    row("T2Lev", LevelOperad(LevelKind::TqLev, p, 2), true, 4);
    row("MagCom", MagComOperad(p), false, 3);
  }
}

inline void frobenius(Recorder& R, const SuiteConfig& c) {
  for (u32 p : {2u, 3u}) {
    const int N = p == 2 ? c.n2 : c.n3;
    for (const char* op : {"ucom", "lev"})
      for (auto gens : std::vector<std::vector<int>>{{1}, {1, 1}}) {
        auto Q = make_operad(op, p);
        R.run(Q->name() + " on " + std::to_string(gens.size()) + " generator(s), N=" + std::to_string(N),
              [&](SubCheck& s) {
                auto r = verify_frobenius(Q, gens, N);
                Recorder::expect(s, r.central, "star not central");
                Recorder::expect(s, r.pass, r.detail);
                Recorder::expect(s, r.dims_quotient.size() == static_cast<size_t>(N + 1), "missing degrees");
              });
      }
  }
  R.run("MagCom_2 drops dimension at the square of a square", [&](SubCheck& s) {
    auto r = verify_frobenius(make_operad("magcom", 2), {1, 1}, 6);
    Recorder::expect(s, !r.central && !r.pass, "expected a failure");
    Recorder::expect(s, r.first_mismatch == 4, "first mismatch at " + std::to_string(r.first_mismatch));
    Recorder::expect(s, r.first_mismatch >= 0 && r.dims_quotient[4] < r.dims_free[4], "no strict drop");
    s.detail = "dims " + dims_str(r.dims_quotient) + " vs " + dims_str(r.dims_free);
  });
}

inline void reduced(Recorder& R, const SuiteConfig& c) {
  for (u32 p : {2u, 3u}) {
    const int N = p == 2 ? c.n2 : c.n3;
    struct Case {
      const char* op;
      int gen;
    };
    for (auto k : {Case{"ucom", 1}, Case{"ucom", 2}, Case{"lev", 1}}) {
      auto Q = make_operad(k.op, p);
      R.run(Q->name() + " on F'(" + std::to_string(2 * k.gen) + "), N=" + std::to_string(N), [&](SubCheck& s) {
        auto r = verify_iso(Q, free_unstable_module(p, k.gen, N), p == 2 ? 8 : 9);
        Recorder::expect(s, r.central && r.reduced && r.connected, "preconditions");
        Recorder::expect(s, r.pass, r.detail);
      });
    }
    R.run("Sigma^2 F'(0) is not reduced, " + P(p), [&](SubCheck& s) {
      auto r = verify_iso(make_operad("ucom", p), sigma_sq_f0(p, N), 6);
      Recorder::expect(s, !r.reduced && !r.pass, "expected a failure");
      Recorder::expect(s, r.first_mismatch == static_cast<int>(p), "first mismatch at " + std::to_string(r.first_mismatch));
      Recorder::expect(s, r.first_mismatch >= 0 && r.dims_quotient[p] == 0 && r.dims_free[p] == 1, "expected 0 vs 1");
    });
  }
}

inline void classical(Recorder& R, const SuiteConfig& c) {
  for (u32 p : {2u, 3u}) {
    const int N = p == 2 ? c.n2 : c.n3;
    R.run("K_Lev(F'(2)) = K'(2), " + P(p) + " N=" + std::to_string(N), [&](SubCheck& s) {
      auto r = verify_level_identification(p, N);
      R.take(s, r);
      for (int d = 0; d <= N; ++d) {
        const u64 orbits = d == 0 ? 0 : sc_level_counts(p, d, (d - 1) / static_cast<int>(p - 1)).size();
        Recorder::expect(s, r.dims_quotient.size() > static_cast<size_t>(d) && r.dims_quotient[d] == orbits,
                         "orbit count differs in degree " + std::to_string(d));
      }
    });
    for (int q = 0; q <= 2; ++q) {
      const int Nq = p == 2 ? 12 : 13;
      R.run("K_TqLev(F'(2)) = J'(2p^q), q=" + std::to_string(q) + " " + P(p),
            [&](SubCheck& s) { R.take(s, verify_level_identification(p, Nq, q)); });
      R.run("cofiltration q=" + std::to_string(q) + " " + P(p),
            [&](SubCheck& s) { R.take(s, verify_cofiltration(p, q, Nq)); });
    }
  }
}

inline void campbell_selick(Recorder& R, const SuiteConfig&) {
  for (auto [p, s] : {std::pair{2u, 2}, std::pair{2u, 3}, std::pair{3u, 2}}) {
    const int N = p == 2 ? 12 : 6;
    for (const char* op : {"ucom", "lev"}) {
      auto Q = make_operad(op, p);
      const std::string tag = Q->name() + " s=" + std::to_string(s) + " N=" + std::to_string(N);
      auto M = free_unstable_module(p, 1, N);
      R.run("K(M^s) = K_{PoQsD}(M), " + tag, [&](SubCheck& c) {
        auto r = verify_campbell_selick(Q, M, s);
        R.take(c, r);
        Recorder::expect(c, r.dims_sum == r.dims_twisted, "dims differ");
      });
      R.run("weight splitting, " + tag, [&](SubCheck& c) {
        auto r = verify_splitting(Q, M, s);
        R.take(c, r);
        if (r.basis_degree >= 0 && r.basis_degree < N)
          c.detail = "basis-level checks up to degree " + std::to_string(r.basis_degree) + ", counts above";
      });
    }
  }
}

inline void derivations(Recorder& R, const SuiteConfig& c) {
  auto P2 = make_operad("ucom", 2), P3 = make_operad("ucom", 3);
  for (u32 p : {2u, 3u})
    for (int n = 1; n <= 3; ++n) {
      const int N = p == 2 ? (n == 3 ? 8 : 10) : (n == 3 ? 7 : 9);
      R.run("every S_M, " + P(p) + " dimV=" + std::to_string(n) + " N=" + std::to_string(N), [&](SubCheck& s) {
        for (auto& M : endomorphisms(p, n, c.seed)) {
          TwistedAlgebra A(p == 2 ? P2 : P3, M, N);
          auto r = check_adem_operators(A);
          R.take(s, r);
          Recorder::expect(s, r.layer_a && r.layer_b && r.layer_c, "a layer fails");
          Recorder::expect(s, r.agree(), "layers a and b disagree");
        }
      });
    }
  R.run("a mutated action is rejected", [&](SubCheck& s) {
    for (u32 p : {2u, 3u}) {
      FpMatrix M = FpMatrix::identity(p, 2);
      M(0, 1) = 1;
      TwistedAlgebra A(p == 2 ? P2 : P3, M, p == 2 ? 8 : 9);
      auto r = check_adem_operators(*mutate_action(A));
      Recorder::expect(s, !r.pass && !r.layer_a && !r.layer_b, "mutation not detected");
      Recorder::expect(s, r.agree(), "layers a and b disagree on the mutation");
    }
  });
}

inline void classification(Recorder& R, const SuiteConfig& c) {
  auto P = make_operad("ucom", 2);
  R.run("all 16 endomorphisms of F_2^2, N=12", [&](SubCheck& s) {
    auto r = classification_experiment(P, 2, 2, 12, c.seed);
    R.take(s, r);
    Recorder::expect(s, r.records.size() == 16, "expected 16 records");
    Recorder::expect(s, r.separated, "no two classes separated");
    for (auto& x : r.records) Recorder::expect(s, x.kernel_identity, "kernel identity fails");
    s.detail = std::to_string(r.classes) + " kernel-profile classes";
  });
  R.run("commuting invertible twists give equal dims", [&](SubCheck& s) {
    for (auto& M : endomorphisms(2, 2, c.seed)) R.take(s, verify_commuting_twists(P, M, 12));
  });
}

inline void structural(Recorder& R, const SuiteConfig& c) {
  R.run("operad axioms up to arity 6", [&](SubCheck& s) {
    for (auto& k : standard_axiom_cases(6)) R.take(s, check_operad_axioms(k, 12, c.seed));
  });
  R.run("Lev closed under composition, n <= 5", [&](SubCheck& s) {
    for (u32 p : {2u, 3u}) R.take(s, check_level_closure(p, 5));
  });
  R.run("uComoD matches the partition operad, n <= 5", [&](SubCheck& s) {
    for (u32 p : {2u, 3u}) R.take(s, check_partition_identification(p, 5, 2));
  });
  R.run("star power additive on 100 random pairs", [&](SubCheck& s) {
    for (u32 p : {2u, 3u})
      for (const char* op : {"ucom", "lev", "magcom"}) R.take(s, check_star_power_additivity(make_operad(op, p), 100, c.seed));
  });
  R.run("ideal stable under the Steenrod operations", [&](SubCheck& s) {
    for (u32 p : {2u, 3u}) {
      const int N = p == 2 ? 8 : 9;
      for (const char* op : {"ucom", "lev", "magcom"}) {
        auto Q = make_operad(op, p);
        auto M = direct_sum({sigma_sq_f0(p, N), free_unstable_module(p, 1, N)});
        UnstableQuotient D(Q, Q->star(), false, letters_from_module(M), Strategy::Direct);
        R.take(s, check_ideal_stability(D));
      }
    }
  });
  R.run("split and letter Frobenius ideals agree", [&](SubCheck& s) {
    for (u32 p : {2u, 3u})
      for (const char* op : {"ucom", "lev", "magcom"}) R.take(s, check_frobenius_ideals(make_operad(op, p), {1, 2}, p == 2 ? 8 : 9));
  });
}

}  // namespace suite_detail

struct Criterion {
  int id;
  std::string key, name;
  double limit;
  std::function<void(suite_detail::Recorder&, const SuiteConfig&)> body;
};

inline const std::vector<Criterion>& criteria() {
  using namespace suite_detail;
  static const std::vector<Criterion> all{
      {1, "adem", "Adem rewriting", 10, adem},
      {2, "centrality", "centrality table", 5, centrality},
      {3, "frobenius", "free algebras from Frobenius modules", 120, frobenius},
      {4, "reduced", "quotients of reduced modules", 180, reduced},
      {5, "classical", "Carlsson and Brown-Gitler identifications", 120, classical},
      {6, "twists", "twisted quotients and weight splitting", 300, campbell_selick},
      {7, "derivations", "higher derivations satisfy the Adem relations", 120, derivations},
      {8, "classification", "kernel-profile classification", 180, classification},
      {9, "structural", "structural checks", 120, structural},
  };
  return all;
}

inline CriterionResult run_criterion(const Criterion& c, const SuiteConfig& cfg) {
  CriterionResult r;
  r.id = c.id;
  r.key = c.key;
  r.name = c.name;
  r.limit = c.limit;
  suite_detail::Recorder R(r);
  auto t0 = std::chrono::steady_clock::now();
  c.body(R, cfg);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// `only` selects criteria by key or number; empty runs everything
inline std::vector<CriterionResult> run_suite(const SuiteConfig& cfg, const std::vector<std::string>& only = {},
                                              const std::function<void(const CriterionResult&)>& on_done = {}) {
  std::vector<CriterionResult> out;
  for (auto& c : criteria()) {
    if (!only.empty() &&
        std::find_if(only.begin(), only.end(), [&](const std::string& k) { return k == c.key || k == std::to_string(c.id); }) ==
            only.end())
      continue;
    out.push_back(run_criterion(c, cfg));
    if (on_done) on_done(out.back());
  }
  return out;
}

}  // namespace unstalg
