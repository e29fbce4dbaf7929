#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "unstalg/suite.hpp"

using namespace unstalg;
using nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_prime(u32 p) {
  if (p < 2) return false;
  for (u32 d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

struct RunConfig {
  u32 p = 2;
  int s = 2;
  int max_degree = -1;  // in the usual grading, doubled for odd p
  std::string operad = "ucom";
  int bound = 1;  // q for tqlev, the level bound for pi
  std::string module = "F2";
  int q = 1;
  std::vector<int> gens{2};
  int weight = 2;
  int dimv = 2;
  u32 seed = 1;
  std::string format = "csv";
  std::string output;

  int unit() const { return grading_unit(p); }
  // truncation in unit degrees
  int N() const { return max_degree / unit(); }

  void validate() {
    if (!is_prime(p)) throw ConfigError("p = " + std::to_string(p) + " is not prime");
    if (max_degree < 0) max_degree = p == 2 ? 16 : static_cast<int>(2 * p * p * p);
    if (max_degree > 400) throw ConfigError("max-degree above 400 is not supported");
    if (s < 1) throw ConfigError("s must be positive");
    if (q < 0) throw ConfigError("q must be nonnegative");
    if (dimv < 1 || dimv > 4) throw ConfigError("dimv must be between 1 and 4");
    if (weight <= 0 || weight % 2) throw ConfigError("weight must be a positive even integer 2n");
    for (int g : gens)
      if (g <= 0 || g % 2) throw ConfigError("generators are named by even degrees 2n, as in F'(2n)");
    if (format != "csv" && format != "json" && format != "md") throw ConfigError("format must be csv, json or md");
  }

  OperadPtr make() const {
    try {
      return make_operad(operad, p, operad == "tqlev" || operad == "pi" ? bound : 0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  ModulePtr make_module() const {
    const int n = N();
    std::vector<ModulePtr> parts;
    std::stringstream ss(module);
    std::string item;
    static const std::regex free_re(R"(F(\d+)|F2n\((\d+)\))");
    while (std::getline(ss, item, ',')) {
      std::smatch m;
      if (std::regex_match(item, m, free_re)) {
        // F<k> is free on a class of degree k; F2n(n) is free on degree 2n
        int deg = m[1].matched ? std::stoi(m[1]) : 2 * std::stoi(m[2]);
        if (deg <= 0 || deg % 2) throw ConfigError("free module generator degree must be positive and even");
        parts.push_back(free_unstable_module(p, deg / 2, n));
      } else if (item == "SigmaSq") {
        parts.push_back(sigma_sq_f0(p, n));
      } else if (item == "BrownGitler") {
        i64 w = 1;
        for (int j = 0; j < q; ++j) w *= p;
        parts.push_back(brown_gitler_component(p, w, n));
      } else if (item == "Carlsson") {
        parts.push_back(carlsson_component(p, 1, 0, n));
      } else if (item == "empty") {
        parts.push_back(zero_module(p, n));
      } else {
        throw ConfigError("unknown module '" + item + "' (F<2n>, F2n(n), SigmaSq, BrownGitler, Carlsson, empty)");
      }
    }
    if (parts.empty()) throw ConfigError("no module given");
    return parts.size() == 1 ? parts[0] : direct_sum(parts);
  }

  std::vector<int> unit_gens() const {
    std::vector<int> out;
    for (int g : gens) out.push_back(g / 2);
    return out;
  }

  ordered_json to_json() const {
    return {{"p", p},           {"max_degree", max_degree}, {"operad", operad}, {"bound", bound}, {"module", module},
            {"s", s},           {"q", q},                   {"gens", gens},     {"weight", weight}, {"dimv", dimv},
            {"seed", seed}};
  }
};

std::string output_path(const std::string& requested) {
  namespace fs = std::filesystem;
  if (requested.empty()) return "";
  fs::path out(requested);
  const char* dir = std::getenv("UNSTALG_OUTPUT_DIR");
  if (out.is_relative() && dir && *dir) out = fs::path(dir) / out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out.string();
}

void emit(const std::string& text, const std::string& requested) {
  auto path = output_path(requested);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

// one row per (degree[, weight]); degrees in the usual grading
struct Table {
  bool weighted = false;
  struct Row {
    int degree, weight;
    u64 dim;
  };
  std::vector<Row> rows;

  std::string render(const std::string& format, const ordered_json& meta) const {
    std::ostringstream o;
    if (format == "csv") {
      o << (weighted ? "degree,weight,dim\n" : "degree,dim\n");
      for (auto& r : rows) {
        o << r.degree << ',';
        if (weighted) o << r.weight << ',';
        o << r.dim << '\n';
      }
    } else if (format == "json") {
      ordered_json j = meta;
      j["rows"] = ordered_json::array();
      for (auto& r : rows) {
        ordered_json x{{"degree", r.degree}};
        if (weighted) x["weight"] = r.weight;
        x["dim"] = r.dim;
        j["rows"].push_back(x);
      }
      o << j.dump(2) << '\n';
    } else {
      o << (weighted ? "| degree | weight | dim |\n|---|---|---|\n" : "| degree | dim |\n|---|---|\n");
      for (auto& r : rows) {
        o << "| " << r.degree << " | ";
        if (weighted) o << r.weight << " | ";
        o << r.dim << " |\n";
      }
    }
    return o.str();
  }
};

int cmd_dims(RunConfig& c, const std::string& construct) {
  c.validate();
  const int N = c.N(), u = c.unit();
  Table t;
  auto add = [&](int d, u64 dim) { t.rows.push_back({d * u, 0, dim}); };
  if (construct == "module") {
    auto M = c.make_module();
    for (int d = 0; d <= N; ++d) add(d, M->dim(d));
  } else if (construct == "free") {
    auto M = c.make_module();
    auto dims = free_dims(c.make(), letter_degrees(*M), N);
    for (int d = 0; d <= N; ++d) add(d, dims[d]);
  } else if (construct == "KPstar" || construct == "APstar") {
    auto P = c.make();
    if (!P->star()) throw ConfigError(P->name() + " has no distinguished p-ary operation");
    GeneratingModule G = construct == "KPstar" ? letters_from_module(c.make_module()) : frobenius_free(c.p, c.unit_gens(), N);
    UnstableQuotient K(P, P->star(), false, std::move(G));
    for (int d = 0; d <= N; ++d) add(d, K.dim_u64(d));
  } else if (construct == "brown-gitler" || construct == "carlsson-component") {
    const i64 n = c.weight / 2;
    auto W = construct == "brown-gitler" ? brown_gitler_component(c.p, n, N) : carlsson_component(c.p, n, 0, N);
    for (int d = 0; d <= N; ++d) add(d, W->dim(d));
  } else if (construct == "weight") {
    auto P = c.make();
    if (!P->star()) throw ConfigError(P->name() + " has no distinguished p-ary operation");
    auto Q = twisted_quotient(P, c.make_module(), c.s);
    t.weighted = true;
    const int wm = static_cast<int>(twist_modulus(c.p, c.s));
    for (int d = 0; d <= N; ++d)
      for (int w = 0; w < wm; ++w) t.rows.push_back({d * u, w, Q->dim_weight(d, w)});
  } else {
    throw ConfigError("unknown construct '" + construct + "'");
  }
  ordered_json meta{{"schema", 1}, {"command", "dims"}, {"construct", construct}, {"config", c.to_json()}};
  emit(t.render(c.format, meta), c.output);
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct Verdict {
  bool pass = false;
  long checks = 0;
  std::string detail;
  int first_failing_degree = -1;  // unit degrees
  std::vector<std::pair<std::string, std::vector<u64>>> series;
  ordered_json extra;
};

int first_difference(const std::vector<u64>& a, const std::vector<u64>& b) {
  for (size_t d = 0; d < std::min(a.size(), b.size()); ++d)
    if (a[d] != b[d]) return static_cast<int>(d);
  return -1;
}

void from_check(Verdict& v, const CheckReport& r) {
  v.pass = r.pass;
  v.checks = r.checks;
  v.detail = r.detail;
}

void require_central(const OperadPtr& P) {
  if (!P->star()) throw ConfigError("precondition violated: " + P->name() + " has no distinguished p-ary operation");
  if (!is_central(*P, single(*P->star()), std::min<int>(4, P->prime() + 1)).central)
    throw ConfigError("precondition violated: star not central in " + P->name());
}

std::vector<int> to_int(const std::vector<u64>& v) { return {v.begin(), v.end()}; }

// names used by earlier scripts
const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> m{
      {"theofrob", "frobenius"},        {"theored", "reduced"},           {"theoQsM1", "twisted-copies"},
      {"propK1", "carlsson-level"},     {"propK", "carlsson"},            {"propBGTqLev", "brown-gitler-level"},
      {"dkw1-adem", "derivation-adem"}, {"dkw2-classify", "classify"}};
  return m;
}

Verdict run_theorem(RunConfig& c, std::string th) {
  if (auto it = aliases().find(th); it != aliases().end()) th = it->second;
  Verdict v;
  const int N = c.N();
  if (th == "frobenius") {
    auto P = c.make();
    require_central(P);
    auto r = verify_frobenius(P, c.unit_gens(), N);
    v.pass = r.pass;
    v.detail = r.detail;
    v.first_failing_degree = r.first_mismatch;
    v.checks = N + 1;
    v.series = {{"quotient", r.dims_quotient}, {"free", r.dims_free}};
  } else if (th == "reduced") {
    auto P = c.make();
    require_central(P);
    auto M = c.make_module();
    auto r = verify_iso(P, M, std::min(N, c.p == 2 ? 8 : 9));
    v.pass = r.pass;
    v.detail = r.detail;
    if (!r.reduced) v.detail = "module is not reduced" + (v.detail.empty() ? "" : "; " + v.detail);
    v.first_failing_degree = r.first_mismatch;
    v.checks = N + 1;
    v.series = {{"quotient", r.dims_quotient}, {"free", r.dims_free}};
  } else if (th == "twisted-copies" || th == "splitting") {
    auto P = c.make();
    require_central(P);
    auto M = c.make_module();
    auto r = th == "splitting" ? verify_splitting(P, M, c.s) : verify_campbell_selick(P, M, c.s);
    from_check(v, r);
    if (th == "twisted-copies") {
      v.series = {{"direct_sum", r.dims_sum}, {"twisted", r.dims_twisted}, {"free", r.dims_free}};
      v.first_failing_degree = first_difference(r.dims_sum, r.dims_twisted);
    } else {
      ordered_json w = ordered_json::array();
      for (size_t d = 0; d < r.weight_dims.size(); ++d) w.push_back(r.weight_dims[d]);
      v.extra["weight_dims"] = w;
      v.extra["basis_degree"] = r.basis_degree * c.unit();
    }
  } else if (th == "carlsson-level" || th == "brown-gitler-level") {
    auto r = verify_level_identification(c.p, N, th == "carlsson-level" ? -1 : c.q);
    from_check(v, r);
    v.series = {{"quotient", r.dims_quotient}, {"classical", r.dims_classical}};
    v.first_failing_degree = first_difference(r.dims_quotient, r.dims_classical);
  } else if (th == "carlsson") {
    auto r = verify_carlsson(c.p, N, {{c.weight / 2, -1}, {c.weight / 2, 0}, {c.weight / 2, 1}});
    from_check(v, r);
    v.series = {{"quotient", r.dims_quotient}, {"classical", r.dims_classical}};
  } else if (th == "brown-gitler-sum") {
    auto r = verify_brown_gitler_sum(c.p, c.q, N);
    from_check(v, r);
    v.series = {{"quotient", r.dims_quotient}, {"direct_sum", r.dims_classical}};
    v.first_failing_degree = first_difference(r.dims_quotient, r.dims_classical);
  } else if (th == "cofiltration") {
    from_check(v, verify_cofiltration(c.p, c.q, N));
  } else if (th == "derivation-adem") {
    auto P = c.make();
    require_central(P);
    v.pass = true;
    ordered_json recs = ordered_json::array();
    for (auto& M : endomorphisms(c.p, c.dimv, c.seed)) {
      TwistedAlgebra A(P, M, N);
      auto r = check_adem_operators(A);
      v.checks += r.checks;
      if (!r.pass && v.pass) v.detail = r.detail;
      v.pass = v.pass && r.pass && r.agree();
      std::vector<std::vector<u32>> m(M.rows(), std::vector<u32>(M.cols()));
      for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) m[i][j] = M(i, j);
      recs.push_back({{"matrix", m}, {"layer_a", r.layer_a}, {"layer_b", r.layer_b}, {"layer_c", r.layer_c}});
    }
    v.extra["records"] = recs;
  } else if (th == "classify") {
    auto P = c.make();
    require_central(P);
    auto r = classification_experiment(P, c.p, c.dimv, N, c.seed);
    from_check(v, r);
    ordered_json recs = ordered_json::array();
    for (auto& x : r.records) {
      std::vector<std::vector<u32>> m(x.M.rows(), std::vector<u32>(x.M.cols()));
      for (int i = 0; i < x.M.rows(); ++i)
        for (int j = 0; j < x.M.cols(); ++j) m[i][j] = x.M(i, j);
      ordered_json gd = ordered_json::array();
      for (size_t d = 0; d < x.graded.size(); ++d) gd.push_back({{"degree", d * c.unit()}, {"dim", x.graded[d]}});
      recs.push_back({{"matrix", m},
                      {"kernel_profile", x.profile},
                      {"graded_dims", gd},
                      {"indecomposable_dims", x.dims.indecomposable},
                      {"primitive_dims", x.dims.primitive},
                      {"adem_pass", x.adem_pass},
                      {"kernel_identity", x.kernel_identity}});
    }
    v.extra["classes"] = r.classes;
    v.extra["separated"] = r.separated;
    v.extra["records"] = recs;
  } else {
    throw ConfigError("unknown theorem '" + th + "'");
  }
  return v;
}

int cmd_verify(RunConfig& c, const std::string& th) {
  if (c.format == "csv") c.format = "json";
  c.validate();
  Verdict v = run_theorem(c, th);
  const int u = c.unit();
  std::ostringstream o;
  if (c.format == "json") {
    ordered_json j{{"schema", 1}, {"command", "verify"}, {"theorem", th}, {"config", c.to_json()},
                   {"pass", v.pass}, {"checks", v.checks}};
    j["first_failing_degree"] = v.first_failing_degree < 0 ? ordered_json(nullptr) : ordered_json(v.first_failing_degree * u);
    j["detail"] = v.detail;
    ordered_json series = ordered_json::object();
    for (auto& [name, dims] : v.series) {
      ordered_json rows = ordered_json::array();
      for (size_t d = 0; d < dims.size(); ++d) rows.push_back({{"degree", d * u}, {"dim", dims[d]}});
      series[name] = rows;
    }
    j["dims"] = series;
    for (auto& [k, x] : v.extra.items()) j[k] = x;
    o << j.dump(2) << '\n';
  } else {
    o << "# verify " << th << "\n\n" << (v.pass ? "**pass**" : "**fail**") << " (" << v.checks << " checks)\n\n";
    if (v.first_failing_degree >= 0) o << "first failing degree: " << v.first_failing_degree * u << "\n\n";
    if (!v.detail.empty()) o << "detail: " << v.detail << "\n\n";
    if (!v.series.empty()) {
      o << "| degree |";
      for (auto& s : v.series) o << ' ' << s.first << " |";
      o << "\n|---|";
      for (size_t k = 0; k < v.series.size(); ++k) o << "---|";
      o << '\n';
      for (size_t d = 0; d < v.series[0].second.size(); ++d) {
        o << "| " << d * u << " |";
        for (auto& s : v.series) o << ' ' << (d < s.second.size() ? std::to_string(s.second[d]) : "") << " |";
        o << '\n';
      }
    }
  }
  emit(o.str(), c.output);
  if (!v.pass) std::cerr << "verification failed: " << (v.detail.empty() ? "dimension mismatch" : v.detail) << '\n';
  return v.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const RunConfig& c, const std::vector<std::string>& only, const std::string& dir, bool timing) {
  SuiteConfig cfg;
  cfg.seed = c.seed;
  for (auto& k : only) {
    bool known = false;
    for (auto& s : criteria()) known |= k == s.key || k == std::to_string(s.id);
    if (!known) throw ConfigError("unknown criterion '" + k + "'");
  }
  auto results = run_suite(cfg, only, [](const CriterionResult& r) {
    std::cerr << (r.pass() ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << '\n';
  });
  bool all = true;
  ordered_json j{{"schema", 1}, {"command", "report"}, {"seed", c.seed}, {"max_degree", {{"2", cfg.n2}, {"3", 2 * cfg.n3}}}};
  j["criteria"] = ordered_json::array();
  std::ostringstream md;
  md << "# acceptance report\n\nseed " << c.seed << ", truncation degree " << cfg.n2 << " at p=2 and " << 2 * cfg.n3
     << " at p=3\n\n| # | criterion | result | checks |" << (timing ? " seconds | limit |" : "") << "\n|---|---|---|---|"
     << (timing ? "---|---|" : "") << '\n';
  for (auto& r : results) {
    all = all && r.pass();
    ordered_json x{{"id", r.id}, {"key", r.key}, {"name", r.name}, {"pass", r.pass()}, {"checks", r.checks()}};
    if (timing) {
      x["seconds"] = r.seconds;
      x["limit_seconds"] = r.limit;
    }
    x["parts"] = ordered_json::array();
    for (auto& s : r.parts) {
      ordered_json y{{"name", s.name}, {"pass", s.pass}, {"checks", s.checks}, {"detail", s.detail}};
      if (timing) y["seconds"] = s.seconds;
      x["parts"].push_back(y);
    }
    j["criteria"].push_back(x);
    md << "| " << r.id << " | " << r.name << " | " << (r.pass() ? "pass" : "FAIL") << " | " << r.checks() << " |";
    if (timing) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " %.2f | %.0f |", r.seconds, r.limit);
      md << buf;
    }
    md << '\n';
  }
  md << '\n';
  for (auto& r : results) {
    md << "## " << r.id << ". " << r.name << "\n\n";
    for (auto& s : r.parts) {
      md << "- " << (s.pass ? "pass" : "FAIL") << ": " << s.name;
      if (!s.detail.empty()) md << " (" << s.detail << ")";
      if (timing) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " [%.2f s]", s.seconds);
        md << buf;
      }
      md << '\n';
    }
    md << '\n';
  }
  j["pass"] = all;
  namespace fs = std::filesystem;
  std::string d = dir;
  if (d.empty()) {
    const char* env = std::getenv("UNSTALG_OUTPUT_DIR");
    d = env && *env ? env : ".";
  }
  fs::create_directories(d);
  std::ofstream(fs::path(d) / "report.json") << j.dump(2) << '\n';
  std::ofstream(fs::path(d) / "report.md") << md.str();
  std::cout << md.str();
  return all ? 0 : 1;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--p", c.p, "prime");
  sub->add_option("--max-degree,-N", c.max_degree, "truncation degree (default 16 for p=2, 2p^3 otherwise)");
  sub->add_option("--operad", c.operad, "ucom | com | lev | tqlev | pi | magcom");
  sub->add_option("--bound", c.bound, "q for tqlev, the level bound for pi");
  sub->add_option("--module", c.module, "comma-separated summands: F<2n>, F2n(n), SigmaSq, BrownGitler, Carlsson, empty");
  sub->add_option("--q", c.q, "Brown-Gitler index: J'(2p^q)");
  sub->add_option("--s", c.s, "number of twisted copies");
  sub->add_option("--gens", c.gens, "generators 2n of the Frobenius module, as in F'(2n)");
  sub->add_option("--weight", c.weight, "weight 2n of J'(2n) or K'(2n)");
  sub->add_option("--dimv", c.dimv, "dimension of V for twisted actions");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--format", c.format, "csv | json | md");
  sub->add_option("--output,-o", c.output, "output file (relative paths resolve against UNSTALG_OUTPUT_DIR)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unstable algebras over operads: dimension tables and verifiers"};
  app.require_subcommand(1);
  RunConfig c;

  std::string construct = "KPstar";
  auto* dims = app.add_subcommand("dims", "dimension table of a construction");
  add_common(dims, c);
  dims->add_option("--construct", construct, "module | free | KPstar | APstar | brown-gitler | carlsson-component | weight");

  std::string theorem;
  auto* verify = app.add_subcommand("verify", "run one verifier; exit 0 on pass, 1 on failure");
  add_common(verify, c);
  verify->add_option("theorem", theorem,
                     "frobenius | reduced | twisted-copies | splitting | carlsson-level | carlsson | brown-gitler-level | "
                     "cofiltration | derivation-adem | classify | brown-gitler-sum")
      ->required();

  std::vector<std::string> only;
  std::string dir;
  bool no_timing = false;
  auto* report = app.add_subcommand("report", "run the acceptance suite, write report.json and report.md");
  report->add_option("--only", only, "criterion keys or numbers");
  report->add_option("--output-dir", dir, "directory for the report (default UNSTALG_OUTPUT_DIR or .)");
  report->add_option("--seed", c.seed, "random seed");
  report->add_flag("--no-timing", no_timing, "omit timings so that the output is reproducible byte for byte");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    if (dims->parsed()) return cmd_dims(c, construct);
    if (verify->parsed()) return cmd_verify(c, theorem);
    if (report->parsed()) return cmd_report(c, only, dir, !no_timing);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
