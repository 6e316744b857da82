// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when a criterion could not be evaluated, or with --strict when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rocabc/experiment.hpp"
#include "rocabc/io.hpp"
#include "rocabc/oracle.hpp"
#include "rocabc/roc.hpp"

using namespace rocabc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1 -------------------------------------------------------------------------------

Outcome closed_form_limit() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  double worst_numeric = 0.0, worst_exact = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DualBetaParams p{std::exp(uniform(rng, std::log(0.2), std::log(20.0))), uniform(rng, 0.0, 20.0),
                           std::exp(uniform(rng, std::log(0.2), std::log(20.0))), uniform(rng, 0.0, 20.0)};
    const double slope = limit_slope(p);
    const double numeric = ncbeta::pdf(1e-8, p.beta_f, p.lambda_f) / ncbeta::pdf(1e-8, p.beta_g, p.lambda_g);
    const double exact = (p.beta_f / p.beta_g) * std::exp((p.lambda_g - p.lambda_f) / 2.0);
    worst_numeric = std::max(worst_numeric, std::abs(slope - numeric) / numeric);
    worst_exact = std::max(worst_exact, std::abs(slope - exact) / exact);
  }
  const double secs = seconds_since(t0);
  return {worst_numeric <= 1e-4 && worst_exact <= 1e-15 && secs < 5.0,
          fmt("max rel. gap to pdf ratio %.2e, to closed form %.2e, %.2f s", worst_numeric, worst_exact, secs)};
}

// --- 2 -------------------------------------------------------------------------------

Outcome summary_invariance() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2);
  double worst = 0.0;
  bool lengths = true;
  for (int i = 0; i < 1000; ++i) {
    const auto k = std::uniform_int_distribution<std::size_t>(3, 25)(rng);
    std::vector<Minutia> ms;
    for (std::size_t j = 0; j < k; ++j)
      ms.push_back({uniform(rng, 0, 500), uniform(rng, 0, 500), uniform(rng, 0, kTwoPi),
                    uniform(rng, 0, 1) < 0.5 ? MinutiaType::RidgeEnding : MinutiaType::Bifurcation});
    const Configuration c(ms);
    const auto moved = rigid_transform(c, uniform(rng, 0, kTwoPi), uniform(rng, -1000, 1000), uniform(rng, -1000, 1000));
    const auto a = summarize(c), b = summarize(moved);
    const auto fa = flatten(a), fb = flatten(b);
    lengths = lengths && fa.size() == k * k + 2 * k && fb.size() == fa.size();
    const std::size_t angles_begin = a.cross_dists.size() + a.centroid_dists.size() + a.dir_marker_cross_dists.size();
    for (std::size_t j = 0; j < fa.size(); ++j) {
      double d = std::abs(fa[j] - fb[j]);
      if (j >= angles_begin && j < angles_begin + k) d = std::min(d, 360.0 - d);
      worst = std::max(worst, d);
    }
  }
  auto len = [](std::size_t k) {
    std::vector<Minutia> ms;
    for (std::size_t j = 0; j < k; ++j) ms.push_back({std::cos(j * 0.9) * 50 + j, std::sin(j * 0.9) * 50, 0.1 * j, {}});
    return flatten(summarize(Configuration(ms))).size();
  };
  const bool quoted_lengths = len(7) == 63 && len(10) == 120 && len(15) == 255;
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && lengths && quoted_lengths && secs < 10.0,
          fmt("max abs. difference %.2e, lengths k^2+2k %s, k=7/10/15 -> %zu/%zu/%zu, %.2f s", worst,
              lengths ? "ok" : "WRONG", len(7), len(10), len(15), secs)};
}

// --- 3 -------------------------------------------------------------------------------

Outcome oracle_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.n_total = 200000;
  cfg.m_denominator = 100;
  cfg.p_floor = 1e-3;
  cfg.master_seed = 3;
  const Method ms[] = {Method::Empirical, Method::DualBeta, Method::Logistic};
  const auto rep = run_oracle(OracleSetting{}, cfg, 20, ms);
  const auto e = rep.passes(Method::Empirical, 0.15), d = rep.passes(Method::DualBeta, 0.3),
             l = rep.passes(Method::Logistic, 0.3);
  const double secs = seconds_since(t0);
  return {e >= 18 && d >= 16 && l >= 16 && secs < 300.0,
          fmt("empirical %zu/20 within 0.15, dual beta %zu/20 within 0.3, logistic %zu/20 within 0.3, %.1f s", e, d, l,
              secs)};
}

// --- 4 -------------------------------------------------------------------------------

Outcome exponential_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 1000000;
  std::size_t ok = 0;
  std::string values;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::exponential_distribution<double> f(4.0), g(1.0);
    ScoreSample s;
    s.f_scores.resize(n);
    s.g_scores.resize(n);
    for (auto& v : s.f_scores) v = f(rng);
    for (auto& v : s.g_scores) v = g(rng);
    const double bf = empirical_bf(s, 100).bf;
    ok += std::abs(bf - 4.0) <= 0.15 * 4.0;
    values += fmt(" %.2f", bf);
  }
  const double secs = seconds_since(t0);
  return {ok >= 18 && secs < 120.0, fmt("%zu/20 within 15%% of 4 (BFs:%s), %.1f s", ok, values.c_str(), secs)};
}

// --- 5 -------------------------------------------------------------------------------

Outcome bound_property() {
  // Every empirical run below, with equal priors, must satisfy BF <= 1/p_used.
  Rng rng(5);
  std::size_t runs = 0, violations = 0;
  for (int i = 0; i < 200; ++i) {
    ScoreSample s;
    const auto K = std::uniform_int_distribution<std::size_t>(50, 5000)(rng);
    const auto L = std::uniform_int_distribution<std::size_t>(50, 5000)(rng);
    const double shift = uniform(rng, -3, 6);
    for (std::size_t j = 0; j < K; ++j) s.f_scores.push_back(normal(rng, 0, 1));
    for (std::size_t j = 0; j < L; ++j) s.g_scores.push_back(normal(rng, shift, 1));
    const auto m = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const auto r = empirical_bf(s, m);
    ++runs;
    // 1/p_used = L/m, taken correctly rounded rather than through a second division.
    violations += r.bf > static_cast<double>(L) / static_cast<double>(m);
  }
  ScoreSample sep;
  sep.f_scores.assign(250000, 0.0);
  for (std::size_t j = 0; j < 250000; ++j) sep.g_scores.push_back(1.0 + static_cast<double>(j));
  const auto r = empirical_bf(sep, 10);
  return {violations == 0 && r.bf == 25000.0,
          fmt("%zu/%zu runs within 1/p_used; separated case L=250000, m=10 gives BF %.1f", runs - violations, runs,
              r.bf)};
}

// --- 6 -------------------------------------------------------------------------------

Outcome rank_invariance() {
  Rng rng(6);
  std::size_t same = 0;
  for (int i = 0; i < 100; ++i) {
    ScoreSample s, c;
    const auto K = std::uniform_int_distribution<std::size_t>(100, 3000)(rng);
    const auto L = std::uniform_int_distribution<std::size_t>(100, 3000)(rng);
    const double shift = uniform(rng, 0, 3);
    for (std::size_t j = 0; j < K; ++j) s.f_scores.push_back(normal(rng, 0, 1));
    for (std::size_t j = 0; j < L; ++j) s.g_scores.push_back(normal(rng, shift, 1.5));
    for (double v : s.f_scores) c.f_scores.push_back(v * v * v);
    for (double v : s.g_scores) c.g_scores.push_back(v * v * v);
    const auto m = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const auto a = empirical_bf(s, m), b = empirical_bf(c, m);
    same += a.bf == b.bf && a.p_used == b.p_used && a.accepted_f == b.accepted_f;
  }
  return {same == 100, fmt("%zu/100 samples bit-identical under x -> x^3", same)};
}

// --- 7 -------------------------------------------------------------------------------

Outcome dual_beta_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const DualBetaParams settings[] = {{3, 1, 1.2, 4},  {2, 0, 1, 2},   {5, 2, 1, 6},  {1.5, 0.5, 0.8, 3},
                                     {4, 0, 2, 0},    {8, 3, 2, 8},   {2, 4, 1, 10}, {10, 0, 3, 5},
                                     {1, 1, 1, 5},    {6, 5, 1.5, 2}};
  std::size_t ok = 0;
  std::string errs;
  for (std::size_t i = 0; i < std::size(settings); ++i) {
    const auto& p = settings[i];
    Rng rng(stream_seed(7, i));
    ScoreSample s;
    for (int j = 0; j < 50000; ++j) s.f_scores.push_back(ncbeta::sample(rng, p.beta_f, p.lambda_f));
    for (int j = 0; j < 50000; ++j) s.g_scores.push_back(ncbeta::sample(rng, p.beta_g, p.lambda_g));
    const auto fit = refine_l2(fit_mle(s), empirical_roc(s));
    const double err = limit_slope_log10(fit) - limit_slope_log10(p);
    ok += std::abs(err) <= 0.3;
    errs += fmt(" %+.2f", err);
  }
  const double secs = seconds_since(t0);
  return {ok >= 8 && secs < 180.0, fmt("%zu/10 settings within 0.3 log10 (errors:%s), %.1f s", ok, errs.c_str(), secs)};
}

// --- 8 -------------------------------------------------------------------------------

Outcome synthetic_designs() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pop = synth_population(2000, 30, 60, 8);
  ExperimentConfig cfg;
  cfg.k_list = {4, 7, 10, 13, 16};
  cfg.cases = 50;
  cfg.designs = {Design::TS, Design::RS};
  cfg.methods = {Method::Empirical};
  cfg.run.n_total = 50000;
  cfg.seed = 8;
  const auto rows = run_experiment(pop, cfg);
  std::vector<double> ks, medians;
  std::string med_text, rs_text;
  bool rs_ok = true;
  for (auto k : cfg.k_list) {
    std::vector<double> ts;
    std::size_t below = 0, total = 0;
    for (const auto& r : rows) {
      if (r.k != k) continue;
      if (r.design == Design::TS) ts.push_back(r.bf_log10);
      if (r.design == Design::RS) {
        ++total;
        below += r.bf_log10 < 0.0;
      }
    }
    ks.push_back(static_cast<double>(k));
    medians.push_back(median(ts));
    med_text += fmt(" k=%zu:%.3f", k, medians.back());
    if (k >= 7) {
      const double frac = static_cast<double>(below) / static_cast<double>(total);
      rs_ok = rs_ok && frac > 0.8;
      rs_text += fmt(" k=%zu:%.0f%%", k, 100.0 * frac);
    }
  }
  const double rho = spearman(ks, medians);
  const double secs = seconds_since(t0);
  return {rho >= 0.9 && rs_ok && secs < 1800.0,
          fmt("TS medians%s, Spearman %.3f; RS BF<1%s; %.0f s", med_text.c_str(), rho, rs_text.c_str(), secs)};
}

// --- CLI helpers ---------------------------------------------------------------------

int cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + ROCABC_CLI + "' " + args + " > cli.log 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "rocabc_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

// --- 9 -------------------------------------------------------------------------------

Outcome timing_property() {
  const auto dir = fresh_dir("bench");
  if (cli(dir, "synth-population --fingers 500 --minutiae-range 30..60 --seed 9 --out pop.jsonl") != 0)
    return {false, "synth-population failed"};
  if (cli(dir, "bench --pop pop.jsonl --k-list 5,20 --methods empirical,logistic --reps 3 --n 20000 --seed 9 "
               "--out bench.csv") != 0)
    return {false, "bench failed: " + slurp(dir / "cli.log")};
  std::map<std::pair<std::string, std::string>, double> t;
  const auto rows = read_csv(dir / "bench.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) t[{rows[i][1], rows[i][0]}] = std::stod(rows[i][3]);
  const double emp = t[{"empirical", "20"}] / t[{"empirical", "5"}];
  const double logi = t[{"logistic", "20"}] / t[{"logistic", "5"}];
  const double emp_spread = std::max(emp, 1.0 / emp);
  return {emp_spread < 2.0 && logi > 5.0,
          fmt("empirical k=20/k=5 %.2fx (%.2e s vs %.2e s), logistic %.1fx (%.3f s vs %.3f s)", emp,
              t[{"empirical", "20"}], t[{"empirical", "5"}], logi, t[{"logistic", "20"}], t[{"logistic", "5"}])};
}

// --- 10 ------------------------------------------------------------------------------

Outcome determinism() {
  struct Step {
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Step> steps = {
      {"synth-population --fingers 80 --minutiae-range 20..40 --seed 10 --out pop.jsonl", {"pop.jsonl"}},
      {"sample-trace --pop pop.jsonl --k 7 --seed 10 --trace-out t.json --control-out c.json", {"t.json", "c.json"}},
      {"bf --trace t.json --control c.json --pop pop.jsonl --n 20000 --seed 10 --out e.json",
       {"e.json", "e.json.scores.csv"}},
      {"bf --trace t.json --control c.json --pop pop.jsonl --n 20000 --seed 10 --method dualbeta --out d.json",
       {"d.json", "d.json.scores.csv"}},
      {"bf --trace t.json --control c.json --pop pop.jsonl --n 20000 --seed 10 --method logistic --out l.json",
       {"l.json", "l.json.scores.csv"}},
      {"oracle --setting composite --d 1 --tau 2 --seeds 3 --n 20000 --m 20 --p-floor 0.01 --seed 10 --out o.json",
       {"o.json"}},
      {"experiment --pop pop.jsonl --design TS,CNM,RS --k-list 5,8 --cases 2 --n 5000 --methods "
       "empirical,dualbeta --seed 10 --out x.csv --svg-prefix x",
       {"x.csv", "x_TS_empirical.svg", "x_CNM_dualbeta.svg", "x_RS_empirical.svg"}},
      {"optimize-weights --pop pop.jsonl --cases 3 --scores 400 --restarts 2 --seed 10 --out w.json", {"w.json"}},
      {"plot --scores e.json.scores.csv --fit --out p", {"p_density.svg", "p_density.csv", "p_roc.svg", "p_roc.csv"}},
      {"plot --results x.csv --out q", {"q_TS_empirical.svg"}},
      {"bench --pop pop.jsonl --k-list 5 --n 5000 --reps 1 --seed 10 --out b.csv", {"b.csv"}},
  };
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  std::size_t compared = 0;
  std::string mismatches;
  for (const auto& s : steps) {
    const int ra = cli(a, s.args, "ROC_ABC_THREADS=1"), rb = cli(b, s.args, "ROC_ABC_THREADS=4");
    if (ra != 0 || rb != 0) return {false, "command failed: " + s.args};
    for (const auto& out : s.outputs) {
      std::string x = slurp(a / out), y = slurp(b / out);
      if (out.ends_with(".json")) {
        auto jx = nlohmann::ordered_json::parse(x), jy = nlohmann::ordered_json::parse(y);
        jx.erase("timing");
        jy.erase("timing");
        x = jx.dump();
        y = jy.dump();
      } else if (out == "b.csv") {
        // Keep the non-timing columns k, method, n.
        auto keep = [](const fs::path& p) {
          std::string r;
          for (const auto& row : read_csv(p)) r += row.at(0) + "," + row.at(1) + "," + row.at(2) + "\n";
          return r;
        };
        x = keep(a / out);
        y = keep(b / out);
      }
      ++compared;
      if (x.empty() || x != y) mismatches += " " + out;
    }
  }
  return {mismatches.empty(), mismatches.empty() ? fmt("%zu output files identical with 1 and 4 workers", compared)
                                                 : "differing outputs:" + mismatches};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"closed-form limit slope", closed_form_limit},
      {"summary invariance", summary_invariance},
      {"oracle convergence", oracle_convergence},
      {"exponential-scores identity", exponential_identity},
      {"bound property", bound_property},
      {"rank invariance", rank_invariance},
      {"dual-beta recovery", dual_beta_recovery},
      {"TS/RS synthetic designs", synthetic_designs},
      {"timing property", timing_property},
      {"determinism", determinism},
  };
  int failed = 0, errors = 0;
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
      ++errors;
    }
    failed += !o.pass;
    std::printf("%s criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", id - failed, id);
  if (errors > 0) return 2;
  return strict && failed > 0 ? 1 : 0;
}
