// rocabc: command-line driver.
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rocabc/abc.hpp"
#include "rocabc/experiment.hpp"
#include "rocabc/io.hpp"
#include "rocabc/oracle.hpp"
#include "rocabc/svg.hpp"

namespace fs = std::filesystem;
using namespace rocabc;
using io::json;

namespace {

std::string invocation_of(int argc, char** argv) {
  std::string s = fs::path(argv[0]).filename().string();
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    const bool quote = a.empty() || a.find_first_of(" \t\"'") != std::string::npos;
    s += ' ';
    s += quote ? "'" + a + "'" : a;
  }
  return s;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoul(s);
      return {v, v};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::logic_error&) {
    throw PreconditionError("expected a range a..b, got '" + s + "'");
  }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(method_from_string(n));
  return out;
}

KernelWeights weights_or_default(const std::string& path) {
  return path.empty() ? KernelWeights{} : io::read_weights(path);
}

CovariateMode covariate_mode(const std::string& s) {
  if (s == "summary") return CovariateMode::Summary;
  if (s == "components") return CovariateMode::Components;
  throw PreconditionError("covariates must be 'summary' or 'components'");
}

/// Options shared by the commands that run the ABC loop.
struct RunOptions {
  std::size_t n = 50000;
  std::size_t m = 10;
  double p_floor = 1.0 / 25000.0;
  double pi1 = 0.5;
  double retained = 0.5;
  double clamp_eps = 1e-12;
  std::string covariates = "summary";
  std::string weights;
  bool wrapped_angles = false;
  bool type_mismatches = false;

  void add(CLI::App* app, bool fingerprint) {
    app->add_option("--n", n, "total number of pseudo-draws")->capture_default_str();
    app->add_option("--m", m, "model-2 scores accepted by the empirical method")->capture_default_str();
    app->add_option("--p-floor", p_floor, "false-positive rate used by the dual-beta method")->capture_default_str();
    app->add_option("--prior-1", pi1, "prior probability of model 1")->capture_default_str();
    app->add_option("--retained", retained, "logistic: fraction of draws inside the kernel")->capture_default_str();
    app->add_option("--clamp-eps", clamp_eps, "logistic: probability clamp")->capture_default_str();
    if (fingerprint) {
      app->add_option("--covariates", covariates, "logistic covariates: summary or components")
          ->capture_default_str();
      app->add_option("--weights", weights, "kernel weights JSON (default weights otherwise)");
      app->add_flag("--wrapped-angles", wrapped_angles, "use the wrapped angle difference in D4");
      app->add_flag("--type-mismatches", type_mismatches, "count type mismatches in D5");
    }
  }

  RunConfig run_config(std::uint64_t seed) const {
    RunConfig c;
    c.n_total = n;
    c.m_denominator = m;
    c.p_floor = p_floor;
    c.master_seed = seed;
    c.logistic.retained_fraction = retained;
    c.logistic.clamp_eps = clamp_eps;
    c.validate();
    return c;
  }

  ModelPrior prior() const {
    ModelPrior p{pi1, 1.0 - pi1};
    p.validate();
    return p;
  }

  MatchOptions match() const {
    MatchOptions o;
    o.kernel.wrapped_angle_difference = wrapped_angles;
    o.kernel.count_type_mismatches = type_mismatches;
    return o;
  }
};

// --- synth-population ------------------------------------------------------------

struct SynthPopulation {
  std::size_t fingers = 2000;
  std::string range = "30..60";
  std::uint64_t seed = 0;
  double width = 500, height = 500, d_min = 8;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("synth-population", "build a synthetic population of fingers");
    c->add_option("--fingers", fingers, "number of fingers")->capture_default_str();
    c->add_option("--minutiae-range", range, "minutiae per finger, a..b")->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--width", width)->capture_default_str();
    c->add_option("--height", height)->capture_default_str();
    c->add_option("--d-min", d_min, "minimum minutia separation (px)")->capture_default_str();
    c->add_option("--out", out, "population file (JSON lines)")->required();
    c->callback([this] { run(); });
  }

  void run() const {
    const auto [a, b] = parse_range(range);
    FingerOptions opt;
    opt.width = width;
    opt.height = height;
    opt.d_min = d_min;
    io::write_population(out, synth_population(fingers, a, b, seed, opt));
  }
};

// --- sample-trace ------------------------------------------------------------------

struct SampleTrace {
  std::string pop;
  std::string finger;
  std::size_t k = 7;
  std::uint64_t seed = 0;
  std::string trace_out, control_out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("sample-trace", "sample a trace and its paired control configuration");
    c->add_option("--pop", pop, "population file")->required();
    c->add_option("--finger", finger, "source finger id (random otherwise)");
    c->add_option("--k", k, "minutiae in the trace")->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--trace-out", trace_out)->required();
    c->add_option("--control-out", control_out)->required();
    c->callback([this] { run(); });
  }

  void run() const {
    const auto p = io::read_population(pop);
    Rng rng = stream_rng(seed, 0);
    std::size_t src = std::uniform_int_distribution<std::size_t>(0, p.fingers.size() - 1)(rng);
    if (!finger.empty()) {
      const auto it = std::find_if(p.fingers.begin(), p.fingers.end(), [&](const Finger& f) { return f.id == finger; });
      require(it != p.fingers.end(), "no finger with id " + finger);
      src = static_cast<std::size_t>(it - p.fingers.begin());
    }
    const auto tp = sample_trace(p.fingers[src], k, rng);
    io::write_json(trace_out, io::to_json(tp.trace));
    io::write_json(control_out, io::to_json(tp.control));
    std::cout << "source " << p.fingers[src].id << "\n";
  }
};

// --- optimize-weights --------------------------------------------------------------

struct OptimizeWeights {
  std::string train;
  std::string pop;
  std::string dump_train;
  std::size_t n_cases = 45, scores = 5000, k = 7, restarts = 8;
  std::uint64_t seed = 0;
  std::string out;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("optimize-weights", "fit kernel weights by maximising the mean AUC");
    auto* t = c->add_option("--train", train, "directory of training cases (CSV: label,d1..d5)");
    auto* p = c->add_option("--pop", pop, "population used to generate training cases");
    t->excludes(p);
    c->add_option("--cases", n_cases, "generated training cases")->capture_default_str();
    c->add_option("--scores", scores, "scores per generated case")->capture_default_str();
    c->add_option("--k", k, "minutiae per generated trace")->capture_default_str();
    c->add_option("--restarts", restarts, "random simplex starts")->capture_default_str();
    c->add_option("--dump-train", dump_train, "write the generated cases to this directory");
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--out", out, "weights JSON")->required();
    c->callback([this] { run(); });
  }

  static std::vector<TrainingCase> read_dir(const std::string& dir) {
    require(fs::is_directory(dir), dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), "no .csv training cases in " + dir);
    std::vector<TrainingCase> cases;
    for (const auto& f : files) {
      std::istringstream in(io::read_text(f.string()));
      TrainingCase tc;
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("label", 0) == 0) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        require(cells.size() == 6, f.string() + ": expected label,d1,d2,d3,d4,d5");
        ComponentScores s{};
        try {
          for (std::size_t i = 0; i < 5; ++i) s[i] = std::stod(cells[i + 1]);
        } catch (const std::logic_error&) {
          throw PreconditionError(f.string() + ": malformed score");
        }
        if (cells[0] == "same") tc.same.push_back(s);
        else if (cells[0] == "diff") tc.diff.push_back(s);
        else throw PreconditionError(f.string() + ": label must be same or diff");
      }
      cases.push_back(std::move(tc));
    }
    return cases;
  }

  void write_dir(const std::vector<TrainingCase>& cases) const {
    fs::create_directories(dump_train);
    for (std::size_t c = 0; c < cases.size(); ++c) {
      io::CsvWriter w(invocation, {"label", "d1", "d2", "d3", "d4", "d5"});
      for (const auto* side : {&cases[c].same, &cases[c].diff})
        for (const auto& s : *side)
          w.row({side == &cases[c].same ? "same" : "diff", io::num(s[0]), io::num(s[1]), io::num(s[2]),
                 io::num(s[3]), io::num(s[4])});
      char name[32];
      std::snprintf(name, sizeof name, "case_%03zu.csv", c);
      w.save((fs::path(dump_train) / name).string());
    }
  }

  void run() const {
    require(!train.empty() || !pop.empty(), "optimize-weights needs --train or --pop");
    std::vector<TrainingCase> cases;
    if (!train.empty()) {
      cases = read_dir(train);
    } else {
      TrainingConfig tc;
      tc.k = k;
      tc.cases = n_cases;
      tc.scores_per_case = scores;
      tc.seed = seed;
      cases = make_training_cases(io::read_population(pop), tc);
      if (!dump_train.empty()) write_dir(cases);
    }
    WeightOptimizerOptions opt;
    opt.restarts = restarts;
    opt.seed = seed;
    const auto fit = optimize_weights(cases, opt);
    json j = io::to_json(fit.weights);
    j["mean_auc"] = fit.mean_auc;
    j["default_mean_auc"] = fit.default_mean_auc;
    j["cases"] = cases.size();
    io::write_json(out, j);
    std::printf("mean AUC %.6f (default weights %.6f)\n", fit.mean_auc, fit.default_mean_auc);
  }
};

// --- bf ------------------------------------------------------------------------------

struct Bf {
  std::string trace, control, pop, method = "empirical", out, scores_out;
  std::uint64_t seed = 0;
  RunOptions ro;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("bf", "Bayes factor for a trace against a control and a population");
    c->add_option("--trace", trace)->required();
    c->add_option("--control", control)->required();
    c->add_option("--pop", pop)->required();
    c->add_option("--method", method, "empirical, dualbeta or logistic")->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--out", out, "result JSON")->required();
    c->add_option("--scores-out", scores_out, "scores CSV (default: <out>.scores.csv)");
    ro.add(c, true);
    c->callback([this] { run(); });
  }

  void run() const {
    const auto t = io::read_configuration(trace);
    const auto ctl = io::read_configuration(control);
    const auto p = io::read_population(pop);
    auto cfg = ro.run_config(seed);
    cfg.method = method_from_string(method);
    const auto r = rocabc::run(t, ctl, p, weights_or_default(ro.weights), ro.prior(), cfg, ro.match(), {},
                               covariate_mode(ro.covariates));
    const std::string scores_path = scores_out.empty() ? out + ".scores.csv" : scores_out;
    io::write_text(scores_path, io::scores_csv(r.draws, invocation));
    json j;
    j["invocation"] = invocation;
    j.update(io::to_json(r, scores_path));
    io::write_json(out, j);
    std::printf("log10 BF = %s\n", io::num(r.bf_log10).c_str());
  }
};

// --- oracle --------------------------------------------------------------------------

struct Oracle {
  std::string setting = "simple", out;
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  OracleSetting s;
  std::vector<std::string> methods{"empirical", "dualbeta", "logistic"};
  RunOptions ro;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("oracle", "compare BF estimates with closed-form Gaussian Bayes factors");
    c->add_option("--setting", setting, "simple or composite")->capture_default_str();
    c->add_option("--seeds", seeds)->capture_default_str();
    c->add_option("--seed", seed, "master seed")->capture_default_str();
    c->add_option("--d", s.d, "observed value")->capture_default_str();
    c->add_option("--mu1", s.mu1)->capture_default_str();
    c->add_option("--mu2", s.mu2, "simple setting, model-2 mean")->capture_default_str();
    c->add_option("--tau", s.tau, "composite setting, model-2 location sd")->capture_default_str();
    c->add_option("--sigma", s.sigma)->capture_default_str();
    c->add_option("--methods", methods)->delimiter(',')->capture_default_str();
    c->add_option("--out", out, "report JSON")->required();
    ro.n = 200000;
    ro.m = 100;
    ro.p_floor = 1e-3;
    ro.add(c, false);
    c->callback([this] { run(); });
  }

  void run() {
    s.kind = oracle_kind_from_string(setting);
    const auto ms = parse_methods(methods);
    const auto rep = run_oracle(s, ro.run_config(seed), seeds, ms, ro.prior());
    json j;
    j["invocation"] = invocation;
    j.update(io::to_json(rep));
    io::write_json(out, j);
    std::printf("true log10 BF %.6f\n", rep.true_log10);
    for (auto m : ms) {
      const double tol = m == Method::Empirical ? 0.15 : 0.3;
      std::printf("%-10s within %.2f: %zu/%zu\n", std::string(to_string(m)).c_str(), tol, rep.passes(m, tol), seeds);
    }
  }
};

// --- experiment ----------------------------------------------------------------------

std::string box_plot(const std::vector<CaseResult>& rows, Design design, Method method) {
  std::map<std::size_t, std::vector<double>> by_k;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows)
    if (r.design == design && r.method == method && std::isfinite(r.bf_log10)) {
      by_k[r.k].push_back(r.bf_log10);
      lo = std::min(lo, r.bf_log10);
      hi = std::max(hi, r.bf_log10);
    }
  if (by_k.empty()) {
    lo = -1;
    hi = 1;
  }
  const double pad = 0.05 * (hi - lo + 1e-9);
  svg::Plot plot(std::string(to_string(design)) + " " + std::string(to_string(method)), "number of minutiae k",
                 "log10 BF", -0.5, static_cast<double>(std::max<std::size_t>(by_k.size(), 1)) - 0.5, lo - pad, hi + pad);
  std::size_t slot = 0;
  for (auto& [k, v] : by_k) {
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
      const double pos = p * static_cast<double>(v.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(i);
      return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v.back();
    };
    const double x = static_cast<double>(slot);
    plot.box(x, 0.3, q(0.25), q(0.5), q(0.75), v.front(), v.back(), "#1f77b4");
    plot.label(x, lo - pad * 0.5, "k=" + std::to_string(k));
    ++slot;
  }
  plot.line(-0.5, 0.0, static_cast<double>(std::max<std::size_t>(by_k.size(), 1)) - 0.5, 0.0, "grey");
  return plot.str();
}

struct Experiment {
  std::string pop, out, svg_prefix;
  std::vector<std::string> designs{"TS"}, methods{"empirical"};
  std::vector<std::size_t> k_list{4, 7, 10, 13, 16};
  std::size_t cases = 50;
  std::uint64_t seed = 0;
  RunOptions ro;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("experiment", "TS / CNM / RS case studies on a synthetic population");
    c->add_option("--pop", pop)->required();
    c->add_option("--design", designs, "TS, CNM, RS (comma separated)")->delimiter(',')->capture_default_str();
    c->add_option("--k-list", k_list)->delimiter(',')->capture_default_str();
    c->add_option("--cases", cases, "cases per k")->capture_default_str();
    c->add_option("--methods", methods)->delimiter(',')->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--out", out, "results CSV")->required();
    c->add_option("--svg-prefix", svg_prefix, "write one box plot per design and method");
    ro.add(c, true);
    c->callback([this] { run(); });
  }

  void run() const {
    ExperimentConfig cfg;
    cfg.k_list = k_list;
    cfg.cases = cases;
    cfg.designs.clear();
    for (const auto& d : designs) cfg.designs.push_back(design_from_string(d));
    cfg.methods = parse_methods(methods);
    cfg.run = ro.run_config(seed);
    cfg.prior = ro.prior();
    cfg.weights = weights_or_default(ro.weights);
    cfg.match = ro.match();
    cfg.covariates = covariate_mode(ro.covariates);
    cfg.seed = seed;
    const auto rows = run_experiment(io::read_population(pop), cfg);
    io::CsvWriter w(invocation,
                    {"design", "k", "case", "source", "control", "method", "bf_log10", "upper_bound_log10", "error"});
    for (const auto& r : rows) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      w.row({std::string(to_string(r.design)), std::to_string(r.k), std::to_string(r.case_id), r.source, r.control,
             std::string(to_string(r.method)), io::num(r.bf_log10), io::num(r.upper_bound_log10), err});
    }
    w.save(out);
    for (auto d : cfg.designs)
      for (auto m : cfg.methods) {
        for (auto k : cfg.k_list) {
          std::vector<double> v;
          std::size_t below = 0;
          for (const auto& r : rows)
            if (r.design == d && r.method == m && r.k == k) {
              v.push_back(r.bf_log10);
              below += r.bf_log10 < 0.0;
            }
          std::printf("%-3s %-9s k=%-3zu median log10 BF %8.3f  BF<1 in %zu/%zu\n", std::string(to_string(d)).c_str(),
                      std::string(to_string(m)).c_str(), k, median(v), below, v.size());
        }
        if (!svg_prefix.empty())
          io::write_text(svg_prefix + "_" + std::string(to_string(d)) + "_" + std::string(to_string(m)) + ".svg",
                         box_plot(rows, d, m));
      }
  }
};

// --- bench ---------------------------------------------------------------------------

struct Bench {
  std::string pop, out;
  std::vector<std::size_t> k_list{5, 10, 15, 20};
  std::vector<std::string> methods{"empirical", "logistic"};
  std::size_t reps = 3;
  std::uint64_t seed = 0;
  RunOptions ro;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("bench", "time BF assignment on pre-generated pseudo-data");
    c->add_option("--pop", pop)->required();
    c->add_option("--k-list", k_list)->delimiter(',')->capture_default_str();
    c->add_option("--methods", methods)->delimiter(',')->capture_default_str();
    c->add_option("--reps", reps)->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--out", out, "timing CSV")->required();
    ro.n = 20000;
    ro.add(c, true);
    c->callback([this] { run(); });
  }

  void run() const {
    BenchConfig cfg;
    cfg.k_list = k_list;
    cfg.methods = parse_methods(methods);
    cfg.reps = reps;
    cfg.run = ro.run_config(seed);
    cfg.prior = ro.prior();
    cfg.weights = weights_or_default(ro.weights);
    cfg.match = ro.match();
    cfg.seed = seed;
    const auto rows = bench(io::read_population(pop), cfg);
    std::vector<std::string> header{"k", "method", "n", "median_seconds"};
    for (std::size_t r = 0; r < reps; ++r) header.push_back("rep" + std::to_string(r + 1) + "_seconds");
    header.push_back("error");
    io::CsvWriter w(invocation, header);
    for (const auto& r : rows) {
      std::vector<std::string> cells{std::to_string(r.k), std::string(to_string(r.method)), std::to_string(r.n),
                                     io::num(r.median_seconds)};
      for (std::size_t i = 0; i < reps; ++i)
        cells.push_back(i < r.rep_seconds.size() ? io::num(r.rep_seconds[i]) : "nan");
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      cells.push_back(err);
      w.row(cells);
      std::printf("k=%-3zu %-9s median %.6g s\n", r.k, std::string(to_string(r.method)).c_str(), r.median_seconds);
    }
    w.save(out);
  }
};

// --- plot ----------------------------------------------------------------------------

struct Plot {
  std::string scores, results, out;
  bool fit = false;
  std::string invocation;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("plot", "score densities and ROC curves, or experiment box plots");
    auto* s = c->add_option("--scores", scores, "scores CSV written by bf");
    auto* r = c->add_option("--results", results, "results CSV written by experiment");
    s->excludes(r);
    c->add_flag("--fit", fit, "overlay the fitted dual-beta ROC curve");
    c->add_option("--out", out, "output prefix")->required();
    c->callback([this] { run(); });
  }

  void run() const {
    require(!scores.empty() || !results.empty(), "plot needs --scores or --results");
    if (!results.empty()) return plot_results();
    const auto d = io::read_scores_csv(scores);
    const auto sample = d.sample();
    require(sample.K() >= 2 && sample.L() >= 2, "plot: need at least two scores per model");

    const auto f = svg::kde(sample.f_scores), g = svg::kde(sample.g_scores);
    io::CsvWriter dc(invocation, {"series", "score", "density"});
    for (std::size_t i = 0; i < f.x.size(); ++i) dc.row({"model1", io::num(f.x[i]), io::num(f.y[i])});
    for (std::size_t i = 0; i < g.x.size(); ++i) dc.row({"model2", io::num(g.x[i]), io::num(g.y[i])});
    dc.save(out + "_density.csv");
    const double x0 = std::min(f.x.front(), g.x.front()), x1 = std::max(f.x.back(), g.x.back());
    const double y1 = std::max(*std::max_element(f.y.begin(), f.y.end()), *std::max_element(g.y.begin(), g.y.end()));
    svg::Plot dp("Score densities", "score", "density", x0, x1, 0.0, 1.05 * y1);
    dp.polyline(f.x, f.y, "#d62728");
    dp.polyline(g.x, g.y, "#1f77b4");
    dp.legend({{"model 1", "#d62728"}, {"model 2", "#1f77b4"}});
    io::write_text(out + "_density.svg", dp.str());

    const auto emp = empirical_roc(sample);
    io::CsvWriter rc(invocation, {"series", "p", "tpr"});
    std::vector<double> ex, ey;
    for (const auto& pt : emp) {
      rc.row({"empirical", io::num(pt.p), io::num(pt.tpr)});
      ex.push_back(pt.p);
      ey.push_back(pt.tpr);
    }
    svg::Plot rp("ROC", "false positive rate p", "ROC(p)", 0.0, 1.0, 0.0, 1.0);
    rp.polyline({0.0, 1.0}, {0.0, 1.0}, "grey", 0.8);
    rp.polyline(ex, ey, "black");
    std::vector<std::pair<std::string, std::string>> legend{{"empirical", "black"}};
    if (fit) {
      const auto params = fit_dual_beta(sample);
      const DualBetaRoc model(params);
      std::vector<double> fx, fy;
      for (std::size_t i = 0; i <= 200; ++i) {
        const double p = static_cast<double>(i) / 200.0;
        fx.push_back(p);
        fy.push_back(model(p));
        rc.row({"fitted", io::num(p), io::num(fy.back())});
      }
      rp.polyline(fx, fy, "#1f77b4");
      legend.push_back({"dual beta", "#1f77b4"});
    }
    rp.legend(legend);
    rc.save(out + "_roc.csv");
    io::write_text(out + "_roc.svg", rp.str());
  }

  void plot_results() const {
    std::istringstream in(io::read_text(results));
    std::vector<CaseResult> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
      require(cells.size() >= 7, results + ": malformed row");
      CaseResult r;
      r.design = design_from_string(cells[0]);
      r.k = std::stoul(cells[1]);
      r.method = method_from_string(cells[5]);
      r.bf_log10 = cells[6] == "-inf" ? -std::numeric_limits<double>::infinity() : std::stod(cells[6]);
      rows.push_back(r);
    }
    std::vector<std::pair<Design, Method>> seen;
    for (const auto& r : rows)
      if (std::find(seen.begin(), seen.end(), std::make_pair(r.design, r.method)) == seen.end())
        seen.emplace_back(r.design, r.method);
    for (auto [d, m] : seen)
      io::write_text(out + "_" + std::string(to_string(d)) + "_" + std::string(to_string(m)) + ".svg",
                     box_plot(rows, d, m));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROC-based ABC Bayes factors for fingerprint evidence"};
  app.require_subcommand(1);
  const std::string inv = invocation_of(argc, argv);
  SynthPopulation synth;
  SampleTrace sample;
  OptimizeWeights optimize;
  Bf bf;
  Oracle oracle;
  Experiment experiment;
  Bench bench_cmd;
  Plot plot;
  optimize.invocation = bf.invocation = oracle.invocation = experiment.invocation = bench_cmd.invocation =
      plot.invocation = inv;
  synth.add(app);
  sample.add(app);
  optimize.add(app);
  bf.add(app);
  oracle.add(app);
  experiment.add(app);
  bench_cmd.add(app);
  plot.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
