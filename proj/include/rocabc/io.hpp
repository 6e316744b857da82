// JSON and CSV formats used by the command-line tool.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rocabc/abc.hpp"
#include "rocabc/common.hpp"
#include "rocabc/features.hpp"
#include "rocabc/generative.hpp"
#include "rocabc/kernel.hpp"
#include "rocabc/oracle.hpp"

namespace rocabc::io {

using json = nlohmann::ordered_json;

inline json to_json(const Minutia& m) {
  return {{"x", m.x}, {"y", m.y}, {"dir", m.direction}, {"type", std::string(to_string(m.type))}};
}

inline Minutia minutia_from_json(const json& j) {
  try {
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("dir").get<double>(),
            minutia_type_from_string(j.at("type").get<std::string>())};
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("malformed minutia: ") + e.what());
  }
}

inline json minutiae_json(const std::vector<Minutia>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(to_json(m));
  return a;
}

inline std::vector<Minutia> minutiae_from_json(const json& j) {
  if (!j.is_object() || !j.contains("minutiae") || !j["minutiae"].is_array())
    throw PreconditionError("expected an object with a 'minutiae' array");
  std::vector<Minutia> out;
  for (const auto& m : j["minutiae"]) out.push_back(minutia_from_json(m));
  return out;
}

inline json to_json(const Configuration& c) { return {{"minutiae", minutiae_json(c.minutiae())}}; }

inline Configuration configuration_from_json(const json& j) { return Configuration(minutiae_from_json(j)); }

inline json to_json(const Finger& f) { return {{"id", f.id}, {"minutiae", minutiae_json(f.minutiae)}}; }

inline Finger finger_from_json(const json& j) {
  Finger f;
  f.id = j.contains("id") ? j["id"].get<std::string>() : std::string();
  f.minutiae = Configuration(minutiae_from_json(j)).minutiae();
  require(f.minutiae.size() >= 3, "finger " + f.id + " has fewer than three minutiae");
  return f;
}

inline json to_json(const KernelWeights& w) { return {{"c", w.c}}; }

inline KernelWeights weights_from_json(const json& j) {
  if (!j.contains("c") || !j["c"].is_array() || j["c"].size() != 5)
    throw PreconditionError("weights file needs {\"c\": [c1, c2, c3, c4, c5]}");
  KernelWeights w;
  for (std::size_t i = 0; i < 5; ++i) w.c[i] = j["c"][i].get<double>();
  for (double c : w.c) require(std::isfinite(c), "kernel weights must be finite");
  return w;
}

// --- files ---------------------------------------------------------------------

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
  if (!out) throw PreconditionError("write failed: " + path);
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline Configuration read_configuration(const std::string& path) { return configuration_from_json(read_json(path)); }

inline KernelWeights read_weights(const std::string& path) { return weights_from_json(read_json(path)); }

/// One finger per line.
inline Population read_population(const std::string& path) {
  std::istringstream in(read_text(path));
  Population pop;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      pop.fingers.push_back(finger_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw PreconditionError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  require(!pop.fingers.empty(), path + ": empty population");
  return pop;
}

inline void write_population(const std::string& path, const Population& pop) {
  std::string text;
  for (const auto& f : pop.fingers) text += to_json(f).dump() + "\n";
  write_text(path, text);
}

// --- CSV -------------------------------------------------------------------------

/// Shortest round-trip text for a double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header-first CSV with a provenance comment line.
class CsvWriter {
 public:
  CsvWriter(std::string invocation, const std::vector<std::string>& header) {
    text_ = "# invocation: " + invocation + "\n";
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }
  void save(const std::string& path) const { write_text(path, text_); }

 private:
  std::string text_;
};

inline std::string scores_csv(const Draws& d, const std::string& invocation) {
  CsvWriter w(invocation, {"model", "score"});
  for (std::size_t i = 0; i < d.models.size(); ++i) w.row({std::to_string(d.models[i]), num(d.scores[i])});
  return w.text();
}

/// Reads a model,score CSV; comment lines and the header are skipped.
inline Draws read_scores_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  Draws d;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line.rfind("model", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw PreconditionError(path + ":" + std::to_string(lineno) + ": expected model,score");
    try {
      const int model = std::stoi(line.substr(0, comma));
      require(model == 1 || model == 2, "model must be 1 or 2");
      d.models.push_back(model);
      d.scores.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw PreconditionError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return d;
}

// --- results -----------------------------------------------------------------------

/// Finite numbers as numbers, anything else as null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const RunResult& r, const std::string& scores_file) {
  json j;
  j["method"] = std::string(to_string(r.method));
  j["bf_log10"] = number_or_null(r.bf_log10);
  if (std::isfinite(r.upper_bound_log10)) j["upper_bound_log10"] = r.upper_bound_log10;
  j["p_used"] = r.p_used;
  j["t_used"] = number_or_null(r.t_used);
  j["K"] = r.sample.K();
  j["L"] = r.sample.L();
  j["scores_file"] = scores_file;
  json trace = json::array();
  for (const auto& t : r.convergence)
    trace.push_back({{"n", t.n}, {"L", t.L}, {"p_used", t.p_used}, {"bf_log10", number_or_null(t.bf_log10)}});
  j["trace"] = trace;
  if (r.method == Method::DualBeta)
    j["dual_beta"] = {{"beta_f", r.dual_beta.beta_f},
                      {"lambda_f", r.dual_beta.lambda_f},
                      {"beta_g", r.dual_beta.beta_g},
                      {"lambda_g", r.dual_beta.lambda_g},
                      {"limit_slope_log10", limit_slope_log10(r.dual_beta)}};
  if (r.method == Method::Logistic) {
    json coef = json::array();
    for (Eigen::Index i = 0; i < r.logistic.fit.coefficients.size(); ++i) coef.push_back(r.logistic.fit.coefficients[i]);
    j["logistic"] = {{"p_hat", r.logistic.p_hat},
                     {"bandwidth", r.logistic.fit.bandwidth},
                     {"effective_1", r.logistic.effective_1},
                     {"effective_2", r.logistic.effective_2},
                     {"separated", r.logistic.fit.separated},
                     {"converged", r.logistic.fit.converged},
                     {"iterations", r.logistic.fit.iterations},
                     {"intercept", r.logistic.fit.coefficients[0]},
                     {"coefficients", coef}};
  }
  j["diagnostic"] = r.diagnostic;
  j["timing"] = {{"generation_s", r.timing.generation_s}, {"assignment_s", r.timing.assignment_s}};
  return j;
}

inline json to_json(const OracleReport& rep, double tol_empirical = 0.15, double tol_other = 0.3) {
  json j;
  j["setting"] = {{"kind", std::string(to_string(rep.setting.kind))}, {"d", rep.setting.d},
                  {"mu1", rep.setting.mu1},   {"mu2", rep.setting.mu2},
                  {"tau", rep.setting.tau},   {"sigma", rep.setting.sigma}};
  j["true_bf_log10"] = rep.true_log10;
  json est = json::array();
  for (const auto& e : rep.estimates) {
    json x = {{"seed", e.seed},
              {"method", std::string(to_string(e.method))},
              {"bf_log10", number_or_null(e.bf_log10)},
              {"error_log10", number_or_null(e.error_log10)}};
    if (!e.error.empty()) x["error"] = e.error;
    est.push_back(x);
  }
  j["estimates"] = est;
  json summary = json::object();
  for (auto m : {Method::Empirical, Method::DualBeta, Method::Logistic}) {
    std::size_t n = 0;
    for (const auto& e : rep.estimates) n += e.method == m;
    if (n == 0) continue;
    const double tol = m == Method::Empirical ? tol_empirical : tol_other;
    summary[std::string(to_string(m))] = {{"runs", n}, {"tolerance_log10", tol}, {"within_tolerance", rep.passes(m, tol)}};
  }
  j["summary"] = summary;
  return j;
}

}  // namespace rocabc::io
