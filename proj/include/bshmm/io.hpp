#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bshmm/conditional.hpp"
#include "bshmm/errors.hpp"
#include "bshmm/postproc.hpp"
#include "bshmm/sampler.hpp"
#include "bshmm/selection.hpp"
#include "bshmm/simgen.hpp"

namespace bshmm {

using json = nlohmann::json;

// 17 significant digits: doubles survive the write/parse round trip bit-exactly
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

inline bool is_na(const std::string& f) {
  return f.empty() || f == "NA" || f == "na" || f == "NaN" || f == "nan";
}

inline double parse_double(const std::string& f, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (end == f.c_str() || *end != '\0')
    throw io_error("malformed CSV at line " + std::to_string(line_no) + ": cannot parse '" + f + "'");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace detail

// ------------------------------------------------------------------ datasets

inline void apply_bounds(Dataset& d, std::optional<double> a, std::optional<double> b) {
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (std::size_t t = 0; t < d.size(); ++t) {
    if (d.missing[t]) continue;
    lo = any ? std::min(lo, d.obs[t]) : d.obs[t];
    hi = any ? std::max(hi, d.obs[t]) : d.obs[t];
    any = true;
  }
  const double pad = any ? 0.05 * std::max(hi - lo, 1e-6) : 0.5;
  d.a = a.value_or(any ? lo - pad : 0.0);
  d.b = b.value_or(any ? hi + pad : 1.0);
  if (any && (lo < d.a || hi > d.b))
    throw invalid_input("bounds [" + fmt17(d.a) + "," + fmt17(d.b) + "] do not cover the data range [" +
                        fmt17(lo) + "," + fmt17(hi) + "]");
}

// One observation per row.  Accepts a single value column (NA = missing) or
// value,missing-flag pairs; an optional header row is skipped.
inline Dataset read_dataset_csv(const std::string& path, std::optional<double> a = std::nullopt,
                                std::optional<double> b = std::nullopt) {
  auto in = detail::open_in(path);
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = detail::split_csv(t);
    if (line_no == 1 && !fields.empty() && !detail::is_na(fields[0])) {
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;  // header row
    }
    if (fields.size() > 2)
      throw io_error("malformed CSV at line " + std::to_string(line_no) + ": expected 1 or 2 columns");
    bool missing = detail::is_na(fields[0]);
    if (fields.size() == 2 && !detail::is_na(fields[1]) && detail::parse_double(fields[1], line_no) != 0.0)
      missing = true;
    d.obs.push_back(missing ? 0.0 : detail::parse_double(fields[0], line_no));
    d.missing.push_back(missing ? 1 : 0);
  }
  if (d.obs.empty()) throw io_error("empty dataset: " + path);
  apply_bounds(d, a, b);
  d.validate();
  return d;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
  auto out = detail::open_out(path);
  out << "value,missing\n";
  for (std::size_t t = 0; t < d.size(); ++t) {
    if (d.missing[t])
      out << "NA,1\n";
    else
      out << fmt17(d.obs[t]) << ",0\n";
  }
}

// timestamp,value rows for the activity pipeline; timestamps are carried
// through untouched
struct TimedSeries {
  std::vector<std::string> timestamps;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
};

inline TimedSeries read_timed_csv(const std::string& path) {
  auto in = detail::open_in(path);
  TimedSeries s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = detail::split_csv(t);
    if (fields.size() != 2)
      throw io_error("malformed CSV at line " + std::to_string(line_no) + ": expected timestamp,value");
    if (line_no == 1 && !detail::is_na(fields[1])) {
      char* end = nullptr;
      std::strtod(fields[1].c_str(), &end);
      if (end == fields[1].c_str()) continue;  // header row
    }
    s.timestamps.push_back(fields[0]);
    const bool missing = detail::is_na(fields[1]);
    s.values.push_back(missing ? 0.0 : detail::parse_double(fields[1], line_no));
    s.missing.push_back(missing ? 1 : 0);
  }
  if (s.values.empty()) throw io_error("empty dataset: " + path);
  return s;
}

inline Dataset to_dataset(const TimedSeries& s, std::optional<double> a = std::nullopt,
                          std::optional<double> b = std::nullopt) {
  Dataset d;
  d.obs = s.values;
  d.missing = s.missing;
  apply_bounds(d, a, b);
  d.validate();
  return d;
}

// -------------------------------------------------------------------- traces

// Flat CSV, one record per thinned draw; the K-dependent fields are length
// prefixed so the rows stay self-describing:
// sweep,K,r_1..r_K,N,coeff rows (simplex),delta,gamma,zeta,W,w_1..w_W,loglik,logprior
inline void write_trace_csv(const std::string& path, const Trace& trace) {
  auto out = detail::open_out(path);
  out << "# bshmm trace v1\n";
  out << "# meta," << trace.n_states << ',' << fmt17(trace.a) << ',' << fmt17(trace.b) << ',' << trace.seed
      << ',' << trace.schedule.burn_in << ',' << trace.schedule.iters << ',' << trace.schedule.thin << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const HmmParams& p = trace.draws[i];
    const Matrix simplex = p.coeff_simplex();
    const auto delta = p.delta();
    const Matrix gamma = p.gamma();
    out << trace.sweeps[i] << ',' << p.knots.k();
    for (double r : p.knots.interior) out << ',' << fmt17(r);
    out << ',' << p.n_states;
    for (std::size_t r = 0; r < simplex.rows(); ++r)
      for (std::size_t c = 0; c < simplex.cols(); ++c) out << ',' << fmt17(simplex(r, c));
    for (double dl : delta) out << ',' << fmt17(dl);
    for (double gm : gamma.data()) out << ',' << fmt17(gm);
    out << ',' << fmt17(p.zeta);
    if (p.zero_weights) {
      out << ',' << p.zero_weights->size();
      for (double w : *p.zero_weights) out << ',' << fmt17(w);
    } else {
      out << ",0";
    }
    out << ',' << fmt17(trace.log_lik[i]) << ',' << fmt17(trace.log_prior[i]) << '\n';
  }
}

namespace detail {

inline HmmParams params_from_parts(int n_states, double a, double b, const std::vector<double>& knots,
                                   const std::vector<double>& coeff_simplex, const std::vector<double>& delta,
                                   const std::vector<double>& gamma, double zeta,
                                   const std::vector<double>& w) {
  HmmParams p;
  p.n_states = n_states;
  p.knots = build_knot_config(a, b, knots);
  const auto nb = static_cast<std::size_t>(p.knots.n_basis());
  p.coeffs_uncon = Matrix(n_states, nb);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_states); ++i)
    for (std::size_t j = 0; j < nb; ++j)
      p.coeffs_uncon(i, j) = std::log(std::max(coeff_simplex[i * nb + j], 1e-300));
  p.delta_uncon = delta;
  p.gamma_uncon = Matrix(n_states, n_states);
  for (std::size_t i = 0; i < gamma.size(); ++i) p.gamma_uncon.data()[i] = gamma[i];
  p.zeta = zeta;
  if (!w.empty()) p.zero_weights = w;
  p.validate();
  return p;
}

}  // namespace detail

inline Trace read_trace_csv(const std::string& path) {
  auto in = detail::open_in(path);
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.rfind("# meta,", 0) == 0) {
      const auto fields = detail::split_csv(t.substr(7));
      if (fields.size() != 7) throw io_error("trace meta line malformed at line " + std::to_string(line_no));
      trace.n_states = static_cast<int>(detail::parse_double(fields[0], line_no));
      trace.a = detail::parse_double(fields[1], line_no);
      trace.b = detail::parse_double(fields[2], line_no);
      trace.seed = static_cast<std::uint64_t>(detail::parse_double(fields[3], line_no));
      trace.schedule.burn_in = static_cast<std::size_t>(detail::parse_double(fields[4], line_no));
      trace.schedule.iters = static_cast<std::size_t>(detail::parse_double(fields[5], line_no));
      trace.schedule.thin = static_cast<std::size_t>(detail::parse_double(fields[6], line_no));
      have_meta = true;
      continue;
    }
    if (t[0] == '#') continue;
    if (!have_meta) throw io_error("trace file missing meta header: " + path);
    const auto fields = detail::split_csv(t);
    std::size_t pos = 0;
    auto next = [&]() -> double {
      if (pos >= fields.size())
        throw io_error("trace record truncated at line " + std::to_string(line_no));
      return detail::parse_double(fields[pos++], line_no);
    };
    const auto sweep = static_cast<std::uint64_t>(next());
    const int k = static_cast<int>(next());
    std::vector<double> knots(static_cast<std::size_t>(k));
    for (double& r : knots) r = next();
    const int n_states = static_cast<int>(next());
    if (n_states != trace.n_states)
      throw io_error("trace record N mismatch at line " + std::to_string(line_no));
    std::vector<double> coeff(static_cast<std::size_t>(n_states) * (k + 4));
    for (double& c : coeff) c = next();
    std::vector<double> delta(static_cast<std::size_t>(n_states));
    for (double& d : delta) d = next();
    std::vector<double> gamma(static_cast<std::size_t>(n_states) * n_states);
    for (double& g : gamma) g = next();
    const double zeta = next();
    const auto n_w = static_cast<std::size_t>(next());
    std::vector<double> w(n_w);
    for (double& x : w) x = next();
    const double ll = next();
    const double lp = next();
    if (pos != fields.size())
      throw io_error("trace record has trailing fields at line " + std::to_string(line_no));
    trace.draws.push_back(detail::params_from_parts(n_states, trace.a, trace.b, knots, coeff, delta, gamma,
                                                    zeta, w));
    trace.sweeps.push_back(sweep);
    trace.log_lik.push_back(ll);
    trace.log_prior.push_back(lp);
    trace.k_series.push_back(k);
  }
  if (trace.size() == 0) throw io_error("trace file has no records: " + path);
  return trace;
}

inline void write_trace_ndjson(const std::string& path, const Trace& trace) {
  auto out = detail::open_out(path);
  json meta;
  meta["meta"] = {{"n_states", trace.n_states}, {"a", trace.a},
                  {"b", trace.b},               {"seed", trace.seed},
                  {"burn_in", trace.schedule.burn_in}, {"iters", trace.schedule.iters},
                  {"thin", trace.schedule.thin}};
  out << meta.dump() << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const HmmParams& p = trace.draws[i];
    const Matrix simplex = p.coeff_simplex();
    json rec;
    rec["sweep"] = trace.sweeps[i];
    rec["K"] = p.knots.k();
    rec["knots"] = p.knots.interior;
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < simplex.rows(); ++r)
      rows.emplace_back(simplex.row(r).begin(), simplex.row(r).end());
    rec["coeffs"] = rows;
    rec["delta"] = p.delta();
    const Matrix gm = p.gamma();
    std::vector<std::vector<double>> grows;
    for (std::size_t r = 0; r < gm.rows(); ++r) grows.emplace_back(gm.row(r).begin(), gm.row(r).end());
    rec["gamma"] = grows;
    rec["zeta"] = p.zeta;
    if (p.zero_weights) rec["w"] = *p.zero_weights;
    rec["log_lik"] = trace.log_lik[i];
    rec["log_prior"] = trace.log_prior[i];
    out << rec.dump() << '\n';
  }
}

inline Trace read_trace_ndjson(const std::string& path) {
  auto in = detail::open_in(path);
  Trace trace;
  std::string line;
  bool have_meta = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw io_error("malformed NDJSON at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("meta")) {
      const auto& m = j["meta"];
      trace.n_states = m["n_states"];
      trace.a = m["a"];
      trace.b = m["b"];
      trace.seed = m["seed"];
      trace.schedule.burn_in = m["burn_in"];
      trace.schedule.iters = m["iters"];
      trace.schedule.thin = m["thin"];
      have_meta = true;
      continue;
    }
    if (!have_meta) throw io_error("NDJSON trace missing meta line: " + path);
    std::vector<double> coeff;
    for (const auto& row : j["coeffs"])
      for (double v : row) coeff.push_back(v);
    std::vector<double> gamma;
    for (const auto& row : j["gamma"])
      for (double v : row) gamma.push_back(v);
    std::vector<double> w;
    if (j.contains("w")) w = j["w"].get<std::vector<double>>();
    trace.draws.push_back(detail::params_from_parts(trace.n_states, trace.a, trace.b,
                                                    j["knots"].get<std::vector<double>>(), coeff,
                                                    j["delta"].get<std::vector<double>>(), gamma,
                                                    j["zeta"].get<double>(), w));
    trace.sweeps.push_back(j["sweep"].get<std::uint64_t>());
    trace.log_lik.push_back(j["log_lik"].get<double>());
    trace.log_prior.push_back(j["log_prior"].get<double>());
    trace.k_series.push_back(j["K"].get<int>());
  }
  if (trace.size() == 0) throw io_error("NDJSON trace has no records: " + path);
  return trace;
}

// ----------------------------------------------------------------- summaries

inline json summary_to_json(const Summary& s) {
  json j;
  j["n_states"] = s.n_states;
  j["modal_k"] = s.modal_k;
  j["p_modal_k"] = s.p_modal_k;
  j["n_draws"] = s.n_draws;
  j["n_modal"] = s.n_modal;
  j["a"] = s.a;
  j["b"] = s.b;
  j["knots_mean"] = s.knots_mean;
  j["knots_sd"] = s.knots_sd;
  auto mat = [](const Matrix& m) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < m.rows(); ++r) rows.emplace_back(m.row(r).begin(), m.row(r).end());
    return rows;
  };
  j["coeff_mean"] = mat(s.coeff_mean);
  j["coeff_sd"] = mat(s.coeff_sd);
  j["delta_mean"] = s.delta_mean;
  j["delta_sd"] = s.delta_sd;
  j["gamma_mean"] = mat(s.gamma_mean);
  j["gamma_sd"] = mat(s.gamma_sd);
  j["zeta_mean"] = s.zeta_mean;
  j["zeta_sd"] = s.zeta_sd;
  if (s.w_mean) {
    j["w_mean"] = *s.w_mean;
    j["w_sd"] = *s.w_sd;
  }
  j["stationary"] = s.density.stationary;
  return j;
}

inline void write_summary_json(const std::string& path, const Summary& s) {
  auto out = detail::open_out(path);
  out << summary_to_json(s).dump(2) << '\n';
}

inline Summary read_summary_json(const std::string& path) {
  auto in = detail::open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("malformed summary JSON '" + path + "': " + e.what());
  }
  Summary s;
  s.n_states = j["n_states"];
  s.modal_k = j["modal_k"];
  s.p_modal_k = j["p_modal_k"];
  s.n_draws = j["n_draws"];
  s.n_modal = j["n_modal"];
  s.a = j["a"];
  s.b = j["b"];
  s.knots_mean = j["knots_mean"].get<std::vector<double>>();
  s.knots_sd = j["knots_sd"].get<std::vector<double>>();
  auto mat = [](const json& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
  };
  s.coeff_mean = mat(j["coeff_mean"]);
  s.coeff_sd = mat(j["coeff_sd"]);
  s.delta_mean = j["delta_mean"].get<std::vector<double>>();
  s.delta_sd = j["delta_sd"].get<std::vector<double>>();
  s.gamma_mean = mat(j["gamma_mean"]);
  s.gamma_sd = mat(j["gamma_sd"]);
  s.zeta_mean = j["zeta_mean"];
  s.zeta_sd = j["zeta_sd"];
  if (j.contains("w_mean")) {
    s.w_mean = j["w_mean"].get<std::vector<double>>();
    s.w_sd = j["w_sd"].get<std::vector<double>>();
  }
  s.density.stationary = j["stationary"].get<std::vector<double>>();
  return s;
}

// per-state posterior mean curve, 90% band and stationary-weighted mean
inline void write_density_csv(const std::string& path, const DensitySummary& d) {
  auto out = detail::open_out(path);
  out << "y";
  for (std::size_t i = 0; i < d.mean.rows(); ++i) {
    const std::string s = std::to_string(i + 1);
    out << ",mean_" << s << ",lo_" << s << ",hi_" << s << ",wmean_" << s;
  }
  out << '\n';
  for (std::size_t x = 0; x < d.grid.size(); ++x) {
    out << fmt17(d.grid[x]);
    for (std::size_t i = 0; i < d.mean.rows(); ++i)
      out << ',' << fmt17(d.mean(i, x)) << ',' << fmt17(d.lo(i, x)) << ',' << fmt17(d.hi(i, x)) << ','
          << fmt17(d.stationary[i] * d.mean(i, x));
    out << '\n';
  }
}

// ----------------------------------------------------------------- selection

inline json selection_to_json(const SelectionResult& r) {
  json j;
  j["candidates"] = r.candidates;
  j["post_probs"] = r.post_probs;
  j["dic"] = r.dic_values;
  j["best"] = r.best_candidate();
  return j;
}

inline void write_selection_json(const std::string& path, const SelectionResult& r) {
  auto out = detail::open_out(path);
  out << selection_to_json(r).dump(2) << '\n';
}

inline std::string selection_table(const SelectionResult& r) {
  std::ostringstream out;
  out << "  N   post_prob          DIC\n";
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%3d   %9.6f  %11.2f%s\n", r.candidates[i], r.post_probs[i],
                  r.dic_values[i], r.candidates[i] == r.best_candidate() ? "  <- best" : "");
    out << line;
  }
  return out.str();
}

// --------------------------------------------------------------- truth files

inline void write_truth_json(const std::string& path, const GroundTruth& g, std::size_t grid_points = 512) {
  json j;
  j["n_states"] = g.true_gamma.rows();
  j["a"] = g.data.a;
  j["b"] = g.data.b;
  j["delta"] = g.true_delta;
  std::vector<std::vector<double>> grows;
  for (std::size_t r = 0; r < g.true_gamma.rows(); ++r)
    grows.emplace_back(g.true_gamma.row(r).begin(), g.true_gamma.row(r).end());
  j["gamma"] = grows;
  if (g.zero_weights) j["zero_weights"] = *g.zero_weights;
  std::vector<int> states1;
  states1.reserve(g.states.size());
  for (int s : g.states) states1.push_back(s + 1);
  j["states"] = states1;
  if (g.density_oracle) {
    const std::vector<double> grid = make_grid(g.data.a, g.data.b, grid_points);
    std::vector<std::vector<double>> dens(g.true_gamma.rows(), std::vector<double>(grid_points));
    for (std::size_t s = 0; s < g.true_gamma.rows(); ++s)
      for (std::size_t i = 0; i < grid_points; ++i) dens[s][i] = g.density_oracle(static_cast<int>(s), grid[i]);
    j["density_grid"] = grid;
    j["density"] = dens;
  }
  auto out = detail::open_out(path);
  out << j.dump() << '\n';
}

struct TruthSidecar {
  int n_states = 0;
  double a = 0.0, b = 1.0;
  std::vector<double> delta;
  Matrix gamma;
  std::optional<std::vector<double>> zero_weights;
  std::vector<int> states;  // 0-based
  std::vector<double> density_grid;
  Matrix density;  // N x grid
};

inline TruthSidecar read_truth_json(const std::string& path) {
  auto in = detail::open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("malformed truth JSON '" + path + "': " + e.what());
  }
  TruthSidecar t;
  t.n_states = j["n_states"];
  t.a = j["a"];
  t.b = j["b"];
  t.delta = j["delta"].get<std::vector<double>>();
  t.gamma = Matrix(t.n_states, t.n_states);
  for (int r = 0; r < t.n_states; ++r)
    for (int c = 0; c < t.n_states; ++c) t.gamma(r, c) = j["gamma"][r][c];
  if (j.contains("zero_weights")) t.zero_weights = j["zero_weights"].get<std::vector<double>>();
  for (int s : j["states"].get<std::vector<int>>()) t.states.push_back(s - 1);
  if (j.contains("density_grid")) {
    t.density_grid = j["density_grid"].get<std::vector<double>>();
    t.density = Matrix(t.n_states, t.density_grid.size());
    for (int r = 0; r < t.n_states; ++r)
      for (std::size_t c = 0; c < t.density_grid.size(); ++c) t.density(r, c) = j["density"][r][c];
  }
  return t;
}

// ---------------------------------------------------------------- run config

// Flat key = value file covering the prior, tuning, schedule, and pipeline
// settings; '#' starts a comment.  Flags given on the command line override
// file values.
struct RunConfig {
  PriorConfig prior;
  TuningParams tuning;
  Schedule schedule{.burn_in = 1000, .iters = 4000, .thin = 10};
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t grid_points = 512;
  bool zero_inflated = false;
  std::size_t min_dwell = 30;
  std::size_t block_factor = 5;
  int sub_states = 2;
  bool mix_over_v = false;
  bool symmetric_gamma = false;
  double freeze_gamma_burn_frac = 0.0;
  bool a_set = false;  // bounds configured rather than data-derived
  bool b_set = false;

  std::optional<double> a_opt() const { return a_set ? std::optional<double>(prior.a) : std::nullopt; }
  std::optional<double> b_opt() const { return b_set ? std::optional<double>(prior.b) : std::nullopt; }
};

inline void load_config_file(const std::string& path, RunConfig& cfg) {
  auto in = detail::open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw io_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    const double x = detail::parse_double(val, line_no);
    if (key == "a") {
      cfg.prior.a = x;
      cfg.a_set = true;
    } else if (key == "b") {
      cfg.prior.b = x;
      cfg.b_set = true;
    } else if (key == "k_max") {
      cfg.prior.k_max = static_cast<int>(x);
    } else if (key == "eps1") {
      cfg.prior.eps1 = x;
    } else if (key == "eps2") {
      cfg.prior.eps2 = x;
    } else if (key == "zeta_shape") {
      cfg.prior.zeta_shape = x;
    } else if (key == "zeta_rate") {
      cfg.prior.zeta_rate = x;
    } else if (key == "tau1") {
      cfg.tuning.tau1 = x;
    } else if (key == "tau2") {
      cfg.tuning.tau2 = x;
    } else if (key == "tau3") {
      cfg.tuning.tau3 = x;
    } else if (key == "tau4") {
      cfg.tuning.tau4 = x;
    } else if (key == "tau5") {
      cfg.tuning.tau5 = x;
    } else if (key == "tau_w") {
      cfg.tuning.tau_w = x;
    } else if (key == "alpha") {
      cfg.tuning.alpha = x;
    } else if (key == "adapt") {
      cfg.tuning.adapt = x != 0.0;
    } else if (key == "accept_target") {
      cfg.tuning.accept_target = x;
    } else if (key == "accept_target_scalar") {
      cfg.tuning.accept_target_scalar = x;
    } else if (key == "coeff_per_state") {
      cfg.tuning.coeff_per_state = x != 0.0;
    } else if (key == "symmetric_gamma") {
      cfg.symmetric_gamma = x != 0.0;
    } else if (key == "freeze_gamma_burn_frac") {
      cfg.freeze_gamma_burn_frac = x;
    } else if (key == "burn_in") {
      cfg.schedule.burn_in = static_cast<std::size_t>(x);
    } else if (key == "iters") {
      cfg.schedule.iters = static_cast<std::size_t>(x);
    } else if (key == "thin") {
      cfg.schedule.thin = static_cast<std::size_t>(x);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(x);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(x);
    } else if (key == "grid_points") {
      cfg.grid_points = static_cast<std::size_t>(x);
    } else if (key == "zero_inflated") {
      cfg.zero_inflated = x != 0.0;
    } else if (key == "min_dwell") {
      cfg.min_dwell = static_cast<std::size_t>(x);
    } else if (key == "block_factor") {
      cfg.block_factor = static_cast<std::size_t>(x);
    } else if (key == "sub_states") {
      cfg.sub_states = static_cast<int>(x);
    } else if (key == "mix_over_v") {
      cfg.mix_over_v = x != 0.0;
    } else {
      throw io_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace bshmm
