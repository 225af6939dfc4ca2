// bshmm: spline-emission HMM inference from the command line.
//
// Subcommands: simulate, fit, select, decode, summarize, subfit.  All runs
// are reproducible from (input files, config file, seed); numeric output is
// written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bshmm/bshmm.hpp"

namespace fs = std::filesystem;
using namespace bshmm;

namespace {

// Options shared by every subcommand.  Config-file values are applied first,
// then any flag explicitly given on the command line wins.
struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t burn_in = 0, iters = 0, thin = 0;  // 0 = keep config default
  double a = 0.0, b = 0.0;
  std::size_t grid_points = 512;
  CLI::Option *seed_opt = nullptr, *threads_opt = nullptr, *a_opt = nullptr, *b_opt = nullptr;
  CLI::Option *burn_opt = nullptr, *iters_opt = nullptr, *thin_opt = nullptr, *grid_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "flat key = value configuration file");
    app->add_option("--out-dir", out_dir, "output directory (created if absent)");
    seed_opt = app->add_option("--seed", seed, "master RNG seed");
    threads_opt = app->add_option("--threads", threads, "max concurrent chains");
    burn_opt = app->add_option("--burn-in", burn_in, "burn-in sweeps");
    iters_opt = app->add_option("--iters", iters, "post-burn-in sweeps");
    thin_opt = app->add_option("--thin", thin, "thinning stride");
    a_opt = app->add_option("--a", a, "left support bound (default: data range - 5%)");
    b_opt = app->add_option("--b", b, "right support bound (default: data range + 5%)");
    grid_opt = app->add_option("--grid-points", grid_points, "density evaluation grid size");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (*seed_opt) cfg.seed = seed;
    if (*threads_opt) cfg.threads = threads;
    if (*burn_opt) cfg.schedule.burn_in = burn_in;
    if (*iters_opt) cfg.schedule.iters = iters;
    if (*thin_opt) cfg.schedule.thin = thin;
    if (*grid_opt) cfg.grid_points = grid_points;
    if (*a_opt) {
      cfg.prior.a = a;
      cfg.a_set = true;
    }
    if (*b_opt) {
      cfg.prior.b = b;
      cfg.b_set = true;
    }
    return cfg;
  }

  std::string path(const std::string& name) const {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / name).string();
  }
};

Dataset load_data(const std::string& file, const RunConfig& cfg) {
  return read_dataset_csv(file, cfg.a_opt(), cfg.b_opt());
}

// prior bounds must match the dataset support exactly
PriorConfig prior_for(const Dataset& data, const RunConfig& cfg) {
  PriorConfig p = cfg.prior;
  p.a = data.a;
  p.b = data.b;
  p.validate();
  return p;
}

HmmParams zero_inflated_preset() {
  // 2-state rest/active truth mirroring the sleep sub-model scale: heavy zero
  // inflation and strong persistence in the rest state
  HmmParams p;
  p.n_states = 2;
  p.knots = build_knot_config(0.0, 30.0, {3.0, 6.0, 10.0, 15.0, 21.0});
  const double rows[2][9] = {
      {0.45, 0.30, 0.13, 0.06, 0.03, 0.015, 0.008, 0.004, 0.003},
      {0.06, 0.13, 0.21, 0.24, 0.17, 0.10, 0.05, 0.025, 0.015},
  };
  p.coeffs_uncon = Matrix(2, 9);
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    for (int j = 0; j < 9; ++j) s += rows[i][j];
    for (int j = 0; j < 9; ++j) p.coeffs_uncon(i, j) = std::log(rows[i][j] / s);
  }
  p.delta_uncon = {1.0, 1.0};
  p.gamma_uncon = Matrix(2, 2);
  p.gamma_uncon(0, 0) = 0.96;
  p.gamma_uncon(0, 1) = 0.04;
  p.gamma_uncon(1, 0) = 0.11;
  p.gamma_uncon(1, 1) = 0.89;
  p.zeta = 1.0;
  p.zero_weights = std::vector<double>{0.9, 0.25};
  return p;
}

int cmd_simulate(const std::string& model, std::size_t n, double rho, const CommonOpts& common) {
  const RunConfig cfg = common.resolve();
  GroundTruth g;
  if (model == "model1") {
    g = simulate_model1(n, cfg.seed);
  } else if (model == "model3") {
    g = simulate_model3(n, rho, cfg.seed);
  } else if (model == "model2" || model == "spline") {
    g = simulate_spline_hmm(model2_spline_params(), n, cfg.seed);
  } else if (model == "zero-inflated") {
    g = simulate_zero_inflated(zero_inflated_preset(), n, cfg.seed);
  } else {
    throw invalid_input("unknown simulation preset '" + model + "'");
  }
  write_dataset_csv(common.path("data.csv"), g.data);
  write_truth_json(common.path("truth.json"), g);
  std::cout << "wrote " << common.path("data.csv") << " (" << g.data.size() << " rows) and "
            << common.path("truth.json") << "\n";
  return 0;
}

void write_fit_outputs(const CommonOpts& common, const Trace& trace, const RunConfig& cfg,
                       const std::string& stem = "") {
  write_trace_csv(common.path(stem.empty() ? "trace.csv" : stem + "_trace.csv"), trace);
  write_trace_ndjson(common.path(stem.empty() ? "trace.ndjson" : stem + "_trace.ndjson"), trace);
  Trace relabelled = trace;
  relabel(relabelled);
  const Summary s = summarize(relabelled, make_grid(trace.a, trace.b, cfg.grid_points));
  write_summary_json(common.path(stem.empty() ? "summary.json" : stem + "_summary.json"), s);
  write_density_csv(common.path(stem.empty() ? "density.csv" : stem + "_density.csv"), s.density);
}

int cmd_fit(const std::string& data_file, int n_states, bool zero_inflated_flag, bool symmetric_flag,
            const std::vector<double>& anchors, const CommonOpts& common) {
  RunConfig cfg = common.resolve();
  if (zero_inflated_flag) cfg.zero_inflated = true;
  if (symmetric_flag) cfg.symmetric_gamma = true;
  const Dataset data = load_data(data_file, cfg);
  ChainOptions opts;
  opts.zero_inflated = cfg.zero_inflated;
  opts.symmetric_gamma = cfg.symmetric_gamma;
  opts.freeze_gamma_burn_frac = cfg.freeze_gamma_burn_frac;
  if (!anchors.empty()) opts.anchors = anchors;
  const Trace trace =
      run_chain(data, n_states, prior_for(data, cfg), cfg.tuning, cfg.schedule, cfg.seed, opts);
  write_fit_outputs(common, trace, cfg);
  std::cout << "fit complete: " << trace.size() << " draws, final log-likelihood "
            << fmt17(trace.log_lik.back()) << "\n";
  return 0;
}

int cmd_select(const std::string& data_file, const std::vector<int>& candidates, bool zero_inflated_flag,
               const CommonOpts& common) {
  RunConfig cfg = common.resolve();
  if (zero_inflated_flag) cfg.zero_inflated = true;
  const Dataset data = load_data(data_file, cfg);
  ChainOptions opts;
  opts.zero_inflated = cfg.zero_inflated;
  const SelectionResult res = select_states(data, candidates, prior_for(data, cfg), cfg.tuning, cfg.schedule,
                                            cfg.seed, cfg.threads, opts);
  write_selection_json(common.path("selection.json"), res);
  for (std::size_t i = 0; i < res.candidates.size(); ++i)
    write_trace_csv(common.path("trace_N" + std::to_string(res.candidates[i]) + ".csv"), res.traces[i]);
  std::cout << selection_table(res);
  return 0;
}

int cmd_decode(const std::string& data_file, const std::string& summary_file, const CommonOpts& common) {
  const RunConfig cfg = common.resolve();
  const Summary s = read_summary_json(summary_file);
  Dataset data = read_dataset_csv(data_file, s.a, s.b);
  const HmmParams point = s.point_estimate();
  const std::vector<int> path = viterbi(point, data);
  const Matrix post = smoothed_probs(point, data);
  const Matrix cum = cumulative_probs(post);
  auto out = detail::open_out(common.path("decoded.csv"));
  out << "t,value,missing,state";
  for (int i = 1; i <= s.n_states; ++i) out << ",p_" << i;
  for (int i = 1; i <= s.n_states; ++i) out << ",cum_" << i;
  out << '\n';
  for (std::size_t t = 0; t < data.size(); ++t) {
    out << (t + 1) << ',' << (data.missing[t] ? "NA" : fmt17(data.obs[t])) << ','
        << (data.missing[t] ? 1 : 0) << ',' << (path[t] + 1);
    for (int i = 0; i < s.n_states; ++i) out << ',' << fmt17(post(t, i));
    for (int i = 0; i < s.n_states; ++i) out << ',' << fmt17(cum(t, i));
    out << '\n';
  }
  std::cout << "wrote " << common.path("decoded.csv") << "\n";
  (void)cfg;
  return 0;
}

Trace read_trace_any(const std::string& file) {
  if (file.size() > 7 && file.substr(file.size() - 7) == ".ndjson") return read_trace_ndjson(file);
  return read_trace_csv(file);
}

int cmd_summarize(const std::string& trace_file, const std::string& truth_file, const CommonOpts& common) {
  const RunConfig cfg = common.resolve();
  Trace trace = read_trace_any(trace_file);
  relabel(trace);
  const Summary s = summarize(trace, make_grid(trace.a, trace.b, cfg.grid_points));
  write_summary_json(common.path("summary.json"), s);
  write_density_csv(common.path("density.csv"), s.density);
  std::cout << "modal K = " << s.modal_k << " with posterior probability " << fmt17(s.p_modal_k) << "\n";

  if (!truth_file.empty()) {
    const TruthSidecar truth = read_truth_json(truth_file);
    if (truth.density_grid.empty()) throw invalid_input("truth sidecar carries no density curves");
    const HmmParams point = s.point_estimate();
    const Matrix simplex = point.coeff_simplex();
    json report;
    for (int i = 0; i < std::min(s.n_states, truth.n_states); ++i) {
      std::vector<double> p_true, q_fit, grid;
      for (std::size_t x = 0; x < truth.density_grid.size(); ++x) {
        const double y = truth.density_grid[x];
        if (y < point.knots.a || y > point.knots.b) continue;
        grid.push_back(y);
        p_true.push_back(truth.density(i, x));
        q_fit.push_back(emission_density(point.knots, simplex.row(i), y));
      }
      report["kld_state_" + std::to_string(i + 1)] = kld(grid, p_true, q_fit);
    }
    auto out = detail::open_out(common.path("kld.json"));
    out << report.dump(2) << '\n';
    std::cout << "wrote " << common.path("kld.json") << "\n";
  }
  return 0;
}

int cmd_subfit(const std::string& data_file, const std::vector<int>& candidates, const CommonOpts& common) {
  RunConfig cfg = common.resolve();
  const TimedSeries series = read_timed_csv(data_file);
  Dataset highres = to_dataset(series, cfg.a_opt(), cfg.b_opt());
  if (highres.a > 0.0) highres.a = 0.0;  // counts include the zero atom
  Dataset main_data = block_average(highres, cfg.block_factor);

  const MainFit main = fit_main(main_data, candidates, prior_for(main_data, cfg), cfg.tuning, cfg.schedule,
                                cfg.seed, cfg.threads, true, cfg.grid_points);
  write_selection_json(common.path("selection.json"), main.selection);
  const Trace& main_trace = main.selection.traces[static_cast<std::size_t>(main.selection.best_index())];
  write_trace_csv(common.path("main_trace.csv"), main_trace);
  write_summary_json(common.path("main_summary.json"), main.summary);

  // sub-model support: positive range of the high-resolution data
  PriorConfig sub_prior = cfg.prior;
  sub_prior.a = 0.0;
  double max_pos = 0.0;
  for (std::size_t t = 0; t < highres.size(); ++t)
    if (!highres.missing[t]) max_pos = std::max(max_pos, highres.obs[t]);
  sub_prior.b = cfg.b_set ? cfg.prior.b : max_pos * 1.05;
  Dataset sub_data = highres;
  sub_data.a = sub_prior.a;
  sub_data.b = sub_prior.b;

  SubFitOptions sub_opts;
  sub_opts.sub_states = cfg.sub_states;
  sub_opts.block_factor = cfg.block_factor;
  sub_opts.mix_over_v = cfg.mix_over_v;
  sub_opts.grid_points = cfg.grid_points;
  BoutSegmentation rule;
  rule.min_dwell = cfg.min_dwell;
  const SubFit sub = fit_sub(sub_data, main_data, main_trace, sub_prior, cfg.tuning, cfg.schedule,
                             derive_seed(cfg.seed, 99), rule, sub_opts);

  auto bouts_out = detail::open_out(common.path("bouts.csv"));
  bouts_out << "bout,start,end,duration\n";
  for (std::size_t i = 0; i < sub.bouts.bouts.size(); ++i) {
    const auto& bt = sub.bouts.bouts[i];
    bouts_out << (i + 1) << ',' << (bt.begin + 1) << ',' << bt.end << ',' << bt.length() << '\n';
  }

  const HmmParams sub_point = sub.summary.point_estimate();
  const Matrix post = smoothed_probs(sub_point, sub.masked);
  const Matrix cum = cumulative_probs(post);
  const std::vector<int> sub_path = viterbi(sub_point, sub.masked);
  auto probs_out = detail::open_out(common.path("sub_probs.csv"));
  probs_out << "t,timestamp,value,in_rest,sub_state";
  for (int i = 1; i <= cfg.sub_states; ++i) probs_out << ",p_" << i;
  for (int i = 1; i <= cfg.sub_states; ++i) probs_out << ",cum_" << i;
  probs_out << '\n';
  for (std::size_t t = 0; t < sub.masked.size(); ++t) {
    probs_out << (t + 1) << ',' << series.timestamps[t] << ','
              << (highres.missing[t] ? "NA" : fmt17(highres.obs[t])) << ','
              << (sub.masked.missing[t] ? 0 : 1) << ',' << (sub_path[t] + 1);
    for (int i = 0; i < cfg.sub_states; ++i) probs_out << ',' << fmt17(post(t, i));
    for (int i = 0; i < cfg.sub_states; ++i) probs_out << ',' << fmt17(cum(t, i));
    probs_out << '\n';
  }
  write_summary_json(common.path("sub_summary.json"), sub.summary);
  std::cout << "main N = " << main.chosen_n << ", " << sub.bouts.bouts.size() << " rest bouts, wrote "
            << common.path("sub_summary.json") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian spline-emission hidden Markov models"};
  app.require_subcommand(1);

  // one option block per subcommand: the stored CLI::Option pointers are used
  // to let explicit flags override config-file values
  CommonOpts sim_common, fit_common, sel_common, dec_common, summ_common, sub_common;

  auto* sim = app.add_subcommand("simulate", "generate a benchmark dataset with its truth sidecar");
  std::string sim_model;
  std::size_t sim_n = 800;
  double sim_rho = 0.05;
  sim->add_option("model", sim_model, "model1|model2|model3|spline|zero-inflated")->required();
  sim->add_option("--n", sim_n, "series length");
  sim->add_option("--rho", sim_rho, "switching rate for model3");
  sim_common.add_to(sim);

  auto* fit = app.add_subcommand("fit", "run one RJMCMC chain and summarize it");
  std::string fit_data;
  int fit_n = 2;
  bool fit_zero = false;
  bool fit_sym = false;
  std::vector<double> fit_anchors;
  fit->add_option("data", fit_data, "observation CSV")->required();
  fit->add_option("--n-states", fit_n, "number of hidden states");
  fit->add_flag("--zero-inflated", fit_zero, "zero-inflated emissions");
  fit->add_flag("--symmetric-gamma", fit_sym, "two-state symmetric switching structure");
  fit->add_option("--anchors", fit_anchors, "per-state initialization anchors")->delimiter(',');
  fit_common.add_to(fit);

  auto* sel = app.add_subcommand("select", "parallel-chain selection of the number of states");
  std::string sel_data;
  std::vector<int> sel_candidates{2, 3, 4, 5};
  bool sel_zero = false;
  sel->add_option("data", sel_data, "observation CSV")->required();
  sel->add_option("--candidates", sel_candidates, "candidate state counts")->delimiter(',');
  sel->add_flag("--zero-inflated", sel_zero, "zero-inflated emissions");
  sel_common.add_to(sel);

  auto* dec = app.add_subcommand("decode", "Viterbi path and smoothed probabilities from a fitted summary");
  std::string dec_data, dec_summary;
  dec->add_option("data", dec_data, "observation CSV")->required();
  dec->add_option("--summary", dec_summary, "summary.json from fit/summarize")->required();
  dec_common.add_to(dec);

  auto* summ = app.add_subcommand("summarize", "modal-K posterior summary of a stored trace");
  std::string summ_trace, summ_truth;
  summ->add_option("trace", summ_trace, "trace.csv or trace.ndjson")->required();
  summ->add_option("--truth", summ_truth, "truth sidecar for KLD scoring");
  summ_common.add_to(summ);

  auto* sub = app.add_subcommand("subfit", "zero-inflated conditional pipeline on timestamped counts");
  std::string sub_data;
  std::vector<int> sub_candidates{2, 3};
  sub->add_option("data", sub_data, "timestamp,count CSV")->required();
  sub->add_option("--candidates", sub_candidates, "main-model candidate state counts")->delimiter(',');
  sub_common.add_to(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_model, sim_n, sim_rho, sim_common);
    if (fit->parsed()) return cmd_fit(fit_data, fit_n, fit_zero, fit_sym, fit_anchors, fit_common);
    if (sel->parsed()) return cmd_select(sel_data, sel_candidates, sel_zero, sel_common);
    if (dec->parsed()) return cmd_decode(dec_data, dec_summary, dec_common);
    if (summ->parsed()) return cmd_summarize(summ_trace, summ_truth, summ_common);
    if (sub->parsed()) return cmd_subfit(sub_data, sub_candidates, sub_common);
  } catch (const io_error& e) {
    std::cerr << "error(io): " << e.what() << "\n";
    return 3;
  } catch (const invalid_input& e) {
    std::cerr << "error(input): " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "error(numeric): " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
