#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "bshmm/hmm.hpp"
#include "bshmm/postproc.hpp"
#include "bshmm/sampler.hpp"
#include "bshmm/selection.hpp"

namespace bshmm {

// Maximal rest periods of a decoded path. A bout opens at the first entry
// into the rest state sustained for at least min_dwell samples and closes at
// the first departure sustained for at least min_dwell samples; shorter
// interruptions are absorbed.
struct BoutSegmentation {
  struct Bout {
    std::size_t begin = 0;  // first index in the bout
    std::size_t end = 0;    // one past the last index
    std::size_t length() const { return end - begin; }
  };
  std::vector<Bout> bouts;
  std::size_t min_dwell = 30;
};

// path uses 0-based states; the rest state is state 0
inline BoutSegmentation extract_bouts(const std::vector<int>& path, std::size_t min_dwell) {
  BoutSegmentation seg;
  seg.min_dwell = min_dwell;
  const std::size_t n = path.size();
  std::size_t t = 0;
  bool in_bout = false;
  std::size_t bout_begin = 0, last_rest_end = 0;
  while (t < n) {
    std::size_t run_end = t;
    const bool rest = path[t] == 0;
    while (run_end < n && (path[run_end] == 0) == rest) ++run_end;
    const std::size_t run_len = run_end - t;
    if (rest) {
      if (!in_bout && run_len >= min_dwell) {
        in_bout = true;
        bout_begin = t;
      }
      if (in_bout) last_rest_end = run_end;
    } else if (in_bout && run_len >= min_dwell) {
      seg.bouts.push_back({bout_begin, last_rest_end});
      in_bout = false;
    }
    t = run_end;
  }
  if (in_bout) seg.bouts.push_back({bout_begin, last_rest_end});
  return seg;
}

// block-average a series (window samples per block); a block is missing only
// if all its members are missing
inline Dataset block_average(const Dataset& d, std::size_t window) {
  if (window == 0) throw invalid_input("block_average: window must be positive");
  Dataset out;
  out.a = d.a;
  out.b = d.b;
  for (std::size_t start = 0; start < d.size(); start += window) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = start; t < std::min(start + window, d.size()); ++t) {
      if (d.missing[t]) continue;
      sum += d.obs[t];
      ++count;
    }
    out.obs.push_back(count ? sum / static_cast<double>(count) : 0.0);
    out.missing.push_back(count ? 0 : 1);
  }
  return out;
}

struct MainFit {
  SelectionResult selection;  // traces per candidate (single entry when N fixed)
  int chosen_n = 0;
  Summary summary;            // of the chosen candidate's trace, relabelled
};

// Stage (i): fit the zero-inflated main HMM, selecting N when a candidate set
// is given.
inline MainFit fit_main(const Dataset& data, const std::vector<int>& candidates, const PriorConfig& prior,
                        const TuningParams& tuning, const Schedule& schedule, std::uint64_t seed,
                        int threads = 1, bool zero_inflated = true, std::size_t grid_points = 256) {
  ChainOptions opts;
  opts.zero_inflated = zero_inflated;
  MainFit fit;
  fit.selection = select_states(data, candidates, prior, tuning, schedule, seed, threads, opts);
  fit.chosen_n = fit.selection.best_candidate();
  Trace& best = fit.selection.traces[static_cast<std::size_t>(fit.selection.best_index())];
  relabel(best);
  fit.summary = summarize(best, make_grid(data.a, data.b, grid_points));
  return fit;
}

struct SubFitOptions {
  int sub_states = 2;
  std::size_t block_factor = 1;   // high-res samples per main-fit sample
  bool mix_over_v = false;        // integrate over posterior draws of V
  std::size_t v_draws = 20;       // decoded paths used in mixing mode
  std::size_t grid_points = 256;
};

struct SubFit {
  Trace trace;
  Summary summary;
  std::vector<int> main_path;     // decoded main path at high resolution
  Dataset masked;                 // high-res data with non-rest points missing
  BoutSegmentation bouts;         // rest bouts of the main path
};

namespace detail {

inline std::vector<int> expand_path(const std::vector<int>& path, std::size_t factor, std::size_t n_out) {
  std::vector<int> out(n_out);
  for (std::size_t t = 0; t < n_out; ++t) out[t] = path[std::min(t / factor, path.size() - 1)];
  return out;
}

inline Dataset mask_non_rest(const Dataset& highres, const std::vector<int>& path) {
  Dataset masked = highres;
  for (std::size_t t = 0; t < masked.size(); ++t)
    if (path[t] != 0) masked.missing[t] = 1;
  return masked;
}

}  // namespace detail

// Stage (ii): decode the main HMM, treat every time point outside the rest
// state as missing, and fit the zero-inflated sub-HMM on the masked
// high-resolution series.  Point-estimate mode conditions on the single
// Viterbi path of the main posterior means; mixing mode cycles the mask
// through paths decoded from thinned posterior draws.
inline SubFit fit_sub(const Dataset& data_highres, const Dataset& data_main, const Trace& main_trace,
                      const PriorConfig& sub_prior, const TuningParams& tuning, const Schedule& schedule,
                      std::uint64_t seed, const BoutSegmentation& bout_rule, const SubFitOptions& opts = {}) {
  if (main_trace.size() == 0) throw invalid_input("fit_sub: empty main trace");
  Trace relabelled = main_trace;
  relabel(relabelled);
  const Summary main_summary = summarize(relabelled, make_grid(relabelled.a, relabelled.b, opts.grid_points));
  const HmmParams point = main_summary.point_estimate();

  SubFit fit;
  const std::vector<int> path_main = viterbi(point, data_main);
  fit.main_path = detail::expand_path(path_main, opts.block_factor, data_highres.size());
  fit.bouts = extract_bouts(fit.main_path, bout_rule.min_dwell);
  fit.masked = detail::mask_non_rest(data_highres, fit.main_path);
  if (fit.masked.n_observed() == 0)
    throw invalid_input("empty-conditioning: no time points decoded to the rest state");

  ChainOptions chain_opts;
  chain_opts.zero_inflated = true;

  if (!opts.mix_over_v) {
    fit.trace = run_chain(fit.masked, opts.sub_states, sub_prior, tuning, schedule, seed, chain_opts);
  } else {
    // segment the sweep budget over paths decoded from evenly spaced draws
    const std::size_t v_draws = std::max<std::size_t>(1, std::min(opts.v_draws, relabelled.size()));
    std::vector<Dataset> masks;
    masks.reserve(v_draws);
    for (std::size_t v = 0; v < v_draws; ++v) {
      const auto& draw = relabelled.draws[v * relabelled.size() / v_draws];
      const auto vp = detail::expand_path(viterbi(draw, data_main), opts.block_factor, data_highres.size());
      Dataset m = detail::mask_non_rest(data_highres, vp);
      if (m.n_observed() == 0)
        throw invalid_input("empty-conditioning: a posterior path decodes no rest-state points");
      masks.push_back(std::move(m));
    }
    HmmParams sub_init =
        init_state(masks[0], opts.sub_states, sub_prior, derive_seed(seed, 1), std::nullopt, true);
    Chain chain(masks[0], sub_init, sub_prior, tuning, derive_seed(seed, 3));
    const std::size_t seg_burn = schedule.burn_in / v_draws + 1;
    const std::size_t seg_iters = schedule.iters / v_draws + 1;
    fit.trace.schedule = schedule;
    fit.trace.n_states = opts.sub_states;
    fit.trace.a = data_highres.a;
    fit.trace.b = data_highres.b;
    fit.trace.seed = seed;
    std::uint64_t sweep = 0;
    for (std::size_t v = 0; v < v_draws; ++v) {
      Chain seg(masks[v], chain.params(), sub_prior, tuning, derive_seed(seed, 100 + v));
      for (std::size_t s = 0; s < seg_burn; ++s) seg.sweep(v == 0);
      for (std::size_t s = 0; s < seg_iters; ++s) {
        seg.sweep(false);
        if (++sweep % schedule.thin == 0) {
          fit.trace.draws.push_back(seg.params());
          fit.trace.sweeps.push_back(sweep);
          fit.trace.log_lik.push_back(seg.log_lik());
          fit.trace.log_prior.push_back(seg.log_prior_value());
          fit.trace.k_series.push_back(seg.params().knots.k());
        }
      }
      chain = std::move(seg);
    }
    fit.trace.moves = chain.counters();
    fit.trace.tuned = chain.tuning();
  }

  relabel(fit.trace);
  fit.summary = summarize(fit.trace, make_grid(sub_prior.a, sub_prior.b, opts.grid_points));
  return fit;
}

}  // namespace bshmm
