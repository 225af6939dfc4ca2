#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "bshmm/sampler.hpp"
#include "bshmm/stats.hpp"

namespace bshmm {

// Independent chains, one per candidate number of states, with derived seeds.
// Draw indices align across candidates (identical schedule), which the
// ensemble-average estimator below relies on.
inline std::vector<Trace> run_parallel(const Dataset& data, const std::vector<int>& candidates,
                                       const PriorConfig& prior, const TuningParams& tuning,
                                       const Schedule& schedule, std::uint64_t seed, int threads = 1,
                                       const ChainOptions& opts = {}) {
  if (candidates.empty()) throw invalid_input("run_parallel: empty candidate set");
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = i + 1; j < candidates.size(); ++j)
      if (candidates[i] == candidates[j]) throw invalid_input("run_parallel: duplicate candidate");

  std::vector<Trace> traces(candidates.size());
  std::vector<std::exception_ptr> errors(candidates.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= candidates.size()) return;
      try {
        traces[i] = run_chain(data, candidates[i], prior, tuning, schedule,
                              derive_seed(seed, 1000 + static_cast<std::uint64_t>(candidates[i])), opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(candidates.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw numeric_error("chain for N = " + std::to_string(candidates[i]) + " failed: " + e.what());
      }
    }
  return traces;
}

// Ensemble-average posterior model probabilities: for each aligned draw i,
// P(N = k | y, theta^(i)) is proportional to exp(loglik + logprior + log P(N)),
// normalized per draw by log-sum-exp, then averaged over draws.
inline std::vector<double> posterior_model_probs(const std::vector<Trace>& traces,
                                                 std::vector<double> prior_n = {}) {
  const std::size_t m = traces.size();
  if (m == 0) throw invalid_input("posterior_model_probs: no traces");
  const std::size_t t_draws = traces[0].size();
  for (const auto& tr : traces)
    if (tr.size() != t_draws) throw invalid_input("posterior_model_probs: draw-count mismatch across candidates");
  if (prior_n.empty()) prior_n.assign(m, 1.0 / static_cast<double>(m));
  if (prior_n.size() != m) throw invalid_input("posterior_model_probs: prior length mismatch");

  std::vector<double> probs(m, 0.0), scores(m);
  for (std::size_t i = 0; i < t_draws; ++i) {
    for (std::size_t k = 0; k < m; ++k)
      scores[k] = traces[k].log_lik[i] + traces[k].log_prior[i] + std::log(prior_n[k]);
    const double lse = log_sum_exp(scores);
    for (std::size_t k = 0; k < m; ++k) probs[k] += std::exp(scores[k] - lse);
  }
  for (double& p : probs) p /= static_cast<double>(t_draws);
  return probs;
}

// Observed-likelihood DIC: -(4/T) sum_i loglik_i + 2 loglik(theta_hat), with
// theta_hat the draw maximizing loglik + logprior.  T = 1 collapses to the
// plain deviance -2 loglik.
inline double dic(const Trace& trace) {
  const std::size_t t_draws = trace.size();
  if (t_draws == 0) throw invalid_input("dic: empty trace");
  double mean_ll = 0.0;
  double best = kNegInf;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < t_draws; ++i) {
    mean_ll += trace.log_lik[i];
    const double score = trace.log_lik[i] + trace.log_prior[i];
    if (score > best) {
      best = score;
      best_i = i;
    }
  }
  mean_ll /= static_cast<double>(t_draws);
  return -4.0 * mean_ll + 2.0 * trace.log_lik[best_i];
}

struct SelectionResult {
  std::vector<int> candidates;
  std::vector<double> post_probs;
  std::vector<double> dic_values;
  std::vector<Trace> traces;

  int best_index() const {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < post_probs.size(); ++k)
      if (post_probs[k] > post_probs[arg]) arg = k;
    return static_cast<int>(arg);
  }
  int best_candidate() const { return candidates[static_cast<std::size_t>(best_index())]; }
};

inline SelectionResult select_states(const Dataset& data, const std::vector<int>& candidates,
                                     const PriorConfig& prior, const TuningParams& tuning,
                                     const Schedule& schedule, std::uint64_t seed, int threads = 1,
                                     const ChainOptions& opts = {}) {
  SelectionResult res;
  res.candidates = candidates;
  res.traces = run_parallel(data, candidates, prior, tuning, schedule, seed, threads, opts);
  res.post_probs = posterior_model_probs(res.traces);
  res.dic_values.reserve(candidates.size());
  for (const auto& tr : res.traces) res.dic_values.push_back(dic(tr));
  return res;
}

}  // namespace bshmm
