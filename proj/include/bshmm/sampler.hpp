#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bshmm/hmm.hpp"
#include "bshmm/prior.hpp"
#include "bshmm/rng.hpp"
#include "bshmm/splines.hpp"
#include "bshmm/stats.hpp"

namespace bshmm {

// Proposal scales for the within-dimension moves and the birth spread
// exponent.  With adapt on, the tau scales follow a Robbins-Monro recursion
// toward the target acceptance rates during burn-in, frozen afterwards.
struct TuningParams {
  double tau1 = 0.1;   // knot location
  double tau2 = 0.3;   // coefficient random walk
  double tau3 = 0.5;   // log zeta
  double tau4 = 0.5;   // log delta tilde
  double tau5 = 0.3;   // log gamma tilde
  double tau_w = 0.6;  // logit zero weights
  double alpha = 1.0;  // birth proposal spread: sd = (r_{b+1} - r_{b-1})^alpha
  bool adapt = true;
  double accept_target = 0.25;
  double accept_target_scalar = 0.44;
  // step (b) blocking: one joint proposal over all states (default, one
  // likelihood evaluation) or one block per state (better mixing when states
  // compete for the same density shape)
  bool coeff_per_state = false;

  void validate() const {
    if (!(tau1 > 0 && tau2 > 0 && tau3 > 0 && tau4 > 0 && tau5 > 0 && tau_w > 0 && alpha > 0))
      throw invalid_input("tuning: proposal scales must be positive");
  }
};

struct Schedule {
  std::size_t burn_in = 0;
  std::size_t iters = 1000;
  std::size_t thin = 1;

  void validate() const {
    if (thin == 0) throw invalid_input("schedule: thin must be positive");
  }
};

enum class MoveKind : int { knot = 0, coeffs, zeta, delta, gamma, zero_weights, birth, death, count_ };
inline constexpr int kMoveKinds = static_cast<int>(MoveKind::count_);

inline const char* move_name(MoveKind m) {
  static const char* names[kMoveKinds] = {"knot",  "coeffs", "zeta",  "delta",
                                          "gamma", "zero_weights", "birth", "death"};
  return names[static_cast<int>(m)];
}

struct MoveCounter {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

struct Trace {
  std::vector<HmmParams> draws;       // thinned post-burn-in snapshots
  std::vector<std::uint64_t> sweeps;  // post-burn-in sweep index per draw
  std::vector<double> log_lik;
  std::vector<double> log_prior;
  std::vector<int> k_series;
  std::array<MoveCounter, kMoveKinds> moves{};
  TuningParams tuned;
  Schedule schedule;
  int n_states = 0;
  double a = 0.0, b = 1.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return draws.size(); }
};

struct ChainOptions {
  bool zero_inflated = false;
  bool symmetric_gamma = false;  // two-state gamma_12 = gamma_21 = rho structure
  std::optional<std::vector<double>> anchors;  // per-state init hints
  std::optional<HmmParams> init;
  std::size_t check_every = 0;  // self-check cadence in sweeps (0 = off)
  // burn-in staging: hold the transition matrix fixed for this fraction of
  // burn-in so near-identical emission states differentiate before the
  // switching rate can collapse; the post-burn-in kernel is untouched
  double freeze_gamma_burn_frac = 0.0;
};

// b_K = I(K=2) + 0.5 I(3 <= K < K_max)
inline double birth_prob(int k, int k_max) {
  if (k_max < 3) return 0.0;
  if (k == 2) return 1.0;
  return k < k_max ? 0.5 : 0.0;
}

// Log density of the birth proposal for a new knot at r_c.  The reverse move
// cannot identify the anchor knot that generated r_c, so the acceptance ratio
// must use the mixture over all possible anchors.
inline double log_birth_mixture(const KnotConfig& cfg, double r_c, double alpha) {
  const int k = cfg.k();
  std::vector<double> comps(k);
  for (int b = 0; b < k; ++b) {
    const double left = b == 0 ? cfg.a : cfg.interior[b - 1];
    const double right = b == k - 1 ? cfg.b : cfg.interior[b + 1];
    const TruncNormal tn{cfg.interior[b], std::pow(right - left, alpha), cfg.a, cfg.b};
    comps[b] = tn.logpdf(r_c);
  }
  return log_sum_exp(comps) - std::log(static_cast<double>(k));
}

// A fully evaluated proposal: the candidate state, its posterior terms, and
// the complete MH log acceptance ratio.
struct ProposalEval {
  HmmParams params;
  double log_lik = 0.0;
  double log_prior = 0.0;
  double log_ratio = kNegInf;
};

// One MCMC chain over a fixed number of states.  Caches the per-observation
// basis values and the emission matrix so each move only recomputes what its
// proposal changes: knot moves rebuild both, coefficient and zero-weight
// moves rebuild emissions, delta/Gamma moves only rerun the forward pass and
// zeta touches the prior alone.
class Chain {
 public:
  Chain(const Dataset& data, HmmParams init, const PriorConfig& prior, const TuningParams& tuning,
        std::uint64_t seed)
      : data_(&data), prior_(prior), tuning_(tuning), rng_(seed), params_(std::move(init)) {
    prior_.validate();
    tuning_.validate();
    params_.validate();
    if (params_.knots.a != prior_.a || params_.knots.b != prior_.b)
      throw invalid_input("chain: knot bounds disagree with prior bounds");
    cur_.init(*data_, params_.n_states);
    prop_.init(*data_, params_.n_states);
    cur_.rebuild_basis(params_.knots, *data_);
    cur_.rebuild_emissions(params_);
    log_lik_ = cur_.forward(params_);
    log_prior_ = log_prior(params_, prior_);
  }

  const HmmParams& params() const { return params_; }
  double log_lik() const { return log_lik_; }
  double log_prior_value() const { return log_prior_; }
  const PriorConfig& prior() const { return prior_; }
  const std::array<MoveCounter, kMoveKinds>& counters() const { return counters_; }
  const TuningParams& tuning() const { return tuning_; }
  Rng& rng() { return rng_; }

  // One full sweep: the five fixed-dimension moves, the zero-weight step when
  // active, then the birth/death coin.
  void sweep(bool adapting, bool skip_gamma = false) {
    move_knot(adapting);
    move_coeffs(adapting);
    move_zeta(adapting);
    move_delta(adapting);
    if (!skip_gamma) move_gamma(adapting);
    if (params_.zero_weights) move_zero_weights(adapting);
    if (prior_.k_max >= 3) {
      if (rng_.uniform() < birth_prob(params_.knots.k(), prior_.k_max))
        move_birth();
      else
        move_death();
    }
  }

  // --- within-dimension moves ---

  // step (a): relocate one knot inside the window of its neighbours; the
  // forward and reverse truncation constants differ because the windows are
  // centred at different points
  void move_knot(bool adapting) {
    counters_[static_cast<int>(MoveKind::knot)].proposed++;
    const int k = params_.knots.k();
    const int pick = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(k)));
    const double lo = pick == 0 ? params_.knots.a : params_.knots.interior[pick - 1];
    const double hi = pick == k - 1 ? params_.knots.b : params_.knots.interior[pick + 1];
    const TruncNormal fwd{params_.knots.interior[pick], tuning_.tau1, lo, hi};
    const double r_c = fwd.sample(rng_);
    auto ev = eval_knot_move(pick, r_c);
    decide(MoveKind::knot, std::move(ev), adapting, tuning_.tau1, true);
  }

  std::optional<ProposalEval> eval_knot_move(int pick, double r_c) {
    const int k = params_.knots.k();
    const double lo = pick == 0 ? params_.knots.a : params_.knots.interior[pick - 1];
    const double hi = pick == k - 1 ? params_.knots.b : params_.knots.interior[pick + 1];
    if (r_c <= lo || r_c >= hi) return std::nullopt;  // would break the ordering
    HmmParams prop = params_;
    std::vector<double> interior = prop.knots.interior;
    interior[pick] = r_c;
    prop.knots = build_knot_config(prop.knots.a, prop.knots.b, std::move(interior));
    const TruncNormal fwd{params_.knots.interior[pick], tuning_.tau1, lo, hi};
    const TruncNormal rev{r_c, tuning_.tau1, lo, hi};
    const double hastings = std::log(fwd.mass()) - std::log(rev.mass());
    return eval_with_new_knots(std::move(prop), hastings);
  }

  // step (b): Gaussian random walk on the unconstrained coefficients, either
  // jointly or one state block at a time
  void move_coeffs(bool adapting) {
    if (!tuning_.coeff_per_state) {
      counters_[static_cast<int>(MoveKind::coeffs)].proposed++;
      HmmParams prop = params_;
      for (double& x : prop.coeffs_uncon.data()) x += tuning_.tau2 * rng_.normal();
      decide(MoveKind::coeffs, eval_emission_change(std::move(prop), 0.0), adapting, tuning_.tau2, false);
      return;
    }
    for (int i = 0; i < params_.n_states; ++i) {
      counters_[static_cast<int>(MoveKind::coeffs)].proposed++;
      HmmParams prop = params_;
      for (std::size_t j = 0; j < prop.coeffs_uncon.cols(); ++j)
        prop.coeffs_uncon(i, j) += tuning_.tau2 * rng_.normal();
      decide(MoveKind::coeffs, eval_emission_change(std::move(prop), 0.0), adapting, tuning_.tau2, false);
    }
  }

  // step (c): log-normal walk on zeta; the likelihood is untouched
  void move_zeta(bool adapting) {
    counters_[static_cast<int>(MoveKind::zeta)].proposed++;
    const double zeta_new = params_.zeta * std::exp(tuning_.tau3 * rng_.normal());
    const double log_ratio = zeta_log_ratio(zeta_new);
    ProposalEval ev;
    ev.params = params_;
    ev.params.zeta = zeta_new;
    ev.log_lik = log_lik_;
    ev.log_prior = log_prior(ev.params, prior_);
    ev.log_ratio = log_ratio;
    decide_no_cache(MoveKind::zeta, std::move(ev), adapting, tuning_.tau3, true);
  }

  // full MH log ratio for a zeta proposal, including the log-normal walk
  // asymmetry zeta'/zeta
  double zeta_log_ratio(double zeta_new) const {
    HmmParams prop = params_;
    prop.zeta = zeta_new;
    return log_prior(prop, prior_) - log_prior_ + std::log(zeta_new) - std::log(params_.zeta);
  }

  // step (d): coordinatewise log-normal walk on delta tilde
  void move_delta(bool adapting) {
    counters_[static_cast<int>(MoveKind::delta)].proposed++;
    HmmParams prop = params_;
    double hastings = 0.0;
    for (double& d : prop.delta_uncon) {
      const double step = tuning_.tau4 * rng_.normal();
      d *= std::exp(step);
      hastings += step;
    }
    decide_no_cache(MoveKind::delta, eval_forward_only(std::move(prop), hastings), adapting, tuning_.tau4,
                    false);
  }

  // step (e): entrywise log-normal walk on Gamma tilde, or a logit walk on
  // the single switching rate under the symmetric two-state constraint
  void move_gamma(bool adapting) {
    counters_[static_cast<int>(MoveKind::gamma)].proposed++;
    HmmParams prop = params_;
    double hastings = 0.0;
    if (params_.gamma_symmetric) {
      const double rho = params_.gamma_uncon(0, 1);
      const double logit = std::log(rho) - std::log1p(-rho) + tuning_.tau5 * rng_.normal();
      const double rho_new = 1.0 / (1.0 + std::exp(-logit));
      if (!(rho_new > 0.0 && rho_new < 1.0)) {
        decide_no_cache(MoveKind::gamma, std::nullopt, adapting, tuning_.tau5, true);
        return;
      }
      prop.gamma_uncon(0, 0) = prop.gamma_uncon(1, 1) = 1.0 - rho_new;
      prop.gamma_uncon(0, 1) = prop.gamma_uncon(1, 0) = rho_new;
      hastings = std::log(rho_new * (1.0 - rho_new)) - std::log(rho * (1.0 - rho));
      decide_no_cache(MoveKind::gamma, eval_forward_only(std::move(prop), hastings), adapting, tuning_.tau5,
                      true);
      return;
    }
    for (double& g : prop.gamma_uncon.data()) {
      const double step = tuning_.tau5 * rng_.normal();
      g *= std::exp(step);
      hastings += step;
    }
    decide_no_cache(MoveKind::gamma, eval_forward_only(std::move(prop), hastings), adapting, tuning_.tau5,
                    false);
  }

  // zero-inflation weights: log-odds walk under the uniform(0,1) prior
  void move_zero_weights(bool adapting) {
    counters_[static_cast<int>(MoveKind::zero_weights)].proposed++;
    HmmParams prop = params_;
    double hastings = 0.0;
    bool degenerate = false;
    for (double& w : *prop.zero_weights) {
      const double cur = w;
      const double logit = std::log(cur) - std::log1p(-cur) + tuning_.tau_w * rng_.normal();
      w = 1.0 / (1.0 + std::exp(-logit));
      if (!(w > 0.0 && w < 1.0)) {
        degenerate = true;  // underflowed to the boundary
        break;
      }
      hastings += std::log(w * (1.0 - w)) - std::log(cur * (1.0 - cur));
    }
    auto ev = degenerate ? std::nullopt : eval_emission_change(std::move(prop), hastings);
    decide(MoveKind::zero_weights, std::move(ev), adapting, tuning_.tau_w, false);
  }

  // --- trans-dimensional moves ---

  void move_birth() {
    counters_[static_cast<int>(MoveKind::birth)].proposed++;
    const int k = params_.knots.k();
    if (k >= prior_.k_max) return;
    const int anchor = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(k)));
    const double left = anchor == 0 ? params_.knots.a : params_.knots.interior[anchor - 1];
    const double right = anchor == k - 1 ? params_.knots.b : params_.knots.interior[anchor + 1];
    const TruncNormal tn{params_.knots.interior[anchor], std::pow(right - left, tuning_.alpha),
                         params_.knots.a, params_.knots.b};
    const double r_c = tn.sample(rng_);
    std::vector<double> u(static_cast<std::size_t>(params_.n_states));
    for (double& v : u) v = rng_.uniform();
    decide(MoveKind::birth, eval_birth(r_c, u), false, tuning_.tau1, false);
  }

  void move_death() {
    counters_[static_cast<int>(MoveKind::death)].proposed++;
    const int k = params_.knots.k();
    if (k <= 2) return;
    const int pick = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(k)));
    decide(MoveKind::death, eval_death(pick), false, tuning_.tau1, false);
  }

  // Birth acceptance ratio: posterior ratio x [d_{K+1}/(K+1)] / [b_K q_mix(r_c)]
  // x |Jacobian|, with unit density for the u draws.
  std::optional<ProposalEval> eval_birth(double r_c, std::span<const double> u) {
    const int k = params_.knots.k();
    if (k >= prior_.k_max) return std::nullopt;
    if (r_c <= params_.knots.a || r_c >= params_.knots.b) return std::nullopt;
    for (double r : params_.knots.interior)
      if (r == r_c) return std::nullopt;  // floating-point tie
    for (double v : u)
      if (!(v > 0.0 && v < 1.0)) return std::nullopt;

    InsertResult ins = insert_knot_transform(params_.knots, params_.coeffs_uncon, r_c, u);
    if (!std::isfinite(ins.log_jacobian)) return std::nullopt;  // singular map

    HmmParams prop = params_;
    prop.knots = std::move(ins.cfg);
    prop.coeffs_uncon = std::move(ins.coeffs);
    const double log_q_fwd =
        std::log(birth_prob(k, prior_.k_max)) + log_birth_mixture(params_.knots, r_c, tuning_.alpha);
    const double log_q_rev =
        std::log(1.0 - birth_prob(k + 1, prior_.k_max)) - std::log(static_cast<double>(k + 1));
    return eval_with_new_knots(std::move(prop), log_q_rev - log_q_fwd + ins.log_jacobian);
  }

  // Death acceptance ratio: exact reciprocal of the matching birth ratio at
  // the reconstructed (r_c, u); any recovered u outside (0,1) means the
  // reverse birth has zero density.
  std::optional<ProposalEval> eval_death(int knot_index) {
    const int k = params_.knots.k();
    if (k <= 2) return std::nullopt;
    DeleteResult del = delete_knot_transform(params_.knots, params_.coeffs_uncon, knot_index);
    for (double v : del.u)
      if (!(v > 0.0 && v < 1.0)) return std::nullopt;
    if (!std::isfinite(del.log_jacobian)) return std::nullopt;

    HmmParams prop = params_;
    prop.knots = std::move(del.cfg);
    prop.coeffs_uncon = std::move(del.coeffs);
    const double log_q_fwd =
        std::log(1.0 - birth_prob(k, prior_.k_max)) - std::log(static_cast<double>(k));
    const double log_q_rev = std::log(birth_prob(k - 1, prior_.k_max)) +
                             log_birth_mixture(prop.knots, del.removed_knot, tuning_.alpha);
    return eval_with_new_knots(std::move(prop), log_q_rev - log_q_fwd + del.log_jacobian);
  }

  // Recompute the posterior terms from scratch and compare against the
  // incrementally maintained values; throws on drift.
  void self_check(double tol = 1e-8) {
    const double ll = log_likelihood(params_, *data_);
    const double lp = log_prior(params_, prior_);
    if (std::fabs(ll - log_lik_) > tol || std::fabs(lp - log_prior_) > tol)
      throw numeric_error("chain self-check failed: cached posterior terms drifted");
    cur_.rebuild_basis(params_.knots, *data_);
    cur_.rebuild_emissions(params_);
    log_lik_ = ll;
    log_prior_ = lp;
  }

 private:
  // Cached per-observation local basis values plus the emission matrix.
  struct Workspace {
    std::vector<int> first;                  // -1 when missing
    std::vector<std::array<double, 4>> bas;  // normalized local basis values
    std::vector<std::uint8_t> atom;          // y_t == 0 exactly (zero-inflation)
    Matrix emis;                             // n x N
    Matrix simplex;                          // N x (K+4)

    void init(const Dataset& data, int n_states) {
      emis = Matrix(data.size(), static_cast<std::size_t>(n_states), 1.0);
      atom.assign(data.size(), 0);
      for (std::size_t t = 0; t < data.size(); ++t)
        atom[t] = !data.missing[t] && data.obs[t] == 0.0;
    }

    void rebuild_basis(const KnotConfig& cfg, const Dataset& data) {
      const std::size_t n = data.size();
      first.assign(n, -1);
      bas.resize(n);
      for (std::size_t t = 0; t < n; ++t) {
        if (data.missing[t]) continue;
        const LocalBasis lb = eval_basis_local(cfg, data.obs[t]);
        first[t] = lb.first;
        bas[t] = lb.values;
      }
    }

    // emissions from this workspace's own basis cache
    void rebuild_emissions(const HmmParams& p) { rebuild_emissions(p, *this); }

    // emissions into this workspace using another workspace's basis cache
    void rebuild_emissions(const HmmParams& p, const Workspace& basis_src) {
      simplex = p.coeff_simplex();
      const std::size_t n = basis_src.first.size();
      const auto n_states = static_cast<std::size_t>(p.n_states);
      const std::vector<double>* w = p.zero_weights ? &*p.zero_weights : nullptr;
      for (std::size_t t = 0; t < n; ++t) {
        double* row = &emis(t, 0);
        if (basis_src.first[t] < 0) {
          for (std::size_t i = 0; i < n_states; ++i) row[i] = 1.0;
          continue;
        }
        if (w && atom[t]) {
          for (std::size_t i = 0; i < n_states; ++i) row[i] = (*w)[i];
          continue;
        }
        const auto& lb = basis_src.bas[t];
        const int f = basis_src.first[t];
        for (std::size_t i = 0; i < n_states; ++i) {
          const auto a_row = simplex.row(i);
          double v = a_row[f] * lb[0] + a_row[f + 1] * lb[1] + a_row[f + 2] * lb[2] + a_row[f + 3] * lb[3];
          if (w) v *= 1.0 - (*w)[i];
          row[i] = v;
        }
      }
    }

    double forward(const HmmParams& p) const {
      if (emis.rows() == 0) return 0.0;
      return detail::forward_pass(p.delta(), p.gamma(), emis, nullptr, nullptr);
    }
  };

  // proposals that change the knot configuration: rebuild basis + emissions
  std::optional<ProposalEval> eval_with_new_knots(HmmParams prop, double extra_log_terms) {
    ProposalEval ev;
    try {
      prop_.rebuild_basis(prop.knots, *data_);
      prop_.rebuild_emissions(prop);
      ev.log_lik = prop_.forward(prop);
    } catch (const numeric_error&) {
      return std::nullopt;
    }
    ev.log_prior = log_prior(prop, prior_);
    ev.log_ratio = ev.log_lik + ev.log_prior - log_lik_ - log_prior_ + extra_log_terms;
    ev.params = std::move(prop);
    prop_dirty_basis_ = true;
    return ev;
  }

  // proposals that keep the knots: reuse the current basis cache
  std::optional<ProposalEval> eval_emission_change(HmmParams prop, double hastings) {
    ProposalEval ev;
    try {
      prop_.rebuild_emissions(prop, cur_);
      ev.log_lik = prop_.forward(prop);
    } catch (const numeric_error&) {
      return std::nullopt;
    }
    ev.log_prior = log_prior(prop, prior_);
    ev.log_ratio = ev.log_lik + ev.log_prior - log_lik_ - log_prior_ + hastings;
    ev.params = std::move(prop);
    prop_dirty_basis_ = false;
    return ev;
  }

  // proposals that keep the emission matrix (delta, Gamma): forward pass only
  std::optional<ProposalEval> eval_forward_only(HmmParams prop, double hastings) {
    ProposalEval ev;
    try {
      ev.log_lik = cur_.forward(prop);
    } catch (const numeric_error&) {
      return std::nullopt;
    }
    ev.log_prior = log_prior(prop, prior_);
    ev.log_ratio = ev.log_lik + ev.log_prior - log_lik_ - log_prior_ + hastings;
    ev.params = std::move(prop);
    return ev;
  }

  // MH coin + bookkeeping for proposals whose evaluation lives in prop_
  void decide(MoveKind kind, std::optional<ProposalEval> ev, bool adapting, double& tau, bool scalar_move) {
    const double alpha = acceptance(ev);
    if (rng_.uniform() < alpha) {
      params_ = std::move(ev->params);
      log_lik_ = ev->log_lik;
      log_prior_ = ev->log_prior;
      std::swap(cur_.emis, prop_.emis);
      std::swap(cur_.simplex, prop_.simplex);
      if (prop_dirty_basis_) {
        std::swap(cur_.first, prop_.first);
        std::swap(cur_.bas, prop_.bas);
      }
      counters_[static_cast<int>(kind)].accepted++;
    }
    if (adapting && tuning_.adapt) adapt(kind, alpha, tau, scalar_move);
  }

  // MH coin for proposals that never touched the caches (zeta, delta, Gamma)
  void decide_no_cache(MoveKind kind, std::optional<ProposalEval> ev, bool adapting, double& tau,
                       bool scalar_move) {
    const double alpha = acceptance(ev);
    if (rng_.uniform() < alpha) {
      params_ = std::move(ev->params);
      log_lik_ = ev->log_lik;
      log_prior_ = ev->log_prior;
      counters_[static_cast<int>(kind)].accepted++;
    }
    if (adapting && tuning_.adapt) adapt(kind, alpha, tau, scalar_move);
  }

  static double acceptance(const std::optional<ProposalEval>& ev) {
    if (!ev || std::isnan(ev->log_ratio)) return 0.0;
    return std::fmin(1.0, std::exp(ev->log_ratio));
  }

  void adapt(MoveKind kind, double alpha, double& tau, bool scalar_move) {
    const double target = scalar_move ? tuning_.accept_target_scalar : tuning_.accept_target;
    const double t = static_cast<double>(++adapt_steps_[static_cast<int>(kind)]);
    tau *= std::exp(2.0 * (alpha - target) / std::pow(10.0 + t, 0.6));
    tau = std::clamp(tau, 1e-8, 1e6);
  }

  const Dataset* data_;
  PriorConfig prior_;
  TuningParams tuning_;
  Rng rng_;
  HmmParams params_;
  double log_lik_ = 0.0;
  double log_prior_ = 0.0;
  Workspace cur_, prop_;
  bool prop_dirty_basis_ = false;
  std::array<MoveCounter, kMoveKinds> counters_{};
  std::array<std::uint64_t, kMoveKinds> adapt_steps_{};
};

// Chain driver: burn-in with adaptation, then thinned recording.  The first
// recorded draw is the state entering the sampling phase, so iters = 0 yields
// a trace holding only the initial state.  Bit-reproducible given the seed.
inline Trace run_chain(const Dataset& data, int n_states, const PriorConfig& prior, const TuningParams& tuning,
                       const Schedule& schedule, std::uint64_t seed, const ChainOptions& opts = {}) {
  schedule.validate();
  data.validate();
  HmmParams init;
  if (opts.init) {
    init = *opts.init;
  } else if (data.n_observed() > 0) {
    init = init_state(data, n_states, prior, derive_seed(seed, 1), opts.anchors, opts.zero_inflated);
  } else {
    Rng r(derive_seed(seed, 2));
    init = sample_prior(prior, n_states, r, opts.zero_inflated);
  }
  if (opts.symmetric_gamma && !init.gamma_symmetric) {
    if (n_states != 2) throw invalid_input("run_chain: symmetric transitions require two states");
    init.gamma_symmetric = true;
    double rho = 0.1;
    if (data.n_observed() == 0) {
      // no-data chains start from a prior draw of the switching rate
      Rng r(derive_seed(seed, 4));
      const double x = r.gamma(prior.eps1, 1.0), y = r.gamma(prior.eps1, 1.0);
      rho = std::clamp(x / (x + y), 1e-12, 1.0 - 1e-12);
    }
    init.gamma_uncon = Matrix(2, 2);
    init.gamma_uncon(0, 0) = init.gamma_uncon(1, 1) = 1.0 - rho;
    init.gamma_uncon(0, 1) = init.gamma_uncon(1, 0) = rho;
  }

  Chain chain(data, std::move(init), prior, tuning, derive_seed(seed, 3));

  const auto frozen_sweeps =
      static_cast<std::size_t>(opts.freeze_gamma_burn_frac * static_cast<double>(schedule.burn_in));
  for (std::size_t s = 0; s < schedule.burn_in; ++s) {
    chain.sweep(true, s < frozen_sweeps);
    if (opts.check_every && (s + 1) % opts.check_every == 0) chain.self_check();
  }

  Trace trace;
  trace.schedule = schedule;
  trace.n_states = n_states;
  trace.a = data.a;
  trace.b = data.b;
  trace.seed = seed;
  auto record = [&](std::uint64_t sweep) {
    trace.draws.push_back(chain.params());
    trace.sweeps.push_back(sweep);
    trace.log_lik.push_back(chain.log_lik());
    trace.log_prior.push_back(chain.log_prior_value());
    trace.k_series.push_back(chain.params().knots.k());
  };
  record(0);
  for (std::size_t s = 1; s <= schedule.iters; ++s) {
    chain.sweep(false);
    if (opts.check_every && s % opts.check_every == 0) chain.self_check();
    if (s % schedule.thin == 0) record(s);
  }
  trace.moves = chain.counters();
  trace.tuned = chain.tuning();
  return trace;
}

}  // namespace bshmm
