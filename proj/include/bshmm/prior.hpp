#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bshmm/hmm.hpp"
#include "bshmm/rng.hpp"
#include "bshmm/splines.hpp"
#include "bshmm/stats.hpp"

namespace bshmm {

// Hyperparameters of the joint prior.  Defaults follow the vague choices used
// throughout: K uniform on {2..k_max}, knots as uniform order statistics,
// exp(coeff) ~ gamma(zeta,1), gamma/delta tilde ~ gamma(eps,1), zeta ~ gamma(1,1).
struct PriorConfig {
  int k_max = 50;
  double eps1 = 1.0;        // Dirichlet hyperparameter for Gamma rows
  double eps2 = 1.0;        // gamma shape for delta tilde
  double zeta_shape = 1.0;  // hyper-prior on zeta
  double zeta_rate = 1.0;
  double a = 0.0;  // knot support bounds
  double b = 1.0;

  void validate() const {
    if (k_max < 2) throw invalid_input("prior: k_max must be >= 2");
    if (!(eps1 > 0.0 && eps2 > 0.0 && zeta_shape > 0.0 && zeta_rate > 0.0))
      throw invalid_input("prior: hyperparameters must be positive");
    if (!(a < b)) throw invalid_input("prior: require a < b");
  }
};

// --- individual log-prior terms (each -inf outside its support) ---

inline double log_prior_k(int k, const PriorConfig& cfg) {
  if (k < 2 || k > cfg.k_max) return kNegInf;
  return -std::log(static_cast<double>(cfg.k_max - 1));
}

// order statistics of K uniforms: f(R_K | K) = K! / (b-a)^K
inline double log_prior_knots(const KnotConfig& knots, const PriorConfig& cfg) {
  const int k = knots.k();
  if (knots.a != cfg.a || knots.b != cfg.b) return kNegInf;
  double prev = cfg.a;
  for (double r : knots.interior) {
    if (!(prev < r && r < cfg.b)) return kNegInf;
    prev = r;
  }
  return std::lgamma(static_cast<double>(k) + 1.0) - k * std::log(cfg.b - cfg.a);
}

inline double log_prior_coeffs(const Matrix& coeffs_uncon, double zeta) {
  double s = 0.0;
  for (double x : coeffs_uncon.data()) s += loggamma_logpdf(x, zeta);
  return s;
}

inline double log_prior_zeta(double zeta, const PriorConfig& cfg) {
  return gamma_logpdf(zeta, cfg.zeta_shape, cfg.zeta_rate);
}

inline double log_prior_delta(const std::vector<double>& delta_uncon, const PriorConfig& cfg) {
  double s = 0.0;
  for (double d : delta_uncon) s += gamma_logpdf(d, cfg.eps2, 1.0);
  return s;
}

inline double log_prior_gamma_mat(const Matrix& gamma_uncon, const PriorConfig& cfg) {
  double s = 0.0;
  for (double g : gamma_uncon.data()) s += gamma_logpdf(g, cfg.eps1, 1.0);
  return s;
}

// under the symmetric two-state constraint the row prior reduces to
// Beta(eps1, eps1) on the single switching rate
inline double log_prior_gamma_symmetric(double rho, const PriorConfig& cfg) {
  if (!(rho > 0.0 && rho < 1.0)) return kNegInf;
  return (cfg.eps1 - 1.0) * (std::log(rho) + std::log1p(-rho)) + std::lgamma(2.0 * cfg.eps1) -
         2.0 * std::lgamma(cfg.eps1);
}

inline double log_prior_zero_weights(const std::optional<std::vector<double>>& w) {
  if (!w) return 0.0;
  for (double x : *w)
    if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return 0.0;  // uniform(0,1) per state
}

// Joint log prior of the reparametrized state.  Out-of-support states return
// -inf rather than throwing, so MH ratio arithmetic stays branch-free.
inline double log_prior(const HmmParams& p, const PriorConfig& cfg) {
  double s = log_prior_k(p.knots.k(), cfg);
  if (s == kNegInf) return kNegInf;
  s += log_prior_knots(p.knots, cfg);
  s += log_prior_coeffs(p.coeffs_uncon, p.zeta);
  s += log_prior_zeta(p.zeta, cfg);
  s += log_prior_delta(p.delta_uncon, cfg);
  s += p.gamma_symmetric ? log_prior_gamma_symmetric(p.gamma_uncon(0, 1), cfg)
                         : log_prior_gamma_mat(p.gamma_uncon, cfg);
  s += log_prior_zero_weights(p.zero_weights);
  return std::isnan(s) ? kNegInf : s;
}

// A draw from the joint prior; used by prior-recovery tests and as the
// starting state for chains without data.
inline HmmParams sample_prior(const PriorConfig& cfg, int n_states, Rng& rng, bool zero_inflated = false) {
  HmmParams p;
  p.n_states = n_states;
  const int k = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.k_max - 1)));
  std::vector<double> interior(k);
  for (double& r : interior) r = rng.uniform(cfg.a, cfg.b);
  std::sort(interior.begin(), interior.end());
  p.knots = build_knot_config(cfg.a, cfg.b, std::move(interior));
  p.zeta = rng.gamma(cfg.zeta_shape, cfg.zeta_rate);
  p.coeffs_uncon = Matrix(n_states, k + 4);
  // small zeta makes gamma draws underflow to zero; floor them so the log
  // stays representable
  for (double& x : p.coeffs_uncon.data()) x = std::log(std::max(rng.gamma(p.zeta, 1.0), 1e-300));
  p.delta_uncon.resize(n_states);
  for (double& d : p.delta_uncon) d = rng.gamma(cfg.eps2, 1.0);
  p.gamma_uncon = Matrix(n_states, n_states);
  for (double& g : p.gamma_uncon.data()) g = rng.gamma(cfg.eps1, 1.0);
  if (zero_inflated) {
    p.zero_weights.emplace(n_states);
    for (double& w : *p.zero_weights) w = rng.uniform();
  }
  return p;
}

namespace detail {

// empirical quantile of a sorted vector, linear interpolation
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Greville abscissa: the natural center of basis k
inline double basis_center(const KnotConfig& cfg, int basis) {
  const auto& t = cfg.augmented;
  return (t[basis + 1] + t[basis + 2] + t[basis + 3]) / 3.0;
}

}  // namespace detail

// Data-informed starting state: knots at quantiles of the observed values,
// coefficients from per-state slices of the sorted data (or from anchor
// locations when provided), uniform delta, mildly sticky Gamma.
inline HmmParams init_state(const Dataset& data, int n_states, const PriorConfig& cfg, std::uint64_t seed,
                            const std::optional<std::vector<double>>& anchors = std::nullopt,
                            bool zero_inflated = false) {
  if (n_states < 1) throw invalid_input("init_state: need at least one state");
  std::vector<double> values;
  for (std::size_t t = 0; t < data.size(); ++t)
    if (!data.missing[t]) values.push_back(data.obs[t]);
  if (values.empty()) throw invalid_input("init_state: empty data");
  std::sort(values.begin(), values.end());

  Rng rng(derive_seed(seed, 0x1417));
  HmmParams p;
  p.n_states = n_states;
  const int k = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::min(10, cfg.k_max) - 1)));

  std::vector<double> interior(k);
  for (int j = 0; j < k; ++j)
    interior[j] = detail::sorted_quantile(values, static_cast<double>(j + 1) / static_cast<double>(k + 1));
  // quantiles of discrete data may tie; fall back to an equally spaced grid
  bool ok = interior.front() > cfg.a && interior.back() < cfg.b;
  for (int j = 1; ok && j < k; ++j) ok = interior[j - 1] < interior[j];
  if (!ok)
    for (int j = 0; j < k; ++j)
      interior[j] = cfg.a + (cfg.b - cfg.a) * static_cast<double>(j + 1) / static_cast<double>(k + 1);
  p.knots = build_knot_config(cfg.a, cfg.b, std::move(interior));

  p.coeffs_uncon = Matrix(n_states, k + 4);
  if (anchors) {
    if (anchors->size() != static_cast<std::size_t>(n_states))
      throw invalid_input("init_state: one anchor per state required");
    // overall-histogram profile, gently windowed around each state's anchor:
    // equal anchors start every state at the shared marginal shape instead of
    // partitioning the data range across states
    std::vector<double> marginal(k + 4, 0.0);
    for (double y : values) {
      const int span = detail::find_span(p.knots, std::clamp(y, cfg.a, cfg.b));
      const auto n = detail::basis_funs_unnormalized(p.knots, span, std::clamp(y, cfg.a, cfg.b));
      for (int j = 0; j < 4; ++j) marginal[span - 3 + j] += n[j];
    }
    for (double& m : marginal) m /= static_cast<double>(values.size());
    const double spread = (cfg.b - cfg.a) / 4.0;
    for (int i = 0; i < n_states; ++i)
      for (int j = 0; j < k + 4; ++j) {
        const double d = (detail::basis_center(p.knots, j) - (*anchors)[i]) / spread;
        p.coeffs_uncon(i, j) = std::log(marginal[j] * std::exp(-0.5 * d * d) + 1e-3);
      }
  } else {
    // partition-of-unity histogram: state i sees the i-th slice of sorted data
    for (int i = 0; i < n_states; ++i) {
      const std::size_t lo = values.size() * i / n_states;
      const std::size_t hi = std::max(values.size() * (i + 1) / n_states, lo + 1);
      std::vector<double> mass(k + 4, 0.0);
      for (std::size_t t = lo; t < hi && t < values.size(); ++t) {
        const int span = detail::find_span(p.knots, std::clamp(values[t], cfg.a, cfg.b));
        const auto n = detail::basis_funs_unnormalized(p.knots, span, std::clamp(values[t], cfg.a, cfg.b));
        for (int j = 0; j < 4; ++j) mass[span - 3 + j] += n[j];
      }
      const double total = static_cast<double>(hi - lo);
      for (int j = 0; j < k + 4; ++j) p.coeffs_uncon(i, j) = std::log(mass[j] / total + 1e-3);
    }
  }

  p.delta_uncon.assign(n_states, 1.0);
  p.gamma_uncon = Matrix(n_states, n_states, 1.0);
  for (int i = 0; i < n_states; ++i) p.gamma_uncon(i, i) = 5.0;
  p.zeta = 1.0;
  if (zero_inflated) {
    p.zero_weights.emplace(n_states);
    for (int i = 0; i < n_states; ++i) {
      const std::size_t lo = values.size() * i / n_states;
      const std::size_t hi = std::max(values.size() * (i + 1) / n_states, lo + 1);
      std::size_t zeros = 0;
      for (std::size_t t = lo; t < hi && t < values.size(); ++t)
        if (values[t] == 0.0) ++zeros;
      (*p.zero_weights)[i] = std::clamp(static_cast<double>(zeros) / static_cast<double>(hi - lo), 0.02, 0.98);
    }
  }
  p.validate();
  return p;
}

}  // namespace bshmm
