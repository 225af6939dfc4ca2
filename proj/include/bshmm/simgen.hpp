#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "bshmm/hmm.hpp"
#include "bshmm/rng.hpp"
#include "bshmm/splines.hpp"

namespace bshmm {

// Simulated data with the generating truth attached: the true state path, the
// true transition structure and a per-state density oracle for KLD scoring.
struct GroundTruth {
  Dataset data;
  std::vector<int> states;  // 0-based
  std::vector<double> true_delta;
  Matrix true_gamma;
  std::optional<std::vector<double>> zero_weights;
  std::function<double(int state, double y)> density_oracle;  // continuous component
};

namespace detail {

inline std::vector<int> simulate_chain(const std::vector<double>& delta, const Matrix& gamma, std::size_t n,
                                       Rng& rng) {
  std::vector<int> states(n);
  if (n == 0) return states;
  auto draw_from = [&](std::span<const double> probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
  };
  states[0] = draw_from(delta);
  for (std::size_t t = 1; t < n; ++t) states[t] = draw_from(gamma.row(states[t - 1]));
  return states;
}

inline double normal_mixture_pdf(double y, std::span<const double> weights, std::span<const double> means,
                                 std::span<const double> sds) {
  double f = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const double z = (y - means[c]) / sds[c];
    f += weights[c] * std::exp(-0.5 * z * z) / (sds[c] * 2.5066282746310005024);
  }
  return f;
}

inline void set_bounds_from_range(Dataset& d) {
  double lo = d.obs.empty() ? 0.0 : d.obs[0], hi = lo;
  for (double y : d.obs) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-6);
  d.a = lo - pad;
  d.b = hi + pad;
}

}  // namespace detail

// 2-state benchmark: state-1 emissions N(-15, 11^2), state-2 emissions the
// mixture 0.35 N(-5, 9^2) + 0.65 N(30, 10^2), symmetric switching rate 0.1.
inline GroundTruth simulate_model1(std::size_t n, std::uint64_t seed) {
  GroundTruth g;
  g.true_delta = {0.5, 0.5};
  g.true_gamma = Matrix(2, 2);
  g.true_gamma(0, 0) = 0.9;
  g.true_gamma(0, 1) = 0.1;
  g.true_gamma(1, 0) = 0.1;
  g.true_gamma(1, 1) = 0.9;
  Rng rng(derive_seed(seed, 11));
  g.states = detail::simulate_chain(g.true_delta, g.true_gamma, n, rng);
  g.data.obs.resize(n);
  g.data.missing.assign(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (g.states[t] == 0) {
      g.data.obs[t] = rng.normal(-15.0, 11.0);
    } else {
      g.data.obs[t] = rng.uniform() < 0.35 ? rng.normal(-5.0, 9.0) : rng.normal(30.0, 10.0);
    }
  }
  detail::set_bounds_from_range(g.data);
  g.density_oracle = [](int state, double y) {
    static const std::vector<double> w1{1.0}, m1{-15.0}, s1{11.0};
    static const std::vector<double> w2{0.35, 0.65}, m2{-5.0, 30.0}, s2{9.0, 10.0};
    return state == 0 ? detail::normal_mixture_pdf(y, w1, m1, s1) : detail::normal_mixture_pdf(y, w2, m2, s2);
  };
  return g;
}

// 2-state trimodal benchmark: equal-weight three-component normal mixtures
// with unit variances, means (-4, 0, 8) and (-3, 1, 9), switching rate rho.
inline GroundTruth simulate_model3(std::size_t n, double rho, std::uint64_t seed) {
  GroundTruth g;
  g.true_delta = {0.5, 0.5};
  g.true_gamma = Matrix(2, 2);
  g.true_gamma(0, 0) = 1.0 - rho;
  g.true_gamma(0, 1) = rho;
  g.true_gamma(1, 0) = rho;
  g.true_gamma(1, 1) = 1.0 - rho;
  Rng rng(derive_seed(seed, 13));
  g.states = detail::simulate_chain(g.true_delta, g.true_gamma, n, rng);
  g.data.obs.resize(n);
  g.data.missing.assign(n, 0);
  static const double means[2][3] = {{-4.0, 0.0, 8.0}, {-3.0, 1.0, 9.0}};
  for (std::size_t t = 0; t < n; ++t) {
    const int c = static_cast<int>(rng.uniform_int(3));
    g.data.obs[t] = rng.normal(means[g.states[t]][c], 1.0);
  }
  detail::set_bounds_from_range(g.data);
  g.density_oracle = [](int state, double y) {
    static const std::vector<double> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    static const std::vector<double> m0{-4.0, 0.0, 8.0}, m1{-3.0, 1.0, 9.0};
    static const std::vector<double> s{1.0, 1.0, 1.0};
    return detail::normal_mixture_pdf(y, w, state == 0 ? m0 : m1, s);
  };
  return g;
}

// quantile of one normalized basis density by bisection of its CDF
inline double basis_quantile(const KnotConfig& cfg, int basis, double p, double tol = 1e-10) {
  double lo = cfg.augmented[basis], hi = cfg.augmented[basis + 4];
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (basis_cdf(cfg, basis, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Exact sampler for a spline-emission HMM: emissions are simplex mixtures of
// basis densities, so draw a basis index from the coefficient row and invert
// that basis CDF.
inline GroundTruth simulate_spline_hmm(const HmmParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  GroundTruth g;
  g.true_delta = params.delta();
  g.true_gamma = params.gamma();
  Rng rng(derive_seed(seed, 17));
  g.states = detail::simulate_chain(g.true_delta, g.true_gamma, n, rng);
  g.data.obs.resize(n);
  g.data.missing.assign(n, 0);
  g.data.a = params.knots.a;
  g.data.b = params.knots.b;
  const Matrix simplex = params.coeff_simplex();
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = simplex.row(g.states[t]);
    const double u = rng.uniform();
    double acc = 0.0;
    int basis = params.knots.n_basis() - 1;
    for (int k = 0; k < params.knots.n_basis(); ++k) {
      acc += row[k];
      if (u <= acc) {
        basis = k;
        break;
      }
    }
    g.data.obs[t] = basis_quantile(params.knots, basis, rng.uniform());
  }
  const KnotConfig knots = params.knots;
  g.density_oracle = [knots, simplex](int state, double y) {
    return emission_density(knots, simplex.row(state), y);
  };
  return g;
}

// Zero-inflated spline HMM: with probability w_{x_t} emit exactly 0, else
// draw from the state's spline density.
inline GroundTruth simulate_zero_inflated(const HmmParams& params, std::size_t n, std::uint64_t seed) {
  if (!params.zero_weights) throw invalid_input("simulate_zero_inflated: params carry no zero weights");
  GroundTruth g = simulate_spline_hmm(params, n, derive_seed(seed, 19));
  g.zero_weights = *params.zero_weights;
  Rng rng(derive_seed(seed, 23));
  for (std::size_t t = 0; t < n; ++t)
    if (rng.uniform() < (*params.zero_weights)[g.states[t]]) g.data.obs[t] = 0.0;
  if (!g.data.obs.empty()) g.data.a = std::min(g.data.a, 0.0);
  return g;
}

// Fixed 3-state spline truth with the qualitative shapes of the second
// simulation benchmark: positively skewed, bimodal, negatively skewed, with
// the sticky transition matrix from that setup.
inline HmmParams model2_spline_params() {
  HmmParams p;
  p.n_states = 3;
  p.knots = build_knot_config(0.0, 30.0, {4.0, 8.0, 12.0, 16.0, 20.0, 24.0});
  const double rows[3][10] = {
      // unimodal, positively skewed: peak near 4, long right tail
      {0.35, 0.30, 0.14, 0.09, 0.05, 0.03, 0.02, 0.01, 0.006, 0.004},
      // bimodal: modes near 7 and 22
      {0.02, 0.08, 0.22, 0.13, 0.05, 0.05, 0.13, 0.22, 0.08, 0.02},
      // unimodal, negatively skewed: mirror of state 1
      {0.004, 0.006, 0.01, 0.02, 0.03, 0.05, 0.09, 0.14, 0.30, 0.35},
  };
  p.coeffs_uncon = Matrix(3, 10);
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 10; ++j) s += rows[i][j];
    for (int j = 0; j < 10; ++j) p.coeffs_uncon(i, j) = std::log(rows[i][j] / s);
  }
  p.delta_uncon = {1.0, 1.0, 1.0};
  p.gamma_uncon = Matrix(3, 3);
  const double gamma[3][3] = {{0.85, 0.1, 0.05}, {0.075, 0.85, 0.075}, {0.05, 0.1, 0.85}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p.gamma_uncon(i, j) = gamma[i][j];
  p.zeta = 1.0;
  return p;
}

}  // namespace bshmm
