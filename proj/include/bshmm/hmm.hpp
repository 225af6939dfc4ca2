#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bshmm/errors.hpp"
#include "bshmm/matrix.hpp"
#include "bshmm/splines.hpp"
#include "bshmm/stats.hpp"

namespace bshmm {

// Observation sequence with per-point missingness and the assumed emission
// support [a,b]. Values at missing positions are ignored.
struct Dataset {
  std::vector<double> obs;
  std::vector<std::uint8_t> missing;  // 1 = missing
  double a = 0.0;
  double b = 1.0;

  std::size_t size() const { return obs.size(); }

  std::size_t n_observed() const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < obs.size(); ++t)
      if (!missing[t]) ++n;
    return n;
  }

  void validate() const {
    if (missing.size() != obs.size()) throw invalid_input("dataset: mask length mismatch");
    if (!(a < b)) throw invalid_input("dataset: require a < b");
    for (std::size_t t = 0; t < obs.size(); ++t)
      if (!missing[t] && (obs[t] < a || obs[t] > b))
        throw invalid_input("dataset: observation " + std::to_string(t + 1) + " outside [a,b]");
  }
};

inline Dataset make_dataset(std::vector<double> obs, double a, double b) {
  Dataset d;
  d.missing.assign(obs.size(), 0);
  d.obs = std::move(obs);
  d.a = a;
  d.b = b;
  d.validate();
  return d;
}

// Full parameter state of a spline-emission HMM, stored on the unconstrained
// scale: coefficient rows map to the simplex by softmax, delta and Gamma rows
// normalize to probabilities.  zero_weights, when present, switches the
// emissions to the zero-inflated form w_i at y = 0, (1-w_i) f_i(y) at y > 0.
struct HmmParams {
  int n_states = 1;
  KnotConfig knots;
  Matrix coeffs_uncon;               // N x (K+4)
  std::vector<double> delta_uncon;   // length N, positive
  Matrix gamma_uncon;                // N x N, positive
  double zeta = 1.0;
  std::optional<std::vector<double>> zero_weights;  // each in (0,1)
  // structural constraint gamma_12 = gamma_21 = rho for two-state chains
  // (the trimodal benchmark setting); gamma_uncon then holds the stochastic
  // matrix [[1-rho, rho], [rho, 1-rho]] itself
  bool gamma_symmetric = false;

  Matrix coeff_simplex() const {
    Matrix a(coeffs_uncon.rows(), coeffs_uncon.cols());
    for (std::size_t i = 0; i < coeffs_uncon.rows(); ++i) softmax(coeffs_uncon.row(i), a.row(i));
    return a;
  }

  std::vector<double> delta() const { return normalized(delta_uncon); }

  Matrix gamma() const {
    Matrix g(gamma_uncon.rows(), gamma_uncon.cols());
    for (std::size_t i = 0; i < gamma_uncon.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < gamma_uncon.cols(); ++j) s += gamma_uncon(i, j);
      for (std::size_t j = 0; j < gamma_uncon.cols(); ++j) g(i, j) = gamma_uncon(i, j) / s;
    }
    return g;
  }

  void validate() const {
    const auto n = static_cast<std::size_t>(n_states);
    if (n < 1) throw invalid_input("params: need at least one state");
    if (coeffs_uncon.rows() != n || coeffs_uncon.cols() != static_cast<std::size_t>(knots.n_basis()))
      throw invalid_input("params: coefficient shape mismatch");
    if (delta_uncon.size() != n || gamma_uncon.rows() != n || gamma_uncon.cols() != n)
      throw invalid_input("params: delta/gamma shape mismatch");
    for (double d : delta_uncon)
      if (!(d > 0.0)) throw invalid_input("params: delta_uncon must be positive");
    for (double g : gamma_uncon.data())
      if (!(g > 0.0)) throw invalid_input("params: gamma_uncon must be positive");
    if (!(zeta > 0.0)) throw invalid_input("params: zeta must be positive");
    if (zero_weights) {
      if (zero_weights->size() != n) throw invalid_input("params: zero_weights length mismatch");
      int at_one = 0;
      for (double w : *zero_weights) {
        if (w < 0.0 || w > 1.0) throw invalid_input("params: zero weight outside [0,1]");
        if (w == 1.0) ++at_one;
      }
      if (at_one > 1) throw invalid_input("params: at most one zero weight may equal 1");
    }
    if (gamma_symmetric) {
      if (n != 2) throw invalid_input("params: symmetric transitions require exactly two states");
      const double rho = gamma_uncon(0, 1);
      if (!(rho > 0.0 && rho < 1.0) || gamma_uncon(1, 0) != rho || gamma_uncon(0, 0) != 1.0 - rho ||
          gamma_uncon(1, 1) != 1.0 - rho)
        throw invalid_input("params: symmetric transition structure violated");
    }
  }
};

namespace detail {

// emission value for state i at observation y under the mixed-measure
// convention: the atom carries w_i, the continuous part (1-w_i) f_i(y)
inline double emission_value(const HmmParams& p, const Matrix& simplex, double y, std::size_t i) {
  if (p.zero_weights) {
    const double w = (*p.zero_weights)[i];
    if (y == 0.0) return w;
    return (1.0 - w) * emission_density(p.knots, simplex.row(i), y);
  }
  return emission_density(p.knots, simplex.row(i), y);
}

// n x N matrix of emission values; missing rows are all ones (P(y_t) = I)
inline Matrix emission_matrix(const HmmParams& p, const Dataset& data) {
  const auto n = data.size();
  const auto n_states = static_cast<std::size_t>(p.n_states);
  const Matrix simplex = p.coeff_simplex();
  Matrix e(n, n_states, 1.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (data.missing[t]) continue;
    for (std::size_t i = 0; i < n_states; ++i) {
      const double v = emission_value(p, simplex, data.obs[t], i);
      if (!std::isfinite(v)) throw numeric_error("non-finite emission at t = " + std::to_string(t + 1));
      e(t, i) = v;
    }
  }
  return e;
}

inline double forward_pass(const std::vector<double>& delta, const Matrix& gamma, const Matrix& emis,
                           Matrix* alpha_out, std::vector<double>* log_scale_out) {
  const std::size_t n = emis.rows(), n_states = emis.cols();
  double loglik = 0.0;
  std::vector<double> v(n_states), w(n_states);
  for (std::size_t i = 0; i < n_states; ++i) v[i] = delta[i] * emis(0, i);
  for (std::size_t t = 0;; ++t) {
    double c = 0.0;
    for (std::size_t i = 0; i < n_states; ++i) c += v[i];
    if (!(c > 0.0) || !std::isfinite(c))
      throw numeric_error("forward underflow at t = " + std::to_string(t + 1));
    for (std::size_t i = 0; i < n_states; ++i) v[i] /= c;
    loglik += std::log(c);
    if (alpha_out)
      for (std::size_t i = 0; i < n_states; ++i) (*alpha_out)(t, i) = v[i];
    if (log_scale_out) (*log_scale_out)[t] = std::log(c);
    if (t + 1 == n) break;
    for (std::size_t j = 0; j < n_states; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_states; ++i) s += v[i] * gamma(i, j);
      w[j] = s * emis(t + 1, j);
    }
    v.swap(w);
  }
  return loglik;
}

}  // namespace detail

// log of Eq-style forward likelihood delta P(y_1) Gamma P(y_2) ... 1, scaled
// per step; O(N^2 n).  n = 0 gives 0 (likelihood 1).
inline double log_likelihood(const HmmParams& params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Matrix emis = detail::emission_matrix(params, data);
  return detail::forward_pass(params.delta(), params.gamma(), emis, nullptr, nullptr);
}

// Most probable state path (0-based states), log-domain recursion, ties
// broken toward the lower state index.
inline std::vector<int> viterbi(const HmmParams& params, const Dataset& data) {
  const std::size_t n = data.size();
  const auto n_states = static_cast<std::size_t>(params.n_states);
  if (n == 0) return {};
  const Matrix emis = detail::emission_matrix(params, data);
  const auto delta = params.delta();
  const Matrix gamma = params.gamma();

  Matrix score(n, n_states);
  std::vector<std::vector<int>> back(n, std::vector<int>(n_states, 0));
  for (std::size_t i = 0; i < n_states; ++i) score(0, i) = std::log(delta[i]) + std::log(emis(0, i));
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < n_states; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t i = 0; i < n_states; ++i) {
        const double cand = score(t - 1, i) + std::log(gamma(i, j));
        if (cand > best) {
          best = cand;
          arg = static_cast<int>(i);
        }
      }
      score(t, j) = best + std::log(emis(t, j));
      back[t][j] = arg;
    }
  }
  double best = kNegInf;
  int arg = 0;
  for (std::size_t i = 0; i < n_states; ++i)
    if (score(n - 1, i) > best) {
      best = score(n - 1, i);
      arg = static_cast<int>(i);
    }
  if (!std::isfinite(best)) throw numeric_error("viterbi: no admissible path");
  std::vector<int> path(n);
  path[n - 1] = arg;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

// n x N smoothed posteriors P(x_t = i | y_{1:n}) by scaled forward-backward.
inline Matrix smoothed_probs(const HmmParams& params, const Dataset& data) {
  const std::size_t n = data.size();
  const auto n_states = static_cast<std::size_t>(params.n_states);
  const Matrix emis = detail::emission_matrix(params, data);
  const auto delta = params.delta();
  const Matrix gamma = params.gamma();

  Matrix alpha(n, n_states);
  std::vector<double> log_scale(n);
  detail::forward_pass(delta, gamma, emis, &alpha, &log_scale);

  Matrix post(n, n_states);
  std::vector<double> beta(n_states, 1.0), nxt(n_states);
  for (std::size_t t = n; t-- > 0;) {
    double row_sum = 0.0;
    for (std::size_t i = 0; i < n_states; ++i) {
      post(t, i) = alpha(t, i) * beta[i];
      row_sum += post(t, i);
    }
    for (std::size_t i = 0; i < n_states; ++i) post(t, i) /= row_sum;
    if (t == 0) break;
    const double c = std::exp(log_scale[t]);
    for (std::size_t i = 0; i < n_states; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_states; ++j) s += gamma(i, j) * emis(t, j) * beta[j];
      nxt[i] = s / c;
    }
    beta.swap(nxt);
  }
  return post;
}

// P(x_t <= i | y) rows, the cumulative form plotted in the applications
inline Matrix cumulative_probs(const Matrix& smoothed) {
  Matrix c = smoothed;
  for (std::size_t t = 0; t < c.rows(); ++t)
    for (std::size_t i = 1; i < c.cols(); ++i) c(t, i) += c(t, i - 1);
  return c;
}

}  // namespace bshmm
