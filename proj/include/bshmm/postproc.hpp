#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "bshmm/sampler.hpp"
#include "bshmm/splines.hpp"
#include "bshmm/stats.hpp"

namespace bshmm {

namespace detail {

// integral of y^m B_k(y) dy per knot span, 4-node Gauss-Legendre (exact up to
// the degree-4 integrand of the first moment; ample for the second)
inline double basis_moment(const KnotConfig& cfg, int basis, int m) {
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                       0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                         0.3478548451374538};
  const auto& t = cfg.augmented;
  double acc = 0.0;
  for (int span = basis; span < basis + 4; ++span) {
    const double lo = t[span], hi = t[span + 1];
    if (hi <= lo) continue;
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (int q = 0; q < 4; ++q) {
      const double y = c + h * kNodes[q];
      const int s = find_span(cfg, y);
      const int j = basis - (s - 3);
      if (j < 0 || j > 3) continue;
      acc += h * kWeights[q] * std::pow(y, m) * basis_funs_unnormalized(cfg, s, y)[j];
    }
  }
  return acc * basis_norm_constant(cfg, basis);
}

}  // namespace detail

// evaluation grid over [a,b] with the endpoints pinned exactly, so strict
// range checks never trip on rounding
inline std::vector<double> make_grid(double a, double b, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  grid.front() = a;
  grid.back() = b;
  return grid;
}

// mean of the state emission density, computed exactly from the basis moments
inline double emission_mean(const KnotConfig& cfg, std::span<const double> coeff_row, int moment = 1) {
  double m = 0.0;
  for (int k = 0; k < cfg.n_basis(); ++k) m += coeff_row[k] * detail::basis_moment(cfg, k, moment);
  return m;
}

// Reorder states of one draw so emission means are ascending, ties broken by
// the second moment; permutes delta, Gamma rows and columns, coefficient rows
// and zero weights consistently.
inline std::vector<int> relabel_permutation(const HmmParams& p) {
  const int n = p.n_states;
  const Matrix simplex = p.coeff_simplex();
  std::vector<double> m1(n), m2(n);
  for (int i = 0; i < n; ++i) {
    m1[i] = emission_mean(p.knots, simplex.row(i), 1);
    m2[i] = emission_mean(p.knots, simplex.row(i), 2);
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    if (m1[a] != m1[b]) return m1[a] < m1[b];
    return m2[a] < m2[b];
  });
  return perm;  // perm[new] = old
}

inline void apply_permutation(HmmParams& p, const std::vector<int>& perm) {
  const int n = p.n_states;
  HmmParams out = p;
  for (int i = 0; i < n; ++i) {
    const int src = perm[i];
    for (std::size_t j = 0; j < p.coeffs_uncon.cols(); ++j) out.coeffs_uncon(i, j) = p.coeffs_uncon(src, j);
    out.delta_uncon[i] = p.delta_uncon[src];
    for (int j = 0; j < n; ++j) out.gamma_uncon(i, j) = p.gamma_uncon(perm[i], perm[j]);
    if (p.zero_weights) (*out.zero_weights)[i] = (*p.zero_weights)[src];
  }
  p = std::move(out);
}

enum class RelabelCriterion {
  emission_mean,  // order states by the mean of their emission density
  reference       // match each draw to the highest-posterior draw's means
};

// Post-hoc label switching fix applied per draw.  Leaves the likelihood of
// every draw unchanged and is idempotent.
inline void relabel(Trace& trace, RelabelCriterion criterion = RelabelCriterion::emission_mean) {
  if (criterion == RelabelCriterion::emission_mean) {
    for (auto& draw : trace.draws) apply_permutation(draw, relabel_permutation(draw));
    return;
  }
  if (trace.draws.empty()) return;
  std::size_t ref = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace.log_lik[i] + trace.log_prior[i] > trace.log_lik[ref] + trace.log_prior[ref]) ref = i;
  const int n = trace.n_states;
  std::vector<double> ref_means(n);
  {
    const Matrix simplex = trace.draws[ref].coeff_simplex();
    for (int i = 0; i < n; ++i) ref_means[i] = emission_mean(trace.draws[ref].knots, simplex.row(i), 1);
  }
  for (auto& draw : trace.draws) {
    const Matrix simplex = draw.coeff_simplex();
    std::vector<double> means(n);
    for (int i = 0; i < n; ++i) means[i] = emission_mean(draw.knots, simplex.row(i), 1);
    std::vector<int> perm(n), best_perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int i = 0; i < n; ++i) cost += (means[perm[i]] - ref_means[i]) * (means[perm[i]] - ref_means[i]);
      if (cost < best) {
        best = cost;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    apply_permutation(draw, best_perm);
  }
}

// stationary distribution of a row-stochastic matrix: solve pi (Gamma - I) = 0
// with the normalization sum(pi) = 1 by Gauss-Jordan with partial pivoting
inline std::vector<double> stationary_distribution(const Matrix& gamma) {
  const std::size_t n = gamma.rows();
  if (n == 1) return {1.0};
  // transpose system: (Gamma^T - I) pi = 0, last row replaced by sum = 1
  Matrix a(n, n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = gamma(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  a(n - 1, n) = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw numeric_error("stationary_distribution: singular system");
    if (piv != col)
      for (std::size_t j = 0; j <= n; ++j) std::swap(a(piv, j), a(col, j));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / a(col, col);
      for (std::size_t j = col; j <= n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = a(i, n) / a(i, i);
  return pi;
}

// Pointwise density summary over the evaluation grid, conditional on modal K.
struct DensitySummary {
  std::vector<double> grid;
  Matrix mean;  // N x grid
  Matrix lo;    // central 90% band
  Matrix hi;
  std::vector<double> stationary;  // weights from the posterior-mean Gamma
};

struct Summary {
  int n_states = 0;
  int modal_k = 0;
  double p_modal_k = 0.0;
  std::size_t n_draws = 0;
  std::size_t n_modal = 0;
  double a = 0.0, b = 1.0;
  std::vector<double> knots_mean, knots_sd;
  Matrix coeff_mean, coeff_sd;  // simplex scale
  std::vector<double> delta_mean, delta_sd;
  Matrix gamma_mean, gamma_sd;
  double zeta_mean = 0.0, zeta_sd = 0.0;
  std::optional<std::vector<double>> w_mean, w_sd;
  DensitySummary density;

  // single fitted HMM at the posterior means, conditional on modal K
  HmmParams point_estimate() const {
    HmmParams p;
    p.n_states = n_states;
    p.knots = build_knot_config(a, b, knots_mean);
    p.coeffs_uncon = Matrix(coeff_mean.rows(), coeff_mean.cols());
    for (std::size_t i = 0; i < coeff_mean.rows(); ++i)
      for (std::size_t j = 0; j < coeff_mean.cols(); ++j)
        p.coeffs_uncon(i, j) = std::log(std::max(coeff_mean(i, j), 1e-300));
    p.delta_uncon = delta_mean;
    p.gamma_uncon = gamma_mean;
    p.zeta = zeta_mean;
    if (w_mean) p.zero_weights = *w_mean;
    p.validate();
    return p;
  }
};

// Modal-K conditional posterior summary: means and standard deviations of all
// parameter blocks over the draws with the modal knot count, plus pointwise
// posterior mean and central 90% band of each state emission density.
inline Summary summarize(const Trace& trace, const std::vector<double>& grid) {
  if (trace.size() == 0) throw invalid_input("summarize: empty trace");
  Summary s;
  s.n_states = trace.n_states;
  s.n_draws = trace.size();
  s.a = trace.a;
  s.b = trace.b;

  std::map<int, std::size_t> k_counts;
  for (int k : trace.k_series) k_counts[k]++;
  s.modal_k = k_counts.begin()->first;
  for (const auto& [k, c] : k_counts)
    if (c > k_counts[s.modal_k]) s.modal_k = k;
  s.n_modal = k_counts[s.modal_k];
  s.p_modal_k = static_cast<double>(s.n_modal) / static_cast<double>(s.n_draws);

  std::vector<const HmmParams*> kept;
  kept.reserve(s.n_modal);
  for (const auto& d : trace.draws)
    if (d.knots.k() == s.modal_k) kept.push_back(&d);

  const int n = trace.n_states;
  const int nb = s.modal_k + 4;
  const auto accumulate = [&](auto&& get, std::size_t count) {
    std::vector<double> vals(kept.size());
    for (std::size_t d = 0; d < kept.size(); ++d) vals[d] = get(*kept[d], count);
    return std::pair<double, double>(mean_of(vals), sd_of(vals));
  };

  s.knots_mean.resize(s.modal_k);
  s.knots_sd.resize(s.modal_k);
  for (int j = 0; j < s.modal_k; ++j) {
    auto [m, sd] = accumulate([j](const HmmParams& p, std::size_t) { return p.knots.interior[j]; }, 0);
    s.knots_mean[j] = m;
    s.knots_sd[j] = sd;
  }

  // simplex-scale coefficient summaries; the mean of simplex rows is again a
  // simplex row
  std::vector<Matrix> simplexes(kept.size());
  for (std::size_t d = 0; d < kept.size(); ++d) simplexes[d] = kept[d]->coeff_simplex();
  s.coeff_mean = Matrix(n, nb);
  s.coeff_sd = Matrix(n, nb);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < nb; ++j) {
      std::vector<double> vals(kept.size());
      for (std::size_t d = 0; d < kept.size(); ++d) vals[d] = simplexes[d](i, j);
      s.coeff_mean(i, j) = mean_of(vals);
      s.coeff_sd(i, j) = sd_of(vals);
    }

  s.delta_mean.resize(n);
  s.delta_sd.resize(n);
  for (int i = 0; i < n; ++i) {
    auto [m, sd] = accumulate([i](const HmmParams& p, std::size_t) { return p.delta()[i]; }, 0);
    s.delta_mean[i] = m;
    s.delta_sd[i] = sd;
  }
  s.gamma_mean = Matrix(n, n);
  s.gamma_sd = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto [m, sd] =
          accumulate([i, j](const HmmParams& p, std::size_t) { return p.gamma()(i, j); }, 0);
      s.gamma_mean(i, j) = m;
      s.gamma_sd(i, j) = sd;
    }
  {
    auto [m, sd] = accumulate([](const HmmParams& p, std::size_t) { return p.zeta; }, 0);
    s.zeta_mean = m;
    s.zeta_sd = sd;
  }
  if (trace.draws.front().zero_weights) {
    s.w_mean.emplace(n);
    s.w_sd.emplace(n);
    for (int i = 0; i < n; ++i) {
      auto [m, sd] = accumulate([i](const HmmParams& p, std::size_t) { return (*p.zero_weights)[i]; }, 0);
      (*s.w_mean)[i] = m;
      (*s.w_sd)[i] = sd;
    }
  }

  // density curves over all modal-K draws
  s.density.grid = grid;
  const std::size_t g = grid.size();
  s.density.mean = Matrix(n, g, 0.0);
  s.density.lo = Matrix(n, g, 0.0);
  s.density.hi = Matrix(n, g, 0.0);
  std::vector<double> buf(kept.size());
  for (int i = 0; i < n; ++i)
    for (std::size_t x = 0; x < g; ++x) {
      for (std::size_t d = 0; d < kept.size(); ++d)
        buf[d] = emission_density(kept[d]->knots, simplexes[d].row(i), grid[x]);
      s.density.mean(i, x) = mean_of(buf);
      std::vector<double> sorted = buf;
      std::sort(sorted.begin(), sorted.end());
      const auto q = [&](double p) {
        const double pos = p * static_cast<double>(sorted.size() - 1);
        const auto lo_i = static_cast<std::size_t>(pos);
        const std::size_t hi_i = std::min(lo_i + 1, sorted.size() - 1);
        const double f = pos - static_cast<double>(lo_i);
        return sorted[lo_i] * (1.0 - f) + sorted[hi_i] * f;
      };
      s.density.lo(i, x) = q(0.05);
      s.density.hi(i, x) = q(0.95);
    }
  s.density.stationary = stationary_distribution([&] {
    Matrix gnorm(n, n);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += s.gamma_mean(i, j);
      for (int j = 0; j < n; ++j) gnorm(i, j) = s.gamma_mean(i, j) / row;
    }
    return gnorm;
  }());
  return s;
}

// Kullback-Leibler divergence of grid densities by the trapezoid rule, with
// the reference density floored to keep the integrand finite.
inline double kld(std::span<const double> grid, std::span<const double> p, std::span<const double> q) {
  if (grid.size() != p.size() || grid.size() != q.size()) throw invalid_input("kld: length mismatch");
  if (grid.size() < 2) throw invalid_input("kld: need at least two grid points");
  auto term = [&](std::size_t i) {
    if (p[i] <= 0.0) return 0.0;
    return p[i] * std::log(p[i] / std::max(q[i], 1e-12));
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    acc += 0.5 * (grid[i + 1] - grid[i]) * (term(i) + term(i + 1));
  return acc;
}

// Fraction of correctly decoded time points, maximized over all relabellings
// of the decoded path (N <= 5 keeps the permutation search trivial).
inline double decoding_accuracy(const std::vector<int>& decoded, const std::vector<int>& truth) {
  if (decoded.size() != truth.size()) throw invalid_input("decoding_accuracy: length mismatch");
  if (decoded.empty()) return 1.0;
  int n_states = 0;
  for (int s : decoded) n_states = std::max(n_states, s + 1);
  for (int s : truth) n_states = std::max(n_states, s + 1);
  std::vector<int> perm(n_states);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < decoded.size(); ++t)
      if (perm[decoded[t]] == truth[t]) ++hits;
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(decoded.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace bshmm
