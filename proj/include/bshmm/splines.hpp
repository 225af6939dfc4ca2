#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bshmm/errors.hpp"
#include "bshmm/matrix.hpp"

namespace bshmm {

// Cubic B-spline knot configuration on [a,b] with K >= 2 interior knots.
// The augmented sequence repeats each boundary knot four times, so K interior
// knots span K+4 basis functions.
struct KnotConfig {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> interior;   // strictly increasing, inside (a,b)
  std::vector<double> augmented;  // size K+8

  int k() const { return static_cast<int>(interior.size()); }
  int n_basis() const { return k() + 4; }
};

inline KnotConfig build_knot_config(double a, double b, std::vector<double> interior) {
  if (!(a < b)) throw invalid_input("invalid-knots: require a < b");
  if (interior.size() < 2) throw invalid_input("too-few-knots: require K >= 2");
  double prev = a;
  for (double r : interior) {
    if (!(prev < r)) throw invalid_input("invalid-knots: interior knots must be strictly increasing inside (a,b)");
    prev = r;
  }
  if (!(interior.back() < b)) throw invalid_input("invalid-knots: interior knots must be strictly increasing inside (a,b)");

  KnotConfig cfg;
  cfg.a = a;
  cfg.b = b;
  cfg.augmented.reserve(interior.size() + 8);
  cfg.augmented.insert(cfg.augmented.end(), 4, a);
  cfg.augmented.insert(cfg.augmented.end(), interior.begin(), interior.end());
  cfg.augmented.insert(cfg.augmented.end(), 4, b);
  cfg.interior = std::move(interior);
  return cfg;
}

// The four basis values that can be nonzero at one point. Basis indices
// first..first+3 (0-based); values are on the normalized (unit-integral) scale.
struct LocalBasis {
  int first = 0;
  std::array<double, 4> values{};
};

namespace detail {

// 0-based span index m with t[m] <= y < t[m+1]; y == b maps to the last
// non-degenerate span.  Valid spans are m = 3 .. K+3.
inline int find_span(const KnotConfig& cfg, double y) {
  const auto& t = cfg.augmented;
  const int k = cfg.k();
  if (y >= cfg.b) return k + 3;
  // binary search over interior boundaries t[4..k+3]
  int lo = 3, hi = k + 3;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (t[mid] <= y)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

// Cox-de Boor for the four degree-3 basis functions alive on span m,
// unnormalized (partition of unity).  Denominators are positive for every
// non-degenerate span, including the 4-fold boundary knots.
inline std::array<double, 4> basis_funs_unnormalized(const KnotConfig& cfg, int span, double y) {
  const auto& t = cfg.augmented;
  std::array<double, 4> n{1.0, 0.0, 0.0, 0.0};
  std::array<double, 4> left{}, right{};
  for (int j = 1; j <= 3; ++j) {
    left[j] = y - t[span + 1 - j];
    right[j] = t[span + j] - y;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  return n;
}

}  // namespace detail

// normalization constant turning basis k into a unit-integral density:
// integral of the unnormalized cubic basis is span/4
inline double basis_norm_constant(const KnotConfig& cfg, int basis) {
  return 4.0 / (cfg.augmented[basis + 4] - cfg.augmented[basis]);
}

inline LocalBasis eval_basis_local(const KnotConfig& cfg, double y) {
  if (y < cfg.a || y > cfg.b) throw invalid_input("out-of-range: y outside [a,b]");
  const int span = detail::find_span(cfg, y);
  const auto n = detail::basis_funs_unnormalized(cfg, span, y);
  LocalBasis out;
  out.first = span - 3;
  for (int j = 0; j < 4; ++j) out.values[j] = n[j] * basis_norm_constant(cfg, out.first + j);
  return out;
}

// All K+4 normalized basis values at y (at most four nonzero).
struct BasisValues {
  std::vector<double> values;
};

inline BasisValues eval_basis(const KnotConfig& cfg, double y) {
  const LocalBasis lb = eval_basis_local(cfg, y);
  BasisValues out;
  out.values.assign(cfg.n_basis(), 0.0);
  for (int j = 0; j < 4; ++j) out.values[lb.first + j] = lb.values[j];
  return out;
}

// f(y) = sum_k a_k B_k(y) for a simplex coefficient row.
inline double emission_density(const KnotConfig& cfg, std::span<const double> coeff_row, double y) {
  const LocalBasis lb = eval_basis_local(cfg, y);
  double f = 0.0;
  for (int j = 0; j < 4; ++j) f += coeff_row[lb.first + j] * lb.values[j];
  return f;
}

namespace detail {

// 4-node Gauss-Legendre on [lo,hi]; exact for the cubic pieces of the basis.
inline double integrate_basis_piece(const KnotConfig& cfg, int basis, double lo, double hi) {
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                       0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                         0.3478548451374538};
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double s = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double y = c + h * kNodes[q];
    const int span = find_span(cfg, y);
    const int j = basis - (span - 3);
    if (j < 0 || j > 3) continue;
    s += kWeights[q] * basis_funs_unnormalized(cfg, span, y)[j];
  }
  return s * h;
}

}  // namespace detail

// integral of the normalized basis over [a,y]; 0 at a, 1 at b
inline double basis_cdf(const KnotConfig& cfg, int basis, double y) {
  if (y < cfg.a || y > cfg.b) throw invalid_input("out-of-range: y outside [a,b]");
  const auto& t = cfg.augmented;
  const double lo = t[basis], hi = t[basis + 4];
  if (y <= lo) return 0.0;
  if (y >= hi) return 1.0;
  double acc = 0.0;
  for (int m = basis; m < basis + 4; ++m) {
    const double s0 = std::max(t[m], lo), s1 = t[m + 1];
    if (s1 <= s0) continue;  // degenerate boundary span
    if (y <= s0) break;
    acc += detail::integrate_basis_piece(cfg, basis, s0, std::min(y, s1));
    if (y <= s1) break;
  }
  return std::clamp(acc * basis_norm_constant(cfg, basis), 0.0, 1.0);
}

// Results of the dimension-changing coefficient transforms. log_jacobian is
// the log absolute determinant of the (coeff rows, u) -> new coeff rows map,
// summed over states; -inf marks a singular (auto-reject) proposal.
struct InsertResult {
  KnotConfig cfg;
  Matrix coeffs;
  double log_jacobian = 0.0;
  int n_star = 0;  // insertion span: r_c in (r_{n*}, r_{n*+1}), 0-based with r_0 = a
};

struct DeleteResult {
  KnotConfig cfg;
  Matrix coeffs;
  std::vector<double> u;  // u values implied by the deleted column, per state
  double log_jacobian = 0.0;
  int n_star = 0;
  double removed_knot = 0.0;
};

namespace detail {

// c_j = (r_c - t[j]) / (t[j+3] - t[j]) over the augmented sequence of the
// smaller configuration; the de Boor insertion weight for coefficient j.
inline double insertion_weight(const KnotConfig& small_cfg, double r_c, int j) {
  const auto& t = small_cfg.augmented;
  return (r_c - t[j]) / (t[j + 3] - t[j]);
}

}  // namespace detail

// Knot insertion: de Boor's rule for the interior columns with one degree of
// freedom u_i per state replacing the last deterministic weight, so that the
// (K+4)+1 -> K+5 map per state is a bijection with tractable Jacobian.
inline InsertResult insert_knot_transform(const KnotConfig& cfg, const Matrix& coeffs, double r_c,
                                          std::span<const double> u) {
  const int k = cfg.k();
  const std::size_t n_states = coeffs.rows();
  if (coeffs.cols() != static_cast<std::size_t>(cfg.n_basis()))
    throw invalid_input("insert_knot_transform: coefficient shape mismatch");
  if (u.size() != n_states) throw invalid_input("insert_knot_transform: need one u per state");
  if (!(r_c > cfg.a && r_c < cfg.b)) throw invalid_input("degenerate-insertion: r_c outside (a,b)");
  for (double r : cfg.interior)
    if (r == r_c) throw invalid_input("degenerate-insertion: r_c coincides with an existing knot");

  const int n_star = static_cast<int>(std::upper_bound(cfg.interior.begin(), cfg.interior.end(), r_c) -
                                      cfg.interior.begin());

  std::vector<double> new_interior = cfg.interior;
  new_interior.insert(new_interior.begin() + n_star, r_c);

  InsertResult res;
  res.cfg = build_knot_config(cfg.a, cfg.b, std::move(new_interior));
  res.n_star = n_star;
  res.coeffs = Matrix(n_states, k + 5);

  const double c1 = detail::insertion_weight(cfg, r_c, n_star + 1);
  const double c2 = detail::insertion_weight(cfg, r_c, n_star + 2);
  double log_jac = 0.0;
  for (std::size_t i = 0; i < n_states; ++i) {
    const auto in = coeffs.row(i);
    auto out = res.coeffs.row(i);
    for (int j = 0; j <= n_star; ++j) out[j] = in[j];
    out[n_star + 1] = c1 * in[n_star + 1] + (1.0 - c1) * in[n_star];
    out[n_star + 2] = c2 * in[n_star + 2] + (1.0 - c2) * in[n_star + 1];
    out[n_star + 3] = u[i] * in[n_star + 3] + (1.0 - u[i]) * in[n_star + 2];
    for (int j = n_star + 4; j <= k + 4; ++j) out[j] = in[j - 1];
    log_jac += std::log(std::fabs(in[n_star + 3] - in[n_star + 2]));
  }
  log_jac += static_cast<double>(n_states) * (std::log(c1) + std::log(c2));
  res.log_jacobian = log_jac;
  return res;
}

// Inverse of insert_knot_transform. Recovered u values outside (0,1) are
// reported, not rejected; the sampler uses them to zero out the reverse-move
// proposal density.
inline DeleteResult delete_knot_transform(const KnotConfig& cfg, const Matrix& coeffs, int knot_index) {
  const int k = cfg.k();
  if (k <= 2) throw invalid_input("minimum-knots: cannot delete below K = 2");
  if (knot_index < 0 || knot_index >= k) throw invalid_input("delete_knot_transform: knot index out of range");
  if (coeffs.cols() != static_cast<std::size_t>(cfg.n_basis()))
    throw invalid_input("delete_knot_transform: coefficient shape mismatch");

  DeleteResult res;
  res.removed_knot = cfg.interior[knot_index];
  res.n_star = knot_index;
  std::vector<double> new_interior = cfg.interior;
  new_interior.erase(new_interior.begin() + knot_index);
  res.cfg = build_knot_config(cfg.a, cfg.b, std::move(new_interior));

  const std::size_t n_states = coeffs.rows();
  res.coeffs = Matrix(n_states, k + 3);
  res.u.resize(n_states);

  const int n_star = res.n_star;
  const double c1 = detail::insertion_weight(res.cfg, res.removed_knot, n_star + 1);
  const double c2 = detail::insertion_weight(res.cfg, res.removed_knot, n_star + 2);
  double log_jac = 0.0;
  for (std::size_t i = 0; i < n_states; ++i) {
    const auto in = coeffs.row(i);
    auto out = res.coeffs.row(i);
    for (int j = 0; j <= n_star; ++j) out[j] = in[j];
    out[n_star + 1] = (in[n_star + 1] - (1.0 - c1) * out[n_star]) / c1;
    out[n_star + 2] = (in[n_star + 2] - (1.0 - c2) * out[n_star + 1]) / c2;
    for (int j = n_star + 3; j <= k + 2; ++j) out[j] = in[j + 1];
    const double denom = out[n_star + 3] - out[n_star + 2];
    res.u[i] = denom != 0.0 ? (in[n_star + 3] - out[n_star + 2]) / denom
                            : std::numeric_limits<double>::infinity();
    log_jac -= std::log(std::fabs(denom));
  }
  log_jac -= static_cast<double>(n_states) * (std::log(c1) + std::log(c2));
  res.log_jacobian = log_jac;
  return res;
}

}  // namespace bshmm
