#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bshmm/errors.hpp"
#include "bshmm/rng.hpp"

namespace bshmm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.91893853320467274178;  // log sqrt(2 pi)
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * 1.4142135623730950488));
}

// Wichura's PPND16 (AS 241), |error| ~ 1e-16 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw invalid_input("normal_quantile: p outside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r +
                 4.5921953931549871457e4) *
                    r +
                1.3731693765509461125e4) *
                   r +
               1.9715909503065514427e3) *
                  r +
              1.3314166789178437745e2) *
                 r +
             3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r +
                 2.1213794301586595867e4) *
                    r +
                5.3941960214247511077e3) *
                   r +
               6.8718700749205790830e2) *
                  r +
              4.2313330701600911252e1) *
                 r +
             1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return q < 0.0 ? -val : val;
}

// gamma(shape, rate) on (0, inf)
inline double gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
}

// density of x = log g with g ~ gamma(shape, 1): shape*x - e^x - lgamma(shape)
inline double loggamma_logpdf(double x, double shape) {
  return shape * x - std::exp(x) - std::lgamma(shape);
}

// Normal(mean, sd) restricted to [lo, hi].
struct TruncNormal {
  double mean, sd, lo, hi;

  double mass() const { return normal_cdf(hi, mean, sd) - normal_cdf(lo, mean, sd); }

  double logpdf(double x) const {
    if (x < lo || x > hi) return kNegInf;
    const double z = mass();
    if (!(z > 0.0)) return kNegInf;
    return normal_logpdf(x, mean, sd) - std::log(z);
  }

  // inverse-CDF draw; exactly one uniform consumed
  double sample(Rng& rng) const {
    const double plo = normal_cdf(lo, mean, sd);
    const double phi = normal_cdf(hi, mean, sd);
    double p = plo + rng.uniform() * (phi - plo);
    p = std::fmin(std::fmax(p, 1e-300), 1.0 - 1e-16);
    const double x = mean + sd * normal_quantile(p);
    return std::fmin(std::fmax(x, lo), hi);
  }
};

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::fmax(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// softmax with max subtraction; output sums to 1
inline void softmax(std::span<const double> in, std::span<double> out) {
  double m = kNegInf;
  for (double x : in) m = std::fmax(m, x);
  double s = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - m);
    s += out[i];
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] /= s;
}

inline std::vector<double> normalized(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  std::vector<double> out(xs.begin(), xs.end());
  for (double& x : out) x /= s;
  return out;
}

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double sd_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace bshmm
