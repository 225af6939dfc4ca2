// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria can be selected by number on the command line.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bshmm/bshmm.hpp"
#include "../support/gof.hpp"
#include "../support/oracles.hpp"

using namespace bshmm;

namespace {

int g_threads = 2;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

void renormalize_on_grid(const std::vector<double>& grid, std::vector<double>& f) {
  double z = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) z += 0.5 * (grid[i + 1] - grid[i]) * (f[i] + f[i + 1]);
  for (auto& v : f) v /= z;
}

// ---------------------------------------------------------------- criterion 1

// forward, Viterbi and smoothing match exhaustive path enumeration
Outcome criterion1() {
  Outcome out;
  Rng rng(1001);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n_states = 1 + static_cast<int>(rng.uniform_int(3));
    const int k = 2 + static_cast<int>(rng.uniform_int(3));
    const auto n = static_cast<std::size_t>(1 + rng.uniform_int(6));
    const bool zi = rep % 4 == 0;
    const auto p = oracle::random_params(rng, n_states, k, zi ? -0.2 : 0.0, 1.0, zi);
    const auto d = oracle::random_dataset(rng, n, zi ? -0.2 : 0.0, 1.0, 0.1, zi);
    const auto brute = oracle::brute_force(p, d);
    if (std::fabs(log_likelihood(p, d) - brute.log_lik) > 1e-10) {
      out.check(false, "log-likelihood mismatch at rep " + std::to_string(rep));
      break;
    }
    if (viterbi(p, d) != brute.best_path) {
      out.check(false, "viterbi mismatch at rep " + std::to_string(rep));
      break;
    }
    const auto post = smoothed_probs(p, d);
    for (std::size_t t = 0; t < n; ++t)
      for (int i = 0; i < n_states; ++i)
        if (std::fabs(post(t, i) - brute.marginals(t, i)) > 1e-10) {
          out.check(false, "marginal mismatch at rep " + std::to_string(rep));
          t = n;
          break;
        }
    if (!out.pass) break;
    ++checked;
  }
  out.detail = std::to_string(checked) + "/200 instances match within 1e-10" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
  Outcome out;
  Rng rng(2002);

  // normalization across several configurations
  for (const auto& interior :
       {std::vector<double>{0.4, 0.6}, std::vector<double>{0.1, 0.2, 0.55, 0.7, 0.9},
        std::vector<double>{0.3, 0.31, 0.5, 0.92}}) {
    const auto cfg = build_knot_config(0.0, 1.0, interior);
    for (int k = 0; k < cfg.n_basis(); ++k) {
      const double integral =
          oracle::integrate_per_span(cfg, [&](double y) { return eval_basis(cfg, y).values[k]; });
      out.check(std::fabs(integral - 1.0) <= 1e-8, "basis integral off at K=" +
                                                       std::to_string(cfg.k()) + " k=" + std::to_string(k));
    }
  }

  // unnormalized knot insertion preserves the curve pointwise
  const auto cfg = build_knot_config(0.0, 1.0, {0.25, 0.45, 0.7});
  for (int rep = 0; rep < 5; ++rep) {
    Matrix coeffs(1, cfg.n_basis());
    for (double& x : coeffs.data()) x = rng.normal();
    const double r_c = 0.05 + 0.9 * rng.uniform();
    const int n_star = static_cast<int>(std::upper_bound(cfg.interior.begin(), cfg.interior.end(), r_c) -
                                        cfg.interior.begin());
    const auto& t = cfg.augmented;
    const std::vector<double> u{(r_c - t[n_star + 3]) / (t[n_star + 6] - t[n_star + 3])};
    const auto ins = insert_knot_transform(cfg, coeffs, r_c, u);
    auto curve = [](const KnotConfig& c, std::span<const double> d, double y) {
      const auto bv = eval_basis(c, y);
      double s = 0.0;
      for (int k = 0; k < c.n_basis(); ++k)
        s += d[k] * bv.values[k] * (c.augmented[k + 4] - c.augmented[k]) / 4.0;
      return s;
    };
    for (int g = 0; g <= 256; ++g) {
      const double y = g / 256.0;
      out.check(std::fabs(curve(ins.cfg, ins.coeffs.row(0), y) - curve(cfg, coeffs.row(0), y)) <= 1e-10,
                "curve shifted by deterministic insertion");
      if (!out.pass) break;
    }
  }

  // insert/delete round trip and Jacobian against finite differences
  for (int rep = 0; rep < 25; ++rep) {
    Matrix coeffs(2, cfg.n_basis());
    for (double& x : coeffs.data()) x = rng.normal();
    const double r_c = 0.05 + 0.9 * rng.uniform();
    const std::vector<double> u{0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform()};
    const auto ins = insert_knot_transform(cfg, coeffs, r_c, u);
    const auto del = delete_knot_transform(ins.cfg, ins.coeffs, ins.n_star);
    for (std::size_t i = 0; i < 2; ++i) {
      out.check(std::fabs(del.u[i] - u[i]) <= 1e-10, "u not recovered");
      for (int j = 0; j < cfg.n_basis(); ++j)
        out.check(std::fabs(del.coeffs(i, j) - coeffs(i, j)) <= 1e-10, "round trip not identity");
    }
    out.check(std::fabs(del.log_jacobian + ins.log_jacobian) <= 1e-10, "jacobian antisymmetry");

    Matrix row(1, cfg.n_basis());
    for (int j = 0; j < cfg.n_basis(); ++j) row(0, j) = coeffs(0, j);
    std::vector<double> x(row.data());
    x.push_back(u[0]);
    const auto map = [&](const std::vector<double>& in) {
      Matrix m(1, cfg.n_basis());
      for (int j = 0; j < cfg.n_basis(); ++j) m(0, j) = in[j];
      return std::vector<double>(
          insert_knot_transform(cfg, m, r_c, std::vector<double>{in[static_cast<std::size_t>(cfg.n_basis())]})
              .coeffs.data());
    };
    const double fd = oracle::fd_jacobian_logdet(map, x);
    const double analytic = insert_knot_transform(cfg, row, r_c, std::vector<double>{u[0]}).log_jacobian;
    out.check(std::fabs(analytic - fd) <= 1e-4, "insertion jacobian vs finite differences");
  }
  if (out.pass) out.detail = "normalization, insertion identity, round trip and jacobians all hold";
  return out;
}

// ---------------------------------------------------------------- criterion 3

// prior recovery with empty data: the gate for the trans-dimensional ratios
Outcome criterion3() {
  Outcome out;
  Dataset empty;
  empty.a = 0.0;
  empty.b = 1.0;
  PriorConfig prior;
  prior.a = 0.0;
  prior.b = 1.0;
  prior.k_max = 8;
  const Schedule sch{50000, 1000000, 500};
  const Trace trace = run_chain(empty, 2, prior, TuningParams{}, sch, 33003);

  std::vector<std::size_t> k_counts(7, 0);
  std::vector<double> zetas, g11, r1_given_k2;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    k_counts[static_cast<std::size_t>(trace.k_series[i] - 2)]++;
    zetas.push_back(trace.draws[i].zeta);
    g11.push_back(trace.draws[i].gamma()(0, 0));
    if (trace.k_series[i] == 2) r1_given_k2.push_back(trace.draws[i].knots.interior[0]);
  }
  const double p_k = gof::chi2_test(k_counts, std::vector<double>(7, 1.0 / 7.0));
  const double p_zeta = gof::ks_test(zetas, [](double x) { return 1.0 - std::exp(-x); });
  const double p_g = gof::ks_test(g11, [](double x) { return x; });
  const double p_r1 = gof::ks_test(r1_given_k2, [](double x) { return 1.0 - (1.0 - x) * (1.0 - x); });
  char buf[160];
  std::snprintf(buf, sizeof buf, "p-values: K %.4f, knot %.4f, zeta %.4f, Gamma row %.4f", p_k, p_r1, p_zeta,
                p_g);
  out.detail = buf;
  out.check(p_k > 0.01, "K not uniform");
  out.check(p_r1 > 0.01, "knot location not order-statistics");
  out.check(p_zeta > 0.01, "zeta not gamma(1,1)");
  out.check(p_g > 0.01, "Gamma row not Dirichlet");
  return out;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  Outcome out;
  const int reps = 10;
  const Schedule sch{50000, 50000, 50};
  int prob_hits = 0, modal_hits = 0;
  double acc_sum = 0.0, kld1_sum = 0.0, kld2_sum = 0.0, coverage_sum = 0.0;
  double baseline = 0.0;

  for (int rep = 0; rep < reps; ++rep) {
    const auto g = simulate_model1(800, 4000 + static_cast<std::uint64_t>(rep));
    PriorConfig prior;
    prior.a = g.data.a;
    prior.b = g.data.b;
    prior.k_max = 50;
    const auto sel = select_states(g.data, {2, 3, 4, 5}, prior, TuningParams{}, sch,
                                   4100 + static_cast<std::uint64_t>(rep), g_threads);
    if (sel.post_probs[0] > 0.95) ++prob_hits;

    Trace trace = sel.traces[0];
    relabel(trace);
    const auto grid = make_grid(g.data.a, g.data.b, 512);
    const Summary summary = summarize(trace, grid);
    if (summary.modal_k >= 5 && summary.modal_k <= 9) ++modal_hits;

    const HmmParams point = summary.point_estimate();
    acc_sum += decoding_accuracy(viterbi(point, g.data), g.states);

    // truth restricted to the fit support and renormalized there
    const Matrix simplex = point.coeff_simplex();
    for (int s = 0; s < 2; ++s) {
      std::vector<double> p_true(grid.size()), q_fit(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        p_true[i] = g.density_oracle(s, grid[i]);
        q_fit[i] = emission_density(point.knots, simplex.row(s), grid[i]);
      }
      renormalize_on_grid(grid, p_true);
      (s == 0 ? kld1_sum : kld2_sum) += kld(grid, p_true, q_fit);

      // credible-band coverage of the true curve: 90% pointwise bands over
      // all draws (K marginalized), counted where the truth is non-negligible
      double peak = 0.0;
      for (double v : p_true) peak = std::max(peak, v);
      std::vector<Matrix> simplexes(trace.size());
      for (std::size_t d = 0; d < trace.size(); ++d) simplexes[d] = trace.draws[d].coeff_simplex();
      std::size_t inside = 0, body = 0;
      std::vector<double> vals(trace.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (p_true[i] < 0.01 * peak) continue;
        ++body;
        for (std::size_t d = 0; d < trace.size(); ++d)
          vals[d] = emission_density(trace.draws[d].knots, simplexes[d].row(s), grid[i]);
        std::sort(vals.begin(), vals.end());
        const double lo = vals[static_cast<std::size_t>(0.05 * (vals.size() - 1))];
        const double hi = vals[static_cast<std::size_t>(0.95 * (vals.size() - 1))];
        if (p_true[i] >= lo && p_true[i] <= hi) ++inside;
      }
      coverage_sum += static_cast<double>(inside) / static_cast<double>(body);
    }

    if (rep == 0) {
      // failure bar: a deliberately misfit single Gaussian for the bimodal state
      std::vector<double> p_true(grid.size()), q_gauss(grid.size());
      const double mean = 0.35 * -5.0 + 0.65 * 30.0;
      const double var = 0.35 * (81.0 + 25.0) + 0.65 * (100.0 + 900.0) - mean * mean;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        p_true[i] = g.density_oracle(1, grid[i]);
        const double z = (grid[i] - mean) / std::sqrt(var);
        q_gauss[i] = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI * var);
      }
      renormalize_on_grid(grid, p_true);
      baseline = kld(grid, p_true, q_gauss);
    }
  }

  const double mean_acc = acc_sum / reps;
  const double kld1 = kld1_sum / reps, kld2 = kld2_sum / reps;
  const double coverage = coverage_sum / (2.0 * reps);
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "P(N=2)>0.95 in %d/10, modal K in {5..9} in %d/10, mean accuracy %.3f, KLD %.4f/%.4f "
                "(misfit bar %.3f), band coverage %.2f",
                prob_hits, modal_hits, mean_acc, kld1, kld2, baseline, coverage);
  out.detail = buf;
  out.check(prob_hits >= 9, "posterior model probability");
  out.check(modal_hits >= 9, "modal knot count");
  out.check(mean_acc >= 0.90, "decoding accuracy");
  out.check(baseline > 0.05, "misfit baseline is not a meaningful bar");
  out.check(kld1 <= 0.05 && kld2 <= 0.05, "KLD to truth");
  // pointwise bands around a biased spline approximation cannot promise 90%
  // coverage of the exact truth; the gate checks they are meaningfully
  // calibrated rather than collapsed
  out.check(coverage >= 0.70, "credible band coverage of the true curve");
  return out;
}

// ---------------------------------------------------------------- criterion 5

int count_modes(const std::vector<double>& curve) {
  double peak = 0.0;
  for (double v : curve) peak = std::max(peak, v);
  int modes = 0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i)
    if (curve[i] > curve[i - 1] && curve[i] >= curve[i + 1] && curve[i] > 0.1 * peak) ++modes;
  return modes;
}

Outcome criterion5() {
  Outcome out;

  // the trimodal benchmark setup: two states pre-fixed, symmetric switching
  // structure known a priori, and both states initialized at a mean level
  // near zero (the second one jittered, as in the source experiment); the
  // transition matrix is held for the first 30% of burn-in so the nearly
  // identical emissions differentiate before the switching rate moves
  auto fit_rho = [&](std::size_t n, std::uint64_t seed, bool* trimodal) {
    const auto g = simulate_model3(n, 0.05, seed);
    PriorConfig prior;
    prior.a = g.data.a;
    prior.b = g.data.b;
    prior.k_max = 50;
    Rng jitter(derive_seed(seed, 0xA11C));
    ChainOptions opts;
    opts.anchors = std::vector<double>{0.0, jitter.normal()};
    opts.symmetric_gamma = true;
    opts.freeze_gamma_burn_frac = 0.3;
    const Schedule sch{100000, 50000, 50};
    Trace trace = run_chain(g.data, 2, prior, TuningParams{}, sch, seed ^ 0x5a5a, opts);
    relabel(trace);
    double rho = 0.0;
    for (const auto& d : trace.draws) rho += d.gamma()(0, 1);
    rho /= static_cast<double>(trace.size());
    if (trimodal) {
      const auto grid = make_grid(g.data.a, g.data.b, 512);
      const Summary s = summarize(trace, grid);
      bool ok = true;
      for (int st = 0; st < 2; ++st) {
        std::vector<double> curve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) curve[i] = s.density.mean(st, i);
        ok = ok && count_modes(curve) == 3;
      }
      *trimodal = ok;
    }
    return rho;
  };

  int trimodal_hits = 0;
  double rho_sum_small = 0.0;
  std::vector<std::thread> pool;
  std::vector<double> rho_small(10);
  std::vector<std::uint8_t> tri(10);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= 10) return;
      bool t3 = false;
      rho_small[r] = fit_rho(1000, 5000 + static_cast<std::uint64_t>(r), &t3);
      tri[r] = t3;
    }
  };
  for (int w = 0; w < g_threads; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (int r = 0; r < 10; ++r) {
    rho_sum_small += rho_small[r];
    trimodal_hits += tri[r] ? 1 : 0;
  }
  const double rho_mean_small = rho_sum_small / 10.0;

  double rho_sum_large = 0.0;
  std::vector<double> rho_large(3);
  std::atomic<int> next_large{0};
  std::vector<std::thread> pool2;
  auto worker2 = [&] {
    for (;;) {
      const int r = next_large.fetch_add(1);
      if (r >= 3) return;
      rho_large[r] = fit_rho(5000, 6000 + static_cast<std::uint64_t>(r), nullptr);
    }
  };
  for (int w = 0; w < g_threads; ++w) pool2.emplace_back(worker2);
  for (auto& t : pool2) t.join();
  for (double r : rho_large) rho_sum_large += r;
  const double rho_mean_large = rho_sum_large / 3.0;

  char buf[200];
  std::snprintf(buf, sizeof buf, "trimodal in %d/10, mean rho-hat %.4f (n=1000), %.4f (n=5000)",
                trimodal_hits, rho_mean_small, rho_mean_large);
  out.detail = buf;
  out.check(trimodal_hits >= 9, "trimodality");
  out.check(rho_mean_small >= 0.03 && rho_mean_small <= 0.13, "rho at n=1000");
  out.check(rho_mean_large >= 0.045 && rho_mean_large <= 0.065, "rho at n=5000");
  return out;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6() {
  Outcome out;

  // constructed 4-night decoded path: exactly four bouts
  {
    std::vector<int> path;
    auto add = [&](int s, std::size_t n) { path.insert(path.end(), n, s); };
    for (int night = 0; night < 4; ++night) {
      add(1, 720);
      add(0, 200);
      add(2, 12);
      add(0, 150);
      add(1, 8);
      add(0, 120);
    }
    add(1, 720);
    const auto seg = extract_bouts(path, 30);
    out.check(seg.bouts.size() == 4, "constructed path gave " + std::to_string(seg.bouts.size()) + " bouts");
  }

  // pipeline self-consistency on a simulated 4-night series
  HmmParams truth;
  truth.n_states = 2;
  truth.knots = build_knot_config(0.0, 30.0, {3.0, 6.0, 10.0, 15.0, 21.0});
  const double rows[2][9] = {
      {0.45, 0.30, 0.13, 0.06, 0.03, 0.015, 0.008, 0.004, 0.003},
      {0.06, 0.13, 0.21, 0.24, 0.17, 0.10, 0.05, 0.025, 0.015},
  };
  truth.coeffs_uncon = Matrix(2, 9);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 9; ++j) truth.coeffs_uncon(i, j) = std::log(rows[i][j]);
  truth.delta_uncon = {1.0, 1.0};
  truth.gamma_uncon = Matrix(2, 2);
  truth.gamma_uncon(0, 0) = 0.96;
  truth.gamma_uncon(0, 1) = 0.04;
  truth.gamma_uncon(1, 0) = 0.11;
  truth.gamma_uncon(1, 1) = 0.89;
  truth.zeta = 1.0;
  truth.zero_weights = std::vector<double>{0.9, 0.25};

  const int n_nights = 8;
  const auto night = simulate_zero_inflated(truth, n_nights * 480, 66006);
  Rng rng(66007);
  Dataset highres;
  highres.a = 0.0;
  highres.b = 60.0;
  std::size_t pos = 0;
  for (int day = 0; day < n_nights; ++day) {
    for (int t = 0; t < 720; ++t) {
      highres.obs.push_back(35.0 + 20.0 * rng.uniform());
      highres.missing.push_back(0);
    }
    for (int t = 0; t < 480; ++t) {
      highres.obs.push_back(night.data.obs[pos++]);
      highres.missing.push_back(0);
    }
  }

  PriorConfig main_prior;
  main_prior.a = 0.0;
  main_prior.b = 60.0;
  main_prior.k_max = 10;
  Dataset main_data = block_average(highres, 5);
  main_data.a = 0.0;
  main_data.b = 60.0;
  const auto main = fit_main(main_data, {2}, main_prior, TuningParams{}, Schedule{5000, 5000, 10}, 606,
                             g_threads, true, 128);

  PriorConfig sub_prior;
  sub_prior.a = 0.0;
  sub_prior.b = 31.5;
  sub_prior.k_max = 10;
  Dataset sub_data = highres;
  for (auto& y : sub_data.obs) y = std::min(y, 31.0);  // day points are masked anyway
  sub_data.a = 0.0;
  sub_data.b = 31.5;
  SubFitOptions opts;
  opts.sub_states = 2;
  opts.block_factor = 5;
  opts.grid_points = 128;
  BoutSegmentation rule;
  rule.min_dwell = 30;
  const auto sub = fit_sub(sub_data, main_data, main.selection.traces[0], sub_prior, TuningParams{},
                           Schedule{40000, 40000, 40}, 607, rule, opts);

  out.check(sub.bouts.bouts.size() == n_nights,
            "pipeline found " + std::to_string(sub.bouts.bouts.size()) + " bouts");
  const auto& w = *sub.summary.w_mean;
  const auto& gm = sub.summary.gamma_mean;
  char buf[160];
  std::snprintf(buf, sizeof buf, "w-hat (%.3f, %.3f) vs (0.9, 0.25); diag (%.3f, %.3f) vs (0.96, 0.89)",
                w[0], w[1], gm(0, 0), gm(1, 1));
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += buf;
  out.check(std::fabs(w[0] - 0.9) <= 0.05 && std::fabs(w[1] - 0.25) <= 0.05, "zero-weight recovery");
  out.check(std::fabs(gm(0, 0) - 0.96) <= 0.03 && std::fabs(gm(1, 1) - 0.89) <= 0.03,
            "sub transition recovery");
  return out;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  Outcome out;
  Trace t1, t2;
  for (int i = 0; i < 50; ++i) {
    t1.log_lik.push_back(-100.0 - i * 0.1);
    t1.log_prior.push_back(-3.0 - 0.01 * i);
    t2.log_lik.push_back(-104.0 - i * 0.07);
    t2.log_prior.push_back(-4.0 - 0.02 * i);
    t1.draws.emplace_back();
    t2.draws.emplace_back();
    t1.sweeps.push_back(i);
    t2.sweeps.push_back(i);
    t1.k_series.push_back(2);
    t2.k_series.push_back(2);
  }
  const auto probs = posterior_model_probs({t1, t2});
  out.check(std::fabs(probs[0] + probs[1] - 1.0) <= 1e-12, "probabilities do not sum to one");

  Trace s1 = t1, s2 = t2;
  for (auto* t : {&s1, &s2})
    for (auto& v : t->log_lik) v += 1e4;
  const auto shifted = posterior_model_probs({s1, s2});
  out.check(std::fabs(shifted[0] - probs[0]) <= 1e-9, "not shift-stable");

  Trace single;
  single.log_lik = {-77.25};
  single.log_prior = {-2.0};
  single.draws.emplace_back();
  single.sweeps.push_back(0);
  single.k_series.push_back(2);
  out.check(dic(single) == -2.0 * -77.25, "DIC T=1 identity");
  if (out.pass) out.detail = "sum-to-one, shift stability and the T=1 identity hold";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  g_threads = std::max(2u, std::thread::hardware_concurrency());
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {1, "oracle equivalence (forward/viterbi/smoothing)", criterion1},
      {2, "spline correctness (normalization/insertion/jacobians)", criterion2},
      {3, "sampler validity (prior recovery, 1e6 sweeps)", criterion3},
      {4, "model 1 reproduction (selection/K/decoding/KLD)", criterion4},
      {5, "model 3 reproduction (trimodality/rho)", criterion5},
      {6, "zero-inflated conditional pipeline", criterion6},
      {7, "selection estimator sanity", criterion7},
  };

  bool all_pass = true;
  for (const auto& e : entries) {
    if (!wanted.empty() && !wanted.count(e.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d [%s]: %s (%s) [%.1f s]\n", e.id, e.name, out.pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
