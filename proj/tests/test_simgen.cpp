#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>

#include "bshmm/postproc.hpp"
#include "bshmm/simgen.hpp"
#include "support/gof.hpp"
#include "support/oracles.hpp"

using namespace bshmm;

TEST_CASE("model 1 generator", "[simgen]") {
  SECTION("empty series") {
    const auto g = simulate_model1(0, 1);
    REQUIRE(g.data.size() == 0);
    REQUIRE(g.states.empty());
  }

  SECTION("deterministic under seed") {
    const auto g1 = simulate_model1(500, 42);
    const auto g2 = simulate_model1(500, 42);
    REQUIRE(g1.data.obs == g2.data.obs);
    REQUIRE(g1.states == g2.states);
  }

  SECTION("long-run transition frequency matches the design") {
    const auto g = simulate_model1(1000000, 7);
    std::size_t from1 = 0, to2 = 0;
    for (std::size_t t = 1; t < g.states.size(); ++t) {
      if (g.states[t - 1] == 0) {
        ++from1;
        if (g.states[t] == 1) ++to2;
      }
    }
    const double rate = static_cast<double>(to2) / static_cast<double>(from1);
    REQUIRE(rate == Approx(0.1).margin(0.003));
  }

  SECTION("state-2 emission mean matches the mixture mean") {
    const auto g = simulate_model1(1000000, 11);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < g.states.size(); ++t)
      if (g.states[t] == 1) {
        sum += g.data.obs[t];
        ++count;
      }
    REQUIRE(sum / static_cast<double>(count) == Approx(17.75).margin(0.2));
  }

  SECTION("density oracle integrates to one") {
    const auto g = simulate_model1(10, 3);
    for (int s = 0; s < 2; ++s) {
      double acc = 0.0;
      const double lo = -80.0, hi = 90.0;
      const int steps = 20000;
      for (int i = 0; i < steps; ++i) {
        const double y0 = lo + (hi - lo) * i / steps, y1 = lo + (hi - lo) * (i + 1) / steps;
        acc += 0.5 * (y1 - y0) * (g.density_oracle(s, y0) + g.density_oracle(s, y1));
      }
      REQUIRE(acc == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("model 3 generator", "[simgen]") {
  SECTION("zero switching rate freezes the chain") {
    const auto g = simulate_model3(200, 0.0, 5);
    for (int s : g.states) REQUIRE(s == g.states[0]);
  }

  SECTION("state-1 marginal is trimodal near -4, 0, 8") {
    const auto g = simulate_model3(1000000, 0.05, 9);
    std::vector<double> s1;
    for (std::size_t t = 0; t < g.states.size(); ++t)
      if (g.states[t] == 0) s1.push_back(g.data.obs[t]);
    // histogram on [-8, 12], bin width 0.25
    std::vector<double> hist(80, 0.0);
    for (double y : s1) {
      const int b = static_cast<int>((y + 8.0) / 0.25);
      if (b >= 0 && b < 80) hist[b] += 1.0;
    }
    std::vector<double> centers;
    for (int b = 2; b + 2 < 80; ++b) {
      bool peak = true;
      for (int o = -2; o <= 2; ++o)
        if (hist[b + o] > hist[b]) peak = false;
      if (peak && hist[b] > 0.01 * s1.size()) centers.push_back(-8.0 + 0.25 * (b + 0.5));
    }
    REQUIRE(centers.size() == 3);
    REQUIRE(std::fabs(centers[0] + 4.0) < 0.5);
    REQUIRE(std::fabs(centers[1] - 0.0) < 0.5);
    REQUIRE(std::fabs(centers[2] - 8.0) < 0.5);
  }
}

TEST_CASE("spline hmm sampler", "[simgen]") {
  SECTION("single-basis coefficients reproduce the basis distribution") {
    HmmParams p;
    p.n_states = 1;
    p.knots = build_knot_config(0.0, 1.0, {0.3, 0.6});
    p.coeffs_uncon = Matrix(1, 6, -40.0);
    p.coeffs_uncon(0, 2) = 0.0;  // all mass on basis 2
    p.delta_uncon = {1.0};
    p.gamma_uncon = Matrix(1, 1, 1.0);
    const auto g = simulate_spline_hmm(p, 100000, 33);
    const double pv =
        gof::ks_test(g.data.obs, [&](double y) { return basis_cdf(p.knots, 2, y); });
    INFO("KS p = " << pv);
    REQUIRE(pv > 0.01);
  }

  SECTION("empirical occupation matches the stationary distribution") {
    const auto p = model2_spline_params();
    const auto g = simulate_spline_hmm(p, 1000000, 17);
    const auto pi = stationary_distribution(p.gamma());
    std::vector<double> occ(3, 0.0);
    for (int s : g.states) occ[s] += 1.0;
    for (int i = 0; i < 3; ++i) {
      occ[i] /= static_cast<double>(g.states.size());
      REQUIRE(occ[i] == Approx(pi[i]).margin(0.01));
    }
  }

  SECTION("all draws stay inside the bounds") {
    const auto p = model2_spline_params();
    const auto g = simulate_spline_hmm(p, 20000, 23);
    for (double y : g.data.obs) {
      REQUIRE(y >= p.knots.a);
      REQUIRE(y <= p.knots.b);
    }
  }

  SECTION("empirical transition matrix approaches the truth") {
    const auto p = model2_spline_params();
    const auto g = simulate_spline_hmm(p, 500000, 29);
    Matrix counts(3, 3, 0.0);
    std::vector<double> row_tot(3, 0.0);
    for (std::size_t t = 1; t < g.states.size(); ++t) {
      counts(g.states[t - 1], g.states[t]) += 1.0;
      row_tot[g.states[t - 1]] += 1.0;
    }
    const auto gamma = p.gamma();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double phat = counts(i, j) / row_tot[i];
        const double tol = 3.0 * std::sqrt(gamma(i, j) * (1.0 - gamma(i, j)) / row_tot[i]);
        REQUIRE(std::fabs(phat - gamma(i, j)) < std::max(tol, 1e-3));
      }
  }
}

TEST_CASE("zero-inflated generator", "[simgen]") {
  HmmParams p;
  p.n_states = 2;
  p.knots = build_knot_config(0.0, 10.0, {2.0, 4.0, 6.0});
  p.coeffs_uncon = Matrix(2, 7, 0.0);
  p.delta_uncon = {1.0, 1.0};
  p.gamma_uncon = Matrix(2, 2, 1.0);
  p.zero_weights = std::vector<double>{0.9, 0.25};

  SECTION("weight one in a single-state model emits only zeros") {
    HmmParams q = p;
    q.n_states = 1;
    q.coeffs_uncon = Matrix(1, 7, 0.0);
    q.delta_uncon = {1.0};
    q.gamma_uncon = Matrix(1, 1, 1.0);
    q.zero_weights = std::vector<double>{1.0};
    const auto g = simulate_zero_inflated(q, 500, 3);
    for (double y : g.data.obs) REQUIRE(y == 0.0);
  }

  SECTION("weight zero reduces to the plain spline sampler") {
    HmmParams q = p;
    q.zero_weights = std::vector<double>{0.0, 0.0};
    const auto g = simulate_zero_inflated(q, 2000, 5);
    for (double y : g.data.obs) REQUIRE(y != 0.0);
  }

  SECTION("per-state zero fractions match the weights") {
    const auto g = simulate_zero_inflated(p, 100000, 7);
    std::vector<double> zeros(2, 0.0), tot(2, 0.0);
    for (std::size_t t = 0; t < g.states.size(); ++t) {
      tot[g.states[t]] += 1.0;
      if (g.data.obs[t] == 0.0) zeros[g.states[t]] += 1.0;
    }
    REQUIRE(zeros[0] / tot[0] == Approx(0.9).margin(0.01));
    REQUIRE(zeros[1] / tot[1] == Approx(0.25).margin(0.01));
  }
}
