#include <catch2/catch.hpp>

#include <cmath>

#include "bshmm/prior.hpp"
#include "support/oracles.hpp"

using namespace bshmm;

TEST_CASE("log prior components", "[prior]") {
  PriorConfig cfg;
  cfg.a = 0.0;
  cfg.b = 1.0;
  cfg.k_max = 50;

  SECTION("order-statistics term: K = 2 on a unit interval gives log 2") {
    const auto knots = build_knot_config(0.0, 1.0, {0.3, 0.6});
    REQUIRE(log_prior_knots(knots, cfg) == Approx(std::log(2.0)).margin(1e-12));
  }

  SECTION("log-gamma coefficient prior at zero with unit shape") {
    Matrix one(1, 1);
    one(0, 0) = 0.0;
    REQUIRE(log_prior_coeffs(one, 1.0) == Approx(-1.0).margin(1e-12));
  }

  SECTION("knot count outside the support returns the log-zero sentinel") {
    REQUIRE(log_prior_k(1, cfg) == kNegInf);
    REQUIRE(log_prior_k(cfg.k_max + 1, cfg) == kNegInf);
    REQUIRE(log_prior_k(2, cfg) == Approx(-std::log(49.0)));
  }

  SECTION("full prior is the log-zero sentinel when K exceeds K_max") {
    PriorConfig small = cfg;
    small.k_max = 3;
    Rng rng(5);
    auto p = oracle::random_params(rng, 2, 4, 0.0, 1.0);  // K = 4 > K_max
    REQUIRE(log_prior(p, small) == kNegInf);
  }

  SECTION("finite on the valid support") {
    Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
      const auto p = oracle::random_params(rng, 2, 3, 0.0, 1.0, rep % 2 == 0);
      REQUIRE(std::isfinite(log_prior(p, cfg)));
    }
  }
}

TEST_CASE("softmax shift awareness", "[prior]") {
  // the prior lives on the unconstrained coefficients: shifting a row moves
  // the prior but not the simplex image
  PriorConfig cfg;
  Rng rng(9);
  auto p = oracle::random_params(rng, 2, 3, 0.0, 1.0);
  const Matrix before = p.coeff_simplex();
  const double lp_before = log_prior(p, cfg);
  for (std::size_t j = 0; j < p.coeffs_uncon.cols(); ++j) p.coeffs_uncon(0, j) += 1.7;
  const Matrix after = p.coeff_simplex();
  for (std::size_t j = 0; j < before.cols(); ++j)
    REQUIRE(after(0, j) == Approx(before(0, j)).margin(1e-12));
  REQUIRE(std::fabs(log_prior(p, cfg) - lp_before) > 1e-3);
}

TEST_CASE("prior sampling consistency", "[prior]") {
  PriorConfig cfg;
  cfg.k_max = 8;
  Rng rng(13);
  const int reps = 4000;
  double mean_k = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto p = sample_prior(cfg, 2, rng);
    REQUIRE(std::isfinite(log_prior(p, cfg)));
    mean_k += p.knots.k();
  }
  mean_k /= reps;
  // K uniform on {2..8}: mean 5, sd 2; three standard errors
  const double se = 2.0 / std::sqrt(static_cast<double>(reps));
  REQUIRE(std::fabs(mean_k - 5.0) < 3.0 * se);
}

TEST_CASE("initial state construction", "[prior]") {
  PriorConfig cfg;
  cfg.a = -1.0;
  cfg.b = 2.0;
  Rng rng(17);
  auto d = oracle::random_dataset(rng, 200, -1.0, 2.0);

  SECTION("single state collapses delta and Gamma") {
    const auto p = init_state(d, 1, cfg, 42);
    REQUIRE(p.delta() == std::vector<double>{1.0});
    REQUIRE(p.gamma()(0, 0) == 1.0);
  }

  SECTION("anchors concentrate coefficient mass near the hinted locations") {
    const auto p = init_state(d, 2, cfg, 42, std::vector<double>{0.0, 0.0});
    const Matrix simplex = p.coeff_simplex();
    // both states anchored at zero: their coefficient profiles coincide
    for (std::size_t j = 0; j < simplex.cols(); ++j)
      REQUIRE(simplex(0, j) == Approx(simplex(1, j)).margin(1e-12));
    const auto means = [&](int i) {
      double m = 0.0;
      for (int j = 0; j < p.knots.n_basis(); ++j)
        m += simplex(i, j) * detail::basis_center(p.knots, j);
      return m;
    };
    REQUIRE(std::fabs(means(0)) < 0.5);  // mass near the anchor at zero
  }

  SECTION("valid parameters for many seeds") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto p = init_state(d, 3, cfg, seed, std::nullopt, false);
      REQUIRE_NOTHROW(p.validate());
      REQUIRE(p.knots.k() >= 2);
      REQUIRE(p.knots.k() <= 10);
    }
  }

  SECTION("empty data is an error") {
    Dataset empty;
    empty.a = 0.0;
    empty.b = 1.0;
    REQUIRE_THROWS_AS(init_state(empty, 2, cfg, 1), invalid_input);
    Dataset all_missing = d;
    for (auto& m : all_missing.missing) m = 1;
    REQUIRE_THROWS_AS(init_state(all_missing, 2, cfg, 1), invalid_input);
  }

  SECTION("zero-inflated initialization keeps weights inside (0,1)") {
    auto dz = oracle::random_dataset(rng, 300, 0.0, 2.0, 0.0, true);
    dz.a = 0.0;
    const auto p = init_state(dz, 2, cfg, 7, std::nullopt, true);
    REQUIRE(p.zero_weights.has_value());
    for (double w : *p.zero_weights) {
      REQUIRE(w > 0.0);
      REQUIRE(w < 1.0);
    }
  }
}
