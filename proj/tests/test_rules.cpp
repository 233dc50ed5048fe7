#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "templab/kernels.hpp"
#include "templab/model.hpp"
#include "templab/rules.hpp"

using namespace templab;

// Frozen 60-digit oracle: weight on h_0 for the two-hypothesis profile
// example pi=(0.1,0.9), m=20, lambda=200*20, k=(2,6).
static constexpr double kProfileW0 =
    0.100128675121899360466203781283602156644971066867595769710044;

TEST_CASE("MDL selection") {
  HypothesisClass one({1.0}, {0.2});
  CHECK(mdl_select(ErrorCounts(10, {3}), one, Lambda(1.0)).weight(0) == 1.0);

  HypothesisClass two({0.5, 0.5}, {0.1, 0.2});
  // Tie broken by lowest index.
  CHECK(mdl_select(ErrorCounts(10, {0, 0}), two, Lambda(1.0)).weight(0) == 1.0);
  // lambda=0: pure empirical-error minimization.
  CHECK(mdl_select(ErrorCounts(10, {3, 1}), two, Lambda(0.0)).weight(1) == 1.0);
  // Prior term matters at lambda > 0.
  HypothesisClass skew({0.99, 0.01}, {0.1, 0.2});
  const Posterior p = mdl_select(ErrorCounts(10, {3, 2}), skew, Lambda(10.0));
  CHECK(p.weight(0) == 1.0);
  // Exact binomial form: log2 C(m,k) replaces m*H(k/m).
  const Posterior q = mdl_select(ErrorCounts(10, {0, 1}), two, Lambda(0.0),
                                 MdlForm::kExactBinomial);
  CHECK(q.weight(0) == 1.0);
}

TEST_CASE("empirical Bayes: equal counts keep the prior") {
  HypothesisClass hc({0.3, 0.7}, {0.1, 0.2});
  auto [post, diag] =
      empirical_bayes_posterior(ErrorCounts(10, {3, 3}), hc, Lambda(1.0));
  CHECK_THAT(post.weight(0), Catch::Matchers::WithinAbs(0.3, 1e-10));
  CHECK_FALSE(diag.degenerate);
  CHECK_THAT(diag.beta_star,
             Catch::Matchers::WithinAbs(detail::h2_deriv(0.3), 1e-9));
}

TEST_CASE("empirical Bayes: self-consistency and constraint") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uw(0.05, 1.0), ul(0.2, 20.0);
  for (int c = 0; c < 200; ++c) {
    const long m = 5 + static_cast<long>(rng() % 46);
    std::uniform_int_distribution<long> uk(0, m);
    HypothesisClass hc({uw(rng), uw(rng), uw(rng)}, {0.1, 0.2, 0.3});
    ErrorCounts ec(m, {uk(rng), uk(rng), uk(rng)});
    auto [post, diag] = empirical_bayes_posterior(ec, hc, Lambda(ul(rng)));
    ErrorCounts eff = ec;
    if (diag.negated)
      for (auto& k : eff.counts) k = m - k;
    const double ls = empirical_loss(post, eff).value();
    CHECK(ls <= 0.5 + 1e-12);
    if (!diag.degenerate) {
      CHECK(std::fabs(detail::h2_deriv(ls) - diag.beta_star) <= 1e-9);
      CHECK(diag.residual <= 1e-9);
    }
  }
}

TEST_CASE("empirical Bayes: degenerate interpolation branch") {
  HypothesisClass hc({0.2, 0.5, 0.3}, {0.1, 0.2, 0.3});
  auto [post, diag] =
      empirical_bayes_posterior(ErrorCounts(10, {0, 0, 4}), hc, Lambda(1.0));
  CHECK(diag.degenerate);
  // Prior renormalized over the zero-error hypotheses.
  CHECK_THAT(post.weight(0), Catch::Matchers::WithinAbs(0.2 / 0.7, 1e-12));
  CHECK_THAT(post.weight(1), Catch::Matchers::WithinAbs(0.5 / 0.7, 1e-12));
  CHECK(post.weight(2) == 0.0);
}

TEST_CASE("empirical Bayes: negation convention") {
  HypothesisClass hc({0.5, 0.5}, {0.6, 0.7});
  ErrorCounts ec(10, {8, 9});  // L_S(prior) = 0.85 >= 1/2
  auto [post, diag] = empirical_bayes_posterior(ec, hc, Lambda(1.0));
  CHECK(diag.negated);
  CHECK(post.weight(1) > post.weight(0));  // negated counts are (2,1)
  CHECK_THROWS_AS(empirical_bayes_posterior(ec, hc, Lambda(1.0), true),
                  std::runtime_error);
}

TEST_CASE("profile posterior closed forms") {
  HypothesisClass hc({0.3, 0.7}, {0.1, 0.2});
  const Posterior same =
      profile_posterior(ErrorCounts(10, {4, 4}), hc, Lambda(1.0));
  CHECK_THAT(same.weight(0), Catch::Matchers::WithinAbs(0.3, 1e-12));

  HypothesisClass two({0.1, 0.9}, {0.1, 0.3});
  const Posterior p =
      profile_posterior(ErrorCounts(20, {2, 6}), two, Lambda(200.0 * 20.0));
  CHECK_THAT(p.weight(0), Catch::Matchers::WithinAbs(kProfileW0, 1e-10));

  // Infinite-temperature limit returns the prior.
  const Posterior hot =
      profile_posterior(ErrorCounts(20, {2, 6}), two, Lambda(1e9));
  CHECK(posterior_tv(hot, Posterior({0.1, 0.9}, Provenance::kCustom)) <= 1e-6);

  // For equal priors, lower H(k/m) implies weakly higher weight.
  HypothesisClass eq({1.0, 1.0, 1.0}, {0.1, 0.2, 0.3});
  const Posterior mono =
      profile_posterior(ErrorCounts(20, {1, 5, 9}), eq, Lambda(2.0));
  CHECK(mono.weight(0) >= mono.weight(1));
  CHECK(mono.weight(1) >= mono.weight(2));
}

TEST_CASE("Bayes posterior: exact Beta identity") {
  HypothesisClass hc({0.3, 0.7}, {0.1, 0.2});
  const long m = 12;
  // k=(0,m): both integrals are 1/(m+1), weights follow the prior.
  const Posterior sym =
      bayes_posterior(ErrorCounts(m, {0, m}), hc, EtaPrior::uniform());
  CHECK_THAT(sym.weight(0), Catch::Matchers::WithinAbs(0.3, 1e-12));
  // Weight ratio (pi_a/pi_b) * C(m,k_b)/C(m,k_a).
  ErrorCounts ec(m, {2, 5});
  const Posterior post = bayes_posterior(ec, hc, EtaPrior::uniform());
  const double want =
      (0.3 / 0.7) * std::exp2(detail::log2_binomial(m, 5) -
                              detail::log2_binomial(m, 2));
  CHECK_THAT(post.weight(0) / post.weight(1),
             Catch::Matchers::WithinAbs(want, 1e-10));
}

TEST_CASE("Bayes posterior: quadrature matches the Beta identity") {
  // Force the quadrature path with a custom density tabulating 1.
  std::vector<double> grid, dens;
  for (int i = 1; i <= 99; ++i) {
    grid.push_back(i / 100.0);
    dens.push_back(1.0);
  }
  const EtaPrior flat = EtaPrior::custom_density(grid, dens);
  HypothesisClass hc({0.4, 0.6}, {0.1, 0.2});
  for (long m : {5L, 20L, 100L}) {
    ErrorCounts ec(m, {m / 5, m / 2});
    const Posterior exact = bayes_posterior(ec, hc, EtaPrior::uniform());
    const Posterior quad = bayes_posterior(ec, hc, flat);
    CHECK(posterior_tv(exact, quad) <= 1e-8);
  }
}

TEST_CASE("Bayes posterior: eta-power prior at lambda=1 is uniform") {
  HypothesisClass hc({0.4, 0.6}, {0.1, 0.2});
  ErrorCounts ec(15, {2, 7});
  const Posterior u = bayes_posterior(ec, hc, EtaPrior::uniform());
  const Posterior p =
      bayes_posterior(ec, hc, EtaPrior::p_lambda(Lambda(1.0), 15));
  CHECK(posterior_tv(u, p) == 0.0);
}

TEST_CASE("eta-hat marginal: single hypothesis") {
  HypothesisClass one({1.0}, {0.2});
  CHECK_THAT(
      eta_hat_marginal(ErrorCounts(10, {2}), one, EtaPrior::uniform()).value(),
      Catch::Matchers::WithinAbs(0.2, 1e-9));
}

TEST_CASE("equivalence ladder: plug-in equals Gibbs") {
  std::mt19937_64 rng(23);
  for (int c = 0; c < 50; ++c) {
    const long m = 8 + static_cast<long>(rng() % 33);
    std::uniform_int_distribution<long> uk(0, m / 2);
    HypothesisClass hc({0.2, 0.5, 0.3}, {0.1, 0.2, 0.3});
    ErrorCounts ec(m, {uk(rng), uk(rng), uk(rng)});
    for (double lam : {1.0, 2.0}) {
      const EtaPrior prior = lam == 1.0 ? EtaPrior::uniform()
                                        : EtaPrior::p_lambda(Lambda(lam), m);
      const Prob eta = eta_hat_marginal(ec, hc, prior);
      const Posterior plug = plugin_posterior(ec, hc, eta);
      const Posterior gibbs =
          empirical_bayes_posterior(ec, hc, Lambda(lam)).first;
      CHECK(posterior_tv(plug, gibbs) <= 1e-8);
    }
  }
}

TEST_CASE("eta-hat profile closed forms") {
  CHECK(eta_hat_profile(5, 10, EtaPrior::uniform()).value.value() == 0.5);
  CHECK_THAT(
      eta_hat_profile(2, 10, EtaPrior::p_lambda(Lambda(2.0), 10)).value.value(),
      Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
  CHECK(eta_hat_profile(0, 10, EtaPrior::uniform()).boundary);
  CHECK(eta_hat_profile(10, 10, EtaPrior::uniform()).boundary);
  CHECK_THROWS_AS(eta_hat_profile(11, 10, EtaPrior::uniform()),
                  std::domain_error);
}

TEST_CASE("max-over-eta construction reproduces profile weights") {
  std::mt19937_64 rng(29);
  for (int c = 0; c < 50; ++c) {
    const long m = 10 + static_cast<long>(rng() % 30);
    std::uniform_int_distribution<long> uk(1, m - 1);
    HypothesisClass hc({0.2, 0.5, 0.3}, {0.1, 0.2, 0.3});
    ErrorCounts ec(m, {uk(rng), uk(rng), uk(rng)});
    for (double lam : {1.0, 2.0}) {
      const EtaPrior prior = lam == 1.0 ? EtaPrior::uniform()
                                        : EtaPrior::p_lambda(Lambda(lam), m);
      const Posterior pp = profile_posterior(ec, hc, Lambda(lam));
      std::vector<double> logw(hc.size());
      for (std::size_t i = 0; i < hc.size(); ++i) {
        const double eta =
            eta_hat_profile(ec.counts[i], m, prior).value.value();
        logw[i] = std::log2(hc.raw_prior()[i]) +
                  static_cast<double>(ec.counts[i]) * std::log2(eta) +
                  static_cast<double>(m - ec.counts[i]) * std::log2(1.0 - eta) +
                  prior.log_density(eta) / detail::kLn2;
      }
      for (std::size_t i = 1; i < hc.size(); ++i) {
        const double got = logw[i] - logw[0];
        const double want = std::log2(pp.weight(i)) - std::log2(pp.weight(0));
        CHECK(std::fabs(got - want) <= 1e-10);
      }
    }
  }
}

TEST_CASE("total variation distance") {
  const Posterior a({0.6, 0.4}, Provenance::kCustom);
  const Posterior b({0.4, 0.6}, Provenance::kCustom);
  CHECK_THAT(posterior_tv(a, b), Catch::Matchers::WithinAbs(0.2, 1e-15));
  CHECK(posterior_tv(a, a) == 0.0);
  CHECK(posterior_tv(Posterior::point_mass(0, 2, Provenance::kCustom),
                     Posterior::point_mass(1, 2, Provenance::kCustom)) == 1.0);
  CHECK_THROWS_AS(
      posterior_tv(a, Posterior({1.0}, Provenance::kCustom)),
      std::invalid_argument);
}
