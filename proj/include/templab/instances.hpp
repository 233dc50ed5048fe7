#ifndef TEMPLAB_INSTANCES_HPP
#define TEMPLAB_INSTANCES_HPP

// Generators for the hard lower-bound constructions and samplers producing
// error counts from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "templab/kernels.hpp"
#include "templab/model.hpp"
#include "templab/tempering.hpp"

namespace templab {

// Deterministic stream-derived RNG: identical (seed, trial, purpose)
// triples reproduce identical draws across runs and thread schedules.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }

  std::mt19937_64 stream(std::uint64_t trial, std::uint64_t purpose = 0) const {
    std::uint64_t x = master_;
    x = mix(x ^ (0x9E3779B97F4A7C15ULL + trial));
    x = mix(x ^ (0xBF58476D1CE4E5B9ULL + purpose));
    return std::mt19937_64(mix(x));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t master_;
};

// Exact inverse-CDF binomial sampler; the table is built once per (m, p).
class BinomialSampler {
 public:
  BinomialSampler(long m, double p) : m_(m), p_(p) {
    if (m < 0 || !(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("BinomialSampler: bad parameters");
    if (p > 0.0 && p < 1.0) {
      cdf_.resize(static_cast<std::size_t>(m) + 1);
      const double lp = std::log(p), lq = std::log1p(-p);
      double acc = 0.0;
      for (long k = 0; k <= m; ++k) {
        const double logpmf = std::lgamma(static_cast<double>(m) + 1.0) -
                              std::lgamma(static_cast<double>(k) + 1.0) -
                              std::lgamma(static_cast<double>(m - k) + 1.0) +
                              static_cast<double>(k) * lp +
                              static_cast<double>(m - k) * lq;
        acc += std::exp(logpmf);
        cdf_[static_cast<std::size_t>(k)] = acc;
      }
      cdf_.back() = 1.0;
    }
  }

  long sample(std::mt19937_64& rng) const {
    if (p_ <= 0.0) return 0;
    if (p_ >= 1.0) return m_;
    const double u =
        std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<long>(it - cdf_.begin());
  }

 private:
  long m_;
  double p_;
  std::vector<double> cdf_;
};

// The universal sequence prior: weight[0] = 1/10 and
// weight[i] = 1/(i * (log2 i)^2 + 10) for i >= 1, unnormalized.
inline std::vector<double> universal_prior(long n) {
  if (n < 1) throw std::invalid_argument("universal_prior: n must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  w[0] = 0.1;
  for (long i = 1; i < n; ++i) {
    const double li = std::log2(static_cast<double>(i));
    w[static_cast<std::size_t>(i)] = 1.0 / (static_cast<double>(i) * li * li + 10.0);
  }
  return w;
}

enum class LbRegime { kSubOne, kSuperOne, kTwoHypothesis };

// Parameters of a hard-instance construction: a good hypothesis at L*
// against a truncated family of bad ones at L'.
struct LowerBoundSpec {
  Prob lstar;
  Prob lprime;
  LbRegime regime = LbRegime::kTwoHypothesis;
  long m = 1;
  long truncation = 0;      // class size incl. h_0; 0 = derive from m
  Lambda lambda{1.0};
  bool check_tempered_premise = false;  // enforce lprime < ell_lambda(lstar)
};

namespace detail {

inline constexpr long kTruncationCap = 100000000;  // 10^8 hypotheses

// Class size the constructions reference: k(m) + 1.
inline long lb_class_size(const LowerBoundSpec& spec) {
  if (spec.truncation > 0) return spec.truncation;
  const double m = static_cast<double>(spec.m);
  const double lp = spec.lprime.value();
  double k = 0.0;
  switch (spec.regime) {
    case LbRegime::kTwoHypothesis:
      return 2;
    case LbRegime::kSubOne:
      k = 2.0 * std::sqrt(m) / std::pow(1.0 - lp, m);
      break;
    case LbRegime::kSuperOne: {
      const double lam = spec.lambda.value();
      if (lam <= 1.0)
        throw std::domain_error("lb_class_size: super_one regime needs lambda > 1");
      const double lhat =
          sigmoid_e(lam / (lam - 1.0) * logit_e(lp));
      k = std::exp2(m * kl2(lhat, lp));
      break;
    }
  }
  const double n = std::ceil(k) + 1.0;
  if (!(n >= 2.0) || n > static_cast<double>(kTruncationCap)) {
    // Report the largest m whose class size fits under the cap. k(m) is
    // log-linear in m in both regimes, so invert the growth rate.
    const double log2_cap = std::log2(static_cast<double>(kTruncationCap) - 1.0);
    double rate = 0.0;  // bits of class size per sample
    if (spec.regime == LbRegime::kSubOne) {
      rate = -std::log2(1.0 - lp);
    } else {
      const double lam = spec.lambda.value();
      rate = kl2(sigmoid_e(lam / (lam - 1.0) * logit_e(lp)), lp);
    }
    const long fit = std::max(1L, static_cast<long>(log2_cap / rate));
    throw std::invalid_argument(
        "lower-bound truncation exceeds the 1e8 cap; largest feasible m is "
        "about " +
        std::to_string(fit));
  }
  return static_cast<long>(n);
}

}  // namespace detail

inline Instance build_lb_instance(const LowerBoundSpec& spec) {
  const double ls = spec.lstar.value(), lp = spec.lprime.value();
  if (spec.regime != LbRegime::kTwoHypothesis && !(ls > 0.0 && ls < 0.5))
    throw std::invalid_argument("build_lb_instance: need 0 < lstar < 0.5");
  if (spec.regime == LbRegime::kTwoHypothesis && !(ls >= 0.0 && ls < 0.5))
    throw std::invalid_argument("build_lb_instance: need 0 <= lstar < 0.5");
  if (lp < ls)
    throw std::invalid_argument("build_lb_instance: need lstar <= lprime");
  if (spec.check_tempered_premise &&
      lp >= ell_lambda(spec.lambda, spec.lstar).value())
    throw std::invalid_argument(
        "build_lb_instance: lprime >= ell_lambda(lstar) breaks the tempered "
        "lower-bound premise");

  const long n = detail::lb_class_size(spec);
  std::vector<double> prior = spec.regime == LbRegime::kTwoHypothesis
                                  ? std::vector<double>{0.1, 0.9}
                                  : universal_prior(n);
  std::vector<double> pop(static_cast<std::size_t>(n), lp);
  pop[0] = ls;
  HypothesisClass hc(std::move(prior), std::move(pop));
  Posterior qstar =
      Posterior::point_mass(0, hc.size(), Provenance::kCustom);
  return Instance(std::move(hc), std::move(qstar), spec.lstar);
}

// k_i ~ Binomial(m, pop_error[i]) independently across i; deterministic
// given the rng stream.
inline ErrorCounts sample_error_counts(const Instance& inst, long m,
                                       std::mt19937_64& rng) {
  if (m < 1) throw std::invalid_argument("sample_error_counts: m must be >= 1");
  const auto& pop = inst.hypothesis_class.pop_error();
  std::vector<long> counts(pop.size());
  // One sampler table per distinct error rate.
  std::vector<std::pair<double, BinomialSampler>> tables;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double p = pop[i];
    const BinomialSampler* tab = nullptr;
    for (const auto& [tp, t] : tables)
      if (tp == p) {
        tab = &t;
        break;
      }
    if (tab == nullptr) {
      tables.emplace_back(p, BinomialSampler(m, p));
      tab = &tables.back().second;
    }
    counts[i] = tab->sample(rng);
  }
  return ErrorCounts(m, std::move(counts));
}

// Aggregated view of one sampled dataset for two-level instances: the good
// hypothesis is kept apart, bad hypotheses are grouped by error count.
// Group priors are exact sums, so Gibbs/profile/Bayes posteriors over the
// pseudo-class equal the per-hypothesis ones.
struct GroupedCounts {
  HypothesisClass pseudo_class;
  ErrorCounts pseudo_counts;
  std::size_t h0_group = 0;  // index of the good hypothesis's own group

  GroupedCounts(HypothesisClass hc, ErrorCounts ec, std::size_t h0)
      : pseudo_class(std::move(hc)), pseudo_counts(std::move(ec)), h0_group(h0) {}
};

inline GroupedCounts sample_grouped_counts(const LowerBoundSpec& spec,
                                           std::mt19937_64& rng) {
  const long n = detail::lb_class_size(spec);
  const long m = spec.m;
  const double ls = spec.lstar.value(), lp = spec.lprime.value();
  const BinomialSampler good(m, ls), bad(m, lp);

  const long k0 = good.sample(rng);
  std::vector<double> prior_sum(static_cast<std::size_t>(m) + 1, 0.0);
  if (spec.regime == LbRegime::kTwoHypothesis) {
    prior_sum[static_cast<std::size_t>(bad.sample(rng))] += 0.9;
  } else {
    for (long i = 1; i < n; ++i) {
      const double li = std::log2(static_cast<double>(i));
      const double w = 1.0 / (static_cast<double>(i) * li * li + 10.0);
      prior_sum[static_cast<std::size_t>(bad.sample(rng))] += w;
    }
  }

  std::vector<double> prior, pop;
  std::vector<long> counts;
  prior.push_back(0.1);  // Pi(h_0) in both constructions
  pop.push_back(ls);
  counts.push_back(k0);
  for (long k = 0; k <= m; ++k) {
    const double w = prior_sum[static_cast<std::size_t>(k)];
    if (w > 0.0) {
      prior.push_back(w);
      pop.push_back(lp);
      counts.push_back(k);
    }
  }
  return GroupedCounts(HypothesisClass(std::move(prior), std::move(pop)),
                       ErrorCounts(m, std::move(counts)), 0);
}

// q*_m of the underfitting analysis, PAC-Bayes variant: the unique
// minimizer of lambda*KL(q||0.1) + m*H(q L* + (1-q) L'), via derivative
// bisection on the strongly convex objective.
inline Prob qstar_formula_pacbayes(Prob lstar, Prob lprime, long m,
                                   double lambda_m) {
  const double ls = lstar.value(), lp = lprime.value();
  const double md = static_cast<double>(m);
  if (!(lambda_m / md > 10.0))
    throw std::domain_error(
        "qstar_formula_pacbayes: needs lambda_m/m > 10 for strong convexity");
  const auto mix_loss = [&](double q) { return q * ls + (1.0 - q) * lp; };
  const auto deriv = [&](double q) {
    const double l = mix_loss(q);
    double d = lambda_m * (detail::logit2(q) - detail::logit2(0.1));
    if (ls != lp)
      d += md * (ls - lp) * std::log2((1.0 - l) / l);
    return d;
  };
  double lo = 1e-12, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (deriv(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return Prob(0.5 * (lo + hi));
}

// Profile variant, closed form: sigmoid(logit(0.1) + (m/lambda_m) * ln2 *
// (H(L') - H(L*))) with e-based sigmoid/logit and H in bits.
inline Prob qstar_formula_profile(Prob lstar, Prob lprime, long m,
                                  double lambda_m) {
  const double md = static_cast<double>(m);
  if (!(lambda_m / md > 10.0))
    throw std::domain_error(
        "qstar_formula_profile: needs lambda_m/m > 10 for strong convexity");
  const double t = detail::logit_e(0.1) +
                   md / lambda_m * detail::kLn2 *
                       (detail::h2(lprime.value()) - detail::h2(lstar.value()));
  return Prob(detail::sigmoid_e(t));
}

}  // namespace templab

#endif  // TEMPLAB_INSTANCES_HPP
