#ifndef TEMPLAB_MODEL_HPP
#define TEMPLAB_MODEL_HPP

// Data model for finite (prior, source) instances, sampled error counts,
// and posteriors. Losses, KL divergences and normalization live here.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "templab/kernels.hpp"

namespace templab {

// Finite family of predictors reduced to sufficient statistics: prior
// weights (stored unnormalized) and population error rates.
class HypothesisClass {
 public:
  HypothesisClass(std::vector<double> prior, std::vector<double> pop_error,
                  std::vector<std::string> labels = {})
      : prior_(std::move(prior)),
        pop_error_(std::move(pop_error)),
        labels_(std::move(labels)) {
    if (prior_.empty() || prior_.size() != pop_error_.size())
      throw std::invalid_argument("HypothesisClass: shape mismatch");
    if (!labels_.empty() && labels_.size() != prior_.size())
      throw std::invalid_argument("HypothesisClass: label shape mismatch");
    normalizer_ = 0.0;
    for (double w : prior_) {
      if (!(w > 0.0) || std::isinf(w))
        throw std::invalid_argument("HypothesisClass: prior weights must be positive");
      normalizer_ += w;
    }
    for (double e : pop_error_) {
      if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument("HypothesisClass: pop_error out of [0,1]");
    }
  }

  std::size_t size() const { return prior_.size(); }
  const std::vector<double>& raw_prior() const { return prior_; }
  const std::vector<double>& pop_error() const { return pop_error_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double normalizer() const { return normalizer_; }
  double prior_weight(std::size_t i) const { return prior_[i] / normalizer_; }

  std::vector<double> normalized_prior() const {
    std::vector<double> p(prior_);
    for (double& w : p) w /= normalizer_;
    return p;
  }

 private:
  std::vector<double> prior_;
  std::vector<double> pop_error_;
  std::vector<std::string> labels_;
  double normalizer_;
};

// Per-hypothesis empirical error counts for one dataset of size m.
struct ErrorCounts {
  long m = 0;
  std::vector<long> counts;

  ErrorCounts(long m_, std::vector<long> counts_)
      : m(m_), counts(std::move(counts_)) {
    if (m < 1) throw std::invalid_argument("ErrorCounts: m must be >= 1");
    for (long k : counts)
      if (k < 0 || k > m)
        throw std::invalid_argument("ErrorCounts: count out of [0,m]");
  }

  double rate(std::size_t i) const {
    return static_cast<double>(counts[i]) / static_cast<double>(m);
  }
};

enum class Provenance {
  kMdlPointMass,
  kEmpiricalBayes,
  kProfile,
  kBayes,
  kOracleGrid,
  kCustom,
};

// Normalized weight vector over hypotheses.
class Posterior {
 public:
  Posterior(std::vector<double> weights, Provenance provenance)
      : weights_(std::move(weights)), provenance_(provenance) {
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0))
        throw std::invalid_argument("Posterior: weights must be >= 0");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("Posterior: weights must sum to 1");
  }

  static Posterior point_mass(std::size_t index, std::size_t n,
                              Provenance provenance) {
    std::vector<double> w(n, 0.0);
    w.at(index) = 1.0;
    return Posterior(std::move(w), provenance);
  }

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  Provenance provenance() const { return provenance_; }

 private:
  std::vector<double> weights_;
  Provenance provenance_;
};

namespace detail {

inline void check_shapes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

// Weights below this are treated as exact zero so w*log(w) stays finite.
inline constexpr double kWeightFloor = 1e-300;

// Normalize nonnegative weights into a Posterior, zeroing denormal mass.
inline Posterior normalize(std::vector<double> w, Provenance provenance) {
  double sum = 0.0;
  for (double& x : w) {
    if (x < kWeightFloor) x = 0.0;
    sum += x;
  }
  if (!(sum > 0.0)) throw std::runtime_error("normalize: zero total mass");
  for (double& x : w) x /= sum;
  // One renormalization pass keeps the sum within the 1e-12 invariant.
  double s2 = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s2;
  return Posterior(std::move(w), provenance);
}

}  // namespace detail

inline Prob empirical_loss(const Posterior& q, const ErrorCounts& ec) {
  detail::check_shapes(q.size(), ec.counts.size(), "empirical_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q.weight(i) * ec.rate(i);
  return Prob(std::min(1.0, std::max(0.0, acc)));
}

inline Prob population_loss(const Posterior& q, const HypothesisClass& hc) {
  detail::check_shapes(q.size(), hc.size(), "population_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    acc += q.weight(i) * hc.pop_error()[i];
  return Prob(std::min(1.0, std::max(0.0, acc)));
}

// KL(q || normalized prior) in bits.
inline Bits kl_to_prior(const Posterior& q, const HypothesisClass& hc) {
  detail::check_shapes(q.size(), hc.size(), "kl_to_prior");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double w = q.weight(i);
    if (w > 0.0) acc += w * std::log2(w / hc.prior_weight(i));
  }
  return Bits(acc < 0.0 ? 0.0 : acc);
}

// Competitor-budget KL against the raw (unnormalized) prior weights,
// -log2 of the unnormalized mass for a point mass.
inline double kl_to_prior_raw(const Posterior& q, const HypothesisClass& hc) {
  detail::check_shapes(q.size(), hc.size(), "kl_to_prior_raw");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double w = q.weight(i);
    if (w > 0.0) acc += w * std::log2(w / hc.raw_prior()[i]);
  }
  return acc;
}

// m*H(L_S(q)) + lambda*KL(q||prior): the PAC-Bayes objective.
inline Bits objective_eb(const Posterior& q, const ErrorCounts& ec,
                         const HypothesisClass& hc, double lambda) {
  if (lambda < 0.0) throw std::domain_error("objective_eb: lambda must be >= 0");
  const double ls = empirical_loss(q, ec).value();
  return Bits(static_cast<double>(ec.m) * detail::h2(ls) +
              lambda * kl_to_prior(q, hc).value());
}

// m*E_q[H(k_i/m)] + lambda*KL(q||prior): the profile objective.
inline Bits objective_pp(const Posterior& q, const ErrorCounts& ec,
                         const HypothesisClass& hc, double lambda) {
  if (lambda < 0.0) throw std::domain_error("objective_pp: lambda must be >= 0");
  detail::check_shapes(q.size(), ec.counts.size(), "objective_pp");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    acc += q.weight(i) * detail::h2(ec.rate(i));
  return Bits(static_cast<double>(ec.m) * acc +
              lambda * kl_to_prior(q, hc).value());
}

// A learning problem reduced to sufficient statistics: the hypothesis
// class with its prior, plus a reference competitor mixture and its error.
struct Instance {
  HypothesisClass hypothesis_class;
  Posterior qstar;
  Prob lstar;

  Instance(HypothesisClass hc, Posterior q, Prob l)
      : hypothesis_class(std::move(hc)), qstar(std::move(q)), lstar(l) {
    if (std::fabs(population_loss(qstar, hypothesis_class).value() -
                  lstar.value()) > 1e-12)
      throw std::invalid_argument("Instance: L_D(qstar) != lstar");
    if (kl_to_prior_raw(qstar, hypothesis_class) > 10.0 + 1e-12)
      throw std::invalid_argument("Instance: KL(qstar||prior) exceeds budget 10");
  }
};

}  // namespace templab

#endif  // TEMPLAB_MODEL_HPP
