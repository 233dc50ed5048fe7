#ifndef TEMPLAB_RULES_HPP
#define TEMPLAB_RULES_HPP

// The four learning rules and the Bayesian-interpretation machinery:
// MDL selection, the self-consistent empirical-Bayes Gibbs posterior, the
// profile posterior, full Bayes posteriors under eta-priors, and the
// eta-hat estimators.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "templab/kernels.hpp"
#include "templab/model.hpp"
#include "templab/tempering.hpp"

namespace templab {

// Prior on the noise level eta.
class EtaPrior {
 public:
  enum class Kind { kUniform, kPLambda, kCustomDensity };

  static EtaPrior uniform() { return EtaPrior(Kind::kUniform); }

  // P_lambda(eta) = ((1-eta)^lambda + eta^lambda)^(-m/lambda), stored
  // unnormalized and evaluated in log space.
  static EtaPrior p_lambda(Lambda lambda, long m) {
    if (lambda.value() <= 0.0)
      throw std::domain_error("EtaPrior::p_lambda: lambda must be > 0");
    if (m < 1) throw std::domain_error("EtaPrior::p_lambda: m must be >= 1");
    EtaPrior p(Kind::kPLambda);
    p.lambda_ = lambda.value();
    p.m_ = m;
    return p;
  }

  // Tabulated positive density on (0,1); log-density is interpolated
  // linearly between grid points.
  static EtaPrior custom_density(std::vector<double> grid,
                                 std::vector<double> density) {
    if (grid.size() < 2 || grid.size() != density.size())
      throw std::invalid_argument("EtaPrior::custom_density: bad table");
    EtaPrior p(Kind::kCustomDensity);
    p.grid_ = std::move(grid);
    p.log_density_.reserve(p.grid_.size());
    for (std::size_t i = 0; i < p.grid_.size(); ++i) {
      if (!(p.grid_[i] > 0.0 && p.grid_[i] < 1.0))
        throw std::invalid_argument("EtaPrior::custom_density: grid outside (0,1)");
      if (i > 0 && p.grid_[i] <= p.grid_[i - 1])
        throw std::invalid_argument("EtaPrior::custom_density: grid not increasing");
      if (!(density[i] > 0.0))
        throw std::invalid_argument("EtaPrior::custom_density: density must be > 0");
      p.log_density_.push_back(std::log(density[i]));
    }
    return p;
  }

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  long m() const { return m_; }

  // Natural-log density, up to an additive constant.
  double log_density(double eta) const {
    switch (kind_) {
      case Kind::kUniform:
        return 0.0;
      case Kind::kPLambda: {
        const double a = lambda_ * std::log1p(-eta);
        const double b = lambda_ * std::log(eta);
        const double hi = std::max(a, b), lo = std::min(a, b);
        return -(static_cast<double>(m_) / lambda_) *
               (hi + std::log1p(std::exp(lo - hi)));
      }
      case Kind::kCustomDensity: {
        const auto it =
            std::lower_bound(grid_.begin(), grid_.end(), eta);
        if (it == grid_.begin()) return log_density_.front();
        if (it == grid_.end()) return log_density_.back();
        const std::size_t j = static_cast<std::size_t>(it - grid_.begin());
        const double t = (eta - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
        return (1.0 - t) * log_density_[j - 1] + t * log_density_[j];
      }
    }
    throw std::logic_error("EtaPrior: unreachable");
  }

 private:
  explicit EtaPrior(Kind kind) : kind_(kind) {}

  Kind kind_;
  double lambda_ = 1.0;
  long m_ = 1;
  std::vector<double> grid_;
  std::vector<double> log_density_;
};

// Solver state of the self-consistent inverse temperature search.
struct FixedPointDiagnostics {
  double beta_star = 0.0;  // self-consistent H'(L_S(Q_hat))
  int iterations = 0;
  double residual = 0.0;   // |H'(L_S(Q_beta)) - beta| at the solution
  bool degenerate = false; // crossing at infinity, ERM-limit posterior
  bool negated = false;    // counts were flipped because L_S(prior) >= 1/2
};

namespace detail {

inline double log2_binomial(long m, long k) {
  return (std::lgamma(static_cast<double>(m) + 1.0) -
          std::lgamma(static_cast<double>(k) + 1.0) -
          std::lgamma(static_cast<double>(m - k) + 1.0)) /
         kLn2;
}

// Gibbs weights proportional to prior * 2^{-tilt_per_count * k_i},
// computed with max-subtraction.
inline std::vector<double> gibbs_weights(const HypothesisClass& hc,
                                         const std::vector<long>& counts,
                                         double tilt_per_count) {
  const std::size_t n = hc.size();
  std::vector<double> logw(n);
  double top = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    logw[i] = std::log2(hc.raw_prior()[i]) -
              tilt_per_count * static_cast<double>(counts[i]);
    top = std::max(top, logw[i]);
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp2(logw[i] - top);
  return w;
}

inline double weighted_rate(const std::vector<double>& w,
                            const ErrorCounts& ec) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * static_cast<double>(ec.counts[i]);
    den += w[i];
  }
  return num / den / static_cast<double>(ec.m);
}

}  // namespace detail

// Point mass on the argmin of the two-part code length.
enum class MdlForm { kEntropy, kExactBinomial };

inline Posterior mdl_select(const ErrorCounts& ec, const HypothesisClass& hc,
                            Lambda lambda, MdlForm form = MdlForm::kEntropy) {
  detail::check_shapes(ec.counts.size(), hc.size(), "mdl_select");
  const double lam = lambda.value();
  const double m = static_cast<double>(ec.m);
  std::size_t best = 0;
  double best_score = kInf;
  for (std::size_t i = 0; i < hc.size(); ++i) {
    const double data_bits = form == MdlForm::kEntropy
                                 ? m * detail::h2(ec.rate(i))
                                 : detail::log2_binomial(ec.m, ec.counts[i]);
    const double score = data_bits - lam * std::log2(hc.prior_weight(i));
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return Posterior::point_mass(best, hc.size(), Provenance::kMdlPointMass);
}

// Gibbs posterior Q_beta with self-consistent tilt beta = H'(L_S(Q_beta)),
// solved by bracketed bisection; returns the ERM-restricted limit when the
// curves only meet at infinity.
inline std::pair<Posterior, FixedPointDiagnostics> empirical_bayes_posterior(
    const ErrorCounts& ec, const HypothesisClass& hc, Lambda lambda,
    bool strict = false) {
  detail::check_shapes(ec.counts.size(), hc.size(), "empirical_bayes_posterior");
  const double lam = lambda.value();
  if (lam <= 0.0)
    throw std::domain_error("empirical_bayes_posterior: lambda must be > 0");

  double ls_prior = 0.0;
  for (std::size_t i = 0; i < hc.size(); ++i)
    ls_prior += hc.prior_weight(i) * ec.rate(i);
  if (ls_prior >= 0.5 && strict)
    throw std::runtime_error(
        "empirical_bayes_posterior: L_S(prior) >= 1/2 in strict mode");

  const double lam_cap = 1100.0 * (1.0 + lam);

  // Solves beta = H'(L_S(Q_beta)) on the given counts over beta >= 0 by
  // locating the last + -> - sign change of r(beta) = H'(L_S(Q_beta)) -
  // beta (the downward crossings are the local minima of the objective
  // along the tilt path) and bisecting inside it.
  const auto solve_frame = [&](const ErrorCounts& work)
      -> std::pair<Posterior, FixedPointDiagnostics> {
    FixedPointDiagnostics d;
    const double c = static_cast<double>(ec.m) / lam;  // m / lambda
    const auto residual_at = [&](double beta) {
      const std::vector<double> w = detail::gibbs_weights(
          hc, work.counts, c * beta / static_cast<double>(ec.m));
      const double ls = detail::weighted_rate(w, work);
      if (ls <= 0.0) return kInf;
      if (ls >= 1.0) return -kInf;
      return detail::h2_deriv(ls) - beta;
    };

    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    // Geometric scan; r(0) = 0 (prior loss exactly 1/2) is a spurious
    // root and the > 0 test skips it.
    double prev = 0.0;
    double rprev = residual_at(0.0);
    bool ever_positive = rprev > 0.0;
    for (double b = 1e-4; prev < lam_cap; b *= 1.25) {
      const double cur = std::min(b, lam_cap);
      const double rcur = residual_at(cur);
      if (rcur > 0.0) ever_positive = true;
      if (rprev > 0.0 && rcur < 0.0) {
        lo = prev;
        hi = cur;
        bracketed = true;
      }
      prev = cur;
      rprev = rcur;
      ++d.iterations;
    }

    if (!bracketed && (!ever_positive || rprev < 0.0)) {
      // No downward crossing and the residual ends negative: the
      // objective never falls along this tilt direction; stay at the
      // prior (beta = 0 boundary).
      d.beta_star = 0.0;
      d.residual = 0.0;
      std::vector<double> w = hc.raw_prior();
      return {detail::normalize(std::move(w), Provenance::kEmpiricalBayes), d};
    }
    if (!bracketed) {
      // Degenerate branch: prior renormalized over the empirical minimizers.
      const long kmin =
          *std::min_element(work.counts.begin(), work.counts.end());
      std::vector<double> w(hc.size(), 0.0);
      for (std::size_t i = 0; i < hc.size(); ++i)
        if (work.counts[i] == kmin) w[i] = hc.raw_prior()[i];
      d.degenerate = true;
      d.beta_star = lam_cap;
      d.residual = kInf;
      return {detail::normalize(std::move(w), Provenance::kEmpiricalBayes), d};
    }

    double beta = 0.5 * (lo + hi);
    double res = residual_at(beta);
    for (int it = 0; it < 300; ++it) {
      ++d.iterations;
      if (res > 0.0)
        lo = beta;
      else
        hi = beta;
      beta = 0.5 * (lo + hi);
      res = residual_at(beta);
      if (std::fabs(res) <= 1e-12 || hi - lo <= 1e-14 * (1.0 + beta)) break;
    }

    d.beta_star = beta;
    d.residual = std::fabs(res);
    std::vector<double> w = detail::gibbs_weights(
        hc, work.counts, c * beta / static_cast<double>(ec.m));
    return {detail::normalize(std::move(w), Provenance::kEmpiricalBayes), d};
  };

  std::vector<long> negated(ec.counts.size());
  for (std::size_t i = 0; i < negated.size(); ++i)
    negated[i] = ec.m - ec.counts[i];

  // The rule minimizes the objective subject to L_S(Q) <= 1/2. When the
  // prior itself has sample loss >= 1/2 that premise fails and the
  // default mode applies the post-learning-negation convention: solve on
  // the negated counts and flag the output.
  // Negate only when the prior's loss is strictly above 1/2: at exactly
  // 1/2 the prior sits on the boundary of the feasible set in the
  // original frame, and the solver can still move off it there.
  if (ls_prior > 0.5) {
    auto out = solve_frame(ErrorCounts(ec.m, negated));
    out.second.negated = true;
    return out;
  }
  return solve_frame(ErrorCounts(ec.m, ec.counts));
}

// weights[i] proportional to prior_i * 2^{-(m/lambda) H(k_i/m)}; exact.
inline Posterior profile_posterior(const ErrorCounts& ec,
                                   const HypothesisClass& hc, Lambda lambda) {
  detail::check_shapes(ec.counts.size(), hc.size(), "profile_posterior");
  const double lam = lambda.value();
  if (lam <= 0.0)
    throw std::domain_error("profile_posterior: lambda must be > 0");
  const double c = static_cast<double>(ec.m) / lam;
  const std::size_t n = hc.size();
  std::vector<double> logw(n);
  double top = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    logw[i] = std::log2(hc.raw_prior()[i]) - c * detail::h2(ec.rate(i));
    top = std::max(top, logw[i]);
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp2(logw[i] - top);
  return detail::normalize(std::move(w), Provenance::kProfile);
}

namespace detail {

// Adaptive Simpson on [a,b] for a bounded integrand.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double fa, double fm, double fb,
                               double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

// log integral of eta^k (1-eta)^(m-k) P(eta) d eta over (0,1), via the
// substitution eta = sigmoid(t) on t in [-40, 40]. Beta-like integrands
// concentrate sharply at k/m for large m, so the peak is located first.
inline double log_marginal_integral(long m, long k, const EtaPrior& prior) {
  const auto log_integrand = [&](double t) {
    const double log_eta = -std::log1p(std::exp(-t));
    const double log_1meta = -std::log1p(std::exp(t));
    return static_cast<double>(k) * log_eta +
           static_cast<double>(m - k) * log_1meta +
           prior.log_density(sigmoid_e(t)) + log_eta + log_1meta;
  };
  const double t_lo = -40.0, t_hi = 40.0;
  const int scan = 512;
  const double step = (t_hi - t_lo) / scan;
  std::vector<double> g(scan + 1);
  int best = 0;
  for (int i = 0; i <= scan; ++i) {
    g[i] = log_integrand(t_lo + step * i);
    if (g[i] > g[best]) best = i;
  }
  // Refine the peak between the neighbors of the best scan point; the
  // integrand narrows like 1/sqrt(m) and can fall between scan points.
  double a = t_lo + step * std::max(0, best - 1);
  double b = t_lo + step * std::min(scan, best + 1);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (log_integrand(m1) < log_integrand(m2))
      a = m1;
    else
      b = m2;
  }
  const double t_peak = 0.5 * (a + b);
  const double peak = std::max(log_integrand(t_peak), g[best]);
  // Restrict to the window where the integrand is within exp(-60) of the
  // peak, so the quadrature nodes actually resolve the spike.
  int lo_i = best, hi_i = best;
  while (lo_i > 0 && g[lo_i - 1] >= peak - 60.0) --lo_i;
  while (hi_i < scan && g[hi_i + 1] >= peak - 60.0) ++hi_i;
  const double wa = t_lo + step * std::max(0, lo_i - 1);
  const double wb = t_lo + step * std::min(scan, hi_i + 1);
  const auto f = [&](double t) { return std::exp(log_integrand(t) - peak); };
  // Split at the peak so the initial Simpson nodes straddle it.
  const double val =
      adaptive_simpson(f, wa, t_peak, f(wa), f(0.5 * (wa + t_peak)), f(t_peak),
                       1e-12, 48) +
      adaptive_simpson(f, t_peak, wb, f(t_peak), f(0.5 * (t_peak + wb)), f(wb),
                       1e-12, 48);
  if (!(val > 0.0))
    throw std::runtime_error("log_marginal_integral: quadrature failed");
  return peak + std::log(val);
}

}  // namespace detail

// weights[i] proportional to prior_i * integral of the Bernoulli likelihood
// against the eta-prior. The uniform prior uses the exact Beta identity.
inline Posterior bayes_posterior(const ErrorCounts& ec,
                                 const HypothesisClass& hc,
                                 const EtaPrior& eta_prior) {
  detail::check_shapes(ec.counts.size(), hc.size(), "bayes_posterior");
  const std::size_t n = hc.size();
  const bool exact_beta =
      eta_prior.kind() == EtaPrior::Kind::kUniform ||
      (eta_prior.kind() == EtaPrior::Kind::kPLambda && eta_prior.lambda() == 1.0);
  std::vector<double> logw(n);
  double top = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double log2_integral;
    if (exact_beta) {
      // integral = 1 / ((m+1) * C(m,k)); the (m+1) factor is common.
      log2_integral = -detail::log2_binomial(ec.m, ec.counts[i]);
    } else {
      try {
        log2_integral =
            detail::log_marginal_integral(ec.m, ec.counts[i], eta_prior) /
            detail::kLn2;
      } catch (const std::exception& e) {
        throw std::runtime_error("bayes_posterior: quadrature failed at index " +
                                 std::to_string(i) + ": " + e.what());
      }
    }
    logw[i] = std::log2(hc.raw_prior()[i]) + log2_integral;
    top = std::max(top, logw[i]);
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp2(logw[i] - top);
  return detail::normalize(std::move(w), Provenance::kBayes);
}

namespace detail {

// L_S of the plug-in posterior P(h|S,eta) proportional to
// prior * (eta/(1-eta))^k.
inline double plugin_loss(const ErrorCounts& ec, const HypothesisClass& hc,
                          double eta) {
  const double tilt = -logit2(eta);  // bits per error count
  const std::vector<double> w = gibbs_weights(hc, ec.counts, tilt);
  return weighted_rate(w, ec);
}

// Damped fixed-point iteration for eta = step(eta), with bisection
// fallback on step(eta) - eta.
inline double solve_eta_fixed_point(const std::function<double(double)>& step) {
  const double eps = 1e-12;
  double eta = 0.25;
  for (int it = 0; it < 10000; ++it) {
    const double next = step(eta);
    if (std::fabs(next - eta) <= 1e-10) return next;
    eta = std::clamp(0.5 * (eta + next), eps, 1.0 - eps);
  }
  double lo = eps, hi = 1.0 - eps;
  if (step(lo) - lo < 0.0) return lo;  // degenerate boundary
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (step(mid) - mid > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::fabs(step(mid) - mid) > 1e-8)
    throw std::runtime_error("solve_eta_fixed_point: no convergence");
  return mid;
}

}  // namespace detail

// Maximum (penalized) marginal-likelihood noise level. For the uniform
// prior this is the fixed point eta = L_S(P(.|S,eta)); for P_lambda it
// solves logit(eta) = logit(L_S(P(.|S,eta))) / lambda.
inline Prob eta_hat_marginal(const ErrorCounts& ec, const HypothesisClass& hc,
                             const EtaPrior& eta_prior) {
  detail::check_shapes(ec.counts.size(), hc.size(), "eta_hat_marginal");
  switch (eta_prior.kind()) {
    case EtaPrior::Kind::kUniform: {
      const auto step = [&](double eta) {
        return detail::plugin_loss(ec, hc, eta);
      };
      return Prob(detail::solve_eta_fixed_point(step));
    }
    case EtaPrior::Kind::kPLambda: {
      const double lam = eta_prior.lambda();
      const auto step = [&](double eta) {
        const double q = detail::plugin_loss(ec, hc, eta);
        if (q <= 0.0) return 0.0;
        if (q >= 1.0) return 1.0;
        return detail::sigmoid_e(detail::logit_e(q) / lam);
      };
      return Prob(detail::solve_eta_fixed_point(step));
    }
    case EtaPrior::Kind::kCustomDensity:
      throw std::invalid_argument(
          "eta_hat_marginal: custom densities have no closed stationarity "
          "identity; use bayes_posterior");
  }
  throw std::logic_error("eta_hat_marginal: unreachable");
}

// The plug-in posterior P(h|S, eta) for a fixed noise level.
inline Posterior plugin_posterior(const ErrorCounts& ec,
                                  const HypothesisClass& hc, Prob eta) {
  detail::check_shapes(ec.counts.size(), hc.size(), "plugin_posterior");
  const double e = eta.value();
  if (e <= 0.0 || e >= 1.0) {
    // Boundary noise level: likelihood concentrates on the count extreme.
    const long target = e <= 0.0
                            ? *std::min_element(ec.counts.begin(), ec.counts.end())
                            : *std::max_element(ec.counts.begin(), ec.counts.end());
    std::vector<double> w(hc.size(), 0.0);
    for (std::size_t i = 0; i < hc.size(); ++i)
      if (ec.counts[i] == target) w[i] = hc.raw_prior()[i];
    return detail::normalize(std::move(w), Provenance::kBayes);
  }
  std::vector<double> w =
      detail::gibbs_weights(hc, ec.counts, -detail::logit2(e));
  return detail::normalize(std::move(w), Provenance::kBayes);
}

struct EtaHatProfile {
  Prob value;
  bool boundary = false;  // k in {0, m}: profile likelihood degenerate
};

// Per-hypothesis profile noise level. Uniform prior: k/m exactly.
// P_lambda: logit(eta_h) = logit(k/m) / lambda, in closed form.
inline EtaHatProfile eta_hat_profile(long k, long m, const EtaPrior& eta_prior) {
  if (m < 1 || k < 0 || k > m)
    throw std::domain_error("eta_hat_profile: need 0 <= k <= m");
  if (k == 0) return {Prob(0.0), true};
  if (k == m) return {Prob(1.0), true};
  const double rate = static_cast<double>(k) / static_cast<double>(m);
  switch (eta_prior.kind()) {
    case EtaPrior::Kind::kUniform:
      return {Prob(rate), false};
    case EtaPrior::Kind::kPLambda:
      return {Prob(detail::sigmoid_e(detail::logit_e(rate) / eta_prior.lambda())),
              false};
    case EtaPrior::Kind::kCustomDensity:
      throw std::invalid_argument(
          "eta_hat_profile: no closed form for custom densities");
  }
  throw std::logic_error("eta_hat_profile: unreachable");
}

inline double posterior_tv(const Posterior& a, const Posterior& b) {
  detail::check_shapes(a.size(), b.size(), "posterior_tv");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += std::fabs(a.weight(i) - b.weight(i));
  return 0.5 * acc;
}

}  // namespace templab

#endif  // TEMPLAB_RULES_HPP
