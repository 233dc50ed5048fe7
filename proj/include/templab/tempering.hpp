#ifndef TEMPLAB_TEMPERING_HPP
#define TEMPLAB_TEMPERING_HPP

// The limiting-error calculus: T_lambda, U_lambda, the tempering function
// ell_lambda and its building blocks, plus lambda-schedules and curve grids.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "templab/kernels.hpp"

namespace templab {

// Regularization strength, >= 0 and finite.
class Lambda {
 public:
  Lambda() : v_(1.0) {}
  explicit Lambda(double v) : v_(v) {
    if (std::isnan(v) || std::isinf(v) || v < 0.0)
      throw std::domain_error("Lambda must be finite and >= 0: " +
                              std::to_string(v));
  }
  double value() const { return v_; }

 private:
  double v_;
};

namespace detail {

// Minimizer p* of lambda*KL(p||q) + H(p) for lambda > 1, computed in log
// space: p* = sigmoid(lambda/(lambda-1) * logit(q)).
inline double tstar_p(double lambda, double q) {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return sigmoid_e(lambda / (lambda - 1.0) * logit_e(q));
}

// U_lambda(q) for lambda > 1.
inline double u_lambda(double lambda, double q) {
  const double p = tstar_p(lambda, q);
  // When the exponent underflows p to 0, the KL term limit is
  // -log2(1-q), matching the lambda <= 1 branch.
  if (p == 0.0) return -lambda * std::log1p(-q) / kLn2;
  return lambda * kl2(p, q) + h2(p);
}

inline double t_lambda(double lambda, double q) {
  // The feasible set is p in [0, 1/2]; for q > 1/2 the unconstrained
  // stationary point falls outside it and the minimum moves to an endpoint.
  if (lambda <= 1.0) {
    const double edge0 = -lambda * std::log1p(-q) / kLn2;  // p = 0
    if (q <= 0.5) return edge0;
    return std::min(edge0, lambda * kl2(0.5, q) + 1.0);  // p = 1/2
  }
  if (q > 0.5) return lambda * kl2(0.5, q) + 1.0;
  return u_lambda(lambda, q);
}

}  // namespace detail

// T_lambda(q) = min_{0<=p<=1/2} lambda*KL(p||q) + H(p), in closed form.
inline Bits t_lambda(Lambda lambda, Prob q) {
  if (lambda.value() <= 0.0)
    throw std::domain_error("t_lambda: lambda must be > 0");
  if (q.value() >= 1.0 && lambda.value() <= 1.0) return Bits(kInf);
  return Bits(detail::t_lambda(lambda.value(), q.value()));
}

// U_lambda(q) for lambda > 1, strictly increasing on (0, 1/2].
inline Bits u_lambda(Lambda lambda, Prob q) {
  if (lambda.value() <= 1.0)
    throw std::domain_error("u_lambda: lambda must be > 1");
  if (q.value() <= 0.0 || q.value() > 0.5)
    throw std::domain_error("u_lambda: q must be in (0, 1/2]");
  return Bits(detail::u_lambda(lambda.value(), q.value()));
}

// Unique q in [0, 1/2] with U_lambda(q) = hval, by monotone bisection.
inline Prob u_lambda_inverse(Lambda lambda, Bits hval) {
  if (lambda.value() <= 1.0)
    throw std::domain_error("u_lambda_inverse: lambda must be > 1");
  const double h = hval.value();
  if (!(h >= 0.0 && h <= 1.0))
    throw std::domain_error("u_lambda_inverse: hval must be in [0,1]");
  const double lam = lambda.value();
  const double q_floor = 1e-15;
  if (h >= 1.0) return Prob(0.5);
  if (h < detail::u_lambda(lam, q_floor))
    throw std::domain_error("u_lambda_inverse: no solution above q floor");
  double lo = q_floor, hi = 0.5;
  double mid = 0.25;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double u = detail::u_lambda(lam, mid);
    if (std::fabs(u - h) <= 1e-10 && hi - lo <= 1e-12) break;
    if (u < h)
      lo = mid;
    else
      hi = mid;
  }
  return Prob(mid);
}

// The tempering function of Eq-style closed forms:
//   lambda <= 1: 1 - 2^{-H(L*)/lambda}
//   lambda  > 1: U_lambda^{-1}(H(L*))
inline Prob ell_lambda(Lambda lambda, Prob lstar) {
  const double lam = lambda.value();
  if (lam <= 0.0) throw std::domain_error("ell_lambda: lambda must be > 0");
  if (lstar.value() >= 0.5)
    throw std::domain_error("ell_lambda: lstar must be < 1/2");
  if (lstar.value() == 0.0) return Prob(0.0);
  const double h = detail::h2(lstar.value());
  if (lam <= 1.0) return Prob(-std::expm1(-h / lam * detail::kLn2));
  return u_lambda_inverse(lambda, Bits(h));
}

// Lemma-style gap U_lambda(q) + lambda/(lambda-1)^2 - H(q); strictly > 0.
inline Bits lemma9_gap(Lambda lambda, Prob q) {
  const double lam = lambda.value();
  if (lam <= 1.0) throw std::domain_error("lemma9_gap: lambda must be > 1");
  if (q.value() > 0.5)
    throw std::domain_error("lemma9_gap: q must be in [0, 1/2]");
  const double u = q.value() <= 0.0 ? 0.0 : detail::u_lambda(lam, q.value());
  return Bits(u + lam / ((lam - 1.0) * (lam - 1.0)) - detail::h2(q.value()));
}

// Rule mapping sample size m to regularization strength lambda_m.
class LambdaSchedule {
 public:
  enum class Kind { kConstant, kPower, kSqrtOptimal, kLinear, kInverseLog };

  static LambdaSchedule constant(double lambda) {
    return LambdaSchedule(Kind::kConstant, lambda, 0.0);
  }
  // lambda_m = c * m^alpha
  static LambdaSchedule power(double c, double alpha) {
    return LambdaSchedule(Kind::kPower, c, alpha);
  }
  // lambda_m = sqrt(m / (kl_budget + log2 m))
  static LambdaSchedule sqrt_optimal(double kl_budget) {
    return LambdaSchedule(Kind::kSqrtOptimal, kl_budget, 0.0);
  }
  // lambda_m = c * m
  static LambdaSchedule linear(double c) {
    return LambdaSchedule(Kind::kLinear, c, 0.0);
  }
  // lambda_m = c / log2(m + 2)
  static LambdaSchedule inverse_log(double c) {
    return LambdaSchedule(Kind::kInverseLog, c, 0.0);
  }

  Lambda evaluate(long m) const {
    if (m < 1) throw std::domain_error("LambdaSchedule: m must be >= 1");
    const double md = static_cast<double>(m);
    switch (kind_) {
      case Kind::kConstant:
        return Lambda(a_);
      case Kind::kPower:
        return Lambda(a_ * std::pow(md, b_));
      case Kind::kSqrtOptimal:
        return Lambda(std::sqrt(md / (a_ + std::log2(md))));
      case Kind::kLinear:
        return Lambda(a_ * md);
      case Kind::kInverseLog:
        return Lambda(a_ / std::log2(md + 2.0));
    }
    throw std::logic_error("LambdaSchedule: unreachable");
  }

  Kind kind() const { return kind_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }

 private:
  LambdaSchedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {
    if (kind != Kind::kConstant && a <= 0.0)
      throw std::domain_error("LambdaSchedule: parameter must be > 0");
    if (kind == Kind::kConstant && a < 0.0)
      throw std::domain_error("LambdaSchedule: constant lambda must be >= 0");
  }

  Kind kind_;
  double a_, b_;
};

// One ell_lambda curve over an L* grid; values sit on or above the diagonal.
struct TemperingCurve {
  Lambda lambda;
  std::vector<Prob> lstar_grid;
  std::vector<Prob> values;
};

inline std::vector<TemperingCurve> emit_tempering_grid(
    const std::vector<Lambda>& lambdas, const std::vector<Prob>& lstar_grid) {
  std::vector<TemperingCurve> curves;
  curves.reserve(lambdas.size());
  for (const Lambda& lam : lambdas) {
    TemperingCurve c{lam, lstar_grid, {}};
    c.values.reserve(lstar_grid.size());
    for (const Prob& ls : lstar_grid) c.values.push_back(ell_lambda(lam, ls));
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace templab

#endif  // TEMPLAB_TEMPERING_HPP
