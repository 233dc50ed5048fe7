#ifndef TEMPLAB_KERNELS_HPP
#define TEMPLAB_KERNELS_HPP

// Scalar primitives: binary entropy, binary KL, their derivatives and
// inverses. All logarithms are base 2 (results in bits) except the
// explicitly e-based sigmoid/logit pair.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace templab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A probability in [0,1]. Construction rejects NaN and out-of-range values.
class Prob {
 public:
  Prob() : v_(0.0) {}
  explicit Prob(double v) : v_(v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("Prob out of [0,1]: " + std::to_string(v));
  }
  double value() const { return v_; }

 private:
  double v_;
};

// Information in bits, >= 0. +inf is a legal, flagged value (disjoint
// support in KL).
class Bits {
 public:
  Bits() : v_(0.0) {}
  explicit Bits(double v) : v_(v) {
    if (std::isnan(v) || v < 0.0)
      throw std::domain_error("Bits must be >= 0: " + std::to_string(v));
  }
  double value() const { return v_; }
  bool is_infinite() const { return std::isinf(v_); }

 private:
  double v_;
};

namespace detail {

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

// H(p) in bits. Evaluated from the smaller of p, 1-p with log1p so the
// near-boundary term does not cancel.
inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const double q = p < 0.5 ? p : 1.0 - p;
  return -q * std::log2(q) - (1.0 - q) * std::log1p(-q) / kLn2;
}

// H'(p) = log2((1-p)/p).
inline double h2_deriv(double p) { return std::log2((1.0 - p) / p); }

// (H')^{-1}(beta) = 1/(1 + 2^beta). Underflow-safe for large beta.
inline double h2_deriv_inv(double beta) {
  if (beta >= 0.0) {
    const double t = std::exp2(-beta);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp2(beta));
}

// KL(p || q) in bits, +inf when q in {0,1} and p differs.
inline double kl2(double p, double q) {
  if (p == q) return 0.0;
  double acc = 0.0;
  if (p > 0.0) {
    if (q <= 0.0) return kInf;
    acc += p * std::log2(p / q);
  }
  if (p < 1.0) {
    if (q >= 1.0) return kInf;
    acc += (1.0 - p) * std::log2((1.0 - p) / (1.0 - q));
  }
  return acc < 0.0 ? 0.0 : acc;  // clamp roundoff
}

inline double sigmoid_e(double t) {
  if (t >= 0.0) {
    const double z = std::exp(-t);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(t);
  return z / (1.0 + z);
}

inline double logit_e(double p) { return std::log(p / (1.0 - p)); }

inline double logit2(double p) { return std::log2(p / (1.0 - p)); }

}  // namespace detail

inline Bits binary_entropy(Prob p) { return Bits(detail::h2(p.value())); }

inline double binary_entropy_deriv(Prob p) {
  const double v = p.value();
  if (v <= 0.0 || v >= 1.0)
    throw std::domain_error("binary_entropy_deriv: p must be in (0,1)");
  return detail::h2_deriv(v);
}

inline Prob binary_entropy_deriv_inv(double beta) {
  if (std::isnan(beta))
    throw std::domain_error("binary_entropy_deriv_inv: beta is NaN");
  return Prob(detail::h2_deriv_inv(beta));
}

// Unique p in [0, 1/2] with H(p) = hval, by bisection.
inline Prob binary_entropy_inv_lower(Bits hval) {
  const double h = hval.value();
  if (!(h >= 0.0 && h <= 1.0))
    throw std::domain_error("binary_entropy_inv_lower: hval must be in [0,1]");
  if (h == 0.0) return Prob(0.0);
  if (h == 1.0) return Prob(0.5);
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::h2(mid) < h)
      lo = mid;
    else
      hi = mid;
  }
  return Prob(0.5 * (lo + hi));
}

inline Bits binary_kl(Prob p, Prob q) {
  return Bits(detail::kl2(p.value(), q.value()));
}

inline double sigmoid_e(double t) {
  if (std::isnan(t)) throw std::domain_error("sigmoid_e: NaN input");
  return detail::sigmoid_e(t);
}

inline double logit_e(Prob p) {
  const double v = p.value();
  if (v <= 0.0 || v >= 1.0)
    throw std::domain_error("logit_e: p must be in (0,1)");
  return detail::logit_e(v);
}

inline double logit2(Prob p) {
  const double v = p.value();
  if (v <= 0.0 || v >= 1.0)
    throw std::domain_error("logit2: p must be in (0,1)");
  return detail::logit2(v);
}

}  // namespace templab

#endif  // TEMPLAB_KERNELS_HPP
