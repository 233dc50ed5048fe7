#ifndef TEMPLAB_HARNESS_HPP
#define TEMPLAB_HARNESS_HPP

// Monte Carlo engine: sweeps (rule, lambda-schedule, m) over instances,
// estimates expected population error and posterior mass trajectories,
// audits the finite-sample bound, and measures posterior equivalences.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "templab/instances.hpp"
#include "templab/kernels.hpp"
#include "templab/model.hpp"
#include "templab/rules.hpp"
#include "templab/tempering.hpp"

namespace templab {

struct RuleSpec {
  enum class Kind { kMdl, kEmpiricalBayes, kProfile, kBayes };
  enum class BayesPrior { kUniform, kPLambda };

  Kind kind = Kind::kEmpiricalBayes;
  BayesPrior bayes_prior = BayesPrior::kUniform;

  std::string name() const {
    switch (kind) {
      case Kind::kMdl:
        return "mdl";
      case Kind::kEmpiricalBayes:
        return "empirical_bayes";
      case Kind::kProfile:
        return "profile";
      case Kind::kBayes:
        return bayes_prior == BayesPrior::kUniform ? "bayes_uniform"
                                                   : "bayes_p_lambda";
    }
    return "?";
  }
};

// Instance source for a sweep: either a lower-bound construction whose
// truncation is re-derived per m, or a fixed explicit instance.
struct InstanceSpec {
  enum class Kind { kLowerBound, kFixed };

  Kind kind = Kind::kFixed;
  LowerBoundSpec lb;
  std::shared_ptr<const Instance> fixed;

  static InstanceSpec lower_bound(LowerBoundSpec spec) {
    InstanceSpec s;
    s.kind = Kind::kLowerBound;
    s.lb = spec;
    return s;
  }
  static InstanceSpec fixed_instance(Instance inst) {
    InstanceSpec s;
    s.kind = Kind::kFixed;
    s.fixed = std::make_shared<const Instance>(std::move(inst));
    return s;
  }
};

struct ExperimentConfig {
  InstanceSpec instance;
  RuleSpec rule;
  LambdaSchedule schedule = LambdaSchedule::constant(1.0);
  std::vector<long> m_grid;
  long trials = 1;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = default worker count

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials >= 1");
    if (m_grid.empty())
      throw std::invalid_argument("ExperimentConfig: empty m_grid");
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
      if (m_grid[i] < 1)
        throw std::invalid_argument("ExperimentConfig: m must be >= 1");
      if (i > 0 && m_grid[i] <= m_grid[i - 1])
        throw std::invalid_argument(
            "ExperimentConfig: m_grid must be strictly increasing");
    }
  }
};

struct SweepRow {
  long m = 0;
  double lambda = 0.0;
  double mean_pop_error = 0.0;
  double std_error = 0.0;  // sample std / sqrt(trials)
  double mean_mass_h0 = 0.0;
  double std_mass_h0 = 0.0;  // sample std / sqrt(trials) of the h_0 mass
  double runtime_seconds = 0.0;
};

struct ExperimentReport {
  std::vector<SweepRow> rows;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;

  std::string to_csv() const;
};

namespace detail {

inline int worker_count(int requested) {
  if (const char* env = std::getenv("TEMPERING_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(t) for t in [0, n) across workers; any exception aborts the
// whole sweep (a silently skipped trial would bias the estimates).
template <typename Fn>
void parallel_trials(long n, int threads, Fn&& fn) {
  const int t = static_cast<int>(std::max<long>(1, std::min<long>(threads, n)));
  if (t == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < n; i += t) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct TrialOutcome {
  double pop_error = 0.0;
  double mass_h0 = 0.0;
};

inline Posterior apply_rule(const RuleSpec& rule, const ErrorCounts& ec,
                            const HypothesisClass& hc, Lambda lambda) {
  switch (rule.kind) {
    case RuleSpec::Kind::kMdl:
      return mdl_select(ec, hc, lambda);
    case RuleSpec::Kind::kEmpiricalBayes:
      return empirical_bayes_posterior(ec, hc, lambda).first;
    case RuleSpec::Kind::kProfile:
      return profile_posterior(ec, hc, lambda);
    case RuleSpec::Kind::kBayes: {
      const EtaPrior prior = rule.bayes_prior == RuleSpec::BayesPrior::kUniform
                                 ? EtaPrior::uniform()
                                 : EtaPrior::p_lambda(lambda, ec.m);
      return bayes_posterior(ec, hc, prior);
    }
  }
  throw std::logic_error("apply_rule: unreachable");
}

}  // namespace detail

// Stable hash of the canonical config serialization (defined in io.hpp);
// this overload hashes an already-serialized string.
inline std::uint64_t config_hash(const std::string& canonical) {
  return detail::fnv1a(canonical);
}

inline ExperimentReport run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const int workers = detail::worker_count(cfg.threads);
  const SeededRng rng(cfg.master_seed);
  ExperimentReport report;
  report.master_seed = cfg.master_seed;

  for (long m : cfg.m_grid) {
    const auto t0 = std::chrono::steady_clock::now();
    const Lambda lambda = cfg.schedule.evaluate(m);
    std::vector<detail::TrialOutcome> out(static_cast<std::size_t>(cfg.trials));

    if (cfg.instance.kind == InstanceSpec::Kind::kLowerBound) {
      LowerBoundSpec spec = cfg.instance.lb;
      spec.m = m;
      spec.lambda = lambda;
      (void)detail::lb_class_size(spec);  // fail fast on the memory guard
      detail::parallel_trials(cfg.trials, workers, [&](long t) {
        auto stream = rng.stream(static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(m));
        try {
          const GroupedCounts g = sample_grouped_counts(spec, stream);
          const Posterior post = detail::apply_rule(
              cfg.rule, g.pseudo_counts, g.pseudo_class, lambda);
          out[static_cast<std::size_t>(t)] = {
              population_loss(post, g.pseudo_class).value(),
              post.weight(g.h0_group)};
        } catch (const std::exception& e) {
          throw std::runtime_error("trial failed at m=" + std::to_string(m) +
                                   " trial=" + std::to_string(t) + ": " +
                                   e.what());
        }
      });
    } else {
      const Instance& inst = *cfg.instance.fixed;
      detail::parallel_trials(cfg.trials, workers, [&](long t) {
        auto stream = rng.stream(static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(m));
        try {
          const ErrorCounts ec = sample_error_counts(inst, m, stream);
          const Posterior post =
              detail::apply_rule(cfg.rule, ec, inst.hypothesis_class, lambda);
          out[static_cast<std::size_t>(t)] = {
              population_loss(post, inst.hypothesis_class).value(),
              post.weight(0)};
        } catch (const std::exception& e) {
          throw std::runtime_error("trial failed at m=" + std::to_string(m) +
                                   " trial=" + std::to_string(t) + ": " +
                                   e.what());
        }
      });
    }

    // Index-ordered reduction keeps the report independent of scheduling.
    double sum = 0.0, sumsq = 0.0, mass = 0.0, masssq = 0.0;
    for (const auto& o : out) {
      sum += o.pop_error;
      sumsq += o.pop_error * o.pop_error;
      mass += o.mass_h0;
      masssq += o.mass_h0 * o.mass_h0;
    }
    const double n = static_cast<double>(cfg.trials);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1))
                             : 0.0;
    const double mmean = mass / n;
    const double mvar =
        n > 1 ? std::max(0.0, (masssq - n * mmean * mmean) / (n - 1)) : 0.0;
    SweepRow row;
    row.m = m;
    row.lambda = lambda.value();
    row.mean_pop_error = mean;
    row.std_error = std::sqrt(var / n);
    row.mean_mass_h0 = mmean;
    row.std_mass_h0 = std::sqrt(mvar / n);
    row.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report.rows.push_back(row);
  }
  return report;
}

// ---- Bound audit -----------------------------------------------------------

struct BoundAuditRow {
  long m = 0;
  double lambda = 0.0;
  double violation_rate = 0.0;
  double mean_slack_bits = 0.0;  // mean of RHS - LHS
  bool pass = false;             // violation_rate <= delta
};

struct BoundAuditReport {
  std::vector<BoundAuditRow> rows;
  double delta = 0.0;
  std::uint64_t master_seed = 0;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  std::string to_csv() const;
};

// RHS of the PAC-Bayes generalization bound at confidence 1 - delta.
inline double bound_rhs(double lambda, long m, double delta, double h_lstar,
                        double kl_qstar_bits) {
  const double md = static_cast<double>(m);
  return h_lstar + lambda * std::log2((md + 1.0) / (delta / 2.0)) / md +
         lambda * kl_qstar_bits / md +
         std::sqrt(2.0 * std::log2(md) * std::log2(md) *
                   std::log2(1.0 / (delta / 2.0)) / md);
}

// Per-trial check of T_lambda(L_D(Q_hat)) against the bound RHS for the
// empirical-Bayes rule; reports the empirical violation frequency.
inline BoundAuditReport bound_audit(const ExperimentConfig& cfg, Prob delta) {
  cfg.validate();
  if (cfg.rule.kind != RuleSpec::Kind::kEmpiricalBayes)
    throw std::invalid_argument("bound_audit: rule must be empirical_bayes");
  const double d = delta.value();
  if (!(d > 0.0 && d < 1.0))
    throw std::invalid_argument("bound_audit: delta must be in (0,1)");
  const int workers = detail::worker_count(cfg.threads);
  const SeededRng rng(cfg.master_seed);

  BoundAuditReport report;
  report.delta = d;
  report.master_seed = cfg.master_seed;

  for (long m : cfg.m_grid) {
    const Lambda lambda = cfg.schedule.evaluate(m);
    const double lam = lambda.value();
    if (lam <= 0.0) throw std::invalid_argument("bound_audit: lambda must be > 0");

    std::vector<double> slack(static_cast<std::size_t>(cfg.trials));
    std::vector<char> violated(static_cast<std::size_t>(cfg.trials), 0);

    const auto run_one = [&](const HypothesisClass& hc, const Posterior& qstar,
                             const ErrorCounts& ec, long t) {
      const double h_lstar = detail::h2(population_loss(qstar, hc).value());
      const double kl_bits = kl_to_prior_raw(qstar, hc);
      const Posterior post =
          empirical_bayes_posterior(ec, hc, lambda).first;
      const double lhs =
          detail::t_lambda(lam, population_loss(post, hc).value());
      const double rhs = bound_rhs(lam, ec.m, d, h_lstar, kl_bits);
      slack[static_cast<std::size_t>(t)] = rhs - lhs;
      violated[static_cast<std::size_t>(t)] = lhs > rhs ? 1 : 0;
    };

    if (cfg.instance.kind == InstanceSpec::Kind::kLowerBound) {
      LowerBoundSpec spec = cfg.instance.lb;
      spec.m = m;
      spec.lambda = lambda;
      detail::parallel_trials(cfg.trials, workers, [&](long t) {
        auto stream = rng.stream(static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(m));
        const GroupedCounts g = sample_grouped_counts(spec, stream);
        const Posterior qstar = Posterior::point_mass(
            g.h0_group, g.pseudo_class.size(), Provenance::kCustom);
        run_one(g.pseudo_class, qstar, g.pseudo_counts, t);
      });
    } else {
      const Instance& inst = *cfg.instance.fixed;
      detail::parallel_trials(cfg.trials, workers, [&](long t) {
        auto stream = rng.stream(static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(m));
        const ErrorCounts ec = sample_error_counts(inst, m, stream);
        run_one(inst.hypothesis_class, inst.qstar, ec, t);
      });
    }

    BoundAuditRow row;
    row.m = m;
    row.lambda = lam;
    long nviol = 0;
    double ssum = 0.0;
    for (long t = 0; t < cfg.trials; ++t) {
      nviol += violated[static_cast<std::size_t>(t)];
      ssum += slack[static_cast<std::size_t>(t)];
    }
    row.violation_rate =
        static_cast<double>(nviol) / static_cast<double>(cfg.trials);
    row.mean_slack_bits = ssum / static_cast<double>(cfg.trials);
    row.pass = row.violation_rate <= d;
    report.rows.push_back(row);
  }
  return report;
}

// ---- Equivalence sweep -----------------------------------------------------

struct EquivalenceRule {
  RuleSpec rule;
  Lambda lambda{1.0};
};

struct EquivalenceRow {
  long m = 0;
  double mean_tv = 0.0;
  double std_error = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  std::uint64_t master_seed = 0;
  std::string to_csv() const;
};

inline EquivalenceReport equivalence_sweep(const Instance& inst,
                                           const std::vector<long>& m_grid,
                                           const EquivalenceRule& rule_a,
                                           const EquivalenceRule& rule_b,
                                           long trials, std::uint64_t seed,
                                           int threads = 0) {
  if (trials < 1) throw std::invalid_argument("equivalence_sweep: trials >= 1");
  const int workers = detail::worker_count(threads);
  const SeededRng rng(seed);
  EquivalenceReport report;
  report.master_seed = seed;

  for (long m : m_grid) {
    std::vector<double> tv(static_cast<std::size_t>(trials));
    detail::parallel_trials(trials, workers, [&](long t) {
      auto stream = rng.stream(static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(m));
      const ErrorCounts ec = sample_error_counts(inst, m, stream);
      const Posterior a =
          detail::apply_rule(rule_a.rule, ec, inst.hypothesis_class, rule_a.lambda);
      const Posterior b =
          detail::apply_rule(rule_b.rule, ec, inst.hypothesis_class, rule_b.lambda);
      tv[static_cast<std::size_t>(t)] = posterior_tv(a, b);
    });
    double sum = 0.0, sumsq = 0.0;
    for (double v : tv) {
      sum += v;
      sumsq += v * v;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double var =
        n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1)) : 0.0;
    report.rows.push_back({m, mean, std::sqrt(var / n)});
  }
  return report;
}

// ---- Regime classification -------------------------------------------------

enum class RegimeTag {
  kOverfitCatastrophic,
  kTempered,
  kConsistent,
  kUnderfitCatastrophic,
  kInconclusive,
};

inline std::string regime_tag_name(RegimeTag t) {
  switch (t) {
    case RegimeTag::kOverfitCatastrophic:
      return "overfit_catastrophic";
    case RegimeTag::kTempered:
      return "tempered";
    case RegimeTag::kConsistent:
      return "consistent";
    case RegimeTag::kUnderfitCatastrophic:
      return "underfit_catastrophic";
    case RegimeTag::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

struct RegimeCase {
  std::string name;
  ExperimentConfig config;
  Prob lstar;
  Prob lprime;
};

struct RegimeRow {
  std::string name;
  double terminal_error = 0.0;
  double terminal_lambda = 0.0;
  RegimeTag tag = RegimeTag::kInconclusive;
};

struct RegimeReport {
  std::vector<RegimeRow> rows;
  double margin = 0.0;
  std::string to_csv() const;
};

// Tags one terminal error against L*, the q*-mixture prediction and the
// tempered band, with a fixed absolute decision margin.
inline RegimeTag classify_regime(double terminal, double lstar, double lprime,
                                 double lambda_term, long m_term,
                                 const RuleSpec& rule, double margin = 0.02) {
  if (std::fabs(terminal - lstar) <= margin) return RegimeTag::kConsistent;

  if (lambda_term / static_cast<double>(m_term) > 10.0) {
    const double q =
        (rule.kind == RuleSpec::Kind::kProfile ||
         rule.kind == RuleSpec::Kind::kBayes)
            ? qstar_formula_profile(Prob(lstar), Prob(lprime), m_term,
                                    lambda_term)
                  .value()
            : qstar_formula_pacbayes(Prob(lstar), Prob(lprime), m_term,
                                     lambda_term)
                  .value();
    const double mix = q * lstar + (1.0 - q) * lprime;
    if (std::fabs(terminal - mix) <= margin)
      return RegimeTag::kUnderfitCatastrophic;
  }

  // Tempered band edge: ell at the terminal lambda, but never below the
  // lambda = 1 band (decaying schedules overfit past it).
  const double band =
      ell_lambda(Lambda(std::max(1.0, lambda_term)), Prob(lstar)).value();
  if (terminal > band + margin) return RegimeTag::kOverfitCatastrophic;
  if (terminal > lstar + margin && terminal < 0.5) return RegimeTag::kTempered;
  return RegimeTag::kInconclusive;
}

// The documented desk-scale regime grid: one case per limiting behavior.
// Terminal expectations: tempered for constant lambda=1, consistent for
// the sqrt schedule, underfitting for lambda_m = 100m, overfitting trend
// for decaying lambda on the harsh construction.
inline std::vector<RegimeCase> desk_regime_cases(std::uint64_t seed,
                                                 long trials, int threads = 0) {
  std::vector<RegimeCase> cases;
  {
    RegimeCase c;
    c.name = "constant_lambda_1";
    c.lstar = Prob(0.1);
    c.lprime = Prob(0.25);
    LowerBoundSpec lb;
    lb.lstar = c.lstar;
    lb.lprime = c.lprime;
    lb.regime = LbRegime::kSubOne;
    c.config.instance = InstanceSpec::lower_bound(lb);
    c.config.rule.kind = RuleSpec::Kind::kEmpiricalBayes;
    c.config.schedule = LambdaSchedule::constant(1.0);
    c.config.m_grid = {10, 15, 20, 25};
    c.config.trials = trials;
    c.config.master_seed = seed;
    c.config.threads = threads;
    cases.push_back(std::move(c));
  }
  {
    RegimeCase c;
    c.name = "sqrt_optimal";
    c.lstar = Prob(0.1);
    c.lprime = Prob(0.3);
    std::vector<double> prior = universal_prior(100);
    std::vector<double> pop(100, 0.3);
    pop[0] = 0.1;
    HypothesisClass hc(std::move(prior), std::move(pop));
    Posterior qstar = Posterior::point_mass(0, 100, Provenance::kCustom);
    c.config.instance = InstanceSpec::fixed_instance(
        Instance(std::move(hc), std::move(qstar), Prob(0.1)));
    c.config.rule.kind = RuleSpec::Kind::kEmpiricalBayes;
    c.config.schedule = LambdaSchedule::sqrt_optimal(std::log2(10.0));
    c.config.m_grid = {100, 1000, 10000};
    c.config.trials = trials;
    c.config.master_seed = seed + 1;
    c.config.threads = threads;
    cases.push_back(std::move(c));
  }
  {
    RegimeCase c;
    c.name = "linear_100";
    c.lstar = Prob(0.1);
    c.lprime = Prob(0.3);
    LowerBoundSpec lb;
    lb.lstar = c.lstar;
    lb.lprime = c.lprime;
    lb.regime = LbRegime::kTwoHypothesis;
    c.config.instance = InstanceSpec::lower_bound(lb);
    c.config.rule.kind = RuleSpec::Kind::kProfile;
    c.config.schedule = LambdaSchedule::linear(100.0);
    c.config.m_grid = {100, 1000, 10000};
    c.config.trials = trials;
    c.config.master_seed = seed + 2;
    c.config.threads = threads;
    cases.push_back(std::move(c));
  }
  {
    RegimeCase c;
    c.name = "inverse_log";
    c.lstar = Prob(0.1);
    c.lprime = Prob(0.45);
    LowerBoundSpec lb;
    lb.lstar = c.lstar;
    lb.lprime = c.lprime;
    lb.regime = LbRegime::kSubOne;
    c.config.instance = InstanceSpec::lower_bound(lb);
    c.config.rule.kind = RuleSpec::Kind::kEmpiricalBayes;
    c.config.schedule = LambdaSchedule::inverse_log(1.0);
    c.config.m_grid = {10, 15, 20};
    c.config.trials = trials;
    c.config.master_seed = seed + 3;
    c.config.threads = threads;
    cases.push_back(std::move(c));
  }
  return cases;
}

inline RegimeReport regime_summary(const std::vector<RegimeCase>& cases,
                                   double margin = 0.02) {
  RegimeReport report;
  report.margin = margin;
  for (const RegimeCase& c : cases) {
    const ExperimentReport sweep = run_sweep(c.config);
    const SweepRow& last = sweep.rows.back();
    RegimeRow row;
    row.name = c.name;
    row.terminal_error = last.mean_pop_error;
    row.terminal_lambda = last.lambda;
    row.tag = classify_regime(last.mean_pop_error, c.lstar.value(),
                              c.lprime.value(), last.lambda, last.m,
                              c.config.rule, margin);
    report.rows.push_back(row);
  }
  return report;
}

// ---- CSV serialization -----------------------------------------------------

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "m,lambda,mean_pop_error,std_error,mean_mass_h0,std_mass_h0\n";
  for (const auto& r : rows)
    os << r.m << ',' << detail::fmt12(r.lambda) << ','
       << detail::fmt12(r.mean_pop_error) << ',' << detail::fmt12(r.std_error)
       << ',' << detail::fmt12(r.mean_mass_h0) << ','
       << detail::fmt12(r.std_mass_h0) << '\n';
  return os.str();
}

inline std::string BoundAuditReport::to_csv() const {
  std::ostringstream os;
  os << "m,lambda,violation_rate,mean_slack_bits,pass\n";
  for (const auto& r : rows)
    os << r.m << ',' << detail::fmt12(r.lambda) << ','
       << detail::fmt12(r.violation_rate) << ','
       << detail::fmt12(r.mean_slack_bits) << ',' << (r.pass ? 1 : 0) << '\n';
  return os.str();
}

inline std::string EquivalenceReport::to_csv() const {
  std::ostringstream os;
  os << "m,mean_tv,std_error\n";
  for (const auto& r : rows)
    os << r.m << ',' << detail::fmt12(r.mean_tv) << ','
       << detail::fmt12(r.std_error) << '\n';
  return os.str();
}

inline std::string RegimeReport::to_csv() const {
  std::ostringstream os;
  os << "case,terminal_error,terminal_lambda,tag\n";
  for (const auto& r : rows)
    os << r.name << ',' << detail::fmt12(r.terminal_error) << ','
       << detail::fmt12(r.terminal_lambda) << ',' << regime_tag_name(r.tag)
       << '\n';
  return os.str();
}

}  // namespace templab

#endif  // TEMPLAB_HARNESS_HPP
