#ifndef TEMPLAB_IO_HPP
#define TEMPLAB_IO_HPP

// JSON (de)serialization for instances and experiment configs, plus the
// CSV emitters that are not tied to a report struct.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "templab/harness.hpp"
#include "templab/instances.hpp"
#include "templab/model.hpp"
#include "templab/rules.hpp"
#include "templab/tempering.hpp"

namespace templab {

namespace detail {

using nlohmann::json;

inline json require(const json& j, const char* key) {
  if (!j.contains(key))
    throw std::invalid_argument(std::string("config: missing key '") + key + "'");
  return j.at(key);
}

inline std::vector<double> double_vec(const json& j, const char* key) {
  std::vector<double> v;
  for (const auto& x : require(j, key)) v.push_back(x.get<double>());
  return v;
}

}  // namespace detail

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["prior"] = inst.hypothesis_class.raw_prior();
  j["pop_error"] = inst.hypothesis_class.pop_error();
  j["qstar"] = inst.qstar.weights();
  j["lstar"] = inst.lstar.value();
  if (!inst.hypothesis_class.labels().empty())
    j["labels"] = inst.hypothesis_class.labels();
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  std::vector<std::string> labels;
  if (j.contains("labels"))
    labels = j.at("labels").get<std::vector<std::string>>();
  HypothesisClass hc(detail::double_vec(j, "prior"),
                     detail::double_vec(j, "pop_error"), std::move(labels));
  Posterior qstar(detail::double_vec(j, "qstar"), Provenance::kCustom);
  return Instance(std::move(hc), std::move(qstar),
                  Prob(detail::require(j, "lstar").get<double>()));
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  in >> j;
  return instance_from_json(j);
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(inst).dump(2) << '\n';
}

// ---- Config parsing --------------------------------------------------------

inline LambdaSchedule schedule_from_json(const nlohmann::json& j) {
  const std::string kind = detail::require(j, "kind").get<std::string>();
  if (kind == "constant")
    return LambdaSchedule::constant(detail::require(j, "lambda").get<double>());
  if (kind == "power")
    return LambdaSchedule::power(detail::require(j, "c").get<double>(),
                                 detail::require(j, "alpha").get<double>());
  if (kind == "sqrt_optimal")
    return LambdaSchedule::sqrt_optimal(
        detail::require(j, "kl_budget").get<double>());
  if (kind == "linear")
    return LambdaSchedule::linear(detail::require(j, "c").get<double>());
  if (kind == "inverse_log")
    return LambdaSchedule::inverse_log(detail::require(j, "c").get<double>());
  throw std::invalid_argument("config: unknown schedule kind '" + kind + "'");
}

inline nlohmann::json schedule_to_json(const LambdaSchedule& s) {
  nlohmann::json j;
  switch (s.kind()) {
    case LambdaSchedule::Kind::kConstant:
      j["kind"] = "constant";
      j["lambda"] = s.param_a();
      break;
    case LambdaSchedule::Kind::kPower:
      j["kind"] = "power";
      j["c"] = s.param_a();
      j["alpha"] = s.param_b();
      break;
    case LambdaSchedule::Kind::kSqrtOptimal:
      j["kind"] = "sqrt_optimal";
      j["kl_budget"] = s.param_a();
      break;
    case LambdaSchedule::Kind::kLinear:
      j["kind"] = "linear";
      j["c"] = s.param_a();
      break;
    case LambdaSchedule::Kind::kInverseLog:
      j["kind"] = "inverse_log";
      j["c"] = s.param_a();
      break;
  }
  return j;
}

inline RuleSpec rule_from_json(const nlohmann::json& j) {
  RuleSpec r;
  const std::string kind = detail::require(j, "kind").get<std::string>();
  if (kind == "mdl") {
    r.kind = RuleSpec::Kind::kMdl;
  } else if (kind == "empirical_bayes") {
    r.kind = RuleSpec::Kind::kEmpiricalBayes;
  } else if (kind == "profile") {
    r.kind = RuleSpec::Kind::kProfile;
  } else if (kind == "bayes") {
    r.kind = RuleSpec::Kind::kBayes;
    const std::string p =
        j.contains("eta_prior") ? j.at("eta_prior").get<std::string>() : "uniform";
    if (p == "uniform")
      r.bayes_prior = RuleSpec::BayesPrior::kUniform;
    else if (p == "p_lambda")
      r.bayes_prior = RuleSpec::BayesPrior::kPLambda;
    else
      throw std::invalid_argument("config: unknown eta_prior '" + p + "'");
  } else {
    throw std::invalid_argument("config: unknown rule kind '" + kind + "'");
  }
  return r;
}

inline nlohmann::json rule_to_json(const RuleSpec& r) {
  nlohmann::json j;
  switch (r.kind) {
    case RuleSpec::Kind::kMdl:
      j["kind"] = "mdl";
      break;
    case RuleSpec::Kind::kEmpiricalBayes:
      j["kind"] = "empirical_bayes";
      break;
    case RuleSpec::Kind::kProfile:
      j["kind"] = "profile";
      break;
    case RuleSpec::Kind::kBayes:
      j["kind"] = "bayes";
      j["eta_prior"] = r.bayes_prior == RuleSpec::BayesPrior::kUniform
                           ? "uniform"
                           : "p_lambda";
      break;
  }
  return j;
}

inline InstanceSpec instance_spec_from_json(const nlohmann::json& j,
                                            const std::string& base_dir = "") {
  const std::string type = detail::require(j, "type").get<std::string>();
  if (type == "lower_bound") {
    LowerBoundSpec lb;
    lb.lstar = Prob(detail::require(j, "lstar").get<double>());
    lb.lprime = Prob(detail::require(j, "lprime").get<double>());
    const std::string regime = detail::require(j, "regime").get<std::string>();
    if (regime == "sub_one")
      lb.regime = LbRegime::kSubOne;
    else if (regime == "super_one")
      lb.regime = LbRegime::kSuperOne;
    else if (regime == "two_hypothesis")
      lb.regime = LbRegime::kTwoHypothesis;
    else
      throw std::invalid_argument("config: unknown regime '" + regime + "'");
    if (j.contains("truncation")) lb.truncation = j.at("truncation").get<long>();
    if (j.contains("check_tempered_premise"))
      lb.check_tempered_premise = j.at("check_tempered_premise").get<bool>();
    return InstanceSpec::lower_bound(lb);
  }
  if (type == "fixed") {
    if (j.contains("file")) {
      std::string path = j.at("file").get<std::string>();
      if (!base_dir.empty() && path.front() != '/') path = base_dir + "/" + path;
      return InstanceSpec::fixed_instance(load_instance(path));
    }
    return InstanceSpec::fixed_instance(instance_from_json(j));
  }
  throw std::invalid_argument("config: unknown instance type '" + type + "'");
}

inline nlohmann::json instance_spec_to_json(const InstanceSpec& s) {
  nlohmann::json j;
  if (s.kind == InstanceSpec::Kind::kLowerBound) {
    j["type"] = "lower_bound";
    j["lstar"] = s.lb.lstar.value();
    j["lprime"] = s.lb.lprime.value();
    switch (s.lb.regime) {
      case LbRegime::kSubOne:
        j["regime"] = "sub_one";
        break;
      case LbRegime::kSuperOne:
        j["regime"] = "super_one";
        break;
      case LbRegime::kTwoHypothesis:
        j["regime"] = "two_hypothesis";
        break;
    }
    j["truncation"] = s.lb.truncation;
    j["check_tempered_premise"] = s.lb.check_tempered_premise;
  } else {
    j["type"] = "fixed";
    const Instance& inst = *s.fixed;
    j.update(instance_to_json(inst));
  }
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         const std::string& base_dir = "") {
  ExperimentConfig cfg;
  cfg.instance = instance_spec_from_json(detail::require(j, "instance"), base_dir);
  cfg.rule = rule_from_json(detail::require(j, "rule"));
  cfg.schedule = schedule_from_json(detail::require(j, "schedule"));
  cfg.m_grid = detail::require(j, "m_grid").get<std::vector<long>>();
  cfg.trials = detail::require(j, "trials").get<long>();
  if (j.contains("master_seed"))
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  const auto slash = path.find_last_of('/');
  const std::string base = slash == std::string::npos ? "" : path.substr(0, slash);
  return config_from_json(j, base);
}

// Canonical serialization for hashing: sorted keys, threads excluded so
// the hash is invariant to the worker count.
inline std::string canonical_config(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["instance"] = instance_spec_to_json(cfg.instance);
  j["rule"] = rule_to_json(cfg.rule);
  j["schedule"] = schedule_to_json(cfg.schedule);
  j["m_grid"] = cfg.m_grid;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  return j.dump();
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return detail::fnv1a(canonical_config(cfg));
}

// ---- CSV emitters ----------------------------------------------------------

// `lambda,l_star,ell` rows, one block per curve.
inline std::string curves_to_csv(const std::vector<TemperingCurve>& curves) {
  std::ostringstream os;
  os << "lambda,l_star,ell\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.lstar_grid.size(); ++i)
      os << detail::fmt12(c.lambda.value()) << ','
         << detail::fmt12(c.lstar_grid[i].value()) << ','
         << detail::fmt12(c.values[i].value()) << '\n';
  return os.str();
}

// Posterior dump with a JSON diagnostics footer as a trailing comment line.
inline std::string posterior_to_csv(const Posterior& post,
                                    const HypothesisClass& hc,
                                    const ErrorCounts& ec,
                                    const nlohmann::json& diagnostics) {
  std::ostringstream os;
  os << "index,prior,count,weight,log2_weight\n";
  for (std::size_t i = 0; i < post.size(); ++i) {
    const double w = post.weight(i);
    os << i << ',' << detail::fmt12(hc.prior_weight(i)) << ',' << ec.counts[i]
       << ',' << detail::fmt12(w) << ','
       << detail::fmt12(w > 0.0 ? std::log2(w) : -kInf) << '\n';
  }
  os << "# " << diagnostics.dump() << '\n';
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace templab

#endif  // TEMPLAB_IO_HPP
