#include <cmath>
#include <cstdlib>

#include "unilab/cli.hpp"
#include "unilab/error.hpp"

namespace unilab::cli {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

double real_field(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t positive_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  const auto value = v.get<std::int64_t>();
  if (value < 1) throw ConfigError(what + " must be positive");
  return value;
}

mc::TesterChoice parse_tester(const json& t) {
  mc::TesterChoice choice;
  if (t.is_string()) {
    choice.kind = t.get<std::string>();
  } else if (t.is_object()) {
    choice.kind = field(t, "kind").get<std::string>();
    if (t.contains("threshold")) choice.threshold = real_field(t, "threshold");
    if (t.contains("beta")) choice.beta = real_field(t, "beta");
    if (t.contains("beta_multiplier")) choice.beta_multiplier = real_field(t, "beta_multiplier");
  } else {
    throw ConfigError("tester entries must be strings or objects");
  }
  static const char* const kKnown[] = {"collisions", "squared", "tv",    "empty_bins",
                                       "singletons", "huber",   "superlinear_tv"};
  bool known = false;
  for (const char* k : kKnown) known = known || choice.kind == k;
  if (!known) throw ConfigError("unknown tester kind '" + choice.kind + "'");
  if (choice.beta && *choice.beta < 0.0) throw ConfigError("beta must be >= 0");
  if (!(choice.beta_multiplier > 0.0)) throw ConfigError("beta_multiplier must be positive");
  return choice;
}

GridConfig parse_grid(const json& g) {
  if (!g.is_object()) throw ConfigError("grid must be an object");
  GridConfig grid;
  if (g.contains("n_values")) {
    if (g.contains("n") || g.contains("m")) throw ConfigError("grid takes either n_values or (m, n), not both");
    const auto& values = g.at("n_values");
    if (!values.is_array() || values.empty()) throw ConfigError("grid.n_values must be a nonempty array");
    for (const auto& v : values) grid.n_values.push_back(positive_integer(v, "grid.n_values entry"));
    return grid;
  }
  grid.m = positive_integer(field(g, "m"), "grid.m");
  const auto& n = field(g, "n");
  if (n.is_array()) {
    if (n.empty()) throw ConfigError("grid.n must not be empty");
    for (const auto& v : n) grid.n_values.push_back(positive_integer(v, "grid.n entry"));
  } else {
    grid.n_values.push_back(positive_integer(n, "grid.n"));
  }
  return grid;
}

EpsilonRule parse_epsilon_rule(const json& e) {
  EpsilonRule rule;
  if (!e.is_object()) throw ConfigError("epsilon_rule must be an object");
  const auto name = field(e, "rule").get<std::string>();
  if (name == "fixed") {
    rule.kind = EpsilonRule::Kind::kFixed;
    rule.epsilon = real_field(e, "epsilon");
    if (!(rule.epsilon > 0.0 && rule.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  } else if (name == "figure8.1") {
    rule.kind = EpsilonRule::Kind::kFigure;
    if (e.contains("scale")) rule.scale = real_field(e, "scale");
    if (e.contains("exponent")) rule.exponent = real_field(e, "exponent");
    if (!(rule.scale > 0.0) || !(rule.exponent > 0.0)) throw ConfigError("figure rule needs positive scale/exponent");
  } else {
    throw ConfigError("epsilon_rule.rule must be 'fixed' or 'figure8.1'");
  }
  return rule;
}

}  // namespace

double EpsilonRule::at(std::int64_t n) const {
  return kind == Kind::kFixed ? epsilon : mc::figure_epsilon(n, scale, exponent);
}

RunConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig config;
    const auto& testers = field(doc, "testers");
    if (!testers.is_array() || testers.empty()) throw ConfigError("testers must be a nonempty array");
    for (const auto& t : testers) config.testers.push_back(parse_tester(t));
    config.grid = parse_grid(field(doc, "grid"));
    config.epsilon_rule = parse_epsilon_rule(field(doc, "epsilon_rule"));
    if (doc.contains("gamma")) config.gamma = real_field(doc, "gamma");
    if (!(config.gamma > 0.0 && config.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    config.trials = positive_integer(field(doc, "trials"), "trials");
    const auto& seed = field(doc, "seed");
    if (!seed.is_number_unsigned()) {
      throw ConfigError("seed must be a nonnegative integer");
    }
    config.seed = seed.get<std::uint64_t>();
    if (doc.contains("workers")) {
      config.workers = static_cast<unsigned>(positive_integer(doc.at("workers"), "workers"));
    }
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& config) {
  json doc;
  doc["testers"] = json::array();
  for (const auto& t : config.testers) {
    json entry{{"kind", t.kind}, {"beta_multiplier", t.beta_multiplier}};
    if (t.threshold) entry["threshold"] = *t.threshold;
    if (t.beta) entry["beta"] = *t.beta;
    doc["testers"].push_back(entry);
  }
  if (config.grid.m) {
    doc["grid"] = {{"m", *config.grid.m}, {"n", config.grid.n_values}};
  } else {
    doc["grid"] = {{"n_values", config.grid.n_values}};
  }
  if (config.epsilon_rule.kind == EpsilonRule::Kind::kFixed) {
    doc["epsilon_rule"] = {{"rule", "fixed"}, {"epsilon", config.epsilon_rule.epsilon}};
  } else {
    doc["epsilon_rule"] = {
        {"rule", "figure8.1"}, {"scale", config.epsilon_rule.scale}, {"exponent", config.epsilon_rule.exponent}};
  }
  doc["gamma"] = config.gamma;
  doc["trials"] = config.trials;
  doc["seed"] = config.seed;
  doc["workers"] = config.workers;
  return doc;
}

mc::ExperimentPlan plan_from_config(const RunConfig& config) {
  mc::ExperimentPlan plan;
  plan.testers = config.testers;
  for (auto n : config.grid.n_values) {
    const std::int64_t m = config.grid.m.value_or(n);
    plan.points.push_back(mc::GridPoint{n, m, config.epsilon_rule.at(n)});
  }
  plan.gamma = config.gamma;
  plan.trials = config.trials;
  plan.master_seed = config.seed;
  plan.workers = effective_workers(config.workers);
  return plan;
}

unsigned effective_workers(unsigned configured) {
  if (const char* env = std::getenv(std::string(kWorkersEnv).c_str())) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
      throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
    }
    return static_cast<unsigned>(value);
  }
  return configured == 0 ? 1 : configured;
}

}  // namespace unilab::cli
