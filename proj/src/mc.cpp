#include "unilab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "unilab/error.hpp"
#include "unilab/random.hpp"

namespace unilab::mc {

namespace {

std::int64_t rule_n(const TestRule& rule) {
  return std::visit([](const auto& r) { return r.n; }, rule);
}

std::int64_t rule_m(const TestRule& rule) {
  return std::visit([](const auto& r) { return r.m; }, rule);
}

bool is_failure(Decision decision, Side side) {
  return side == Side::kUniform ? decision == Decision::kNonUniform : decision == Decision::kUniform;
}

}  // namespace

std::string side_name(Side side) { return side == Side::kUniform ? "uniform" : "alternative"; }

Interval wilson_interval(std::int64_t failures, std::int64_t trials, double level) {
  require(trials >= 1 && failures >= 0 && failures <= trials, ErrorCode::kInvalidParameter,
          "Wilson interval needs 0 <= failures <= trials, trials >= 1");
  require(level > 0.0 && level < 1.0, ErrorCode::kInvalidParameter, "confidence level must lie in (0, 1)");
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
  const double nt = static_cast<double>(trials);
  const double phat = static_cast<double>(failures) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (phat + z2 / (2.0 * nt)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt));
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  // The interval always contains phat; pin the endpoints against rounding.
  out.low = std::min(out.low, phat);
  out.high = std::max(out.high, phat);
  if (failures == 0) out.low = 0.0;
  if (failures == trials) out.high = 1.0;
  return out;
}

ErrorEstimate make_estimate(std::int64_t failures, std::int64_t trials, std::uint64_t seed) {
  const auto ci = wilson_interval(failures, trials);
  return {failures, trials, static_cast<double>(failures) / static_cast<double>(trials), ci.low, ci.high, seed};
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial_index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(trial_index));
}

std::vector<ErrorEstimate> estimate_errors(std::span<const TestRule> rules, const ProbabilityVector& dist, Side side,
                                           std::int64_t trials, std::uint64_t master_seed, unsigned workers) {
  require(!rules.empty(), ErrorCode::kInvalidParameter, "no testers given");
  require(trials >= 1, ErrorCode::kInvalidParameter, "trials must be >= 1");
  const std::int64_t n = rule_n(rules.front());
  for (const auto& rule : rules) {
    require(rule_n(rule) == n, ErrorCode::kInvalidParameter, "all testers must share n");
    require(rule_m(rule) == static_cast<std::int64_t>(dist.size()), ErrorCode::kInvalidParameter,
            "tester m differs from distribution size");
  }
  std::vector<CompiledRule> compiled;
  compiled.reserve(rules.size());
  for (const auto& rule : rules) compiled.emplace_back(rule);
  const HistogramSampler sampler(dist);

  const auto worker_count =
      static_cast<std::int64_t>(std::clamp<std::int64_t>(workers == 0 ? 1 : workers, 1, trials));
  std::vector<std::vector<std::int64_t>> failures(static_cast<std::size_t>(worker_count),
                                                  std::vector<std::int64_t>(rules.size(), 0));

  auto run_chunk = [&](std::int64_t worker) {
    const std::int64_t begin = trials * worker / worker_count;
    const std::int64_t end = trials * (worker + 1) / worker_count;
    auto& local = failures[static_cast<std::size_t>(worker)];
    std::vector<std::int64_t> counts;
    for (std::int64_t t = begin; t < end; ++t) {
      SplitMix64 rng(trial_seed(master_seed, t));
      sampler.sample(n, rng, counts);
      for (std::size_t r = 0; r < compiled.size(); ++r) {
        if (is_failure(compiled[r].decide(counts), side)) ++local[r];
      }
    }
  };

  if (worker_count == 1) {
    run_chunk(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (std::int64_t w = 0; w < worker_count; ++w) threads.emplace_back(run_chunk, w);
  }

  std::vector<ErrorEstimate> out;
  out.reserve(rules.size());
  for (std::size_t r = 0; r < rules.size(); ++r) {
    std::int64_t total = 0;
    for (const auto& local : failures) total += local[r];
    out.push_back(make_estimate(total, trials, master_seed));
  }
  return out;
}

ErrorEstimate estimate_error(const TestRule& rule, const ProbabilityVector& dist, Side side, std::int64_t trials,
                             std::uint64_t master_seed, unsigned workers) {
  const TestRule rules[] = {rule};
  return estimate_errors(rules, dist, side, trials, master_seed, workers).front();
}

SidedEstimates run_config(const ExperimentConfig& config) {
  const TestRule rule = config.tester;
  return {estimate_error(rule, config.dist_p, Side::kUniform, config.trials, derive_seed(config.master_seed, 0),
                         config.workers),
          estimate_error(rule, config.dist_q, Side::kAlternative, config.trials, derive_seed(config.master_seed, 1),
                         config.workers)};
}

ResolvedTester resolve_tester(const TesterChoice& choice, const GridPoint& point) {
  if (choice.kind == "superlinear_tv") {
    return {SuperlinearTvSpec{point.n, point.m, point.epsilon}, point.epsilon / 2.0, 0.0};
  }
  double beta = 0.0;
  if (choice.kind == "huber") {
    beta = choice.beta ? *choice.beta : default_beta(point.n, point.m, point.epsilon, choice.beta_multiplier).beta;
  }
  const auto kind = kind_from_name(choice.kind, beta);
  const double threshold =
      choice.threshold ? *choice.threshold : default_threshold(kind, point.n, point.m, point.epsilon);
  return {TesterSpec{kind, point.n, point.m, point.epsilon, threshold}, threshold, beta};
}

std::vector<ExperimentRow> run_experiment(const ExperimentPlan& plan) {
  require(!plan.testers.empty(), ErrorCode::kInvalidParameter, "experiment has no testers");
  require(!plan.points.empty(), ErrorCode::kInvalidParameter, "experiment has no grid points");
  std::vector<ExperimentRow> rows;
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    const auto& point = plan.points[i];
    const auto p = uniform(point.m);
    const auto q = flat_alternative(point.m, point.epsilon, plan.gamma).realize();

    std::vector<ResolvedTester> resolved;
    std::vector<TestRule> rules;
    for (const auto& choice : plan.testers) {
      resolved.push_back(resolve_tester(choice, point));
      rules.push_back(resolved.back().rule);
    }
    const std::uint64_t uniform_seed = derive_seed(plan.master_seed, 2 * i);
    const std::uint64_t alternative_seed = derive_seed(plan.master_seed, 2 * i + 1);
    const auto on_p = estimate_errors(rules, p, Side::kUniform, plan.trials, uniform_seed, plan.workers);
    const auto on_q = estimate_errors(rules, q, Side::kAlternative, plan.trials, alternative_seed, plan.workers);

    for (std::size_t t = 0; t < plan.testers.size(); ++t) {
      const ExperimentRow base{plan.testers[t].kind, point.n,         point.m, point.epsilon,
                               plan.gamma,           Side::kUniform, {},      resolved[t].threshold,
                               resolved[t].beta};
      ExperimentRow row = base;
      row.estimate = on_p[t];
      rows.push_back(row);
      row.side = Side::kAlternative;
      row.estimate = on_q[t];
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<TesterSummary> summarize_worst(const std::vector<ExperimentRow>& rows) {
  std::vector<TesterSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const TesterSummary& s) { return s.tester == row.tester && s.n == row.n; });
    if (it == out.end()) {
      out.push_back({row.tester, row.n, row.estimate});
    } else if (row.estimate.delta_hat > it->worst.delta_hat) {
      it->worst = row.estimate;
    }
  }
  return out;
}

ExperimentPlan intro_plan(std::int64_t trials, std::uint64_t master_seed, unsigned workers) {
  ExperimentPlan plan;
  plan.testers = {TesterChoice{"tv"}, TesterChoice{"collisions"}};
  plan.points = {GridPoint{10'000, 10'000, 1.0 / 8.0}};
  plan.gamma = 0.5;
  plan.trials = trials;
  plan.master_seed = master_seed;
  plan.workers = workers;
  return plan;
}

std::vector<ExperimentRow> reproduce_intro(std::int64_t trials, std::uint64_t master_seed, unsigned workers) {
  return run_experiment(intro_plan(trials, master_seed, workers));
}

double figure_epsilon(std::int64_t n, double scale, double exponent) {
  require(n >= 1, ErrorCode::kInvalidParameter, "n must be positive");
  return scale * std::pow(static_cast<double>(n), -1.0 / exponent);
}

ExperimentPlan figure_plan(std::span<const std::int64_t> n_values, std::int64_t trials, std::uint64_t master_seed,
                           unsigned workers) {
  ExperimentPlan plan;
  plan.testers = {TesterChoice{"collisions"}, TesterChoice{"tv"}, TesterChoice{"huber"}};
  for (auto n : n_values) {
    require(n >= 100 && n <= 2000, ErrorCode::kInvalidParameter, "figure n values must lie in [100, 2000]");
    plan.points.push_back(GridPoint{n, n, figure_epsilon(n)});
  }
  plan.gamma = 0.5;
  plan.trials = trials;
  plan.master_seed = master_seed;
  plan.workers = workers;
  return plan;
}

std::vector<ExperimentRow> reproduce_figure(std::span<const std::int64_t> n_values, std::int64_t trials,
                                            std::uint64_t master_seed, unsigned workers) {
  return run_experiment(figure_plan(n_values, trials, master_seed, workers));
}

}  // namespace unilab::mc
