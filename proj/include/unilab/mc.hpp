#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unilab/distmodel.hpp"
#include "unilab/statistics.hpp"

namespace unilab::mc {

enum class Side { kUniform, kAlternative };

std::string side_name(Side side);

struct ErrorEstimate {
  std::int64_t failures = 0;
  std::int64_t trials = 0;
  double delta_hat = 0.0;
  double ci_low = 0.0;   // 95% Wilson
  double ci_high = 0.0;
  std::uint64_t seed = 0;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval at two-sided confidence `level`.
Interval wilson_interval(std::int64_t failures, std::int64_t trials, double level = 0.95);

ErrorEstimate make_estimate(std::int64_t failures, std::int64_t trials, std::uint64_t seed);

/// Seed of trial i: the same regardless of how trials are split over workers.
std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial_index);

/// Runs `trials` histograms from `dist` and counts, per rule, decisions that
/// contradict `side`. All rules see the same histogram in each trial.
std::vector<ErrorEstimate> estimate_errors(std::span<const TestRule> rules, const ProbabilityVector& dist, Side side,
                                           std::int64_t trials, std::uint64_t master_seed, unsigned workers);

ErrorEstimate estimate_error(const TestRule& rule, const ProbabilityVector& dist, Side side, std::int64_t trials,
                             std::uint64_t master_seed, unsigned workers);

struct ExperimentConfig {
  TesterSpec tester;
  ProbabilityVector dist_p = uniform(1);
  ProbabilityVector dist_q = uniform(1);
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
};

struct SidedEstimates {
  ErrorEstimate uniform_side;
  ErrorEstimate alternative_side;
};

SidedEstimates run_config(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Grid experiments.

/// A tester in a grid experiment; unset fields take the defaults at each
/// grid point (default threshold, default Huber beta with multiplier K).
struct TesterChoice {
  std::string kind = "collisions";  // a StatisticKind name or "superlinear_tv"
  std::optional<double> threshold;
  std::optional<double> beta;
  double beta_multiplier = 2.0;

  friend bool operator==(const TesterChoice&, const TesterChoice&) = default;
};

struct GridPoint {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double epsilon = 0.0;
};

struct ExperimentPlan {
  std::vector<TesterChoice> testers;
  std::vector<GridPoint> points;
  double gamma = 0.5;
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
};

struct ExperimentRow {
  std::string tester;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  Side side = Side::kUniform;
  ErrorEstimate estimate;
  double threshold = 0.0;
  double beta = 0.0;
};

/// Resolved rule for one tester at one grid point.
struct ResolvedTester {
  TestRule rule;
  double threshold = 0.0;
  double beta = 0.0;
};

ResolvedTester resolve_tester(const TesterChoice& choice, const GridPoint& point);

/// One row per (grid point, tester, side), in that nesting order.
std::vector<ExperimentRow> run_experiment(const ExperimentPlan& plan);

/// Largest failure rate over the two sides for each tester, in tester order.
struct TesterSummary {
  std::string tester;
  std::int64_t n = 0;
  ErrorEstimate worst;
};
std::vector<TesterSummary> summarize_worst(const std::vector<ExperimentRow>& rows);

/// m = n = 10^4, eps = 1/8, TV and collisions at default thresholds.
ExperimentPlan intro_plan(std::int64_t trials, std::uint64_t master_seed, unsigned workers);
std::vector<ExperimentRow> reproduce_intro(std::int64_t trials, std::uint64_t master_seed, unsigned workers);

/// n = m, eps = 0.7 n^{-1/8.1}.
double figure_epsilon(std::int64_t n, double scale = 0.7, double exponent = 8.1);
ExperimentPlan figure_plan(std::span<const std::int64_t> n_values, std::int64_t trials, std::uint64_t master_seed,
                           unsigned workers);
std::vector<ExperimentRow> reproduce_figure(std::span<const std::int64_t> n_values, std::int64_t trials,
                                            std::uint64_t master_seed, unsigned workers);

}  // namespace unilab::mc
