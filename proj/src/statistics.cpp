#include "unilab/statistics.hpp"

#include <cmath>
#include <cstdlib>

#include "unilab/error.hpp"

namespace unilab {

namespace {

void check_dimensions(std::int64_t n, std::int64_t m) {
  require(n >= 0, ErrorCode::kInvalidParameter, "n must be nonnegative");
  require(m >= 1, ErrorCode::kInvalidParameter, "m must be positive");
}

double mean_count(std::int64_t n, std::int64_t m) {
  return static_cast<double>(n) / static_cast<double>(m);
}

// sum_j |m Y_j - n| is an integer, so the superlinear comparison is exact.
std::int64_t scaled_l1_deviation(std::span<const std::int64_t> counts, std::int64_t n, std::int64_t m) {
  std::int64_t total = 0;
  for (auto y : counts) total += std::llabs(m * y - n);
  return total;
}

Decision superlinear_from_deviation(std::int64_t deviation, std::int64_t n, std::int64_t m, double epsilon) {
  // TV(empirical, uniform) = deviation / (2nm) < eps/2  <=>  deviation < eps*n*m.
  const double bound = epsilon * static_cast<double>(n) * static_cast<double>(m);
  return static_cast<double>(deviation) < bound ? Decision::kUniform : Decision::kNonUniform;
}

}  // namespace

StatisticKind StatisticKind::huber(double beta) {
  require(std::isfinite(beta) && beta >= 0.0, ErrorCode::kInvalidParameter, "Huber beta must be finite and >= 0");
  StatisticKind kind(Tag::kHuber);
  kind.beta_ = beta;
  return kind;
}

StatisticKind StatisticKind::custom(std::vector<double> table) {
  require(!table.empty(), ErrorCode::kInvalidParameter, "custom table is empty");
  StatisticKind kind(Tag::kCustom);
  kind.table_ = std::move(table);
  return kind;
}

std::string StatisticKind::name() const {
  switch (tag_) {
    case Tag::kCollisions: return "collisions";
    case Tag::kSquared: return "squared";
    case Tag::kTv: return "tv";
    case Tag::kEmptyBins: return "empty_bins";
    case Tag::kSingletons: return "singletons";
    case Tag::kHuber: return "huber";
    case Tag::kCustom: return "custom";
  }
  return "unknown";
}

StatisticKind kind_from_name(std::string_view name, double beta) {
  if (name == "collisions") return StatisticKind::collisions();
  if (name == "squared") return StatisticKind::squared();
  if (name == "tv") return StatisticKind::tv();
  if (name == "empty_bins") return StatisticKind::empty_bins();
  if (name == "singletons") return StatisticKind::singletons();
  if (name == "huber") return StatisticKind::huber(beta);
  fail(ErrorCode::kInvalidParameter, "unknown statistic kind '" + std::string(name) + "'");
}

double huber_loss(double x, double beta) {
  require(beta >= 0.0, ErrorCode::kInvalidParameter, "Huber beta must be >= 0");
  const double ax = std::abs(x);
  if (ax < beta) return x * x;
  return 2.0 * beta * ax - beta * beta;
}

double term_value(const StatisticKind& kind, std::int64_t y, double center) {
  const double yd = static_cast<double>(y);
  switch (kind.effective_tag()) {
    case StatisticKind::Tag::kCollisions: return yd * (yd - 1.0) / 2.0;
    case StatisticKind::Tag::kSquared: return (yd - center) * (yd - center);
    case StatisticKind::Tag::kTv: return std::abs(yd - center);
    case StatisticKind::Tag::kEmptyBins: return y == 0 ? 1.0 : 0.0;
    case StatisticKind::Tag::kSingletons: return y == 1 ? 1.0 : 0.0;
    case StatisticKind::Tag::kHuber: return huber_loss(yd - center, kind.beta());
    case StatisticKind::Tag::kCustom: {
      require(y >= 0 && static_cast<std::size_t>(y) < kind.table().size(), ErrorCode::kInvalidParameter,
              "custom table too short for count " + std::to_string(y));
      return kind.table()[static_cast<std::size_t>(y)];
    }
  }
  return 0.0;
}

std::vector<double> statistic_table(const StatisticKind& kind, std::int64_t n, std::int64_t m) {
  check_dimensions(n, m);
  if (kind.tag() == StatisticKind::Tag::kCustom) {
    require(kind.table().size() >= static_cast<std::size_t>(n + 1), ErrorCode::kInvalidParameter,
            "custom table needs n+1 entries");
  }
  const double center = mean_count(n, m);
  std::vector<double> table(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) table[static_cast<std::size_t>(k)] = term_value(kind, k, center);
  return table;
}

double statistic_value(const StatisticKind& kind, const Histogram& hist, std::int64_t n, std::int64_t m) {
  require(hist.n == n, ErrorCode::kInvalidParameter, "histogram total differs from n");
  require(hist.bins() == static_cast<std::size_t>(m), ErrorCode::kInvalidParameter, "histogram length differs from m");
  const auto table = statistic_table(kind, n, m);
  double s = 0.0;
  for (auto y : hist.counts) s += table[static_cast<std::size_t>(y)];
  return s;
}

Rescaling rescaling(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon) {
  require(n >= 1, ErrorCode::kInvalidParameter, "rescaling needs n >= 1");
  require(m >= 1, ErrorCode::kInvalidParameter, "rescaling needs m >= 1");
  require(epsilon > 0.0, ErrorCode::kInvalidParameter, "rescaling needs epsilon > 0");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double scale = md / (nd * nd * epsilon * epsilon);
  switch (kind.effective_tag()) {
    case StatisticKind::Tag::kSquared:
    case StatisticKind::Tag::kHuber:
      return {scale, nd};
    case StatisticKind::Tag::kCollisions:
      // S_sq - n = 2 S_coll - n^2/m.
      return {2.0 * scale, nd * nd / (2.0 * md)};
    case StatisticKind::Tag::kEmptyBins:
      return {scale, md * std::exp(-nd / md)};
    case StatisticKind::Tag::kTv:
    case StatisticKind::Tag::kSingletons:
    case StatisticKind::Tag::kCustom:
      return {1.0, 0.0};
  }
  fail(ErrorCode::kInvalidParameter, "unsupported rescaling");
}

double rescaled_value(const StatisticKind& kind, double s, std::int64_t n, std::int64_t m, double epsilon) {
  return rescaling(kind, n, m, epsilon).apply(s);
}

double tv_threshold_from_empty_bins(std::int64_t n, std::int64_t m, double epsilon, double empty_threshold) {
  require(n >= 1 && n <= m, ErrorCode::kUnsupported, "TV/empty-bins equivalence needs 1 <= n <= m");
  const auto empty = rescaling(StatisticKind::empty_bins(), n, m, epsilon);
  const double raw_empty = empty.center + empty_threshold / empty.scale;
  return 2.0 * mean_count(n, m) * raw_empty;
}

double default_threshold(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon) {
  require(n >= 1 && m >= 1, ErrorCode::kInvalidParameter, "thresholds need n, m >= 1");
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidParameter, "epsilon must lie in (0, 1)");
  switch (kind.effective_tag()) {
    case StatisticKind::Tag::kHuber:
    case StatisticKind::Tag::kSquared:
    case StatisticKind::Tag::kCollisions:
      return 2.0;
    case StatisticKind::Tag::kEmptyBins:
      return std::exp(-mean_count(n, m));
    case StatisticKind::Tag::kTv:
      return tv_threshold_from_empty_bins(n, m, epsilon, std::exp(-mean_count(n, m)));
    case StatisticKind::Tag::kSingletons:
      fail(ErrorCode::kUnsupported, "no default threshold for the singletons statistic");
    case StatisticKind::Tag::kCustom:
      fail(ErrorCode::kUnsupported, "no default threshold for custom statistics");
  }
  fail(ErrorCode::kUnsupported, "no default threshold");
}

BetaChoice default_beta(std::int64_t n, std::int64_t m, double epsilon, double multiplier) {
  require(multiplier > 0.0, ErrorCode::kInvalidParameter, "beta multiplier K must be positive");
  require(n >= 1 && m >= 1, ErrorCode::kInvalidParameter, "beta needs n, m >= 1");
  require(epsilon > 0.0, ErrorCode::kInvalidParameter, "beta needs epsilon > 0");
  BetaChoice choice;
  const double ratio = mean_count(n, m);
  choice.delta = ratio * epsilon * epsilon;
  if (choice.delta >= 1.0) {
    choice.delta = std::exp(-1.0);
    choice.delta_clamped = true;
  }
  const double log_inv = -std::log(choice.delta);
  choice.beta = multiplier * (log_inv + std::sqrt(ratio * log_inv));
  const double be2 = choice.beta * choice.beta * epsilon * epsilon;
  choice.third_moment_ok = be2 * be2 * be2 <= choice.delta * choice.delta;
  return choice;
}

Decision decide(const TesterSpec& spec, const Histogram& hist) {
  const double s = statistic_value(spec.kind, hist, spec.n, spec.m);
  const double scaled = rescaled_value(spec.kind, s, spec.n, spec.m, spec.epsilon);
  return scaled < spec.threshold ? Decision::kUniform : Decision::kNonUniform;
}

Decision superlinear_tv_decide(const Histogram& hist, std::int64_t n, std::int64_t m, double epsilon) {
  require(n >= 1, ErrorCode::kInvalidParameter, "superlinear tester needs n >= 1");
  require(hist.n == n && hist.bins() == static_cast<std::size_t>(m), ErrorCode::kInvalidParameter,
          "histogram does not match (n, m)");
  return superlinear_from_deviation(scaled_l1_deviation(hist.counts, n, m), n, m, epsilon);
}

Decision decide(const TestRule& rule, const Histogram& hist) {
  if (const auto* spec = std::get_if<TesterSpec>(&rule)) return decide(*spec, hist);
  const auto& sl = std::get<SuperlinearTvSpec>(rule);
  return superlinear_tv_decide(hist, sl.n, sl.m, sl.epsilon);
}

CompiledRule::CompiledRule(const TestRule& rule) {
  if (const auto* spec = std::get_if<TesterSpec>(&rule)) {
    n_ = spec->n;
    m_ = spec->m;
    epsilon_ = spec->epsilon;
    threshold_ = spec->threshold;
    rescale_ = rescaling(spec->kind, spec->n, spec->m, spec->epsilon);
    table_ = statistic_table(spec->kind, spec->n, spec->m);
  } else {
    const auto& sl = std::get<SuperlinearTvSpec>(rule);
    require(sl.n >= 1 && sl.m >= 1, ErrorCode::kInvalidParameter, "superlinear tester needs n, m >= 1");
    superlinear_ = true;
    n_ = sl.n;
    m_ = sl.m;
    epsilon_ = sl.epsilon;
  }
}

Decision CompiledRule::decide(std::span<const std::int64_t> counts) const {
  if (superlinear_) return superlinear_from_deviation(scaled_l1_deviation(counts, n_, m_), n_, m_, epsilon_);
  double s = 0.0;
  for (auto y : counts) s += table_[static_cast<std::size_t>(y)];
  return rescale_.apply(s) < threshold_ ? Decision::kUniform : Decision::kNonUniform;
}

}  // namespace unilab
