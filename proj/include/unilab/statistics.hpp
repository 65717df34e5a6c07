#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unilab/distmodel.hpp"

namespace unilab {

/// Which per-bin function f the separable statistic S = sum_j f(Y_j) uses.
class StatisticKind {
 public:
  enum class Tag { kCollisions, kSquared, kTv, kEmptyBins, kSingletons, kHuber, kCustom };

  static StatisticKind collisions() { return StatisticKind(Tag::kCollisions); }
  static StatisticKind squared() { return StatisticKind(Tag::kSquared); }
  static StatisticKind tv() { return StatisticKind(Tag::kTv); }
  static StatisticKind empty_bins() { return StatisticKind(Tag::kEmptyBins); }
  static StatisticKind singletons() { return StatisticKind(Tag::kSingletons); }
  static StatisticKind huber(double beta);
  static StatisticKind custom(std::vector<double> table);

  Tag tag() const noexcept { return tag_; }
  double beta() const noexcept { return beta_; }
  const std::vector<double>& table() const noexcept { return table_; }

  // Huber with beta = 0 behaves as the TV statistic everywhere.
  Tag effective_tag() const noexcept {
    return tag_ == Tag::kHuber && beta_ == 0.0 ? Tag::kTv : tag_;
  }

  std::string name() const;

  friend bool operator==(const StatisticKind&, const StatisticKind&) = default;

 private:
  explicit StatisticKind(Tag tag) : tag_(tag) {}

  Tag tag_;
  double beta_ = 0.0;
  std::vector<double> table_;
};

/// Parses the lowercase names produced by StatisticKind::name(). Huber gets
/// beta from the second argument; custom kinds cannot be parsed by name.
StatisticKind kind_from_name(std::string_view name, double beta = 0.0);

enum class Decision { kUniform, kNonUniform };

/// A thresholded separable tester. Accepts "uniform" iff the rescaled
/// statistic is strictly below the threshold; equality rejects.
struct TesterSpec {
  StatisticKind kind = StatisticKind::collisions();
  std::int64_t n = 0;
  std::int64_t m = 0;
  double epsilon = 0.0;
  double threshold = 0.0;
};

/// The dedicated tester for n >> m / eps^2: uniform iff the empirical
/// distribution is within eps/2 of uniform in total variation.
struct SuperlinearTvSpec {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double epsilon = 0.0;
};

using TestRule = std::variant<TesterSpec, SuperlinearTvSpec>;

/// S~ = scale * (S - center).
struct Rescaling {
  double scale = 1.0;
  double center = 0.0;

  double apply(double s) const { return scale * (s - center); }
};

struct BetaChoice {
  double beta = 0.0;
  double delta = 0.0;           // n eps^2 / m, after clamping
  bool delta_clamped = false;   // raw delta was >= 1 and was replaced by 1/e
  bool third_moment_ok = false; // (beta^2 eps^2)^3 <= delta^2
};

/// min(x^2, 2 beta |x| - beta^2): twice the textbook Huber loss.
double huber_loss(double x, double beta);

/// f(y) for a single bin with count y, where deviation-based kinds use y - center.
double term_value(const StatisticKind& kind, std::int64_t y, double center);

/// f_k for k = 0..n with center n/m.
std::vector<double> statistic_table(const StatisticKind& kind, std::int64_t n, std::int64_t m);

double statistic_value(const StatisticKind& kind, const Histogram& hist, std::int64_t n, std::int64_t m);

Rescaling rescaling(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon);

double rescaled_value(const StatisticKind& kind, double s, std::int64_t n, std::int64_t m, double epsilon);

double default_threshold(const StatisticKind& kind, std::int64_t n, std::int64_t m, double epsilon);

/// Raw-scale TV threshold equivalent to the empty-bins default (valid for n <= m,
/// where S_TV = (2n/m) * S_empty exactly).
double tv_threshold_from_empty_bins(std::int64_t n, std::int64_t m, double epsilon, double empty_threshold);

BetaChoice default_beta(std::int64_t n, std::int64_t m, double epsilon, double multiplier = 2.0);

Decision decide(const TesterSpec& spec, const Histogram& hist);

Decision superlinear_tv_decide(const Histogram& hist, std::int64_t n, std::int64_t m, double epsilon);

Decision decide(const TestRule& rule, const Histogram& hist);

/// Precomputed per-count table plus rescaling so that repeated decisions on
/// histograms of the same shape avoid recomputing f.
class CompiledRule {
 public:
  explicit CompiledRule(const TestRule& rule);

  Decision decide(std::span<const std::int64_t> counts) const;

 private:
  bool superlinear_ = false;
  std::int64_t n_ = 0;
  std::int64_t m_ = 0;
  double epsilon_ = 0.0;
  double threshold_ = 0.0;
  Rescaling rescale_;
  std::vector<double> table_;
};

}  // namespace unilab
