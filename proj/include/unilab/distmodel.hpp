#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "unilab/random.hpp"

namespace unilab {

/// A distribution over the bins {0, ..., m-1}. Entries are nonnegative and
/// sum to one within 1e-12; the constructor enforces this.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::vector<double> probs_;
};

/// Two-level alternative: the first `heavy` bins carry 1/m + eps/heavy and the
/// rest carry 1/m - eps/(m - heavy).
struct FlatFamily {
  std::int64_t m = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  std::int64_t heavy = 0;

  double heavy_value() const;
  double light_value() const;
  ProbabilityVector realize() const;
};

/// Bin counts of n samples.
struct Histogram {
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;

  Histogram() = default;
  explicit Histogram(std::vector<std::int64_t> c);

  std::size_t bins() const noexcept { return counts.size(); }
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

ProbabilityVector uniform(std::int64_t m);

FlatFamily flat_alternative(std::int64_t m, double epsilon, double gamma);

double tv_to_uniform(const ProbabilityVector& p);

/// Averages p into a gamma-skewed flat distribution that p majorizes.
ProbabilityVector flatten(const ProbabilityVector& p, double gamma);

bool majorizes(const ProbabilityVector& p, const ProbabilityVector& q);

/// Multinomial sampling by the conditional-binomial chain. Precomputes the
/// per-bin conditional probabilities so repeated draws from the same p are
/// cheap.
class HistogramSampler {
 public:
  explicit HistogramSampler(const ProbabilityVector& p);

  std::size_t bins() const noexcept { return conditional_.size(); }

  // Fills `out` (resized to m) with one multinomial(n, p) draw.
  void sample(std::int64_t n, SplitMix64& rng, std::vector<std::int64_t>& out) const;

 private:
  std::vector<double> conditional_;
};

Histogram sample_histogram(const ProbabilityVector& p, std::int64_t n, std::uint64_t seed);

}  // namespace unilab
