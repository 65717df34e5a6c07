#include "unilab/random.hpp"

#include <cmath>
#include <random>

namespace unilab {

namespace {

constexpr double kInversionMeanLimit = 20.0;

// Inversion by sequential search; valid for p <= 1/2 and small trials*p.
std::int64_t binomial_inversion(SplitMix64& rng, std::int64_t trials, double p) {
  const double q = 1.0 - p;
  const double ratio = p / q;
  double pmf = std::exp(static_cast<double>(trials) * std::log1p(-p));
  double u = rng.uniform01();
  std::int64_t k = 0;
  while (u >= pmf) {
    u -= pmf;
    if (k >= trials) return trials;
    pmf *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    ++k;
    // Remaining mass is below double resolution.
    if (pmf <= 0.0) return k;
  }
  return k;
}

}  // namespace

std::int64_t sample_binomial(SplitMix64& rng, std::int64_t trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  if (p > 0.5) return trials - sample_binomial(rng, trials, 1.0 - p);
  if (static_cast<double>(trials) * p < kInversionMeanLimit) {
    return binomial_inversion(rng, trials, p);
  }
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(rng);
}

}  // namespace unilab
