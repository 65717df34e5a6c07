#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "unilab/error.hpp"
#include "unilab/oracle.hpp"

using namespace unilab;

namespace {

// Histogram distribution by walking all m^n ordered sample sequences.
std::map<std::vector<std::int64_t>, double> sequences(const ProbabilityVector& p, std::int64_t n) {
  const auto m = static_cast<std::int64_t>(p.size());
  std::map<std::vector<std::int64_t>, double> out;
  std::int64_t total = 1;
  for (std::int64_t i = 0; i < n; ++i) total *= m;
  for (std::int64_t code = 0; code < total; ++code) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(m), 0);
    double prob = 1.0;
    std::int64_t c = code;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(c % m);
      c /= m;
      ++counts[j];
      prob *= p[j];
    }
    out[counts] += prob;
  }
  return out;
}

}  // namespace

TEST(HistogramPmf, Examples) {
  EXPECT_NEAR(oracle::histogram_pmf(uniform(2), Histogram({1, 1})), 0.5, 1e-15);
  EXPECT_NEAR(oracle::histogram_pmf(uniform(2), Histogram({2, 0})), 0.25, 1e-15);
  EXPECT_NEAR(oracle::histogram_pmf(ProbabilityVector({0.7, 0.3}), Histogram({1, 1})), 0.42, 1e-15);
}

TEST(Enumerate, Examples) {
  const auto outcomes = oracle::enumerate_histograms(uniform(2), 2);
  ASSERT_EQ(outcomes.size(), 3u);
  std::map<std::vector<std::int64_t>, double> got;
  for (const auto& o : outcomes) got[o.hist.counts] = o.prob;
  EXPECT_NEAR((got[{2, 0}]), 0.25, 1e-15);
  EXPECT_NEAR((got[{1, 1}]), 0.5, 1e-15);
  EXPECT_NEAR((got[{0, 2}]), 0.25, 1e-15);

  const auto empty = oracle::enumerate_histograms(uniform(3), 0);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].hist.counts, (std::vector<std::int64_t>{0, 0, 0}));
  EXPECT_DOUBLE_EQ(empty[0].prob, 1.0);
}

TEST(Enumerate, SumsToOne) {
  const ProbabilityVector p({0.5, 0.3, 0.2});
  double total = 0.0;
  for (const auto& o : oracle::enumerate_histograms(p, 6)) total += o.prob;
  EXPECT_NEAR(total, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(oracle::composition_count(6, 3), 28.0);
}

TEST(Enumerate, MatchesSequenceWalk) {
  for (const auto& p : {uniform(3), ProbabilityVector({0.5, 0.3, 0.2}), flat_alternative(4, 0.2, 0.5).realize()}) {
    for (std::int64_t n : {1, 3, 5}) {
      const auto expected = sequences(p, n);
      const auto outcomes = oracle::enumerate_histograms(p, n);
      ASSERT_EQ(outcomes.size(), expected.size());
      for (const auto& o : outcomes) EXPECT_NEAR(o.prob, expected.at(o.hist.counts), 1e-13);
    }
  }
}

TEST(Enumerate, TooLarge) {
  try {
    oracle::enumerate_histograms(uniform(100), 100);
    FAIL() << "expected too-large";
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(ErrorRates, CollisionsExample) {
  const TestRule rule = TesterSpec{StatisticKind::collisions(), 2, 2, 0.2, 0.0};
  // Rescaled collisions at n = m = 2: S~ = (2/(4 eps^2)) (2 S - 2), so S >= 1 iff S~ >= 0.
  const auto r = oracle::exact_error_rates(rule, uniform(2), flat_alternative(2, 0.2, 0.5).realize());
  EXPECT_NEAR(r.delta_minus, 0.5, 1e-15);
  EXPECT_NEAR(r.delta_plus, 2 * 0.7 * 0.3, 1e-15);
}

TEST(ErrorRates, InfiniteThreshold) {
  const TestRule rule = TesterSpec{StatisticKind::squared(), 6, 3, 0.2, std::numeric_limits<double>::infinity()};
  const auto r = oracle::exact_error_rates(rule, uniform(3), flat_alternative(3, 0.2, 1.0 / 3.0).realize());
  EXPECT_EQ(r.delta_minus, 0.0);
  EXPECT_NEAR(r.delta_plus, 1.0, 1e-12);
}

TEST(ErrorRates, MatchesSequenceWalk) {
  const auto p = uniform(3);
  const auto q = flat_alternative(3, 0.2, 1.0 / 3.0).realize();
  for (const auto& kind : {StatisticKind::collisions(), StatisticKind::tv(), StatisticKind::huber(1.0),
                           StatisticKind::empty_bins()}) {
    const TesterSpec spec{kind, 5, 3, 0.2, 0.9};
    double dm = 0.0, dp = 0.0;
    for (const auto& [counts, prob] : sequences(p, 5)) {
      if (decide(spec, Histogram(counts)) == Decision::kNonUniform) dm += prob;
    }
    for (const auto& [counts, prob] : sequences(q, 5)) {
      if (decide(spec, Histogram(counts)) == Decision::kUniform) dp += prob;
    }
    const auto r = oracle::exact_error_rates(TestRule{spec}, p, q);
    EXPECT_NEAR(r.delta_minus, dm, 1e-13) << kind.name();
    EXPECT_NEAR(r.delta_plus, dp, 1e-13) << kind.name();
  }
}

TEST(ExactMgf, ThetaZero) {
  for (const auto& kind : {StatisticKind::collisions(), StatisticKind::squared(), StatisticKind::tv(),
                           StatisticKind::empty_bins(), StatisticKind::singletons(), StatisticKind::huber(1.0)}) {
    EXPECT_NEAR(oracle::exact_mgf(kind, uniform(3), 4, 3, 0.2, 0.0), 1.0, 1e-14);
  }
}

TEST(ExactMgf, SquaredRawExample) {
  // Raw S in {0, 2} with probability 1/2 each at n = m = 2.
  const double value =
      oracle::exact_expectation(StatisticKind::squared(), uniform(2), 2, [](double s) { return std::exp(0.5 * s); });
  EXPECT_NEAR(value, 0.5 + 0.5 * std::exp(1.0), 1e-12);
  EXPECT_NEAR(value, 1.859141, 1e-6);
}

TEST(ExactMgf, DerivativeIsMean) {
  const auto p = ProbabilityVector({0.5, 0.3, 0.2});
  for (const auto& kind : {StatisticKind::squared(), StatisticKind::empty_bins(), StatisticKind::huber(0.5)}) {
    const auto r = rescaling(kind, 6, 3, 0.3);
    const double mean = r.apply(oracle::exact_expectation(kind, p, 6, [](double s) { return s; }));
    const double h = 1e-6;
    const double fd = (oracle::exact_mgf(kind, p, 6, 3, 0.3, h) - oracle::exact_mgf(kind, p, 6, 3, 0.3, -h)) / (2 * h);
    EXPECT_NEAR(fd, mean, 1e-6 * std::max(1.0, std::abs(mean))) << kind.name();
  }
}

TEST(ExactMgf, LogConvex) {
  for (const auto& kind : {StatisticKind::collisions(), StatisticKind::tv(), StatisticKind::empty_bins()}) {
    std::vector<double> logs;
    for (int i = -2; i <= 2; ++i) logs.push_back(std::log(oracle::exact_mgf(kind, uniform(4), 5, 4, 0.2, 0.05 * i)));
    for (int i = 1; i < 4; ++i) EXPECT_GE(logs[i - 1] - 2 * logs[i] + logs[i + 1], -1e-9) << kind.name();
  }
}

TEST(BinomialTail, Examples) {
  EXPECT_NEAR(oracle::exact_binomial_tail(4, 0.5, 3), 0.3125, 1e-15);
  EXPECT_EQ(oracle::exact_binomial_tail(4, 0.5, 0), 1.0);
  EXPECT_EQ(oracle::exact_binomial_tail(4, 0.5, 5), 0.0);
}

TEST(BinomialTail, MatchesDirectSum) {
  for (std::int64_t n : {1, 7, 30}) {
    for (double p : {0.1, 0.5, 0.83}) {
      for (std::int64_t k = 0; k <= n; ++k) {
        double direct = 0.0;
        for (std::int64_t j = k; j <= n; ++j) {
          direct += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)) *
                    std::pow(p, j) * std::pow(1 - p, n - j);
        }
        EXPECT_NEAR(oracle::exact_binomial_tail(n, p, k), direct, 1e-12 * std::max(1.0, direct));
      }
    }
  }
}
