#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "unilab/error.hpp"
#include "unilab/oracle.hpp"
#include "unilab/varianceopt.hpp"

using namespace unilab;
namespace vo = unilab::varianceopt;

namespace {

void expect_vec(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "i=" << i;
}

double enumerated_variance(const std::vector<double>& f, std::int64_t n, std::int64_t m) {
  const auto kind = StatisticKind::custom(f);
  const auto p = uniform(m);
  const double mean = oracle::exact_expectation(kind, p, n, [](double s) { return s; });
  const double second = oracle::exact_expectation(kind, p, n, [](double s) { return s * s; });
  return second - mean * mean;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(Marginals, Pbar) {
  expect_vec(vo::pbar(2, 2), {0.25, 0.5, 0.25}, 1e-15);
  expect_vec(vo::pbar(4, 2), {1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0}, 1e-15);
  expect_vec(vo::pbar(3, 1), {0, 0, 0, 1}, 1e-15);
}

TEST(Marginals, Qbar) {
  expect_vec(vo::qbar(2, 2, 0.1), {0.26, 0.48, 0.26}, 1e-14);
  expect_vec(vo::qbar(5, 3, 0.0), vo::pbar(5, 3), 1e-15);
  EXPECT_THROW(vo::qbar(2, 2, 0.6), LabError);
}

TEST(Marginals, Alpha) {
  expect_vec(vo::alpha_vector(2, 2), {1.5, -0.5, -0.5}, 1e-15);
  expect_vec(vo::alpha_vector(4, 2), {5, 1, -1, -1, 1}, 1e-15);
  expect_vec(vo::alpha_vector(0, 3), {0.0}, 1e-15);
  for (std::int64_t n : {1, 3, 10, 40}) {
    for (std::int64_t m : {2, 5, 17}) {
      const auto a = vo::alpha_vector(n, m);
      const auto p = vo::pbar(n, m);
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * p[k];
      EXPECT_NEAR(s, 0.0, 1e-12) << n << ' ' << m;
    }
  }
}

TEST(Marginals, Qprime) {
  expect_vec(vo::qprime(2, 2, 0.1), {0.2575, 0.495, 0.2475}, 1e-14);
  expect_vec(vo::qprime(6, 4, 0.0), vo::pbar(6, 4), 1e-15);
  for (std::int64_t n : {4, 16, 64}) {
    const auto q = vo::qprime(n, n / 2, 0.05);
    EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
  }
  EXPECT_THROW(vo::qprime(4, 2, 0.8), LabError);
}

TEST(BuildQ, TwoByTwo) {
  const auto q = vo::build_q(2, 2);
  const double u[3] = {1, -2, 1};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(q(i, j), 0.125 * u[i] * u[j], 1e-15);
  }
  EXPECT_THROW(vo::build_q(3, 1), LabError);
}

TEST(BuildQ, KernelHoldsConstantsAndLinear) {
  for (std::int64_t n : {3, 8, 20}) {
    const auto q = vo::build_q(n, 5);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n + 1);
    Eigen::VectorXd lin = Eigen::VectorXd::LinSpaced(n + 1, 0, static_cast<double>(n));
    EXPECT_LT((q * ones).norm(), 1e-12);
    EXPECT_LT((q * lin).norm(), 1e-12);
  }
}

TEST(Variance, MatchesEnumeration) {
  const std::pair<std::int64_t, std::int64_t> grid[] = {{2, 2}, {4, 3}, {6, 3}, {8, 4}, {5, 5}};
  std::mt19937_64 gen(4);
  for (const auto& [n, m] : grid) {
    const auto q = vo::build_q(n, m);
    std::vector<std::vector<double>> tables;
    for (const auto& kind : {StatisticKind::collisions(), StatisticKind::squared(), StatisticKind::tv(),
                             StatisticKind::empty_bins(), StatisticKind::singletons(), StatisticKind::huber(0.8)}) {
      tables.push_back(statistic_table(kind, n, m));
    }
    std::vector<double> random(static_cast<std::size_t>(n + 1));
    for (auto& v : random) v = std::normal_distribution<double>(0, 1)(gen);
    tables.push_back(random);
    for (const auto& f : tables) {
      const double via_q = vo::variance(q, f, m);
      const double via_enum = enumerated_variance(f, n, m);
      EXPECT_NEAR(via_q, via_enum, 1e-9 * std::max(1.0, std::abs(via_enum))) << n << ' ' << m;
    }
  }
}

TEST(Nvar, QuadraticExample) {
  const auto f = vo::quadratic_table(2);
  expect_vec(f, {0, 1, 4}, 0);
  EXPECT_NEAR(vo::variance(vo::build_q(2, 2), f, 2), 1.0, 1e-14);
  EXPECT_NEAR(vo::nvar(f, 2, 2, 0.1, vo::Target::kQbar), 625.0, 1e-9);
}

TEST(Nvar, InvariantUnderAffineAndLinear) {
  const auto f = vo::quadratic_table(10);
  const double base = vo::nvar(f, 10, 4, 0.1, vo::Target::kQbar);
  std::vector<double> g(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) g[k] = -3.0 * f[k] + 2.5 * static_cast<double>(k) + 7.0;
  EXPECT_NEAR(vo::nvar(g, 10, 4, 0.1, vo::Target::kQbar), base, 1e-9 * base);
}

TEST(Nvar, ZeroGapIsDegenerate) {
  std::vector<double> linear(5);
  for (std::size_t k = 0; k < linear.size(); ++k) linear[k] = static_cast<double>(k);
  try {
    vo::nvar(linear, 4, 3, 0.1, vo::Target::kQbar);
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(MinNvar, TwoByTwo) {
  const auto r = vo::min_nvar(2, 2, 0.1, vo::Target::kQbar);
  EXPECT_NEAR(r.value, 625.0, 625.0 * 1e-9);
  EXPECT_NEAR(r.value, 2.0 / (8 * 4 * std::pow(0.1, 4)), 1e-9 * 625.0);
  const auto& f = r.f_star;
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(vo::nvar(f, 2, 2, 0.1, vo::Target::kQbar), 625.0, 1e-9 * 625.0);
  EXPECT_NEAR(2.0 * 0.01 * (f[0] - 2 * f[1] + f[2]), 1.0, 1e-9);  // m d.f = 1 with d = 0.01 (1, -2, 1)
}

TEST(MinNvar, LowerBoundsEveryTable) {
  std::mt19937_64 gen(9);
  for (std::int64_t m : {3, 6}) {
    const std::int64_t n = 2 * m;
    const auto best = vo::min_nvar(n, m, 0.1, vo::Target::kQbar).value;
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> f(static_cast<std::size_t>(n + 1));
      for (auto& v : f) v = std::normal_distribution<double>(0, 1)(gen);
      EXPECT_GE(vo::nvar(f, n, m, 0.1, vo::Target::kQbar), best * (1 - 1e-9));
    }
  }
}

TEST(MinNvar, OptimizerAttainsValue) {
  for (std::int64_t m : {4, 16, 64}) {
    for (auto target : {vo::Target::kQbar, vo::Target::kQprime}) {
      const auto r = vo::min_nvar(2 * m, m, 0.05, target);
      EXPECT_NEAR(vo::nvar(r.f_star, 2 * m, m, 0.05, target), r.value, 1e-7 * r.value);
    }
  }
}

// Reference values from an independent double-precision solve on the
// sqrt(pbar)-scaled matrix, cross-checked by evaluating the minimizer in
// 100-digit arithmetic.
TEST(MinNvar, QprimeReferenceValues) {
  const std::pair<std::int64_t, double> ref[] = {{8, 995.1409135082602}, {16, 391.49342891278343},
                                                 {32, 174.5919855416013}, {64, 82.54952006030743}};
  for (const auto& [m, value] : ref) {
    EXPECT_NEAR(vo::min_nvar(2 * m, m, 0.05, vo::Target::kQprime).value, value, 1e-8 * value) << "m=" << m;
  }
}

TEST(MinNvar, QuadraticNearOptimalForQprime) {
  for (std::int64_t m : {8, 16, 32, 64}) {
    const std::int64_t n = 2 * m;
    const double quad = vo::nvar(vo::quadratic_table(n), n, m, 0.05, vo::Target::kQprime);
    const double best = vo::min_nvar(n, m, 0.05, vo::Target::kQprime).value;
    EXPECT_GE(quad / best, 1.0 - 1e-9);
    if (m == 8) {
      // The 1 + 10/m envelope does not hold this small; the true ratio is 2.456.
      EXPECT_NEAR(quad / best, 2.456003564268166, 1e-8);
    } else {
      EXPECT_LE(quad / best, 1.0 + 10.0 / static_cast<double>(m)) << "m=" << m;
    }
  }
}

TEST(Kkt, TwoByTwo) { EXPECT_NEAR(vo::kkt_residual_quadratic(2, 2), 0.756, 1e-3); }

TEST(Kkt, TwoByTwoOracle) {
  // Qf = (0.25, -0.5, 0.25) and pbar*alpha = (0.375, -0.25, -0.125).
  const double qf[3] = {0.25, -0.5, 0.25};
  const double d[3] = {0.375, -0.25, -0.125};
  double qd = 0, dd = 0, qq = 0;
  for (int i = 0; i < 3; ++i) {
    qd += qf[i] * d[i];
    dd += d[i] * d[i];
    qq += qf[i] * qf[i];
  }
  const double a = qd / dd;
  double rr = 0;
  for (int i = 0; i < 3; ++i) rr += (qf[i] - a * d[i]) * (qf[i] - a * d[i]);
  EXPECT_NEAR(vo::kkt_residual_quadratic(2, 2), std::sqrt(rr / qq), 1e-12);
}

TEST(Kkt, DecaysLikeOneOverM) {
  std::vector<double> lx, ly;
  for (std::int64_t m : {4, 8, 16, 32, 64}) {
    lx.push_back(std::log(static_cast<double>(m)));
    ly.push_back(std::log(vo::kkt_residual_quadratic(2 * m, m)));
  }
  const double slope = least_squares_slope(lx, ly);
  EXPECT_GE(slope, -1.5);
  EXPECT_LE(slope, -0.5);
}
