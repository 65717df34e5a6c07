#include "unilab/varianceopt.hpp"

#include <cmath>
#include <numeric>

#include "unilab/error.hpp"

namespace unilab::varianceopt {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> f) {
  return {f.data(), static_cast<Eigen::Index>(f.size())};
}

Eigen::VectorXd difference(const BinMarginal& a, const BinMarginal& b) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) d[static_cast<Eigen::Index>(k)] = a[k] - b[k];
  return d;
}

void check_table(std::span<const double> f, std::int64_t n) {
  require(f.size() == static_cast<std::size_t>(n + 1), ErrorCode::kInvalidParameter, "table must have n+1 entries");
}

double log_binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  if (k < 0 || k > n) return -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(rest + 1.0) +
         kd * std::log(p) + rest * std::log1p(-p);
}

}  // namespace

BinMarginal binomial_pmf(std::int64_t n, double p) {
  require(n >= 0, ErrorCode::kInvalidParameter, "binomial needs n >= 0");
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidParameter, "binomial p must lie in [0, 1]");
  BinMarginal pmf(static_cast<std::size_t>(n + 1), 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    pmf[static_cast<std::size_t>(k)] = std::exp(lgn - std::lgamma(kd + 1.0) -
                                                std::lgamma(static_cast<double>(n - k) + 1.0) + kd * lp +
                                                static_cast<double>(n - k) * lq);
  }
  return pmf;
}

BinMarginal pbar(std::int64_t n, std::int64_t m) {
  require(m >= 1, ErrorCode::kInvalidParameter, "pbar needs m >= 1");
  return binomial_pmf(n, 1.0 / static_cast<double>(m));
}

BinMarginal qbar(std::int64_t n, std::int64_t m, double epsilon) {
  require(m >= 1, ErrorCode::kInvalidParameter, "qbar needs m >= 1");
  const double md = static_cast<double>(m);
  require(epsilon >= 0.0 && epsilon <= 0.5 && (1.0 + 2.0 * epsilon) / md <= 1.0, ErrorCode::kInvalidParameter,
          "qbar needs 0 <= eps <= 1/2 and (1+2eps)/m <= 1");
  const auto hi = binomial_pmf(n, (1.0 + 2.0 * epsilon) / md);
  const auto lo = binomial_pmf(n, (1.0 - 2.0 * epsilon) / md);
  BinMarginal out(hi.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (hi[k] + lo[k]);
  return out;
}

std::vector<double> alpha_vector(std::int64_t n, std::int64_t m) {
  require(m >= 1 && n >= 0, ErrorCode::kInvalidParameter, "alpha needs m >= 1, n >= 0");
  const double lambda = static_cast<double>(n) / static_cast<double>(m);
  std::vector<double> alpha(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    alpha[static_cast<std::size_t>(k)] = (kd - lambda) * (kd - lambda) - kd + lambda / static_cast<double>(m);
  }
  return alpha;
}

BinMarginal qprime(std::int64_t n, std::int64_t m, double epsilon) {
  const auto p = pbar(n, m);
  const auto alpha = alpha_vector(n, m);
  BinMarginal out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double factor = 1.0 + 2.0 * epsilon * epsilon * alpha[k];
    require(factor >= 0.0, ErrorCode::kInvalidParameter, "qprime would be negative: epsilon too large");
    out[k] = p[k] * factor;
  }
  return out;
}

Eigen::MatrixXd build_q(std::int64_t n, std::int64_t m) {
  require(m >= 2, ErrorCode::kInvalidParameter, "Q needs m >= 2");
  require(n >= 0, ErrorCode::kInvalidParameter, "Q needs n >= 0");
  const auto size = static_cast<Eigen::Index>(n + 1);
  const double md = static_cast<double>(m);
  const auto p = pbar(n, m);
  Eigen::MatrixXd q(size, size);
  for (std::int64_t k = 0; k <= n; ++k) {
    const auto conditional = binomial_pmf(n - k, 1.0 / (md - 1.0));
    const double pk = p[static_cast<std::size_t>(k)];
    for (std::int64_t k2 = 0; k2 <= n; ++k2) {
      const double cond = k2 <= n - k ? conditional[static_cast<std::size_t>(k2)] : 0.0;
      double entry = (md - 1.0) * pk * cond - md * pk * p[static_cast<std::size_t>(k2)];
      if (k2 == k) entry += pk;
      q(k, k2) = entry;
    }
  }
  // Exact symmetry holds analytically; remove rounding asymmetry.
  return 0.5 * (q + q.transpose());
}

QuadraticProgram quadratic_program(std::int64_t n, std::int64_t m, double epsilon, Target target) {
  QuadraticProgram qp;
  qp.n = n;
  qp.m = m;
  qp.q = build_q(n, m);
  const auto p = pbar(n, m);
  qp.d = difference(target == Target::kQbar ? qbar(n, m, epsilon) : qprime(n, m, epsilon), p);
  return qp;
}

double variance(const Eigen::MatrixXd& q, std::span<const double> f, std::int64_t m) {
  require(static_cast<Eigen::Index>(f.size()) == q.rows(), ErrorCode::kInvalidParameter, "table/matrix size mismatch");
  const auto fv = as_vector(f);
  return static_cast<double>(m) * fv.dot(q * fv);
}

double nvar(std::span<const double> f, std::int64_t n, std::int64_t m, double epsilon, Target target) {
  check_table(f, n);
  const auto qp = quadratic_program(n, m, epsilon, target);
  const auto fv = as_vector(f);
  const double gap = static_cast<double>(m) * qp.d.dot(fv);
  const double scale = static_cast<double>(m) * qp.d.cwiseAbs().dot(fv.cwiseAbs());
  require(std::abs(gap) > 1e-14 * scale && gap != 0.0, ErrorCode::kDegenerate,
          "statistic has no mean gap between null and alternative");
  return variance(qp.q, f, m) / (gap * gap);
}

MinNvarResult min_nvar(std::int64_t n, std::int64_t m, double epsilon, Target target) {
  require(m >= 2, ErrorCode::kInvalidParameter, "Q needs m >= 2");
  const auto qp = quadratic_program(n, m, epsilon, target);
  const double md = static_cast<double>(m);

  // Work with S = W^{-1} Q W^{-1}, W = diag(sqrt(pbar)). Q's spectrum follows
  // pbar, which spans hundreds of decades in the tail; S has eigenvalues near 1
  // off the kernel. Entries are formed in log space so tail products do not
  // underflow. Counts with pbar below ~1e-300 carry no weight and are dropped.
  std::vector<std::int64_t> keep;
  std::vector<double> log_p;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double lp = log_binomial_pmf(n, 1.0 / md, k);
    if (lp > -690.0) {
      keep.push_back(k);
      log_p.push_back(lp);
    }
  }
  const auto size = static_cast<Eigen::Index>(keep.size());
  const auto alpha = alpha_vector(n, m);
  const auto tq = target == Target::kQbar ? qbar(n, m, epsilon) : BinMarginal{};
  Eigen::MatrixXd scaled(size, size);
  Eigen::VectorXd d(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const auto k = keep[static_cast<std::size_t>(i)];
    const double lk = log_p[static_cast<std::size_t>(i)];
    const double wk = std::exp(0.5 * lk);
    d[i] = target == Target::kQprime ? wk * 2.0 * epsilon * epsilon * alpha[static_cast<std::size_t>(k)]
                                     : (tq[static_cast<std::size_t>(k)] - std::exp(lk)) / wk;
    for (Eigen::Index j = 0; j < size; ++j) {
      const auto k2 = keep[static_cast<std::size_t>(j)];
      const double lj = log_p[static_cast<std::size_t>(j)];
      const double lc = log_binomial_pmf(n - k, 1.0 / (md - 1.0), k2);
      double entry = (md - 1.0) * std::exp(0.5 * (lk - lj) + lc) - md * std::exp(0.5 * (lk + lj));
      if (i == j) entry += 1.0;
      scaled(i, j) = entry;
    }
  }
  scaled = 0.5 * (scaled + scaled.transpose()).eval();

  // The kernel of S is span{W 1, W k}. Restrict to its orthogonal complement so
  // that rounding in near-zero eigenvalues cannot leak into the solve.
  Eigen::MatrixXd kernel(size, 2);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double wk = std::exp(0.5 * log_p[static_cast<std::size_t>(i)]);
    kernel(i, 0) = wk;
    kernel(i, 1) = wk * static_cast<double>(keep[static_cast<std::size_t>(i)]);
  }
  const Eigen::Index rank = std::min<Eigen::Index>(2, size);
  const Eigen::MatrixXd basis_full = Eigen::HouseholderQR<Eigen::MatrixXd>(kernel).householderQ();
  const Eigen::MatrixXd basis = basis_full.rightCols(size - rank);
  const Eigen::MatrixXd reduced = basis.transpose() * scaled * basis;
  const Eigen::VectorXd d_reduced = basis.transpose() * d;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  require(eig.info() == Eigen::Success, ErrorCode::kDegenerate, "eigendecomposition of Q failed");
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  const double cutoff = 1e-12 * values.cwiseAbs().maxCoeff();

  // Pseudoinverse applied to d; the cutoff only drops numerically null directions.
  Eigen::VectorXd coords = vectors.transpose() * d_reduced;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    coords[i] = values[i] > cutoff ? coords[i] / values[i] : 0.0;
  }
  const Eigen::VectorXd g = basis * (vectors * coords);
  const double curvature = d.dot(g);
  require(curvature > 0.0 && std::isfinite(curvature), ErrorCode::kDegenerate,
          "constraint direction lies in the kernel of Q");

  MinNvarResult result;
  result.f_star.assign(static_cast<std::size_t>(n + 1), 0.0);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double wk = std::exp(0.5 * log_p[static_cast<std::size_t>(i)]);
    result.f_star[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = g[i] / wk / (md * curvature);
  }
  result.value = 1.0 / (md * curvature);
  return result;
}

std::vector<double> quadratic_table(std::int64_t n) {
  std::vector<double> f(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) f[static_cast<std::size_t>(k)] = static_cast<double>(k * k);
  return f;
}

double kkt_residual_quadratic(std::int64_t n, std::int64_t m) {
  const auto q = build_q(n, m);
  const auto f = quadratic_table(n);
  const Eigen::VectorXd qf = q * as_vector(f);
  const auto p = pbar(n, m);
  const auto alpha = alpha_vector(n, m);
  Eigen::VectorXd direction(qf.size());
  for (Eigen::Index k = 0; k < qf.size(); ++k) {
    direction[k] = p[static_cast<std::size_t>(k)] * alpha[static_cast<std::size_t>(k)];
  }
  const double norm_qf = qf.norm();
  if (norm_qf == 0.0) return 0.0;
  const double a = qf.dot(direction) / direction.squaredNorm();
  return (qf - a * direction).norm() / norm_qf;
}

}  // namespace unilab::varianceopt
