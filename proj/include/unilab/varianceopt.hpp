#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace unilab::varianceopt {

// Variance of separable statistics under the uniform null, written as a
// quadratic form over the per-count table f_0..f_n.
//
// With pbar_k = Bin(n, 1/m, k) the single-bin marginal and
// pbar_{k'|k} = Bin(n-k, 1/(m-1), k') the conditional law of a second bin,
//
//   Var_p[sum_j f(Y_j)] = m * f^T Q f,
//   Q_{kk'} = [k = k'] pbar_k + (m-1) pbar_k pbar_{k'|k} - m pbar_k pbar_{k'}.
//
// Q annihilates constant and linear tables because sum_j Y_j = n is fixed.

using BinMarginal = std::vector<double>;

enum class Target { kQbar, kQprime };

struct QuadraticProgram {
  Eigen::MatrixXd q;   // (n+1) x (n+1)
  Eigen::VectorXd d;   // target marginal minus pbar
  std::int64_t n = 0;
  std::int64_t m = 0;
};

struct MinNvarResult {
  std::vector<double> f_star;  // scaled so that m * d.f = 1
  double value = 0.0;
};

/// Binomial(n, p) pmf over k = 0..n, computed in log space.
BinMarginal binomial_pmf(std::int64_t n, double p);

BinMarginal pbar(std::int64_t n, std::int64_t m);

/// Equal mixture of Bin(n, (1+2eps)/m) and Bin(n, (1-2eps)/m).
BinMarginal qbar(std::int64_t n, std::int64_t m, double epsilon);

/// alpha_k = (k - lambda)^2 - k + lambda/m with lambda = n/m.
std::vector<double> alpha_vector(std::int64_t n, std::int64_t m);

/// pbar_k (1 + 2 eps^2 alpha_k).
BinMarginal qprime(std::int64_t n, std::int64_t m, double epsilon);

Eigen::MatrixXd build_q(std::int64_t n, std::int64_t m);

QuadraticProgram quadratic_program(std::int64_t n, std::int64_t m, double epsilon, Target target);

/// m * f^T Q f.
double variance(const Eigen::MatrixXd& q, std::span<const double> f, std::int64_t m);

/// Var_p[S_f] / (E_target[S_f] - E_p[S_f])^2.
double nvar(std::span<const double> f, std::int64_t n, std::int64_t m, double epsilon, Target target);

/// Minimizes f^T Q f subject to d.f = 1/m through the pseudoinverse of Q.
MinNvarResult min_nvar(std::int64_t n, std::int64_t m, double epsilon, Target target);

/// Relative least-squares residual of Q k^2 against the direction pbar * alpha.
double kkt_residual_quadratic(std::int64_t n, std::int64_t m);

/// Table k^2 for k = 0..n.
std::vector<double> quadratic_table(std::int64_t n);

}  // namespace unilab::varianceopt
