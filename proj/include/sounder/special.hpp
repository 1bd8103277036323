// SPDX-License-Identifier: MIT
//
// Special functions and random samplers used by the statistical laws: digamma
// and trigamma, inverse error function, and samplers for scaled chi-square,
// gamma, beta, and Dirichlet variates driven by an RngStream.
//
// The scaled chi-square chi2(n, s2) is the squared norm of n independent
// N(0, s2) variables: mean n*s2, variance 2*n*s2^2, E{ln} = ln(2 s2) + psi(n/2).

#pragma once

#include <vector>

#include "sounder/rng.hpp"

namespace sounder {

/// Digamma psi(z) for z > 0.  Exact finite sums at integer and half-integer
/// arguments; elsewhere upward recurrence into an asymptotic tail.
double digamma(double z);

/// Trigamma psi'(z) for z > 0 (series plus integral tail correction).
double trigamma(double z);

/// Inverse error function on (-1, 1); erfinv(+-1) raises domain_error.
double erfinv(double p);

/// Gamma(alpha, scale=1) variate, alpha > 0 (Marsaglia-Tsang).
double sample_gamma(double alpha, RngStream& rng);

/// Scaled chi-square with n degrees of freedom and per-component variance
/// sigma2: sum of n squared N(0, sigma2).  n = 0 returns exactly 0.
double sample_chi2(int n, double sigma2, RngStream& rng);

/// Beta(a, b) variate.  Edge cases: b = 0 -> 1, a = 0 (b > 0) -> 0.
double sample_beta(double a, double b, RngStream& rng);

/// Dirichlet variate with parameter vector alpha (all > 0).
std::vector<double> sample_dirichlet(const std::vector<double>& alpha,
                                     RngStream& rng);

/// E{ln chi2(n, sigma2)} = ln(2 sigma2) + psi(n/2).
double chi2_log_mean(int n, double sigma2);

}  // namespace sounder
