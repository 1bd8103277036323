// SPDX-License-Identifier: MIT
//
// Deterministic reduction and threading helpers.
//
// Monte-Carlo results must be byte-identical for any --threads value, so all
// reductions over trial-indexed data use a fixed-order pairwise scheme that
// does not depend on how the work was sharded.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sounder {

/// Pairwise (cascade) sum of x[begin..end): same result for a given array no
/// matter how the values were produced.  O(log n) error growth.
double pairwise_sum(const double* x, std::size_t n);

/// Pairwise sum of a vector.
double pairwise_sum(const std::vector<double>& x);

/// Pairwise sum of an indexed generator over [0, n): summands are obtained by
/// term(i); the reduction tree depends only on n.
double pairwise_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Pairwise sum for complex matrices of identical shape produced by term(i).
Eigen::MatrixXcd pairwise_sum_matrix(
    std::size_t n, const std::function<Eigen::MatrixXcd(std::size_t)>& term);

/// Mean and unbiased variance of samples via pairwise sums.
struct MeanVar {
  double mean;
  double variance;  // unbiased (n-1 denominator); 0 when n < 2
};
MeanVar mean_variance(const std::vector<double>& samples);

/// Run fn(i) for i in [0, n), sharded over `threads` OS threads (contiguous
/// blocks).  fn must only write to slot i of preallocated storage; no locks,
/// no ordering guarantees between threads.  threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

/// Empirical KS distance between two samples (both sorted internally).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// KS distance of samples against the N(mean, sigma^2) CDF.
double ks_vs_gaussian(std::vector<double> samples, double mean, double sigma);

}  // namespace sounder
