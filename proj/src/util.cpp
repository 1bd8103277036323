// SPDX-License-Identifier: MIT

#include "sounder/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "sounder/errors.hpp"

namespace sounder {

namespace {

constexpr std::size_t kLeafSize = 64;

double pairwise_sum_range(const double* x, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n <= kLeafSize) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += x[i];
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum_range(x, begin, mid) + pairwise_sum_range(x, mid, end);
}

double pairwise_sum_gen(std::size_t begin, std::size_t end,
                        const std::function<double(std::size_t)>& term) {
  const std::size_t n = end - begin;
  if (n <= kLeafSize) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum_gen(begin, mid, term) + pairwise_sum_gen(mid, end, term);
}

Eigen::MatrixXcd pairwise_sum_matrix_range(
    std::size_t begin, std::size_t end,
    const std::function<Eigen::MatrixXcd(std::size_t)>& term) {
  const std::size_t n = end - begin;
  if (n == 1) return term(begin);
  if (n <= 8) {
    Eigen::MatrixXcd acc = term(begin);
    for (std::size_t i = begin + 1; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum_matrix_range(begin, mid, term) +
         pairwise_sum_matrix_range(mid, end, term);
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  return pairwise_sum_range(x, 0, n);
}

double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

double pairwise_sum(std::size_t n,
                    const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  return pairwise_sum_gen(0, n, term);
}

Eigen::MatrixXcd pairwise_sum_matrix(
    std::size_t n, const std::function<Eigen::MatrixXcd(std::size_t)>& term) {
  if (n == 0) {
    throw dimension_error("pairwise_sum_matrix needs at least one term");
  }
  return pairwise_sum_matrix_range(0, n, term);
}

MeanVar mean_variance(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw statistics_error("mean_variance needs at least one sample");
  const double mean = pairwise_sum(samples) / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  const double ss = pairwise_sum(n, [&](std::size_t i) {
    const double d = samples[i] - mean;
    return d * d;
  });
  return {mean, ss / static_cast<double>(n - 1)};
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t hw = std::max(1, threads);
  const std::size_t workers = std::min<std::size_t>(hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  // Contiguous blocks; [lo, hi) per worker.
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi, w]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw statistics_error("ks_two_sample needs nonempty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  // The ECDF difference is constant between jump points, so evaluating just
  // after every distinct merged value covers the supremum.  Both sides must
  // step over a shared value together, or ties inflate the distance.
  while (i < a.size() || j < b.size()) {
    double x;
    if (i < a.size() && j < b.size()) {
      x = std::min(a[i], b[j]);
    } else if (i < a.size()) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_vs_gaussian(std::vector<double> samples, double mean, double sigma) {
  if (samples.empty()) {
    throw statistics_error("ks_vs_gaussian needs nonempty samples");
  }
  detail::check_positive(sigma, "sigma");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double z = (samples[i] - mean) / (sigma * std::numbers::sqrt2);
    const double cdf = 0.5 * (1.0 + std::erf(z));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(cdf - lo), std::abs(cdf - hi)});
  }
  return d;
}

}  // namespace sounder
