// SPDX-License-Identifier: MIT
//
// Deterministic reductions, threading discipline, and KS distances.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "sounder/errors.hpp"
#include "sounder/rng.hpp"
#include "sounder/util.hpp"

using namespace sounder;

TEST_CASE("pairwise sum matches naive summation") {
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 65u, 1000u}) {
    std::vector<double> x(n);
    RngStream rng(5, n);
    for (auto& v : x) v = rng.normal();
    const double naive = std::accumulate(x.begin(), x.end(), 0.0);
    const double pw = pairwise_sum(x);
    CHECK(pw == doctest::Approx(naive).epsilon(1e-12));
    const double pw2 = pairwise_sum(x.size(), [&](std::size_t i) {
      return x[i];
    });
    CHECK(pw2 == pw);  // generator form is bit-identical to the array form
  }
}

TEST_CASE("pairwise sum is more accurate than sequential on hard input") {
  // 1 followed by many tiny values: sequential summation loses them.
  const std::size_t n = 1u << 20;
  std::vector<double> x(n, 1e-16);
  x[0] = 1.0;
  const double pw = pairwise_sum(x);
  const double expected = 1.0 + 1e-16 * static_cast<double>(n - 1);
  CHECK(std::abs(pw - expected) < 1e-12);
}

TEST_CASE("pairwise matrix sum matches entrywise sums") {
  const std::size_t n = 37;
  std::vector<Eigen::MatrixXcd> terms(n);
  RngStream rng(8, 1);
  for (auto& t : terms) {
    t.resize(3, 2);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = std::complex<double>(rng.normal(), rng.normal());
    }
  }
  const Eigen::MatrixXcd total =
      pairwise_sum_matrix(n, [&](std::size_t i) { return terms[i]; });
  for (Eigen::Index k = 0; k < total.size(); ++k) {
    std::complex<double> naive = 0.0;
    for (const auto& t : terms) naive += t.data()[k];
    CHECK(std::abs(total.data()[k] - naive) < 1e-12);
  }
}

TEST_CASE("mean_variance basics") {
  const MeanVar mv = mean_variance({1.0, 2.0, 3.0, 4.0});
  CHECK(mv.mean == doctest::Approx(2.5));
  CHECK(mv.variance == doctest::Approx(5.0 / 3.0));  // unbiased
  CHECK(mean_variance({7.0}).variance == 0.0);
  CHECK_THROWS_AS(mean_variance({}), statistics_error);
}

TEST_CASE("parallel_for covers every index exactly once") {
  const std::size_t n = 1000;
  for (int threads : {1, 2, 3, 8, 33}) {
    std::vector<int> hits(n, 0);
    parallel_for(n, threads, [&](std::size_t i) { hits[i] += 1; });
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(hits[i] == 1);
    }
  }
  // n smaller than threads still works.
  std::vector<int> hits(3, 0);
  parallel_for(3, 16, [&](std::size_t i) { hits[i] += 1; });
  CHECK(hits[0] + hits[1] + hits[2] == 3);
}

TEST_CASE("slot-writes plus pairwise reduction are thread-count invariant") {
  const std::size_t n = 4099;
  auto run = [&](int threads) {
    std::vector<double> slots(n);
    parallel_for(n, threads, [&](std::size_t i) {
      RngStream rng(3, i);
      slots[i] = rng.normal() * rng.uniform();
    });
    return pairwise_sum(slots);
  };
  const double ref = run(1);
  CHECK(run(2) == ref);
  CHECK(run(7) == ref);
  CHECK(run(32) == ref);
}

TEST_CASE("two-sample KS distance") {
  // Identical samples: distance zero.
  std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  CHECK(ks_two_sample(a, a) == 0.0);

  // Disjoint supports: distance one.
  std::vector<double> lo{0.0, 0.1, 0.2};
  std::vector<double> hi{5.0, 6.0, 7.0};
  CHECK(ks_two_sample(lo, hi) == doctest::Approx(1.0));

  // Same distribution: small distance at large n.
  RngStream rng(11, 0);
  std::vector<double> x(20000), y(20000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  CHECK(ks_two_sample(x, y) < 0.02);

  // Shifted distribution: detectable distance.
  for (auto& v : y) v += 0.5;
  CHECK(ks_two_sample(x, y) > 0.15);
}

TEST_CASE("KS distance against a Gaussian reference") {
  RngStream rng(13, 1);
  std::vector<double> x(30000);
  for (auto& v : x) v = 2.0 + 3.0 * rng.normal();
  CHECK(ks_vs_gaussian(x, 2.0, 3.0) < 0.01);
  // Wrong scale by 2x is far outside that band.
  CHECK(ks_vs_gaussian(x, 2.0, 6.0) > 0.05);
  // Uniform data against a Gaussian reference is far off as well.
  std::vector<double> u(30000);
  for (auto& v : u) v = rng.uniform();
  CHECK(ks_vs_gaussian(u, 0.5, std::sqrt(1.0 / 12.0)) > 0.05);
}
