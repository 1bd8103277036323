// SPDX-License-Identifier: MIT
//
// Channel factories and samplers: spectra of the structured correlation /
// deterministic matrices, draw statistics, and validation guards.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sounder/channel.hpp"
#include "sounder/errors.hpp"
#include "sounder/linalg.hpp"
#include "sounder/rng.hpp"

using namespace sounder;

TEST_CASE("low-rank correlation spectra") {
  // Full rank: exactly the identity.
  const CMat full = make_lowrank_correlation(8, 8);
  CHECK((full - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

  // Rank one: the all-ones matrix (fully coherent).
  const CMat r1 = make_lowrank_correlation(8, 1);
  CHECK((r1 - CMat::Constant(8, 8, cxd(1, 0))).cwiseAbs().maxCoeff() <
        1e-12);

  // Intermediate rank: eigenvalues m/rank with multiplicity rank, trace m.
  const CMat r4 = make_lowrank_correlation(8, 4);
  const RVec ev = herm_eig(r4, /*clamp_psd=*/true).values;
  for (int i = 0; i < 4; ++i) {
    CHECK(ev(i) == doctest::Approx(2.0).epsilon(1e-10));
  }
  for (int i = 4; i < 8; ++i) {
    CHECK(std::abs(ev(i)) < 1e-10);
  }
  CHECK(r4.trace().real() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(std::abs(r4.trace().imag()) < 1e-12);

  // Unit diagonal for every rank (per-antenna power is preserved).
  for (int rank = 1; rank <= 8; ++rank) {
    const CMat r = make_lowrank_correlation(8, rank);
    for (int i = 0; i < 8; ++i) {
      CHECK(r(i, i).real() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(make_lowrank_correlation(4, 0), domain_error);
  CHECK_THROWS_AS(make_lowrank_correlation(4, 5), domain_error);
}

TEST_CASE("balanced rank-k deterministic channels") {
  // k = m: scaled unitary, H H^H = m I.
  const CMat u = make_balanced_rank_k(4, 4);
  CHECK((u * u.adjoint() - 4.0 * CMat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-10);

  // k = 1: the all-ones matrix.
  const CMat o = make_balanced_rank_k(4, 1);
  CHECK((o - CMat::Constant(4, 4, cxd(1, 0))).cwiseAbs().maxCoeff() < 1e-10);

  // General k: k equal nonzero squared singular values m^2/k, Frobenius m^2.
  for (int k = 1; k <= 4; ++k) {
    const CMat h = make_balanced_rank_k(4, k);
    CHECK(h.squaredNorm() == doctest::Approx(16.0).epsilon(1e-10));
    const RVec ev = gram_eigenvalues(h);
    for (int i = 0; i < k; ++i) {
      CHECK(ev(i) == doctest::Approx(16.0 / k).epsilon(1e-9));
    }
    for (int i = k; i < 4; ++i) {
      CHECK(std::abs(ev(i)) < 1e-9);
    }
  }
}

TEST_CASE("unit-modulus rank-one factors") {
  const auto [g0, h0] = make_unit_modulus_rank1(3, 5, nullptr);
  CHECK((g0 - CVec::Constant(3, cxd(1, 0))).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h0 - CVec::Constant(5, cxd(1, 0))).cwiseAbs().maxCoeff() == 0.0);

  RngStream rng(21, 0);
  const auto [g, h] = make_unit_modulus_rank1(3, 5, &rng);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(std::abs(std::abs(g(i)) - 1.0) < 1e-12);
  }
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(std::abs(std::abs(h(i)) - 1.0) < 1e-12);
  }
  const CMat hh = g * h.transpose();
  const RVec ev = gram_eigenvalues(hh);
  CHECK(ev(0) == doctest::Approx(15.0).epsilon(1e-10));  // m_r * m_t
  CHECK(std::abs(ev(1)) < 1e-9);
}

TEST_CASE("deterministic channels draw without randomness") {
  CVec g(2), h(3);
  g << cxd(1, 1), cxd(0, -2);
  h << cxd(2, 0), cxd(0, 1), cxd(-1, 1);
  const ChannelModel model = deterministic_rank1_channel(g, h);
  CHECK(model.m_r == 2);
  CHECK(model.m_t == 3);
  RngStream rng(5, 0);
  const std::uint64_t first = RngStream(5, 0).next_u64();
  const CMat a = draw_channel(model, rng);
  CHECK(rng.next_u64() == first);  // no words consumed
  CHECK((a - CMat(g * h.transpose())).cwiseAbs().maxCoeff() < 1e-15);

  const ChannelModel ones = all_ones_channel(3, 4);
  RngStream rng2(5, 1);
  const CMat b = draw_channel(ones, rng2);
  CHECK((b - CMat::Constant(3, 4, cxd(1, 0))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iid rayleigh draw statistics") {
  const ChannelModel model = iid_rayleigh_channel(2, 2);
  const std::size_t n = 50000;
  cxd mean = 0.0;
  double pow_sum = 0.0;
  double re_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(7, i);
    const CMat h = draw_channel(model, rng);
    mean += h.sum();
    pow_sum += h.squaredNorm();
    re_var += h(0, 0).real() * h(0, 0).real();
  }
  const double nd = static_cast<double>(n);
  CHECK(std::abs(mean) / (4.0 * nd) < 5.0 / std::sqrt(4.0 * nd));
  // E{||H||_F^2} = m_r * m_t = 4 (CN(0,1) entries).
  CHECK(pow_sum / nd == doctest::Approx(4.0).epsilon(0.02));
  // Real part has variance 1/2.
  CHECK(re_var / nd == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("receive-correlated rayleigh matches its target correlation") {
  const CMat r = make_lowrank_correlation(4, 2);
  const ChannelModel model =
      correlated_rayleigh_channel(r, CorrelationSide::receive, 4, 4);
  const std::size_t n = 30000;
  CMat acc = CMat::Zero(4, 4);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(8, i);
    const CMat h = draw_channel(model, rng);
    acc += h * h.adjoint();
  }
  // E{H H^H} = M_T * R.
  const CMat est = acc / (4.0 * static_cast<double>(n));
  CHECK((est - r).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("transmit-correlated rayleigh correlates columns") {
  const CMat r = make_lowrank_correlation(3, 1);  // fully coherent columns
  const ChannelModel model =
      correlated_rayleigh_channel(r, CorrelationSide::transmit, 2, 3);
  RngStream rng(9, 0);
  const CMat h = draw_channel(model, rng);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 3);
  // Rank-one transmit correlation makes all columns identical.
  CHECK((h.col(0) - h.col(1)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((h.col(0) - h.col(2)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ricean draws center on the mean") {
  CMat h_mean(2, 2);
  h_mean << cxd(1, 0), cxd(0, 1), cxd(-1, 0), cxd(0, -1);
  const CMat cov = 0.25 * CMat::Identity(4, 4);
  const ChannelModel model = ricean_channel(h_mean, cov);
  const std::size_t n = 40000;
  CMat acc = CMat::Zero(2, 2);
  double dev2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(10, i);
    const CMat h = draw_channel(model, rng);
    acc += h;
    dev2 += (h - h_mean).squaredNorm();
  }
  const double nd = static_cast<double>(n);
  CHECK((acc / nd - h_mean).cwiseAbs().maxCoeff() < 0.02);
  // Total fluctuation power = trace(cov) = 1.
  CHECK(dev2 / nd == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("synthetic gaussian reproduces mean and covariance diagonal") {
  CVec mean_vec(4);
  mean_vec << cxd(1, 0), cxd(2, 0), cxd(0, -1), cxd(0.5, 0.5);
  CMat cov = CMat::Zero(4, 4);
  cov.diagonal() << 0.1, 0.4, 0.9, 1.6;
  const ChannelModel model = synthetic_gaussian_channel(mean_vec, cov, 2, 2);
  const std::size_t n = 60000;
  CVec acc = CVec::Zero(4);
  RVec pow_acc = RVec::Zero(4);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(11, i);
    const CVec v = vec(draw_channel(model, rng));
    acc += v;
    for (int k = 0; k < 4; ++k) {
      pow_acc(k) += std::norm(v(k) - mean_vec(k));
    }
  }
  const double nd = static_cast<double>(n);
  CHECK((acc / nd - mean_vec).cwiseAbs().maxCoeff() < 0.03);
  for (int k = 0; k < 4; ++k) {
    CHECK(pow_acc(k) / nd ==
          doctest::Approx(cov(k, k).real()).epsilon(0.06));
  }
}

TEST_CASE("factory validation guards") {
  CHECK_THROWS_AS(iid_rayleigh_channel(0, 3), dimension_error);
  CHECK_THROWS_AS(all_ones_channel(2, -1), dimension_error);
  // Non-PSD correlation is rejected.
  CMat bad = CMat::Identity(3, 3);
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(
      correlated_rayleigh_channel(bad, CorrelationSide::receive, 3, 3),
      model_error);
  // Wrong-side dimension is rejected.
  CHECK_THROWS_AS(correlated_rayleigh_channel(CMat::Identity(3, 3),
                                              CorrelationSide::receive, 4, 3),
                  model_error);
  // Covariance size must match m_r * m_t.
  CHECK_THROWS_AS(ricean_channel(CMat::Identity(2, 2), CMat::Identity(3, 3)),
                  model_error);
}
