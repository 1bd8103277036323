// SPDX-License-Identifier: MIT
//
// Mutual-information kernel and Monte-Carlo driver tests: direct determinant
// cross-checks, invariances that switching cannot break, and stream-level
// reproducibility of the threaded sampler.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "sounder/channel.hpp"
#include "sounder/errors.hpp"
#include "sounder/linalg.hpp"
#include "sounder/mutual_info.hpp"
#include "sounder/rng.hpp"
#include "sounder/sounding.hpp"

using namespace sounder;

namespace {

CMat random_cmat(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  CMat out(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i)
      out(i, j) = cxd(rng.normal(), rng.normal());
  return out;
}

double direct_mi(const CMat& h, double rho) {
  const Eigen::Index m = h.rows();
  const CMat gram = CMat::Identity(m, m) +
                    (rho / static_cast<double>(h.cols())) * (h * h.adjoint());
  return std::log2(std::abs(gram.determinant()));
}

}  // namespace

TEST_CASE("mutual information matches the direct determinant") {
  RngStream rng(11, 0);
  const double rho = 31.622776601683793;  // 15 dB
  for (auto [r, c] : {std::pair<Eigen::Index, Eigen::Index>{2, 2},
                      {3, 6},
                      {6, 3},
                      {5, 5},
                      {1, 4},
                      {4, 1}}) {
    const CMat h = random_cmat(r, c, rng);
    const double mi = mutual_information(h, rho);
    CHECK(mi == doctest::Approx(direct_mi(h, rho)).epsilon(1e-9));
    // Both Gram orientations describe the same channel.
    const CMat gram_t = CMat::Identity(c, c) +
                        (rho / static_cast<double>(c)) * (h.adjoint() * h);
    CHECK(mi ==
          doctest::Approx(std::log2(std::abs(gram_t.determinant())))
              .epsilon(1e-9));
    CHECK(mutual_information(h, 0.0) == 0.0);
  }
}

TEST_CASE("rank-one closed form") {
  // All-ones 2x2: H H^H has eigenvalues {4, 0}, so I = log2(1 + 2 rho).
  const CMat h = CMat::Ones(2, 2);
  for (double rho : {0.1, 1.0, 10.0, 1000.0}) {
    CHECK(mutual_information(h, rho) ==
          doctest::Approx(std::log2(1.0 + 2.0 * rho)).epsilon(1e-12));
  }
}

TEST_CASE("low-snr expansion bounds and approaches the exact value") {
  RngStream rng(12, 0);
  const CMat h = random_cmat(3, 4, rng);
  const double f2 = h.squaredNorm();
  for (double rho : {1e-4, 1e-2, 1.0}) {
    const double approx = low_snr_mi(h, rho);
    CHECK(approx ==
          doctest::Approx(std::log2(1.0 + rho / 4.0 * f2)).epsilon(1e-12));
    // prod(1 + rho lambda_i) >= 1 + rho sum lambda_i for lambda_i >= 0.
    CHECK(mutual_information(h, rho) >= approx - 1e-12);
  }
  CHECK(mutual_information(h, 1e-5) ==
        doctest::Approx(low_snr_mi(h, 1e-5)).epsilon(1e-4));
}

TEST_CASE("power doubling gain counts spatial degrees of freedom") {
  const CMat ones = CMat::Ones(3, 3);
  CHECK(power_doubling_gain(ones, 1e7) == doctest::Approx(1.0).epsilon(1e-5));
  const CMat eye = CMat::Identity(4, 4);
  CHECK(power_doubling_gain(eye, 1e7) == doctest::Approx(4.0).epsilon(1e-5));
  // Definition check at moderate SNR.
  RngStream rng(13, 0);
  const CMat h = random_cmat(3, 5, rng);
  const double rho = 42.0;
  CHECK(power_doubling_gain(h, rho) ==
        doctest::Approx(mutual_information(h, rho) -
                        mutual_information(h, rho / 2.0))
            .epsilon(1e-12));
}

TEST_CASE("db to linear") {
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(db_to_linear(20.0) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(db_to_linear(-10.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(db_to_linear(3.0) == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-14));
}

TEST_CASE("one-sided switching phases never change mutual information") {
  RngStream rng(14, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const CMat h = random_cmat(4, 3, rng);
    RVec rx_phases(4), tx_phases(3);
    for (Eigen::Index i = 0; i < 4; ++i) rx_phases(i) = 7.0 * rng.uniform();
    for (Eigen::Index i = 0; i < 3; ++i) tx_phases(i) = 7.0 * rng.uniform();

    const CMat h_rx = one_sided_effective(h, rx_phases, CorrelationSide::receive);
    const CMat h_tx = one_sided_effective(h, tx_phases, CorrelationSide::transmit);

    // Structure: rows (receive) or columns (transmit) rotate as a whole.
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(std::abs(h_rx(i, j) -
                       std::exp(cxd(0.0, rx_phases(i))) * h(i, j)) < 1e-14);
        CHECK(std::abs(h_tx(i, j) -
                       std::exp(cxd(0.0, tx_phases(j))) * h(i, j)) < 1e-14);
      }

    const double mi = mutual_information(h, 25.0);
    CHECK(std::abs(mutual_information(h_rx, 25.0) - mi) < 1e-10 * std::abs(mi));
    CHECK(std::abs(mutual_information(h_tx, 25.0) - mi) < 1e-10 * std::abs(mi));
  }
  CHECK_THROWS_AS(
      one_sided_effective(CMat::Ones(2, 2), RVec::Zero(3),
                          CorrelationSide::receive),
      dimension_error);
}

TEST_CASE("separable carrier offset alone never changes mutual information") {
  // A regular switching pattern has separable slot times, so the ramp
  // exp(jM) factors into one-sided rotations; with zero phase noise the
  // effective channel must carry exactly the physical MI, draw by draw.
  const SoundingPlan plan = regular_plan(3, 4, 1.0, 5.0);
  PhaseErrorModel model;
  model.sigma_phi2 = 0.0;
  model.delta_omega = 3.7;
  const EffectiveSampler sampler(plan, model);

  RngStream rng(15, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const CMat h = random_cmat(3, 4, rng);
    const EffectiveChannelDraw d = sampler.draw(h, rng, ThetaMode::exact);
    const double mi = mutual_information(h, 12.0);
    CHECK(std::abs(mutual_information(d.h_hat, 12.0) - mi) < 1e-9);
    // Exact mode preserves every entry magnitude, hence the Frobenius norm.
    CHECK(d.h_hat.norm() == doctest::Approx(h.norm()).epsilon(1e-12));
  }
}

TEST_CASE("mc mi is thread-count invariant") {
  const ChannelModel channel = iid_rayleigh_channel(3, 3);
  const SoundingPlan plan = regular_plan(3, 3, 1.0, 3.0);
  PhaseErrorModel phase;
  phase.sigma_phi2 = rms_degrees_to_variance(7.0);
  phase.correlation = PhaseCorrelation::fully_uncorrelated;

  const MIStats a =
      mc_mi(channel, plan, phase, 100.0, 400, 99, ThetaMode::exact, 1, 5);
  const MIStats b =
      mc_mi(channel, plan, phase, 100.0, 400, 99, ThetaMode::exact, 4, 5);
  REQUIRE(a.samples.size() == 400);
  REQUIRE(b.samples.size() == 400);
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i] == b.samples[i]);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK(a.se_mean == b.se_mean);
}

TEST_CASE("mc mi trial streams follow the documented discipline") {
  // Trial i must use RngStream(seed, stream_base + i), drawing the channel
  // first and the phase sample second; replicate by hand and compare.
  const ChannelModel channel = iid_rayleigh_channel(2, 2);
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  PhaseErrorModel phase;
  phase.sigma_phi2 = 0.02;
  phase.correlation = PhaseCorrelation::exponential;
  phase.tau_c = 2.0;
  phase.delta_omega = 1.1;

  const std::uint64_t seed = 1234;
  const std::uint64_t base = 17;
  const double rho = 50.0;
  const MIStats stats =
      mc_mi(channel, plan, phase, rho, 120, seed, ThetaMode::exact, 3, base);

  const EffectiveSampler sampler(plan, phase);
  for (Eigen::Index i = 0; i < 120; ++i) {
    RngStream rng(seed, base + static_cast<std::uint64_t>(i));
    const CMat h = draw_channel(channel, rng);
    const EffectiveChannelDraw d = sampler.draw(h, rng, ThetaMode::exact);
    CHECK(stats.samples[static_cast<std::size_t>(i)] ==
          mutual_information(d.h_hat, rho));
  }
}

TEST_CASE("physical baseline pairs with the effective sampler") {
  // With zero phase noise and zero carrier offset the effective channel is
  // the physical one, and both drivers share channel streams sample by
  // sample.
  const ChannelModel channel = iid_rayleigh_channel(3, 2);
  const SoundingPlan plan = regular_plan(3, 2, 1.0, 3.0);
  PhaseErrorModel phase;  // all zeros

  const MIStats eff =
      mc_mi(channel, plan, phase, 10.0, 150, 7, ThetaMode::exact, 2, 3);
  const MIStats phys = mc_mi_physical(channel, 10.0, 150, 7, 2, 3);
  for (std::size_t i = 0; i < 150; ++i)
    CHECK(eff.samples[i] == doctest::Approx(phys.samples[i]).epsilon(1e-12));
}

TEST_CASE("mc mi summary statistics are consistent with the samples") {
  const ChannelModel channel = iid_rayleigh_channel(2, 2);
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  PhaseErrorModel phase;
  phase.sigma_phi2 = 0.01;
  const MIStats s =
      mc_mi(channel, plan, phase, 10.0, 500, 21, ThetaMode::linearized, 2, 0);
  double mean = 0.0;
  for (double v : s.samples) mean += v;
  mean /= 500.0;
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  var /= 499.0;
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s.variance == doctest::Approx(var).epsilon(1e-10));
  CHECK(s.se_mean == doctest::Approx(std::sqrt(var / 500.0)).epsilon(1e-10));
}

TEST_CASE("mc mi input guards") {
  const ChannelModel channel = iid_rayleigh_channel(2, 2);
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  const PhaseErrorModel phase;
  CHECK_THROWS_AS(mc_mi(channel, plan, phase, 1.0, 99, 0), statistics_error);
  CHECK_THROWS_AS(mc_mi_physical(channel, 1.0, 50, 0), statistics_error);
  const SoundingPlan wrong = regular_plan(3, 2, 1.0, 3.0);
  CHECK_THROWS_AS(mc_mi(channel, wrong, phase, 1.0, 200, 0), dimension_error);
}
