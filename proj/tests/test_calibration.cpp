// SPDX-License-Identifier: MIT
//
// Calibration-trace synthesis and the estimators that run on it: carrier
// recovery, RMS phase noise, lag-resolved increment levels, m-sequence
// quality metrics, the narrowband check, and the AWGN-reference MI
// comparison.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sounder/calibration.hpp"
#include "sounder/channel.hpp"
#include "sounder/errors.hpp"
#include "sounder/rng.hpp"
#include "sounder/sounding.hpp"
#include "sounder/util.hpp"

using namespace sounder;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseErrorModel exponential_model(double rms_deg, double tau_c,
                                  double delta_omega) {
  PhaseErrorModel m;
  m.sigma_phi2 = rms_degrees_to_variance(rms_deg);
  m.correlation = PhaseCorrelation::exponential;
  m.tau_c = tau_c;
  m.delta_omega = delta_omega;
  return m;
}

}  // namespace

TEST_CASE("m-sequences reach full period for every default degree") {
  for (int degree = 2; degree <= 18; ++degree) {
    const MSequence seq = make_mseq(degree);
    CHECK(seq.degree == degree);
    CHECK(static_cast<int>(seq.chips.size()) == (1 << degree) - 1);
    for (double c : seq.chips) CHECK(std::abs(c) == 1.0);
  }
}

TEST_CASE("m-sequence circular autocorrelation is two-valued") {
  for (int degree : {3, 5, 9}) {
    const MSequence seq = make_mseq(degree);
    const std::vector<double> r = circular_autocorrelation(seq.chips);
    const double n = static_cast<double>(seq.chips.size());
    CHECK(r[0] == n);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] == -1.0);
  }
}

TEST_CASE("non-primitive feedback taps are rejected") {
  // x^4 + x^2 + 1 = (x^2 + x + 1)^2 cannot reach period 15.
  CHECK_THROWS_AS(make_mseq(4, {4, 2}), sequence_error);
  CHECK_THROWS_AS(make_mseq(1), domain_error);
  CHECK_THROWS_AS(make_mseq(19), domain_error);
}

TEST_CASE("noiseless sidelobe snr is 20 log10 of the length") {
  CHECK(noiseless_sequence_snr_db(511) ==
        doctest::Approx(20.0 * std::log10(511.0)).epsilon(1e-14));
  CHECK(noiseless_sequence_snr_db(31) ==
        doctest::Approx(29.827233876685455).epsilon(1e-12));
  CHECK(noiseless_sequence_snr_db(511) ==
        doctest::Approx(54.16841800269425).epsilon(1e-12));
}

TEST_CASE("sequence snr equals the noiseless value for rigid phases") {
  const MSequence seq = make_mseq(5);  // N = 31
  const std::size_t n = seq.chips.size();
  const double ref = noiseless_sequence_snr_db(static_cast<int>(n));

  const std::vector<double> zero(n, 0.0);
  for (double v : sequence_snr_db(seq, zero))
    CHECK(v == doctest::Approx(ref).epsilon(1e-9));

  // A common rotation of every chip factors out of all correlations.
  const std::vector<double> constant(n, 1.234);
  const std::vector<double> snr = sequence_snr_db(seq, constant);
  CHECK(snr.size() == n - 2);
  for (double v : snr) CHECK(v == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("phase noise lowers the expected sidelobe snr") {
  // Per-chip first-order Gauss-Markov phases, 3.9 degrees RMS, coherence
  // 100 chips, on the length-511 sequence: the mean sidelobe SNR drops a
  // few dB below the noiseless 54.2 dB but stays above the IID-phase level,
  // and the deep quantiles sit well below the mean.
  const MSequence seq = make_mseq(9);  // N = 511
  const double sigma = std::sqrt(rms_degrees_to_variance(3.9));
  const double r = std::exp(-1.0 / 100.0);
  const double fresh = std::sqrt(1.0 - r * r) * sigma;

  RngStream rng(61, 0);
  std::vector<double> all;
  double minimum = 1e9;
  for (int draw = 0; draw < 30; ++draw) {
    std::vector<double> phases(seq.chips.size());
    phases[0] = sigma * rng.normal();
    for (std::size_t i = 1; i < phases.size(); ++i)
      phases[i] = r * phases[i - 1] + fresh * rng.normal();
    for (double v : sequence_snr_db(seq, phases)) {
      all.push_back(v);
      minimum = std::min(minimum, v);
    }
  }
  const MeanVar mv = mean_variance(all);
  CHECK(mv.mean > 49.0);
  CHECK(mv.mean < 54.2);
  CHECK(minimum < mv.mean - 5.0);
}

TEST_CASE("carrier offset recovery from a synthetic trace") {
  const SoundingPlan plan = regular_plan(4, 4, 0.93e-6, 5.0 * 0.93e-6);
  const double delta_omega = 2.0 * kPi * 50.0;
  const PhaseErrorModel model = exponential_model(3.9, 0.2e-6, delta_omega);
  const CalibrationTrace trace = synth_trace(plan, model, 200, 1e-3, 88);

  REQUIRE(trace.t.size() == 200 * 16);
  REQUIRE(trace.gain.size() == trace.t.size());
  for (const cxd& g : trace.gain)
    CHECK(std::abs(std::abs(g) - 1.0) < 1e-12);

  const LinearPhaseFit fit = remove_linear_phase(trace);
  CHECK(std::abs(fit.delta_omega_hat - delta_omega) <
        0.01 * std::abs(delta_omega));
  CHECK(fit.residuals.size() == trace.t.size());

  const double rms = rms_phase_degrees(trace, fit.residuals);
  CHECK(rms == doctest::Approx(3.9).epsilon(0.15));

  const std::vector<double> centered =
      snapshot_mean_removed(trace, fit.residuals);
  CHECK(gaussian_cdf_deviation(centered, rms) < 0.05);
}

TEST_CASE("noise-free trace recovers the ramp exactly") {
  const SoundingPlan plan = regular_plan(3, 3, 1e-6, 4e-6);
  PhaseErrorModel model;
  model.sigma_phi2 = 0.0;
  model.delta_omega = 2.0 * kPi * 0.25;
  const CalibrationTrace trace = synth_trace(plan, model, 50, 5e-4, 7);
  const LinearPhaseFit fit = remove_linear_phase(trace);
  CHECK(std::abs(fit.delta_omega_hat - model.delta_omega) < 1e-6);
  for (double res : fit.residuals) CHECK(std::abs(res) < 1e-8);
  CHECK(rms_phase_degrees(trace, fit.residuals) < 1e-6);
}

TEST_CASE("increment levels read the phase correlation structure") {
  const SoundingPlan plan = regular_plan(4, 4, 1e-6, 5e-6);
  const double t_mimo = 1e-3;
  const Eigen::Index snapshots = 400;
  const int max_lag = 6;

  // IID phases: every lag reads the marginal sigma.
  PhaseErrorModel uncorr;
  uncorr.sigma_phi2 = rms_degrees_to_variance(3.9);
  uncorr.correlation = PhaseCorrelation::fully_uncorrelated;
  {
    const CalibrationTrace trace = synth_trace(plan, uncorr, snapshots, t_mimo, 21);
    const LinearPhaseFit fit = remove_linear_phase(trace);
    const PhaseIncrementReport rep =
        phase_increment_levels(trace, fit.residuals, max_lag);
    REQUIRE(!rep.lags.empty());
    for (std::size_t i = 0; i < rep.lags.size(); ++i) {
      CHECK(rep.pair_count[i] > 100);
      CHECK(rep.level_deg[i] == doctest::Approx(3.9).epsilon(0.12));
    }
  }

  // One common phase per snapshot: increments vanish.
  PhaseErrorModel corr = uncorr;
  corr.correlation = PhaseCorrelation::fully_correlated;
  {
    const CalibrationTrace trace = synth_trace(plan, corr, snapshots, t_mimo, 22);
    const LinearPhaseFit fit = remove_linear_phase(trace);
    const PhaseIncrementReport rep =
        phase_increment_levels(trace, fit.residuals, max_lag);
    for (double lvl : rep.level_deg) CHECK(lvl < 0.3);
  }

  // Exponential correlation: levels rise with lag toward the marginal.
  const PhaseErrorModel expo = exponential_model(3.9, 20e-6, 0.0);
  {
    const CalibrationTrace trace = synth_trace(plan, expo, snapshots, t_mimo, 23);
    const LinearPhaseFit fit = remove_linear_phase(trace);
    const PhaseIncrementReport rep =
        phase_increment_levels(trace, fit.residuals, max_lag);
    REQUIRE(rep.lags.size() >= 3);
    CHECK(rep.level_deg.front() < rep.level_deg.back());
    for (std::size_t i = 0; i + 1 < rep.level_deg.size(); ++i)
      CHECK(rep.level_deg[i] < rep.level_deg[i + 1] + 0.25);
    // Predicted level at lag 1: sigma sqrt(1 - exp(-dt/tau_c)).
    const double predicted =
        3.9 * std::sqrt(1.0 - std::exp(-1e-6 / 20e-6));
    CHECK(rep.level_deg.front() == doctest::Approx(predicted).epsilon(0.15));
  }
}

TEST_CASE("gaussian cdf deviation separates matched from mismatched data") {
  RngStream rng(62, 0);
  const double sigma_deg = 4.0;
  const double sigma_rad = sigma_deg * kPi / 180.0;
  std::vector<double> matched(30000);
  for (double& v : matched) v = sigma_rad * rng.normal();
  CHECK(gaussian_cdf_deviation(matched, sigma_deg) < 0.01);
  CHECK(gaussian_cdf_deviation(matched, 2.0 * sigma_deg) > 0.05);

  std::vector<double> uniform(30000);
  for (double& v : uniform) v = sigma_rad * (2.0 * rng.uniform() - 1.0);
  CHECK(gaussian_cdf_deviation(uniform, sigma_deg) > 0.05);

  const std::vector<double> tiny(999, 0.0);
  CHECK_THROWS_AS(gaussian_cdf_deviation(tiny, 1.0), statistics_error);
}

TEST_CASE("narrowband deviation") {
  const std::vector<double> constant(64, 0.7);
  CHECK(narrowband_deviation(constant) < 1e-15);

  // Small Gaussian spread: deviation ~ sigma^2 / 2.
  RngStream rng(63, 0);
  std::vector<double> spread(4000);
  for (double& v : spread) v = 0.1 * rng.normal();
  CHECK(narrowband_deviation(spread) == doctest::Approx(0.005).epsilon(0.4));

  // Uniform weights equal the unweighted form; hand-computed weighted case.
  const std::vector<double> p{0.0, kPi / 2.0, kPi};
  const std::vector<double> ones(3, 1.0);
  CHECK(narrowband_deviation(p) ==
        doctest::Approx(narrowband_deviation(p, ones)).epsilon(1e-14));
  const std::vector<double> w{1.0, 2.0, 1.0};
  // sum w e^{j phi} = 1 + 2j - 1 = 2j, sum w = 4 -> 1 - 2/4 = 0.5.
  CHECK(narrowband_deviation(p, w) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("awgn reference model is a white gaussian around a common mean") {
  const cxd alpha(0.8, -0.3);
  const ChannelModel ref = awgn_reference_model(alpha, 0.04, 3, 2);
  CHECK(ref.m_r == 3);
  CHECK(ref.m_t == 2);
  REQUIRE(ref.mean_vec.size() == 6);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(ref.mean_vec(i) == alpha);
  CHECK((ref.cov - 0.04 * CMat::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("calibration mi comparison is deterministic and self-consistent") {
  const SoundingPlan plan = regular_plan(3, 3, 1e-6, 4e-6);
  const PhaseErrorModel model = exponential_model(3.9, 30e-6, 2.0 * kPi * 0.3);
  const CalibrationTrace trace = synth_trace(plan, model, 60, 5e-4, 99);

  const CalibrationMiReport a = calibration_mi_comparison(trace, 100.0, 300, 5, 1);
  const CalibrationMiReport b = calibration_mi_comparison(trace, 100.0, 300, 5, 4);
  CHECK(a.mi_effective_mean == b.mi_effective_mean);
  CHECK(a.mi_reference_mean == b.mi_reference_mean);
  CHECK(a.overestimation_ratio == b.overestimation_ratio);

  CHECK(a.overestimation_ratio ==
        doctest::Approx(a.mi_effective_mean / a.mi_reference_mean)
            .epsilon(1e-12));
  CHECK(a.mi_effective_mean > 0.0);
  CHECK(a.mi_reference_mean > 0.0);
  CHECK(a.gain_effective > 0.0);
  CHECK(a.gain_reference > 0.0);
  CHECK(std::abs(a.alpha) <= 1.0 + 1e-12);
  CHECK(a.noise_var >= 0.0);
}
