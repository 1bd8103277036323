// SPDX-License-Identifier: MIT
//
// Synthetic back-to-back calibration traces and the estimators used on them:
// carrier-offset recovery by phase unwrapping + least squares, residual RMS
// phase noise, lag-resolved phase-increment statistics, m-sequence quality
// metrics, the narrowband (static-phase-within-window) check, and the
// moment-matched AWGN reference channel used to quantify how badly phase
// errors inflate measured mutual information.
//
// A trace is a long run of L snapshots; snapshot l starts at l * t_mimo and
// measures every antenna pair once at the plan's within-snapshot times.  The
// recorded complex gain of slot k in snapshot l is exp(j(delta_omega * t +
// phi)) — unit amplitude, so all information is in the phase.

#pragma once

#include <cstdint>
#include <vector>

#include "sounder/channel.hpp"
#include "sounder/linalg.hpp"
#include "sounder/sounding.hpp"

namespace sounder {

/// Synthetic calibration recording (times in seconds, unit-amplitude gains).
struct CalibrationTrace {
  SoundingPlan plan;
  double t_mimo = 0.0;          // snapshot period
  Eigen::Index snapshots = 0;   // L
  std::vector<double> t;        // absolute time, index l * K + k
  std::vector<cxd> gain;        // measured complex gain per slot
};

/// Generate a trace under the phase model.  Correlation across samples:
///  - fully_uncorrelated: IID per slot;
///  - fully_correlated: one common value per snapshot, independent between
///    snapshots (snapshot-to-snapshot offsets are arbitrary);
///  - exponential: a single stationary first-order chain over raw timestamps
///    covering the entire trace, phi_next = r phi + sqrt(1-r^2) sigma w with
///    r = exp(-dt / tau_c) — exact for this kernel, O(1) per sample;
///  - explicit_cov: per-snapshot draws with the plan-sized covariance,
///    independent between snapshots.
/// Requires t_mimo > span of the plan's within-snapshot times.
CalibrationTrace synth_trace(const SoundingPlan& plan,
                             const PhaseErrorModel& model,
                             Eigen::Index snapshots, double t_mimo,
                             std::uint64_t seed);

/// Carrier-offset estimate by sequential unwrapping and least squares.
struct LinearPhaseFit {
  double delta_omega_hat = 0.0;   // rad/s
  double intercept = 0.0;         // rad at t = 0
  std::vector<double> unwrapped;  // unwrapped phase per sample
  std::vector<double> residuals;  // unwrapped - fitted ramp
  // Samples whose unwrap bridged an inter-snapshot gap (ramp extrapolation
  // over a long interval, where jumps beyond 2 pi are possible).
  std::vector<std::size_t> gap_samples;
};

/// Two-stage unwrap (second pass re-unwraps against the first-pass slope,
/// which bridges the inter-snapshot gaps) followed by an exact LS line fit.
LinearPhaseFit remove_linear_phase(const CalibrationTrace& trace);

/// RMS of the detrended phase in degrees: per-snapshot mean-removed sample
/// standard deviation, averaged over snapshots.
double rms_phase_degrees(const CalibrationTrace& trace,
                         const std::vector<double>& residuals);

/// Residuals with the mean of each snapshot subtracted — the normalization
/// used before comparing their distribution against a Gaussian reference.
std::vector<double> snapshot_mean_removed(const CalibrationTrace& trace,
                                          const std::vector<double>& residuals);

/// Kolmogorov statistic (max CDF deviation) between mean-removed residuals
/// (radians in, compared in degrees) and a zero-mean Gaussian with standard
/// deviation sigma_ref_deg.  Requires >= 1000 samples.
double gaussian_cdf_deviation(const std::vector<double>& residuals,
                              double sigma_ref_deg);

/// Root mean square phase increment per within-snapshot lag, in degrees,
/// scaled so that uncorrelated noise of std sigma reads sigma at every lag:
/// level(n) = sqrt(E{(phi_k - phi_{k+n})^2} / 2).  Only pairs whose time
/// separation equals n times the plan's base slot spacing contribute (the
/// increments straddling a longer switching gap measure a different interval
/// and are excluded); lags with no such pair are omitted from the report.
struct PhaseIncrementReport {
  std::vector<int> lags;          // subset of 1..max_lag with valid pairs
  std::vector<double> level_deg;
  std::vector<Eigen::Index> pair_count;
};
PhaseIncrementReport phase_increment_levels(const CalibrationTrace& trace,
                                            const std::vector<double>& residuals,
                                            int max_lag);

/// Binary maximal-length sequence as bipolar chips (+1/-1), length
/// 2^degree - 1.  Default feedback taps exist for degrees 2..18; custom taps
/// are verified to reach full period (sequence_error otherwise).
struct MSequence {
  int degree = 0;
  std::vector<int> taps;      // polynomial exponents, descending, degree first
  std::vector<double> chips;  // +1/-1
};
MSequence make_mseq(int degree, const std::vector<int>& taps = {});

/// Circular autocorrelation r(i) = sum_n x_n x_{(n+i) mod N}, i = 0..N-1.
/// Exactly N at lag 0 and -1 elsewhere for a bipolar m-sequence.
std::vector<double> circular_autocorrelation(const std::vector<double>& x);

/// Correlation-sidelobe SNRs of one phase-corrupted sweep in dB:
/// 20 log10(|c(0)| / |c(i)|) for i = 1..N-2, where
/// c(i) = sum_n x_n e^{j phi_n} x_{(n+i) mod N}.  With zero phases every
/// value equals 20 log10 N.
std::vector<double> sequence_snr_db(const MSequence& seq,
                                    const std::vector<double>& chip_phases);

/// 20 log10(N): the noiseless sidelobe SNR of a length-N m-sequence.
double noiseless_sequence_snr_db(int n_chips);

/// Deviation of a phase window from a static rotation:
/// 1 - |sum_n w_n e^{j phi_n}| / sum_n w_n.  Zero for constant phase, grows
/// with in-window phase spread (~ sigma^2/2 for small Gaussian spread).
/// `weights` is the sampled averaging window (positive); empty = uniform.
double narrowband_deviation(const std::vector<double>& phases,
                            const std::vector<double>& weights = {});

/// Moment-matched AWGN reference: vec(H) ~ CN(alpha 1, noise_var I).
ChannelModel awgn_reference_model(cxd alpha, double noise_var,
                                  Eigen::Index m_r, Eigen::Index m_t);

/// Compare the MI of the per-snapshot effective channels embedded in a trace
/// against the moment-matched AWGN reference at the same SNR.
struct CalibrationMiReport {
  double mi_effective_mean = 0.0;   // mean over snapshots
  double mi_reference_mean = 0.0;   // Monte-Carlo mean over ref_trials
  double overestimation_ratio = 0.0;  // effective / reference
  double gain_effective = 0.0;        // mean power-doubling gain, effective
  double gain_reference = 0.0;        // same for the reference model
  cxd alpha = 0.0;                  // matched mean gain
  double noise_var = 0.0;           // matched residual variance
};
CalibrationMiReport calibration_mi_comparison(const CalibrationTrace& trace,
                                              double rho,
                                              Eigen::Index ref_trials,
                                              std::uint64_t seed,
                                              int threads = 1);

}  // namespace sounder
