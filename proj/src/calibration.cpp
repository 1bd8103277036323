// SPDX-License-Identifier: MIT

#include "sounder/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "sounder/errors.hpp"
#include "sounder/mutual_info.hpp"
#include "sounder/util.hpp"

namespace sounder {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace

CalibrationTrace synth_trace(const SoundingPlan& plan,
                             const PhaseErrorModel& model,
                             Eigen::Index snapshots, double t_mimo,
                             std::uint64_t seed) {
  validate_plan(plan);
  detail::check_positive_index(snapshots, "snapshots");
  detail::check_positive(t_mimo, "t_mimo");
  detail::check_nonnegative(model.sigma_phi2, "sigma_phi2");
  const double span = plan.times.back() - plan.times.front();
  if (!(t_mimo > span)) {
    throw domain_error("t_mimo must exceed the within-snapshot span " +
                       std::to_string(span));
  }
  const std::size_t k_slots = plan.times.size();
  const std::size_t total = static_cast<std::size_t>(snapshots) * k_slots;
  const double sigma = std::sqrt(model.sigma_phi2);

  CalibrationTrace trace;
  trace.plan = plan;
  trace.t_mimo = t_mimo;
  trace.snapshots = snapshots;
  trace.t.resize(total);
  trace.gain.resize(total);

  RngStream rng(seed, 0);

  // Absolute sample times.
  for (Eigen::Index l = 0; l < snapshots; ++l) {
    for (std::size_t k = 0; k < k_slots; ++k) {
      trace.t[static_cast<std::size_t>(l) * k_slots + k] =
          static_cast<double>(l) * t_mimo + plan.times[k];
    }
  }

  // Phase-noise samples.
  std::vector<double> phi(total, 0.0);
  switch (model.correlation) {
    case PhaseCorrelation::fully_uncorrelated:
      for (std::size_t i = 0; i < total; ++i) phi[i] = sigma * rng.normal();
      break;
    case PhaseCorrelation::fully_correlated:
      for (Eigen::Index l = 0; l < snapshots; ++l) {
        const double common = sigma * rng.normal();
        for (std::size_t k = 0; k < k_slots; ++k) {
          phi[static_cast<std::size_t>(l) * k_slots + k] = common;
        }
      }
      break;
    case PhaseCorrelation::exponential: {
      detail::check_positive(model.tau_c, "tau_c");
      // Stationary first-order chain over raw timestamps (gaps included).
      phi[0] = sigma * rng.normal();
      for (std::size_t i = 1; i < total; ++i) {
        const double dt = trace.t[i] - trace.t[i - 1];
        const double r = std::exp(-dt / model.tau_c);
        phi[i] = r * phi[i - 1] +
                 std::sqrt(std::max(0.0, 1.0 - r * r)) * sigma * rng.normal();
      }
      break;
    }
    case PhaseCorrelation::explicit_cov: {
      const RMat root = psd_sqrt_real(build_sigma_phi(plan, model), 1e-12);
      const Eigen::Index n = plan.m_r * plan.m_t;
      for (Eigen::Index l = 0; l < snapshots; ++l) {
        RVec z(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
        const RVec sample = root * z;  // vec order over (rx, tx)
        for (std::size_t k = 0; k < k_slots; ++k) {
          const auto [rx, tx] = plan.pattern[k];
          phi[static_cast<std::size_t>(l) * k_slots + k] =
              sample((tx - 1) * plan.m_r + (rx - 1));
        }
      }
      break;
    }
  }

  for (std::size_t i = 0; i < total; ++i) {
    trace.gain[i] = std::polar(1.0, model.delta_omega * trace.t[i] + phi[i]);
  }
  return trace;
}

LinearPhaseFit remove_linear_phase(const CalibrationTrace& trace) {
  const std::size_t n = trace.gain.size();
  if (n < 3) {
    throw estimation_error("remove_linear_phase: trace too short (" +
                           std::to_string(n) + " samples)");
  }

  const auto unwrap_with_slope = [&](double slope) {
    std::vector<double> out(n);
    out[0] = std::arg(trace.gain[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double predicted =
          out[i - 1] + slope * (trace.t[i] - trace.t[i - 1]);
      const double raw = std::arg(trace.gain[i]);
      // Choose the 2 pi multiple closest to the prediction.
      out[i] = predicted + wrap_angle(raw - predicted);
    }
    return out;
  };

  const auto fit_line = [&](const std::vector<double>& y) {
    // LS fit y ~ a + b t with centered time for conditioning.
    const double t_mean = pairwise_sum(trace.t) / static_cast<double>(n);
    const double y_mean = pairwise_sum(y) / static_cast<double>(n);
    const double stt = pairwise_sum(n, [&](std::size_t i) {
      const double dt = trace.t[i] - t_mean;
      return dt * dt;
    });
    const double sty = pairwise_sum(n, [&](std::size_t i) {
      return (trace.t[i] - t_mean) * (y[i] - y_mean);
    });
    if (!(stt > 0.0)) {
      throw estimation_error("remove_linear_phase: degenerate time axis");
    }
    const double slope = sty / stt;
    const double intercept = y_mean - slope * t_mean;
    return std::pair<double, double>(slope, intercept);
  };

  // Stage 1: unwrap assuming no ramp (gap advances must be < pi; that holds
  // for any plausible residual oscillator offset over a snapshot period).
  std::vector<double> unwrapped = unwrap_with_slope(0.0);
  const auto [slope1, intercept1] = fit_line(unwrapped);
  // Stage 2: re-unwrap against the estimated ramp — this bridges the long
  // inter-snapshot gaps, where the ramp may advance by more than 2 pi — and
  // refit.
  unwrapped = unwrap_with_slope(slope1);
  const auto [slope2, intercept2] = fit_line(unwrapped);

  LinearPhaseFit fit;
  fit.delta_omega_hat = slope2;
  fit.intercept = intercept2;
  fit.unwrapped = std::move(unwrapped);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] =
        fit.unwrapped[i] - (intercept2 + slope2 * trace.t[i]);
  }
  const std::size_t k_slots = trace.plan.times.size();
  for (std::size_t i = k_slots; i < n; i += k_slots) {
    fit.gap_samples.push_back(i);
  }
  return fit;
}

double rms_phase_degrees(const CalibrationTrace& trace,
                         const std::vector<double>& residuals) {
  const std::size_t k_slots = trace.plan.times.size();
  const std::size_t expected =
      static_cast<std::size_t>(trace.snapshots) * k_slots;
  if (residuals.size() != expected) {
    throw dimension_error("rms_phase_degrees: residual count " +
                          std::to_string(residuals.size()) +
                          " does not match the trace (" +
                          std::to_string(expected) + ")");
  }
  if (k_slots < 2) {
    throw statistics_error("rms_phase_degrees: need >= 2 slots per snapshot");
  }
  std::vector<double> per_snapshot(static_cast<std::size_t>(trace.snapshots));
  for (Eigen::Index l = 0; l < trace.snapshots; ++l) {
    const double* block = residuals.data() + static_cast<std::size_t>(l) * k_slots;
    const double mean =
        pairwise_sum(block, k_slots) / static_cast<double>(k_slots);
    const double ss = pairwise_sum(k_slots, [&](std::size_t k) {
      const double d = block[k] - mean;
      return d * d;
    });
    per_snapshot[static_cast<std::size_t>(l)] =
        std::sqrt(ss / static_cast<double>(k_slots - 1));
  }
  const double mean_std =
      pairwise_sum(per_snapshot) / static_cast<double>(trace.snapshots);
  return mean_std * 180.0 / std::numbers::pi;
}

std::vector<double> snapshot_mean_removed(
    const CalibrationTrace& trace, const std::vector<double>& residuals) {
  const std::size_t k_slots = trace.plan.times.size();
  const std::size_t expected =
      static_cast<std::size_t>(trace.snapshots) * k_slots;
  if (residuals.size() != expected) {
    throw dimension_error("snapshot_mean_removed: residual count mismatch");
  }
  std::vector<double> out(expected);
  for (Eigen::Index l = 0; l < trace.snapshots; ++l) {
    const std::size_t base = static_cast<std::size_t>(l) * k_slots;
    const double mean = pairwise_sum(residuals.data() + base, k_slots) /
                        static_cast<double>(k_slots);
    for (std::size_t k = 0; k < k_slots; ++k) {
      out[base + k] = residuals[base + k] - mean;
    }
  }
  return out;
}

double gaussian_cdf_deviation(const std::vector<double>& residuals,
                              double sigma_ref_deg) {
  if (residuals.size() < 1000) {
    throw statistics_error("gaussian_cdf_deviation: need >= 1000 samples, got " +
                           std::to_string(residuals.size()));
  }
  detail::check_positive(sigma_ref_deg, "sigma_ref_deg");
  std::vector<double> deg(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    deg[i] = residuals[i] * 180.0 / std::numbers::pi;
  }
  return ks_vs_gaussian(std::move(deg), 0.0, sigma_ref_deg);
}

PhaseIncrementReport phase_increment_levels(
    const CalibrationTrace& trace, const std::vector<double>& residuals,
    int max_lag) {
  const std::size_t k_slots = trace.plan.times.size();
  const std::size_t expected =
      static_cast<std::size_t>(trace.snapshots) * k_slots;
  if (residuals.size() != expected) {
    throw dimension_error("phase_increment_levels: residual count mismatch");
  }
  if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= k_slots) {
    throw domain_error("phase_increment_levels: max_lag must be in [1, " +
                       std::to_string(k_slots - 1) + "]");
  }
  // Base slot spacing: the smallest within-snapshot step.  A pair at lag n
  // contributes only if its time separation equals n of these steps, so every
  // averaged increment measures the same physical interval.
  double t_r = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < k_slots; ++k) {
    t_r = std::min(t_r, trace.plan.times[k + 1] - trace.plan.times[k]);
  }
  PhaseIncrementReport rep;
  for (int lag = 1; lag <= max_lag; ++lag) {
    std::vector<std::size_t> starts;  // valid k within one snapshot
    for (std::size_t k = 0; k + static_cast<std::size_t>(lag) < k_slots; ++k) {
      const double dt =
          trace.plan.times[k + static_cast<std::size_t>(lag)] -
          trace.plan.times[k];
      if (std::abs(dt - static_cast<double>(lag) * t_r) <= 1e-6 * t_r) {
        starts.push_back(k);
      }
    }
    if (starts.empty()) continue;
    const std::size_t total_pairs =
        starts.size() * static_cast<std::size_t>(trace.snapshots);
    const double ss = pairwise_sum(total_pairs, [&](std::size_t p) {
      const std::size_t l = p / starts.size();
      const std::size_t k = starts[p % starts.size()];
      const std::size_t base = l * k_slots + k;
      const double d =
          residuals[base] - residuals[base + static_cast<std::size_t>(lag)];
      return d * d;
    });
    rep.lags.push_back(lag);
    rep.level_deg.push_back(
        std::sqrt(ss / (2.0 * static_cast<double>(total_pairs))) * 180.0 /
        std::numbers::pi);
    rep.pair_count.push_back(static_cast<Eigen::Index>(total_pairs));
  }
  return rep;
}

MSequence make_mseq(int degree, const std::vector<int>& taps) {
  static const std::map<int, std::vector<int>> kDefaultTaps = {
      {2, {2, 1}},   {3, {3, 2}},   {4, {4, 3}},    {5, {5, 2}},
      {6, {6, 5}},   {7, {7, 6}},   {8, {8, 6, 5, 4}}, {9, {9, 5}},
      {10, {10, 7}}, {11, {11, 9}}, {12, {12, 11, 10, 4}},
      {13, {13, 12, 11, 8}}, {14, {14, 13, 12, 2}}, {15, {15, 14}},
      {16, {16, 15, 13, 4}}, {17, {17, 14}}, {18, {18, 11}}};
  if (degree < 2 || degree > 18) {
    throw domain_error("make_mseq: degree must be in [2, 18], got " +
                       std::to_string(degree));
  }
  std::vector<int> use_taps = taps;
  if (use_taps.empty()) {
    use_taps = kDefaultTaps.at(degree);
  }
  for (int t : use_taps) {
    if (t < 1 || t > degree) {
      throw sequence_error("make_mseq: tap " + std::to_string(t) +
                           " outside [1, degree]");
    }
  }
  if (std::find(use_taps.begin(), use_taps.end(), degree) == use_taps.end()) {
    throw sequence_error("make_mseq: taps must include the degree itself");
  }

  const std::uint32_t n = (1u << degree) - 1u;
  // Fibonacci LFSR: state bits s_1..s_degree, feedback is the XOR of the
  // tapped bits, output is the last bit.
  std::uint32_t state = 1u;  // any nonzero seed
  const std::uint32_t seed = state;
  std::vector<double> chips;
  chips.reserve(n);
  std::uint32_t period = 0;
  do {
    const int out_bit = static_cast<int>(state & 1u);
    chips.push_back(out_bit ? -1.0 : 1.0);
    std::uint32_t fb = 0;
    for (int t : use_taps) {
      fb ^= (state >> (degree - t)) & 1u;
    }
    state = (state >> 1) | (fb << (degree - 1));
    ++period;
    if (period > n) break;
  } while (state != seed);
  if (period != n) {
    throw sequence_error("make_mseq: taps are not primitive (period " +
                         std::to_string(period) + " != " + std::to_string(n) +
                         ")");
  }

  MSequence seq;
  seq.degree = degree;
  seq.taps = use_taps;
  seq.chips = std::move(chips);
  return seq;
}

std::vector<double> circular_autocorrelation(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) {
    throw dimension_error("circular_autocorrelation: empty sequence");
  }
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += x[k] * x[(k + i) % n];
    }
    r[i] = acc;
  }
  return r;
}

std::vector<double> sequence_snr_db(const MSequence& seq,
                                    const std::vector<double>& chip_phases) {
  const std::size_t n = seq.chips.size();
  if (chip_phases.size() != n) {
    throw dimension_error("sequence_snr_db: " +
                          std::to_string(chip_phases.size()) +
                          " phases for " + std::to_string(n) + " chips");
  }
  std::vector<cxd> rotated(n);
  for (std::size_t k = 0; k < n; ++k) {
    rotated[k] = seq.chips[k] * std::polar(1.0, chip_phases[k]);
  }
  // c(i) = sum_k rotated_k * chip_{k+i}.
  std::vector<double> mags2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cxd acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += rotated[k] * seq.chips[(k + i) % n];
    }
    mags2[i] = std::norm(acc);
  }
  std::vector<double> snr_db(n - 2);
  for (std::size_t i = 1; i <= n - 2; ++i) {
    snr_db[i - 1] = 10.0 * std::log10(mags2[0] / mags2[i]);
  }
  return snr_db;
}

double noiseless_sequence_snr_db(int n_chips) {
  detail::check_positive(static_cast<double>(n_chips), "n_chips");
  return 20.0 * std::log10(static_cast<double>(n_chips));
}

double narrowband_deviation(const std::vector<double>& phases,
                            const std::vector<double>& weights) {
  if (phases.empty()) {
    throw dimension_error("narrowband_deviation: empty window");
  }
  const std::size_t n = phases.size();
  if (!weights.empty() && weights.size() != n) {
    throw dimension_error("narrowband_deviation: " +
                          std::to_string(weights.size()) + " weights for " +
                          std::to_string(n) + " phases");
  }
  const auto w = [&](std::size_t i) {
    return weights.empty() ? 1.0 : weights[i];
  };
  const double re = pairwise_sum(n, [&](std::size_t i) {
    return w(i) * std::cos(phases[i]);
  });
  const double im = pairwise_sum(n, [&](std::size_t i) {
    return w(i) * std::sin(phases[i]);
  });
  const double total = pairwise_sum(n, w);
  if (!(total > 0.0)) {
    throw domain_error("narrowband_deviation: window weights must sum > 0");
  }
  return 1.0 - std::hypot(re, im) / total;
}

ChannelModel awgn_reference_model(cxd alpha, double noise_var,
                                  Eigen::Index m_r, Eigen::Index m_t) {
  detail::check_nonnegative(noise_var, "noise_var");
  const Eigen::Index n = m_r * m_t;
  return synthetic_gaussian_channel(CVec::Constant(n, alpha),
                                    noise_var * CMat::Identity(n, n), m_r,
                                    m_t);
}

CalibrationMiReport calibration_mi_comparison(const CalibrationTrace& trace,
                                              double rho,
                                              Eigen::Index ref_trials,
                                              std::uint64_t seed,
                                              int threads) {
  detail::check_nonnegative(rho, "rho");
  if (ref_trials < 100) {
    throw statistics_error("calibration_mi_comparison: ref_trials >= 100");
  }
  const std::size_t k_slots = trace.plan.times.size();
  const std::size_t total = trace.gain.size();
  if (total != static_cast<std::size_t>(trace.snapshots) * k_slots) {
    throw dimension_error("calibration_mi_comparison: inconsistent trace");
  }

  // Per-snapshot effective channels: scatter slot gains onto the grid.
  const std::size_t l_count = static_cast<std::size_t>(trace.snapshots);
  std::vector<double> mi(l_count);
  std::vector<double> gain_step(l_count);
  parallel_for(l_count, threads, [&](std::size_t l) {
    CMat h = CMat::Zero(trace.plan.m_r, trace.plan.m_t);
    for (std::size_t k = 0; k < k_slots; ++k) {
      const auto [rx, tx] = trace.plan.pattern[k];
      h(rx - 1, tx - 1) = trace.gain[l * k_slots + k];
    }
    mi[l] = mutual_information(h, rho);
    gain_step[l] = power_doubling_gain(h, rho);
  });

  // Moment matching over all samples.
  const cxd alpha =
      cxd(pairwise_sum(total, [&](std::size_t i) { return trace.gain[i].real(); }),
          pairwise_sum(total, [&](std::size_t i) { return trace.gain[i].imag(); })) /
      static_cast<double>(total);
  const double noise_var = pairwise_sum(total, [&](std::size_t i) {
    return std::norm(trace.gain[i] - alpha);
  }) / static_cast<double>(total);

  const ChannelModel ref = awgn_reference_model(
      alpha, noise_var, trace.plan.m_r, trace.plan.m_t);
  std::vector<double> ref_mi(static_cast<std::size_t>(ref_trials));
  std::vector<double> ref_gain(static_cast<std::size_t>(ref_trials));
  // Reference trials live in their own stream block so they never overlap
  // the stream that generated the trace under the same seed.
  parallel_for(static_cast<std::size_t>(ref_trials), threads,
               [&](std::size_t i) {
                 RngStream rng(seed, (std::uint64_t{1} << 32) + i);
                 const CMat h = draw_channel(ref, rng);
                 ref_mi[i] = mutual_information(h, rho);
                 ref_gain[i] = power_doubling_gain(h, rho);
               });

  CalibrationMiReport rep;
  rep.mi_effective_mean = pairwise_sum(mi) / static_cast<double>(l_count);
  rep.mi_reference_mean =
      pairwise_sum(ref_mi) / static_cast<double>(ref_trials);
  rep.overestimation_ratio = rep.mi_effective_mean / rep.mi_reference_mean;
  rep.gain_effective = pairwise_sum(gain_step) / static_cast<double>(l_count);
  rep.gain_reference =
      pairwise_sum(ref_gain) / static_cast<double>(ref_trials);
  rep.alpha = alpha;
  rep.noise_var = noise_var;
  return rep;
}

}  // namespace sounder
