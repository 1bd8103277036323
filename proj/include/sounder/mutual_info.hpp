// SPDX-License-Identifier: MIT
//
// Mutual information of a MIMO channel under an isotropic input, and the
// Monte-Carlo driver that distributes effective-channel draws over threads
// with byte-identical results for any thread count.
//
// I(H, rho) = log2 det(I + (rho / M_T) H H^H) bits, with rho the linear SNR
// and M_T = H.cols().  The low-SNR expansion and the incremental
// "escalation gain" I(rho) - I(rho/2) (bits gained by doubling power) are
// provided as diagnostics of multiplexing behavior.

#pragma once

#include <cstdint>
#include <vector>

#include "sounder/channel.hpp"
#include "sounder/linalg.hpp"
#include "sounder/sounding.hpp"

namespace sounder {

/// log2 det(I + (rho / M_T) H H^H) in bits.
double mutual_information(const CMat& h, double rho);

/// Low-SNR approximation log2(1 + (rho / M_T) ||H||_F^2).
double low_snr_mi(const CMat& h, double rho);

/// Bits gained by doubling transmit power: I(rho) - I(rho/2).  Approaches
/// the number of effective spatial degrees of freedom at high SNR.
double power_doubling_gain(const CMat& h, double rho);

/// Apply a one-sided switching phase vector: receive side gives
/// diag(e^{j phases}) H, transmit side H diag(e^{j phases}).
CMat one_sided_effective(const CMat& h, const RVec& phases,
                         CorrelationSide side);

/// Monte-Carlo mutual-information statistics.
struct MIStats {
  std::vector<double> samples;  // one MI per trial, trial order
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se_mean = 0.0;   // sqrt(variance / trials)
};

/// dB -> linear SNR.
double db_to_linear(double snr_db);

/// Monte-Carlo MI of the effective channel: trial i uses RngStream(seed,
/// stream_base + i), drawing the channel first and the phase sample second.
/// Requires trials >= 100.  Results are independent of `threads`.
MIStats mc_mi(const ChannelModel& channel, const SoundingPlan& plan,
              const PhaseErrorModel& phase, double rho, Eigen::Index trials,
              std::uint64_t seed, ThetaMode mode = ThetaMode::exact,
              int threads = 1, std::uint64_t stream_base = 0);

/// Same driver without any phase perturbation (physical-channel baseline);
/// uses the identical channel streams, so paired comparisons are low-noise.
MIStats mc_mi_physical(const ChannelModel& channel, double rho,
                       Eigen::Index trials, std::uint64_t seed,
                       int threads = 1, std::uint64_t stream_base = 0);

}  // namespace sounder
