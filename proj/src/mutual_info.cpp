// SPDX-License-Identifier: MIT

#include "sounder/mutual_info.hpp"

#include <cmath>
#include <string>

#include "sounder/errors.hpp"
#include "sounder/util.hpp"

namespace sounder {

double mutual_information(const CMat& h, double rho) {
  return logdet_capacity_kernel(h, rho);
}

double low_snr_mi(const CMat& h, double rho) {
  detail::check_nonnegative(rho, "rho");
  if (h.size() == 0) {
    throw dimension_error("low_snr_mi: empty channel matrix");
  }
  return std::log2(1.0 + rho / static_cast<double>(h.cols()) *
                             h.squaredNorm());
}

double power_doubling_gain(const CMat& h, double rho) {
  return mutual_information(h, rho) - mutual_information(h, 0.5 * rho);
}

CMat one_sided_effective(const CMat& h, const RVec& phases,
                         CorrelationSide side) {
  const Eigen::Index expected =
      (side == CorrelationSide::receive) ? h.rows() : h.cols();
  if (phases.size() != expected) {
    throw dimension_error("one_sided_effective: " +
                          std::to_string(phases.size()) +
                          " phases for a side with " +
                          std::to_string(expected) + " antennas");
  }
  CVec d(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    d(i) = std::polar(1.0, phases(i));
  }
  if (side == CorrelationSide::receive) {
    return d.asDiagonal() * h;
  }
  return h * d.asDiagonal();
}

double db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

namespace {

MIStats finalize(std::vector<double> samples) {
  MIStats out;
  const MeanVar mv = mean_variance(samples);
  out.mean = mv.mean;
  out.variance = mv.variance;
  out.se_mean = std::sqrt(mv.variance / static_cast<double>(samples.size()));
  out.samples = std::move(samples);
  return out;
}

}  // namespace

MIStats mc_mi(const ChannelModel& channel, const SoundingPlan& plan,
              const PhaseErrorModel& phase, double rho, Eigen::Index trials,
              std::uint64_t seed, ThetaMode mode, int threads,
              std::uint64_t stream_base) {
  if (trials < 100) {
    throw statistics_error("mc_mi needs >= 100 trials, got " +
                           std::to_string(trials));
  }
  detail::check_nonnegative(rho, "rho");
  if (channel.m_r != plan.m_r || channel.m_t != plan.m_t) {
    throw dimension_error("mc_mi: channel is " + std::to_string(channel.m_r) +
                          "x" + std::to_string(channel.m_t) +
                          " but the plan covers " + std::to_string(plan.m_r) +
                          "x" + std::to_string(plan.m_t));
  }
  const EffectiveSampler sampler(plan, phase);
  std::vector<double> samples(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads,
               [&](std::size_t i) {
                 RngStream rng(seed, stream_base + i);
                 const CMat h = draw_channel(channel, rng);
                 const EffectiveChannelDraw d = sampler.draw(h, rng, mode);
                 samples[i] = mutual_information(d.h_hat, rho);
               });
  return finalize(std::move(samples));
}

MIStats mc_mi_physical(const ChannelModel& channel, double rho,
                       Eigen::Index trials, std::uint64_t seed, int threads,
                       std::uint64_t stream_base) {
  if (trials < 100) {
    throw statistics_error("mc_mi_physical needs >= 100 trials, got " +
                           std::to_string(trials));
  }
  detail::check_nonnegative(rho, "rho");
  std::vector<double> samples(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads,
               [&](std::size_t i) {
                 RngStream rng(seed, stream_base + i);
                 const CMat h = draw_channel(channel, rng);
                 samples[i] = mutual_information(h, rho);
               });
  return finalize(std::move(samples));
}

}  // namespace sounder
