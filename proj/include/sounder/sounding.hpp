// SPDX-License-Identifier: MIT
//
// Time-division switched sounding: switching plans over the antenna-pair grid,
// per-pair measurement times, frequency-offset phase ramps, phase-error models
// with several correlation structures, and the effective-channel sampler that
// applies the resulting entrywise phase perturbation to a channel realization.
//
// A plan visits every (receive, transmit) antenna pair exactly once; slot k of
// the plan measures pair (rx[k], tx[k]) at time t[k].  Matrices indexed by
// antenna pair use vec (column-major) ordering throughout.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sounder/linalg.hpp"
#include "sounder/rng.hpp"

namespace sounder {

/// Switching plan: ordered antenna pairs (1-based) with strictly increasing
/// measurement times.  Use validate_plan or the factory functions.
struct SoundingPlan {
  Eigen::Index m_r = 0;
  Eigen::Index m_t = 0;
  std::vector<std::pair<int, int>> pattern;  // (rx, tx), 1-based, each pair once
  std::vector<double> times;                 // strictly increasing, seconds
};

/// Throws validation_error unless the plan covers every pair exactly once
/// with strictly increasing, finite times.
void validate_plan(const SoundingPlan& plan);

/// Receive-major raster: slot k measures rx = (k mod m_r) + 1,
/// tx = (k div m_r) + 1 at time k_r * t_r + k_t * t_t with k_r = rx - 1,
/// k_t = tx - 1.  Requires 0 < t_r and t_t >= m_r * t_r (a transmit switch
/// waits for a full receive sweep); pass t_t = (m_r + 1) * t_r to model a
/// dummy receive slot consuming time without producing a sample.
SoundingPlan regular_plan(Eigen::Index m_r, Eigen::Index m_t, double t_r,
                          double t_t);

/// Scatter per-slot values into an m_r x m_t matrix: out(rx-1, tx-1) = v[k].
RMat placement_matrix(const std::vector<std::pair<int, int>>& pattern,
                      const std::vector<double>& values, Eigen::Index m_r,
                      Eigen::Index m_t);

/// Timing matrix T with T(rx-1, tx-1) = measurement time of that pair.
RMat timing_matrix(const SoundingPlan& plan);

/// True when T is separable into per-receive plus per-transmit offsets:
/// all 2x2 minors T(m,n) + T(m',n') - T(m,n') - T(m',n) vanish within
/// tol * max|T|.  Separable timing makes a frequency offset act one-sided
/// (rank-one unit-modulus ramp), leaving mutual information untouched.
bool is_separable(const RMat& t, double tol = 1e-9);

/// Phase-ramp matrix M = delta_omega * T (radians).
RMat offset_matrix(const SoundingPlan& plan, double delta_omega);

enum class PhaseCorrelation {
  fully_correlated,    // one common phase per snapshot
  fully_uncorrelated,  // IID per measurement slot
  exponential,         // exp(-|t_k - t_l| / tau_c) kernel over slot times
  explicit_cov,        // user-provided covariance over vec order
};

/// Oscillator phase-error model: marginal variance sigma_phi2 (rad^2), a
/// correlation structure across the slots of one snapshot, and a carrier
/// frequency offset delta_omega (rad/s) adding the deterministic ramp.
struct PhaseErrorModel {
  double sigma_phi2 = 0.0;
  PhaseCorrelation correlation = PhaseCorrelation::fully_uncorrelated;
  double tau_c = 0.0;        // coherence time (s), exponential only
  RMat explicit_sigma;       // explicit_cov only, vec-ordered
  double delta_omega = 0.0;  // rad/s
};

/// rad^2 variance from an RMS phase-noise level in degrees.
double rms_degrees_to_variance(double rms_degrees);

/// Covariance of vec(Phi) over one snapshot under the model (N x N with
/// N = m_r * m_t).  explicit_cov is validated (size, Hermitian PSD) and
/// returned symmetrized.
RMat build_sigma_phi(const SoundingPlan& plan, const PhaseErrorModel& model);

enum class ThetaMode {
  exact,       // theta = exp(j(M + Phi)) entrywise, exactly unit modulus
  linearized,  // theta = exp(jM) . (1 + j Phi) entrywise
};

/// One effective-channel realization and its ingredients.
struct EffectiveChannelDraw {
  CMat h_hat;      // H . theta
  CMat theta;      // entrywise perturbation
  RMat phi;        // phase-noise sample (radians)
  RMat m_offsets;  // deterministic ramp M = delta_omega * T
};

/// Prepared sampler: validates the plan/model once, caches the ramp and the
/// covariance square root, then draws cheaply.  Fully-correlated and
/// fully-uncorrelated models skip the dense root.
class EffectiveSampler {
 public:
  EffectiveSampler(const SoundingPlan& plan, const PhaseErrorModel& model);

  /// Phase-noise sample for one snapshot (consumes normals from rng).
  RMat draw_phi(RngStream& rng) const;

  /// Apply a fresh phase draw to the channel realization h.
  EffectiveChannelDraw draw(const CMat& h, RngStream& rng,
                            ThetaMode mode = ThetaMode::exact) const;

  /// Deterministic perturbation for a given phase sample.
  CMat theta_for(const RMat& phi, ThetaMode mode) const;

  const RMat& offsets() const { return m_offsets_; }
  const SoundingPlan& plan() const { return plan_; }
  const PhaseErrorModel& model() const { return model_; }

 private:
  SoundingPlan plan_;
  PhaseErrorModel model_;
  RMat m_offsets_;
  RMat sigma_sqrt_;  // dense root (exponential / explicit models only)
  double sigma_;     // sqrt(sigma_phi2), shortcut models
};

/// Convenience wrapper: build a sampler and draw once.
EffectiveChannelDraw draw_effective(const CMat& h, const SoundingPlan& plan,
                                    const PhaseErrorModel& model,
                                    RngStream& rng,
                                    ThetaMode mode = ThetaMode::exact);

}  // namespace sounder
