// SPDX-License-Identifier: MIT
//
// First- and second-order statistics of the effective channel.
//
// Under the exact model the effective channel is h_hat = h . exp(j(M + Phi))
// with jointly Gaussian phases Phi; characteristic-function identities give
// closed forms for the mean and covariance of vec(h_hat) when the underlying
// channel is Ricean (fixed mean plus complex-Gaussian fluctuation independent
// of the phases).  The linearized model exp(jPhi) ~ 1 + jPhi additionally has
// a closed-form pseudo-covariance, which quantifies how phase noise breaks
// properness.

#pragma once

#include <functional>
#include <vector>

#include "sounder/linalg.hpp"
#include "sounder/sounding.hpp"

namespace sounder {

/// Mean / covariance / pseudo-covariance of vec(h_hat).
struct MomentReport {
  Eigen::Index m_r = 0;
  Eigen::Index m_t = 0;
  CVec mean;
  CMat cov;
  CMat pseudo_cov;  // size 0 when not provided by the producing routine
  Eigen::Index sample_count = 0;  // 0 for analytic reports
};

/// Exact-model moments of vec(h_hat) for a Ricean channel: fixed mean h_mean
/// plus fluctuation with covariance cov_h (vec-ordered; pass a zero matrix
/// for a purely deterministic channel).  The phase model supplies the ramp M
/// and the phase covariance.
MomentReport analytic_moments(const CMat& h_mean, const CMat& cov_h,
                              const SoundingPlan& plan,
                              const PhaseErrorModel& model);

/// Small-phase (linearized) moments of vec(h_hat) for a deterministic channel
/// h_mean, including the pseudo-covariance.
MomentReport linearized_moments(const CMat& h_mean, const SoundingPlan& plan,
                                const PhaseErrorModel& model);

/// Scalar Ricean line-of-sight properness defect: the pseudo-variance of the
/// effective gain acquires h_mean^2 (kappa^2 - kappa) with
/// kappa = exp(-sigma_phi2); the physical channel has none.
cxd ricean_properness_defect(cxd h_mean, double sigma_phi2);

/// Empirical moments from an indexed draw generator: draw(i) must return the
/// i-th realization (m_r x m_t).  Two passes (mean, then centered second
/// moments) with fixed-order pairwise summation; deterministic for any thread
/// count.  Requires n >= 1000 (statistics_error otherwise).
MomentReport empirical_moments(Eigen::Index m_r, Eigen::Index m_t,
                               Eigen::Index n,
                               const std::function<CMat(Eigen::Index)>& draw,
                               int threads = 1);

/// Convenience overload over stored draws.
MomentReport empirical_moments(const std::vector<CMat>& draws);

/// |excess kurtosis| of the real parts of samples: ~0 for Gaussian data,
/// markedly positive for heavy-tailed mixtures.
double normality_probe(const std::vector<cxd>& samples);

}  // namespace sounder
