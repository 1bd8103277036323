// SPDX-License-Identifier: MIT
//
// Channel model definitions and samplers.
//
// A ChannelModel is a validated, immutable description from which independent
// realizations are drawn with draw_channel().  Structured factories build the
// canonical test channels: rank-one g h^T products, one-sided correlated
// Rayleigh (Kronecker with identity on the other side), Ricean, IID Rayleigh,
// and a free-form complex-Gaussian model over vec(H).
//
// Normalization: Rayleigh entries are CN(0,1) (unit variance per entry), so
// an IID M_R x M_T channel has E{||H||_F^2} = M_R * M_T.

#pragma once

#include <utility>

#include "sounder/linalg.hpp"
#include "sounder/rng.hpp"

namespace sounder {

enum class ChannelKind {
  deterministic_rank1,   // fixed g h^T
  correlated_rayleigh,   // one-sided Kronecker correlation
  ricean,                // fixed mean + complex Gaussian fluctuation
  iid_rayleigh,          // CN(0,1) entries
  synthetic_gaussian,    // vec(H) ~ CN(mean_vec, cov)
};

enum class CorrelationSide { receive, transmit };

/// Immutable channel description; build through the factory functions below,
/// which validate inputs and precompute the matrix square roots used when
/// sampling.
struct ChannelModel {
  ChannelKind kind = ChannelKind::iid_rayleigh;
  Eigen::Index m_r = 0;
  Eigen::Index m_t = 0;

  // deterministic_rank1
  CVec g;  // receive-side factor (m_r)
  CVec h;  // transmit-side factor (m_t)

  // correlated_rayleigh
  CorrelationSide side = CorrelationSide::receive;
  CMat correlation;       // m x m on the chosen side
  CMat correlation_sqrt;  // cached PSD square root

  // ricean / synthetic_gaussian
  CVec mean_vec;  // vec-ordered mean (m_r * m_t)
  CMat cov;       // (m_r m_t) x (m_r m_t) covariance of vec(H)
  CMat cov_sqrt;  // cached PSD square root
};

/// Fixed rank-one channel H = g h^T.
ChannelModel deterministic_rank1_channel(const CVec& g, const CVec& h);

/// All-ones m_r x m_t channel (rank one, unit-modulus factors).
ChannelModel all_ones_channel(Eigen::Index m_r, Eigen::Index m_t);

/// One-sided correlated Rayleigh: receive side gives H = R^{1/2} W, transmit
/// side H = W (R^{1/2})^T, W IID CN(0,1).  R must be Hermitian PSD with
/// matching dimension (m_r or m_t); rank deficiency is allowed.
ChannelModel correlated_rayleigh_channel(const CMat& r, CorrelationSide side,
                                         Eigen::Index m_r, Eigen::Index m_t);

/// Ricean: H = H_mean + fluctuation, vec(fluctuation) ~ CN(0, cov).
ChannelModel ricean_channel(const CMat& h_mean, const CMat& cov);

/// IID Rayleigh CN(0,1) entries.
ChannelModel iid_rayleigh_channel(Eigen::Index m_r, Eigen::Index m_t);

/// Free-form complex Gaussian over vec(H).
ChannelModel synthetic_gaussian_channel(const CVec& mean_vec, const CMat& cov,
                                        Eigen::Index m_r, Eigen::Index m_t);

/// One independent realization.  Deterministic kinds consume no randomness;
/// Gaussian kinds consume one CN(0,1) draw (two normals, real part first)
/// per underlying entry in vec order.
CMat draw_channel(const ChannelModel& model, RngStream& rng);

/// Rank-deficient correlation matrix with trace m: eigenvalues m/rank with
/// multiplicity `rank` (rest zero) in the unitary DFT eigenbasis, whose first
/// column is the constant vector.  rank = 1 yields the all-ones matrix
/// (fully correlated); rank = m yields the identity (uncorrelated).
CMat make_lowrank_correlation(Eigen::Index m, Eigen::Index rank);

/// Deterministic m x m channel with k equal nonzero singular values and
/// squared Frobenius norm m^2: circulant F diag(d) F^H with d = (m/sqrt(k))
/// on the first k entries.  k = m gives a scaled unitary matrix; k = 1 gives
/// the all-ones matrix.
CMat make_balanced_rank_k(Eigen::Index m, Eigen::Index k);

/// Unit-modulus rank-one factors (g, h).  With rng == nullptr both are
/// all-ones; otherwise phases are uniform on [0, 2 pi).  Either way
/// lambda_1(H H^H) = m_r * m_t for H = g h^T.
std::pair<CVec, CVec> make_unit_modulus_rank1(Eigen::Index m_r,
                                              Eigen::Index m_t,
                                              RngStream* rng);

}  // namespace sounder
