// SPDX-License-Identifier: MIT
//
// Rank-one channels under entrywise phase perturbations: algebraic
// factorizations of the effective Gram determinant, sampled and closed-form
// laws for log det of the perturbed all-ones channel, capacity lower/upper
// bounds for unit-modulus rank-one channels under small uncorrelated phase
// noise, and the high-SNR variance of the measured mutual information.
//
// Throughout, a = min(M_R, M_T) and b = max(M_R, M_T); orientation is
// handled internally so every routine accepts (m_r, m_t) as-is.

#pragma once

#include <cstdint>
#include <utility>

#include "sounder/linalg.hpp"
#include "sounder/rng.hpp"

namespace sounder {

/// Max entrywise |(g h^T) . Theta - diag(g) Theta diag(h)|; analytically zero.
double hadamard_rank1_identity_gap(const CVec& g, const CVec& h,
                                   const CMat& theta);

/// Determinant factorization of the effective Gram for H = g h^T:
/// square matrices satisfy det = prod|g|^2 prod|h|^2 det(Theta Gram);
/// rectangular ones are bracketed by the extreme |h| (or |g|) magnitudes.
struct DetFactorization {
  double det_effective = 0.0;  // det of smaller Gram of (g h^T) . Theta
  double det_theta = 0.0;      // det of the matching Gram of Theta
  double square_value = 0.0;   // exact product prediction (square case); NaN otherwise
  double lower = 0.0;          // interval bounds valid in all cases
  double upper = 0.0;
};
DetFactorization det_factorization(const CVec& g, const CVec& h,
                                   const CMat& theta);

/// One log2 det draw of the smaller Gram of the perturbed all-ones channel:
/// entries exp(j phi) (exact mode) or 1 + j phi (linearized mode) with
/// IID N(0, sigma2) phases.  Evaluated by row orthogonalization, summing
/// logs of residual norms (no underflow for large arrays).
double sample_logdet_effective(Eigen::Index m_r, Eigen::Index m_t,
                               double sigma2, bool linearized,
                               RngStream& rng);

/// Closed-form laws for log2 det of the linearized perturbed all-ones Gram.
enum class LogdetLaw {
  approximate,  // (chi2_b + ab) prod_{i=1}^{a-1} chi2_{b-i}
  exact,        // (chi2_{b-a+1} + ab Beta) prod_{i=1}^{a-1} chi2_{b-i+1}
};
double sample_logdet_law(Eigen::Index m_r, Eigen::Index m_t, double sigma2,
                         LogdetLaw law, RngStream& rng);

/// Exact integer binomial coefficient; n <= 32 (range_error beyond).
std::uint64_t binomial_exact(int n, int k);

/// Capacity lower bound for a unit-modulus rank-one channel under IID
/// N(0, sigma2) phase errors: log2(1 + sum over all minor orders n of
/// (rho/M_T)^n C(a,n) prod_{i<n}(delta_i n b + 2 sigma2 e^{psi((b-i)/2)})).
/// Accumulated in the log domain (safe for large rho and a up to 32).
double capacity_lower_bound_minor_sum(Eigen::Index m_r, Eigen::Index m_t,
                                      double rho, double sigma2);

/// Looser per-stream form of the same bound:
/// sum_{i=0}^{a-1} log2(1 + (rho/M_T)(delta_i a b + 2 sigma2
/// e^{psi((b-i)/2)})).  High-SNR slope is min(M_R, M_T) bits per 3 dB.
double capacity_lower_bound_stream_split(Eigen::Index m_r, Eigen::Index m_t,
                                         double rho, double sigma2);

/// Capacity upper bound: log2(1 + sum_n (rho sigma2 / M_T)^n C(M_R,n)
/// C(M_T,n) n! (1 + n/sigma2)), n up to min(M_R, M_T).  sigma2 = 0 reduces
/// to log2(1 + rho M_R).
double capacity_upper_bound(Eigen::Index m_r, Eigen::Index m_t, double rho,
                            double sigma2);

/// High-SNR variance of the measured MI of a unit-modulus rank-one channel
/// under IID phase noise: (log2 e)^2 (2 sigma2^2/(b a^2)
/// + sum_{i=1}^{a-1} psi'((b-i)/2)).
double mi_variance_high_snr(Eigen::Index m_r, Eigen::Index m_t,
                            double sigma2);

/// High-SNR MI variance of an IID Rayleigh channel of the same size:
/// (log2 e)^2 sum_{i=1}^{a} psi'(b - i + 1).
double mi_variance_iid_reference(Eigen::Index m_r, Eigen::Index m_t);

/// Shifted phase matrix S = -j Sigma + Phi with [Sigma]_{1,1} = sqrt(ab)
/// and IID N(0, sigma2) phases: the row-orthogonalization ensemble behind
/// the log det laws.
CMat rank1_shifted_phase_matrix(Eigen::Index m_r, Eigen::Index m_t,
                                double sigma2, RngStream& rng);

/// Spectrum of Re(A_i), where A_i projects out the first i-1 orthogonalized
/// rows of S: expected to be (cols - i) ones, (i - 2) zeros, and a pair
/// {eta, 1 - eta}.  Gaps report how well the draw matches that structure.
struct ProjectorSpectrum {
  RVec eigenvalues;         // descending
  double eta = 0.0;         // smaller element of the nontrivial pair
  double ones_gap = 0.0;    // max |lambda - 1| over the ones block
  double zeros_gap = 0.0;   // max |lambda| over the zeros block
  double pair_sum_gap = 0.0;  // |eta + (1 - eta) - 1| as realized
};
ProjectorSpectrum projector_spectrum(const CMat& s, Eigen::Index i);

/// The nontrivial projector eigenvalue for i = 2 in closed form, from the
/// first phase row alone (phi_row has M_T entries; m_r sets the shift).
double eta2_from_phases(const RVec& phi_row, Eigen::Index m_r);

/// Small-noise mean/variance of eta2: E = sigma2 (M_T - 1)/(M_T M_R),
/// Var = 2 sigma2^2 (M_T - 1)/(M_T^2 M_R^2).
struct Eta2Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Eta2Moments eta2_moments(Eigen::Index m_r, Eigen::Index m_t, double sigma2);

/// Real-stacking eigenvalue identity for an orthonormal-column complex X:
/// actual eigenvalues of [Re X, Im X]^T [Re X, Im X] ...
RVec lemma_pair_eigenvalues_actual(const CMat& x);
/// ... equal {(1 +- sqrt(lambda_i(X^T X X^H X*)))/2}, both descending.
RVec lemma_pair_eigenvalues_predicted(const CMat& x);

}  // namespace sounder
