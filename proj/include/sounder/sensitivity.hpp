// SPDX-License-Identifier: MIT
//
// Second-order sensitivity of mutual information to per-measurement phase
// errors, at the operating point of zero phase error.
//
// With I(Phi) = log2 det(I + (rho/M_T) (H.e^{jPhi})(H.e^{jPhi})^H) viewed as
// a function of the real phase matrix Phi, closed forms for the gradient and
// Hessian at Phi = 0 yield a quadratic surrogate whose mean and variance
// under Gaussian phases are available analytically: a Gaussian quadratic form
// has mean tr(QS) and variance 2 tr((QS)^2) on top of the linear term's
// J S J^T.

#pragma once

#include "sounder/linalg.hpp"

namespace sounder {

/// Gradient of MI w.r.t. vec(Phi) at Phi = 0 (length M_R * M_T, vec order).
/// Requires rho > 0.
RVec mi_jacobian(const CMat& h, double rho);

/// Hessian of MI w.r.t. vec(Phi) at Phi = 0, symmetrized.  Requires rho > 0.
RMat mi_hessian(const CMat& h, double rho);

/// Quadratic (second-order Taylor) surrogate of MI around Phi = 0.
struct TaylorExpansion {
  double mi0 = 0.0;  // MI at Phi = 0
  RVec jacobian;
  RMat hessian;

  /// mi0 + J vec(Phi) + 0.5 vec(Phi)^T Hess vec(Phi).
  double eval(const RMat& phi) const;
};

/// Build the surrogate for channel h at SNR rho.
TaylorExpansion taylor_expand_mi(const CMat& h, double rho);

/// Mean and variance of the surrogate under vec(Phi) ~ N(0, sigma_phi).
struct TaylorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// mean = mi0 + 0.5 tr(Hess Sigma); variance = J Sigma J^T
/// + 0.5 tr((Hess Sigma)^2).
TaylorMoments taylor_mi_moments(const TaylorExpansion& expansion,
                                const RMat& sigma_phi);

/// Convenience: expand and take moments in one call.
TaylorMoments taylor_mi_moments(const CMat& h, double rho,
                                const RMat& sigma_phi);

}  // namespace sounder
