// SPDX-License-Identifier: MIT

#include "sounder/sensitivity.hpp"

#include <cmath>
#include <string>

#include "sounder/errors.hpp"

namespace sounder {

namespace {

constexpr double kTwoLog2E = 2.0 * 1.4426950408889634073599246810019;  // 2 log2 e

void check_inputs(const CMat& h, double rho) {
  if (h.rows() < 1 || h.cols() < 1) {
    throw dimension_error("sensitivity: empty channel matrix");
  }
  if (!(rho > 0.0)) {
    throw domain_error("sensitivity requires rho > 0, got " +
                       std::to_string(rho));
  }
}

/// Y = (M_T / rho) I + H H^H (always positive definite for rho > 0).
CMat make_y(const CMat& h, double rho) {
  const Eigen::Index m_r = h.rows();
  return (static_cast<double>(h.cols()) / rho) *
             CMat::Identity(m_r, m_r) +
         h * h.adjoint();
}

}  // namespace

RVec mi_jacobian(const CMat& h, double rho) {
  check_inputs(h, rho);
  const CMat y = make_y(h, rho);
  // d MI / d Phi_{mn} = 2 log2(e) Im[(Y^{-1} H) . H*]_{mn}.
  const CMat yinv_h = y.llt().solve(h);
  const CMat core = yinv_h.cwiseProduct(h.conjugate());
  return vec(core).imag() * kTwoLog2E;
}

RMat mi_hessian(const CMat& h, double rho) {
  check_inputs(h, rho);
  const Eigen::Index m_r = h.rows();
  const Eigen::Index m_t = h.cols();
  const CMat y = make_y(h, rho);
  const Eigen::LLT<CMat> llt(y);
  const CMat yinv_h = llt.solve(h);              // Y^{-1} H  (M_R x M_T)
  const CMat a = yinv_h.adjoint();               // H^H Y^{-1} (M_T x M_R)
  const CMat dv_h = divec(h);
  const RMat k = commutation_matrix(m_t, m_r);

  const CMat t1 =
      dv_h * k.cast<cxd>() * kron(a.transpose(), a) * dv_h;
  const CMat t2 = dv_h *
                  kron(CMat::Identity(m_t, m_t) - a * h,
                       CMat(llt.solve(CMat::Identity(m_r, m_r)).transpose())) *
                  dv_h.conjugate();
  const CMat t3 = divec(yinv_h.cwiseProduct(h.conjugate()));

  const RMat b = kTwoLog2E * (t1 + t2 - t3).real();
  // The closed form is symmetric up to roundoff; make it exact.
  return 0.5 * (b + b.transpose());
}

double TaylorExpansion::eval(const RMat& phi) const {
  const RVec v = vec_real(phi);
  if (v.size() != jacobian.size()) {
    throw dimension_error("TaylorExpansion::eval: phase matrix has " +
                          std::to_string(v.size()) + " entries, expected " +
                          std::to_string(jacobian.size()));
  }
  return mi0 + jacobian.dot(v) + 0.5 * v.dot(hessian * v);
}

TaylorExpansion taylor_expand_mi(const CMat& h, double rho) {
  TaylorExpansion e;
  e.mi0 = logdet_capacity_kernel(h, rho);
  e.jacobian = mi_jacobian(h, rho);
  e.hessian = mi_hessian(h, rho);
  return e;
}

TaylorMoments taylor_mi_moments(const TaylorExpansion& expansion,
                                const RMat& sigma_phi) {
  const Eigen::Index n = expansion.jacobian.size();
  if (sigma_phi.rows() != n || sigma_phi.cols() != n) {
    throw dimension_error("taylor_mi_moments: covariance must be " +
                          std::to_string(n) + "x" + std::to_string(n) +
                          ", got " + std::to_string(sigma_phi.rows()) + "x" +
                          std::to_string(sigma_phi.cols()));
  }
  const RMat hs = expansion.hessian * sigma_phi;
  TaylorMoments m;
  m.mean = expansion.mi0 + 0.5 * hs.trace();
  m.variance = expansion.jacobian.dot(sigma_phi * expansion.jacobian) +
               0.5 * (hs * hs).trace();
  return m;
}

TaylorMoments taylor_mi_moments(const CMat& h, double rho,
                                const RMat& sigma_phi) {
  return taylor_mi_moments(taylor_expand_mi(h, rho), sigma_phi);
}

}  // namespace sounder
