// SPDX-License-Identifier: MIT

#include "sounder/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sounder/errors.hpp"

namespace sounder {

namespace {

/// Hermitian-PSD validation with a descriptive name; returns the PSD root.
CMat checked_psd_sqrt(const CMat& a, const std::string& name) {
  if (a.rows() != a.cols()) {
    throw model_error(name + " must be square, got " +
                      std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()));
  }
  const double gap = (a - a.adjoint()).norm();
  if (gap > 1e-10 * std::max(a.norm(), 1e-300)) {
    throw model_error(name + " is not Hermitian (gap " + std::to_string(gap) +
                      ")");
  }
  try {
    return psd_sqrt(a, 1e-10);
  } catch (const numeric_error& e) {
    throw model_error(name + " is not positive semidefinite: " + e.what());
  }
}

/// Fill an m x n matrix with IID CN(0,1) entries in vec (column-major) order,
/// real part drawn before imaginary part.
CMat draw_cn_matrix(Eigen::Index m, Eigen::Index n, RngStream& rng) {
  CMat w(m, n);
  constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      w(i, j) = cxd(re * inv_sqrt2, im * inv_sqrt2);
    }
  }
  return w;
}

CVec draw_cn_vector(Eigen::Index n, RngStream& rng) {
  return vec(draw_cn_matrix(n, 1, rng));
}

void check_dims(Eigen::Index m_r, Eigen::Index m_t) {
  detail::check_positive_index(m_r, "m_r");
  detail::check_positive_index(m_t, "m_t");
}

}  // namespace

ChannelModel deterministic_rank1_channel(const CVec& g, const CVec& h) {
  check_dims(g.size(), h.size());
  ChannelModel m;
  m.kind = ChannelKind::deterministic_rank1;
  m.m_r = g.size();
  m.m_t = h.size();
  m.g = g;
  m.h = h;
  return m;
}

ChannelModel all_ones_channel(Eigen::Index m_r, Eigen::Index m_t) {
  check_dims(m_r, m_t);
  return deterministic_rank1_channel(CVec::Ones(m_r), CVec::Ones(m_t));
}

ChannelModel correlated_rayleigh_channel(const CMat& r, CorrelationSide side,
                                         Eigen::Index m_r, Eigen::Index m_t) {
  check_dims(m_r, m_t);
  const Eigen::Index expected = (side == CorrelationSide::receive) ? m_r : m_t;
  if (r.rows() != expected || r.cols() != expected) {
    throw model_error("correlation matrix must be " + std::to_string(expected) +
                      "x" + std::to_string(expected) + " for this side, got " +
                      std::to_string(r.rows()) + "x" + std::to_string(r.cols()));
  }
  ChannelModel m;
  m.kind = ChannelKind::correlated_rayleigh;
  m.m_r = m_r;
  m.m_t = m_t;
  m.side = side;
  m.correlation = r;
  m.correlation_sqrt = checked_psd_sqrt(r, "correlation matrix");
  return m;
}

ChannelModel ricean_channel(const CMat& h_mean, const CMat& cov) {
  check_dims(h_mean.rows(), h_mean.cols());
  const Eigen::Index n = h_mean.size();
  if (cov.rows() != n || cov.cols() != n) {
    throw model_error("ricean covariance must be " + std::to_string(n) + "x" +
                      std::to_string(n) + ", got " + std::to_string(cov.rows()) +
                      "x" + std::to_string(cov.cols()));
  }
  ChannelModel m;
  m.kind = ChannelKind::ricean;
  m.m_r = h_mean.rows();
  m.m_t = h_mean.cols();
  m.mean_vec = vec(h_mean);
  m.cov = cov;
  m.cov_sqrt = checked_psd_sqrt(cov, "ricean covariance");
  return m;
}

ChannelModel iid_rayleigh_channel(Eigen::Index m_r, Eigen::Index m_t) {
  check_dims(m_r, m_t);
  ChannelModel m;
  m.kind = ChannelKind::iid_rayleigh;
  m.m_r = m_r;
  m.m_t = m_t;
  return m;
}

ChannelModel synthetic_gaussian_channel(const CVec& mean_vec, const CMat& cov,
                                        Eigen::Index m_r, Eigen::Index m_t) {
  check_dims(m_r, m_t);
  const Eigen::Index n = m_r * m_t;
  if (mean_vec.size() != n) {
    throw model_error("synthetic mean must have " + std::to_string(n) +
                      " entries, got " + std::to_string(mean_vec.size()));
  }
  if (cov.rows() != n || cov.cols() != n) {
    throw model_error("synthetic covariance must be " + std::to_string(n) +
                      "x" + std::to_string(n) + ", got " +
                      std::to_string(cov.rows()) + "x" +
                      std::to_string(cov.cols()));
  }
  ChannelModel m;
  m.kind = ChannelKind::synthetic_gaussian;
  m.m_r = m_r;
  m.m_t = m_t;
  m.mean_vec = mean_vec;
  m.cov = cov;
  m.cov_sqrt = checked_psd_sqrt(cov, "synthetic covariance");
  return m;
}

CMat draw_channel(const ChannelModel& model, RngStream& rng) {
  switch (model.kind) {
    case ChannelKind::deterministic_rank1:
      return model.g * model.h.transpose();
    case ChannelKind::iid_rayleigh:
      return draw_cn_matrix(model.m_r, model.m_t, rng);
    case ChannelKind::correlated_rayleigh: {
      const CMat w = draw_cn_matrix(model.m_r, model.m_t, rng);
      if (model.side == CorrelationSide::receive) {
        return model.correlation_sqrt * w;
      }
      // Transpose (not adjoint) keeps E{H_{mn} H*_{mn'}} = [R]_{nn'}.
      return w * model.correlation_sqrt.transpose();
    }
    case ChannelKind::ricean: {
      const CVec noise = model.cov_sqrt * draw_cn_vector(model.m_r * model.m_t, rng);
      return unvec(model.mean_vec + noise, model.m_r, model.m_t);
    }
    case ChannelKind::synthetic_gaussian: {
      const CVec noise = model.cov_sqrt * draw_cn_vector(model.m_r * model.m_t, rng);
      return unvec(model.mean_vec + noise, model.m_r, model.m_t);
    }
  }
  throw model_error("draw_channel: unknown channel kind");
}

CMat make_lowrank_correlation(Eigen::Index m, Eigen::Index rank) {
  detail::check_positive_index(m, "m");
  if (rank < 1 || rank > m) {
    throw domain_error("correlation rank must be in [1, m], got " +
                       std::to_string(rank));
  }
  // Unitary DFT eigenbasis; first column is the constant vector, so rank = 1
  // yields the all-ones (fully correlated) matrix.
  CMat f(m, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const double angle = -2.0 * std::numbers::pi *
                           static_cast<double>(r) * static_cast<double>(c) /
                           static_cast<double>(m);
      f(r, c) = scale * cxd(std::cos(angle), std::sin(angle));
    }
  }
  RVec eigs = RVec::Zero(m);
  eigs.head(rank).setConstant(static_cast<double>(m) /
                              static_cast<double>(rank));
  CMat r_mat = f * eigs.asDiagonal() * f.adjoint();
  // Kill the imaginary roundoff on the diagonal for cleanliness.
  r_mat = 0.5 * (r_mat + r_mat.adjoint().eval());
  return r_mat;
}

CMat make_balanced_rank_k(Eigen::Index m, Eigen::Index k) {
  detail::check_positive_index(m, "m");
  if (k < 1 || k > m) {
    throw domain_error("rank k must be in [1, m], got " + std::to_string(k));
  }
  CMat f(m, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const double angle = -2.0 * std::numbers::pi *
                           static_cast<double>(r) * static_cast<double>(c) /
                           static_cast<double>(m);
      f(r, c) = scale * cxd(std::cos(angle), std::sin(angle));
    }
  }
  RVec d = RVec::Zero(m);
  d.head(k).setConstant(static_cast<double>(m) /
                        std::sqrt(static_cast<double>(k)));
  return f * d.asDiagonal() * f.adjoint();
}

std::pair<CVec, CVec> make_unit_modulus_rank1(Eigen::Index m_r,
                                              Eigen::Index m_t,
                                              RngStream* rng) {
  check_dims(m_r, m_t);
  if (rng == nullptr) {
    return {CVec::Ones(m_r), CVec::Ones(m_t)};
  }
  CVec g(m_r);
  CVec h(m_t);
  for (Eigen::Index i = 0; i < m_r; ++i) {
    const double phi = 2.0 * std::numbers::pi * rng->uniform();
    g(i) = cxd(std::cos(phi), std::sin(phi));
  }
  for (Eigen::Index i = 0; i < m_t; ++i) {
    const double phi = 2.0 * std::numbers::pi * rng->uniform();
    h(i) = cxd(std::cos(phi), std::sin(phi));
  }
  return {g, h};
}

}  // namespace sounder
