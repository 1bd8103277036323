// SPDX-License-Identifier: MIT

#include "sounder/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sounder/errors.hpp"
#include "sounder/util.hpp"

namespace sounder {

MomentReport analytic_moments(const CMat& h_mean, const CMat& cov_h,
                              const SoundingPlan& plan,
                              const PhaseErrorModel& model) {
  validate_plan(plan);
  if (h_mean.rows() != plan.m_r || h_mean.cols() != plan.m_t) {
    throw dimension_error("analytic_moments: channel mean is " +
                          std::to_string(h_mean.rows()) + "x" +
                          std::to_string(h_mean.cols()) + ", plan needs " +
                          std::to_string(plan.m_r) + "x" +
                          std::to_string(plan.m_t));
  }
  const Eigen::Index n = plan.m_r * plan.m_t;
  if (cov_h.rows() != n || cov_h.cols() != n) {
    throw dimension_error("analytic_moments: channel covariance must be " +
                          std::to_string(n) + "x" + std::to_string(n) +
                          ", got " + std::to_string(cov_h.rows()) + "x" +
                          std::to_string(cov_h.cols()));
  }
  const RMat sigma = build_sigma_phi(plan, model);
  const RMat ramp = offset_matrix(plan, model.delta_omega);
  const CVec hf = vec(h_mean);
  CVec m(n);
  {
    const RVec ramp_vec = vec_real(ramp);
    for (Eigen::Index p = 0; p < n; ++p) {
      m(p) = std::polar(1.0, ramp_vec(p));
    }
  }

  MomentReport rep;
  rep.m_r = plan.m_r;
  rep.m_t = plan.m_t;

  // E{e^{j phi_p}} = e^{-S_pp/2}; E{e^{j(phi_p - phi_q)}} =
  // e^{-(S_pp + S_qq)/2 + S_pq} for jointly Gaussian zero-mean phases.
  rep.mean = CVec(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    rep.mean(p) = m(p) * hf(p) * std::exp(-0.5 * sigma(p, p));
  }

  rep.cov = CMat(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      const double damp = std::exp(-0.5 * (sigma(p, p) + sigma(q, q)));
      const cxd outer = hf(p) * std::conj(hf(q));
      const cxd second =
          damp * std::exp(sigma(p, q)) * (outer + cov_h(p, q));
      rep.cov(p, q) = m(p) * std::conj(m(q)) * (second - damp * outer);
    }
  }
  return rep;
}

MomentReport linearized_moments(const CMat& h_mean, const SoundingPlan& plan,
                                const PhaseErrorModel& model) {
  validate_plan(plan);
  if (h_mean.rows() != plan.m_r || h_mean.cols() != plan.m_t) {
    throw dimension_error("linearized_moments: channel mean is " +
                          std::to_string(h_mean.rows()) + "x" +
                          std::to_string(h_mean.cols()) + ", plan needs " +
                          std::to_string(plan.m_r) + "x" +
                          std::to_string(plan.m_t));
  }
  const Eigen::Index n = plan.m_r * plan.m_t;
  const RMat sigma = build_sigma_phi(plan, model);
  const RMat ramp = offset_matrix(plan, model.delta_omega);
  const CVec hf = vec(h_mean);
  CVec m(n);
  {
    const RVec ramp_vec = vec_real(ramp);
    for (Eigen::Index p = 0; p < n; ++p) {
      m(p) = std::polar(1.0, ramp_vec(p));
    }
  }

  MomentReport rep;
  rep.m_r = plan.m_r;
  rep.m_t = plan.m_t;
  rep.mean = m.cwiseProduct(hf);
  // cov  = (m m^H) . (hf hf^H) . Sigma ; pcov = -(m m^T) . (hf hf^T) . Sigma.
  rep.cov = CMat(n, n);
  rep.pseudo_cov = CMat(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      rep.cov(p, q) =
          m(p) * std::conj(m(q)) * hf(p) * std::conj(hf(q)) * sigma(p, q);
      rep.pseudo_cov(p, q) = -m(p) * m(q) * hf(p) * hf(q) * sigma(p, q);
    }
  }
  return rep;
}

cxd ricean_properness_defect(cxd h_mean, double sigma_phi2) {
  detail::check_nonnegative(sigma_phi2, "sigma_phi2");
  const double kappa = std::exp(-sigma_phi2);
  return h_mean * h_mean * (kappa * kappa - kappa);
}

MomentReport empirical_moments(Eigen::Index m_r, Eigen::Index m_t,
                               Eigen::Index n,
                               const std::function<CMat(Eigen::Index)>& draw,
                               int threads) {
  detail::check_positive_index(m_r, "m_r");
  detail::check_positive_index(m_t, "m_t");
  if (n < 1000) {
    throw statistics_error("empirical_moments needs >= 1000 draws, got " +
                           std::to_string(n));
  }
  const Eigen::Index d = m_r * m_t;
  const std::size_t count = static_cast<std::size_t>(n);

  const auto draw_vec = [&](std::size_t i) {
    const CMat h = draw(static_cast<Eigen::Index>(i));
    if (h.rows() != m_r || h.cols() != m_t) {
      throw dimension_error("empirical_moments: draw " + std::to_string(i) +
                            " has wrong shape");
    }
    return CVec(vec(h));
  };

  // Two passes over the indexed generator.  Partial sums are taken over
  // fixed blocks of indices (independent of the thread count), each block
  // pairwise in index order, and the block results are combined pairwise in
  // block order — byte-identical for any `threads`.
  constexpr std::size_t kBlock = 1024;
  const std::size_t nblocks = (count + kBlock - 1) / kBlock;
  const auto blocked_sum =
      [&](const std::function<CMat(std::size_t)>& term) -> CMat {
    std::vector<CMat> partial(nblocks);
    parallel_for(nblocks, threads, [&](std::size_t b) {
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(count, lo + kBlock);
      partial[b] = pairwise_sum_matrix(
          hi - lo, [&](std::size_t k) { return term(lo + k); });
    });
    return pairwise_sum_matrix(nblocks,
                               [&](std::size_t b) { return partial[b]; });
  };

  // Pass 1: mean.
  const CMat mean_mat = blocked_sum([&](std::size_t i) {
    return CMat(draw_vec(i));
  }) / static_cast<double>(n);
  const CVec mean = mean_mat.col(0);

  // Pass 2: centered second moments (covariance and pseudo-covariance in one
  // stacked sweep).
  const CMat second = blocked_sum([&](std::size_t i) {
    const CVec c = draw_vec(i) - mean;
    CMat both(d, 2 * d);
    both.leftCols(d) = c * c.adjoint();
    both.rightCols(d) = c * c.transpose();
    return both;
  });

  MomentReport rep;
  rep.m_r = m_r;
  rep.m_t = m_t;
  rep.mean = mean;
  rep.cov = second.leftCols(d) / static_cast<double>(n - 1);
  rep.pseudo_cov = second.rightCols(d) / static_cast<double>(n - 1);
  rep.sample_count = n;
  return rep;
}

MomentReport empirical_moments(const std::vector<CMat>& draws) {
  if (draws.empty()) {
    throw statistics_error("empirical_moments: no draws");
  }
  const Eigen::Index m_r = draws.front().rows();
  const Eigen::Index m_t = draws.front().cols();
  return empirical_moments(
      m_r, m_t, static_cast<Eigen::Index>(draws.size()),
      [&](Eigen::Index i) { return draws[static_cast<std::size_t>(i)]; });
}

double normality_probe(const std::vector<cxd>& samples) {
  if (samples.size() < 1000) {
    throw statistics_error("normality_probe needs >= 1000 samples, got " +
                           std::to_string(samples.size()));
  }
  const std::size_t n = samples.size();
  const double mean = pairwise_sum(n, [&](std::size_t i) {
    return samples[i].real();
  }) / static_cast<double>(n);
  const double m2 = pairwise_sum(n, [&](std::size_t i) {
    const double d = samples[i].real() - mean;
    return d * d;
  }) / static_cast<double>(n);
  const double m4 = pairwise_sum(n, [&](std::size_t i) {
    const double d = samples[i].real() - mean;
    return d * d * d * d;
  }) / static_cast<double>(n);
  if (!(m2 > 0.0)) {
    throw statistics_error("normality_probe: zero variance");
  }
  return std::abs(m4 / (m2 * m2) - 3.0);
}

}  // namespace sounder
