// SPDX-License-Identifier: MIT

#include "sounder/sounding.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sounder/errors.hpp"

namespace sounder {

void validate_plan(const SoundingPlan& plan) {
  detail::check_positive_index(plan.m_r, "plan m_r");
  detail::check_positive_index(plan.m_t, "plan m_t");
  const std::size_t n =
      static_cast<std::size_t>(plan.m_r) * static_cast<std::size_t>(plan.m_t);
  if (plan.pattern.size() != n) {
    throw validation_error("plan pattern has " +
                           std::to_string(plan.pattern.size()) +
                           " slots, expected " + std::to_string(n));
  }
  if (plan.times.size() != n) {
    throw validation_error("plan has " + std::to_string(plan.times.size()) +
                           " times, expected " + std::to_string(n));
  }
  std::vector<char> seen(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [rx, tx] = plan.pattern[k];
    if (rx < 1 || rx > plan.m_r || tx < 1 || tx > plan.m_t) {
      throw validation_error("plan slot " + std::to_string(k) +
                             " addresses pair (" + std::to_string(rx) + "," +
                             std::to_string(tx) + ") outside the array");
    }
    const std::size_t idx = static_cast<std::size_t>(tx - 1) *
                                static_cast<std::size_t>(plan.m_r) +
                            static_cast<std::size_t>(rx - 1);
    if (seen[idx]) {
      throw validation_error("plan visits pair (" + std::to_string(rx) + "," +
                             std::to_string(tx) + ") more than once");
    }
    seen[idx] = 1;
    if (!std::isfinite(plan.times[k])) {
      throw validation_error("plan time " + std::to_string(k) +
                             " is not finite");
    }
    if (k > 0 && !(plan.times[k] > plan.times[k - 1])) {
      throw validation_error("plan times must be strictly increasing; slot " +
                             std::to_string(k) + " does not increase");
    }
  }
}

SoundingPlan regular_plan(Eigen::Index m_r, Eigen::Index m_t, double t_r,
                          double t_t) {
  detail::check_positive_index(m_r, "m_r");
  detail::check_positive_index(m_t, "m_t");
  detail::check_positive(t_r, "t_r");
  if (!(t_t >= static_cast<double>(m_r) * t_r)) {
    throw domain_error(
        "t_t must be at least m_r * t_r so receive sweeps do not overlap");
  }
  SoundingPlan plan;
  plan.m_r = m_r;
  plan.m_t = m_t;
  const Eigen::Index n = m_r * m_t;
  plan.pattern.reserve(static_cast<std::size_t>(n));
  plan.times.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const int rx = static_cast<int>(k % m_r) + 1;
    const int tx = static_cast<int>(k / m_r) + 1;
    plan.pattern.emplace_back(rx, tx);
    plan.times.push_back(static_cast<double>(rx - 1) * t_r +
                         static_cast<double>(tx - 1) * t_t);
  }
  validate_plan(plan);
  return plan;
}

RMat placement_matrix(const std::vector<std::pair<int, int>>& pattern,
                      const std::vector<double>& values, Eigen::Index m_r,
                      Eigen::Index m_t) {
  detail::check_positive_index(m_r, "m_r");
  detail::check_positive_index(m_t, "m_t");
  if (pattern.size() != values.size()) {
    throw dimension_error("placement_matrix: " +
                          std::to_string(pattern.size()) + " slots vs " +
                          std::to_string(values.size()) + " values");
  }
  const std::size_t n =
      static_cast<std::size_t>(m_r) * static_cast<std::size_t>(m_t);
  if (pattern.size() != n) {
    throw dimension_error("placement_matrix: need exactly " +
                          std::to_string(n) + " slots, got " +
                          std::to_string(pattern.size()));
  }
  RMat out = RMat::Zero(m_r, m_t);
  std::vector<char> seen(n, 0);
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const auto [rx, tx] = pattern[k];
    if (rx < 1 || rx > m_r || tx < 1 || tx > m_t) {
      throw dimension_error("placement_matrix: pair (" + std::to_string(rx) +
                            "," + std::to_string(tx) + ") out of range");
    }
    const std::size_t idx = static_cast<std::size_t>(tx - 1) *
                                static_cast<std::size_t>(m_r) +
                            static_cast<std::size_t>(rx - 1);
    if (seen[idx]) {
      throw dimension_error("placement_matrix: pair (" + std::to_string(rx) +
                            "," + std::to_string(tx) + ") repeated");
    }
    seen[idx] = 1;
    out(rx - 1, tx - 1) = values[k];
  }
  return out;
}

RMat timing_matrix(const SoundingPlan& plan) {
  validate_plan(plan);
  return placement_matrix(plan.pattern, plan.times, plan.m_r, plan.m_t);
}

bool is_separable(const RMat& t, double tol) {
  detail::check_nonnegative(tol, "tol");
  const double scale = t.cwiseAbs().maxCoeff();
  const double bound = tol * std::max(scale, 1e-300);
  for (Eigen::Index m = 0; m < t.rows(); ++m) {
    for (Eigen::Index mp = m + 1; mp < t.rows(); ++mp) {
      for (Eigen::Index n = 0; n < t.cols(); ++n) {
        for (Eigen::Index np = n + 1; np < t.cols(); ++np) {
          const double minor =
              t(m, n) + t(mp, np) - t(m, np) - t(mp, n);
          if (std::abs(minor) > bound) return false;
        }
      }
    }
  }
  return true;
}

RMat offset_matrix(const SoundingPlan& plan, double delta_omega) {
  return delta_omega * timing_matrix(plan);
}

double rms_degrees_to_variance(double rms_degrees) {
  detail::check_nonnegative(rms_degrees, "rms_degrees");
  const double rad = rms_degrees * std::numbers::pi / 180.0;
  return rad * rad;
}

RMat build_sigma_phi(const SoundingPlan& plan, const PhaseErrorModel& model) {
  validate_plan(plan);
  detail::check_nonnegative(model.sigma_phi2, "sigma_phi2");
  const Eigen::Index n = plan.m_r * plan.m_t;
  switch (model.correlation) {
    case PhaseCorrelation::fully_correlated:
      return RMat::Constant(n, n, model.sigma_phi2);
    case PhaseCorrelation::fully_uncorrelated:
      return model.sigma_phi2 * RMat::Identity(n, n);
    case PhaseCorrelation::exponential: {
      detail::check_positive(model.tau_c, "tau_c");
      // Place slot times at their vec positions, then evaluate the kernel.
      std::vector<double> t_at(static_cast<std::size_t>(n), 0.0);
      for (std::size_t k = 0; k < plan.pattern.size(); ++k) {
        const auto [rx, tx] = plan.pattern[k];
        t_at[static_cast<std::size_t>(tx - 1) *
                 static_cast<std::size_t>(plan.m_r) +
             static_cast<std::size_t>(rx - 1)] = plan.times[k];
      }
      RMat sigma(n, n);
      for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
          sigma(p, q) =
              model.sigma_phi2 *
              std::exp(-std::abs(t_at[static_cast<std::size_t>(p)] -
                                 t_at[static_cast<std::size_t>(q)]) /
                       model.tau_c);
        }
      }
      return sigma;
    }
    case PhaseCorrelation::explicit_cov: {
      const RMat& s = model.explicit_sigma;
      if (s.rows() != n || s.cols() != n) {
        throw model_error("explicit phase covariance must be " +
                          std::to_string(n) + "x" + std::to_string(n) +
                          ", got " + std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()));
      }
      if ((s - s.transpose()).norm() > 1e-10 * std::max(s.norm(), 1e-300)) {
        throw model_error("explicit phase covariance is not symmetric");
      }
      const RMat sym = 0.5 * (s + s.transpose().eval());
      // PSD check via the guarded eigendecomposition.
      try {
        psd_sqrt(sym.cast<cxd>(), 1e-10);
      } catch (const numeric_error& e) {
        throw model_error(std::string("explicit phase covariance is not "
                                      "positive semidefinite: ") +
                          e.what());
      }
      return sym;
    }
  }
  throw model_error("build_sigma_phi: unknown correlation kind");
}

EffectiveSampler::EffectiveSampler(const SoundingPlan& plan,
                                   const PhaseErrorModel& model)
    : plan_(plan), model_(model), sigma_(std::sqrt(model.sigma_phi2)) {
  validate_plan(plan_);
  detail::check_nonnegative(model_.sigma_phi2, "sigma_phi2");
  m_offsets_ = offset_matrix(plan_, model_.delta_omega);
  if (model_.correlation == PhaseCorrelation::exponential ||
      model_.correlation == PhaseCorrelation::explicit_cov) {
    const RMat sigma = build_sigma_phi(plan_, model_);
    sigma_sqrt_ = psd_sqrt_real(sigma, 1e-12);
  }
}

RMat EffectiveSampler::draw_phi(RngStream& rng) const {
  const Eigen::Index n = plan_.m_r * plan_.m_t;
  switch (model_.correlation) {
    case PhaseCorrelation::fully_correlated: {
      const double common = sigma_ * rng.normal();
      return RMat::Constant(plan_.m_r, plan_.m_t, common);
    }
    case PhaseCorrelation::fully_uncorrelated: {
      RMat phi(plan_.m_r, plan_.m_t);
      for (Eigen::Index j = 0; j < plan_.m_t; ++j) {
        for (Eigen::Index i = 0; i < plan_.m_r; ++i) {
          phi(i, j) = sigma_ * rng.normal();
        }
      }
      return phi;
    }
    case PhaseCorrelation::exponential:
    case PhaseCorrelation::explicit_cov: {
      RVec z(n);
      for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
      return unvec_real(sigma_sqrt_ * z, plan_.m_r, plan_.m_t);
    }
  }
  throw model_error("draw_phi: unknown correlation kind");
}

CMat EffectiveSampler::theta_for(const RMat& phi, ThetaMode mode) const {
  if (phi.rows() != plan_.m_r || phi.cols() != plan_.m_t) {
    throw dimension_error("theta_for: phase sample is " +
                          std::to_string(phi.rows()) + "x" +
                          std::to_string(phi.cols()) + ", plan needs " +
                          std::to_string(plan_.m_r) + "x" +
                          std::to_string(plan_.m_t));
  }
  CMat theta(plan_.m_r, plan_.m_t);
  for (Eigen::Index j = 0; j < plan_.m_t; ++j) {
    for (Eigen::Index i = 0; i < plan_.m_r; ++i) {
      const double ramp = m_offsets_(i, j);
      if (mode == ThetaMode::exact) {
        theta(i, j) = std::polar(1.0, ramp + phi(i, j));
      } else {
        theta(i, j) =
            std::polar(1.0, ramp) * cxd(1.0, phi(i, j));
      }
    }
  }
  return theta;
}

EffectiveChannelDraw EffectiveSampler::draw(const CMat& h, RngStream& rng,
                                            ThetaMode mode) const {
  if (h.rows() != plan_.m_r || h.cols() != plan_.m_t) {
    throw dimension_error("draw: channel is " + std::to_string(h.rows()) +
                          "x" + std::to_string(h.cols()) + ", plan needs " +
                          std::to_string(plan_.m_r) + "x" +
                          std::to_string(plan_.m_t));
  }
  EffectiveChannelDraw out;
  out.phi = draw_phi(rng);
  out.m_offsets = m_offsets_;
  out.theta = theta_for(out.phi, mode);
  out.h_hat = h.cwiseProduct(out.theta);
  return out;
}

EffectiveChannelDraw draw_effective(const CMat& h, const SoundingPlan& plan,
                                    const PhaseErrorModel& model,
                                    RngStream& rng, ThetaMode mode) {
  return EffectiveSampler(plan, model).draw(h, rng, mode);
}

}  // namespace sounder
