// SPDX-License-Identifier: MIT
//
// Moment formulas for the effective channel, pinned against closed-form
// special cases and Monte Carlo estimates.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "sounder/channel.hpp"
#include "sounder/errors.hpp"
#include "sounder/linalg.hpp"
#include "sounder/rng.hpp"
#include "sounder/sounding.hpp"
#include "sounder/stats.hpp"

using namespace sounder;

namespace {

CMat random_cmat(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  CMat out(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i)
      out(i, j) = cxd(rng.normal(), rng.normal());
  return out;
}

// Random Hermitian PSD matrix with unit-scale entries.
CMat random_psd(Eigen::Index n, RngStream& rng) {
  CMat a = random_cmat(n, n + 2, rng);
  CMat c = a * a.adjoint() / static_cast<double>(n + 2);
  return ((c + c.adjoint()) / 2.0).eval();
}

// Standard circular complex Gaussian vector (unit variance per entry).
CVec complex_std_normal(Eigen::Index n, RngStream& rng) {
  CVec z(n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i)
    z(i) = cxd(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);
  return z;
}

}  // namespace

TEST_CASE("exact-model mean is sqrt(kappa) times the ramp-rotated mean") {
  // The mean formula E{h_hat} = exp(-sigma^2/2) * exp(jM) . vec(h_mean)
  // holds for every correlation structure (the marginal variance is all
  // that enters a single-entry expectation).
  const SoundingPlan plan = regular_plan(2, 3, 1.0, 2.5);
  RngStream rng(77, 0);
  const CMat h_mean = random_cmat(2, 3, rng);
  const CMat cov_h = random_psd(6, rng);
  const double sigma2 = 0.2;
  const double kappa = std::exp(-sigma2);

  for (PhaseCorrelation corr :
       {PhaseCorrelation::fully_correlated, PhaseCorrelation::fully_uncorrelated,
        PhaseCorrelation::exponential}) {
    PhaseErrorModel model;
    model.sigma_phi2 = sigma2;
    model.correlation = corr;
    model.tau_c = 2.0;
    model.delta_omega = 0.4;

    const MomentReport rep = analytic_moments(h_mean, cov_h, plan, model);
    CHECK(rep.m_r == 2);
    CHECK(rep.m_t == 3);
    CHECK(rep.sample_count == 0);

    const RMat m = offset_matrix(plan, model.delta_omega);
    const CVec hv = vec(h_mean);
    for (Eigen::Index k = 0; k < 6; ++k) {
      const cxd expect = std::sqrt(kappa) *
                         std::exp(cxd(0.0, vec_real(m)(k))) * hv(k);
      CHECK(std::abs(rep.mean(k) - expect) < 1e-12);
    }
  }
}

TEST_CASE("fully correlated phases only rescale the mean outer product") {
  // One common phase per snapshot: Cov{h_hat} = Cov{h} + (1-kappa) P with
  // P = vec(h_mean) vec(h_mean)^H, when the carrier offset is zero.
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  RngStream rng(101, 0);
  const CMat h_mean = random_cmat(2, 2, rng);
  const CMat cov_h = random_psd(4, rng);
  const double sigma2 = 0.35;
  const double kappa = std::exp(-sigma2);

  PhaseErrorModel model;
  model.sigma_phi2 = sigma2;
  model.correlation = PhaseCorrelation::fully_correlated;

  const MomentReport rep = analytic_moments(h_mean, cov_h, plan, model);
  const CVec hv = vec(h_mean);
  const CMat p = hv * hv.adjoint();
  const CMat expect = cov_h + (1.0 - kappa) * p;
  CHECK((rep.cov - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fully uncorrelated phases damp cross terms by kappa") {
  // IID phases: diagonal gains (1-kappa)|h_k|^2 + Cov_kk, off-diagonal
  // entries of Cov{h} shrink by kappa, with zero carrier offset.
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  RngStream rng(102, 0);
  const CMat h_mean = random_cmat(2, 2, rng);
  const CMat cov_h = random_psd(4, rng);
  const double sigma2 = 0.25;
  const double kappa = std::exp(-sigma2);

  PhaseErrorModel model;
  model.sigma_phi2 = sigma2;
  model.correlation = PhaseCorrelation::fully_uncorrelated;

  const MomentReport rep = analytic_moments(h_mean, cov_h, plan, model);
  const CVec hv = vec(h_mean);
  CMat expect(4, 4);
  for (Eigen::Index k = 0; k < 4; ++k) {
    for (Eigen::Index l = 0; l < 4; ++l) {
      if (k == l)
        expect(k, l) = (1.0 - kappa) * std::norm(hv(k)) + cov_h(k, l);
      else
        expect(k, l) = kappa * cov_h(k, l);
    }
  }
  CHECK((rep.cov - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("carrier offset rotates moments without changing magnitudes") {
  // Adding the deterministic ramp multiplies the mean by exp(jM) entrywise
  // and the covariance by exp(j(M_k - M_l)); entry magnitudes are invariant.
  const SoundingPlan plan = regular_plan(2, 2, 0.5, 1.5);
  RngStream rng(103, 0);
  const CMat h_mean = random_cmat(2, 2, rng);
  const CMat cov_h = random_psd(4, rng);

  PhaseErrorModel base;
  base.sigma_phi2 = 0.15;
  base.correlation = PhaseCorrelation::exponential;
  base.tau_c = 1.3;

  PhaseErrorModel shifted = base;
  shifted.delta_omega = 2.1;

  const MomentReport r0 = analytic_moments(h_mean, cov_h, plan, base);
  const MomentReport r1 = analytic_moments(h_mean, cov_h, plan, shifted);

  const RVec mv = vec_real(offset_matrix(plan, shifted.delta_omega));
  for (Eigen::Index k = 0; k < 4; ++k) {
    const cxd rot = std::exp(cxd(0.0, mv(k)));
    CHECK(std::abs(r1.mean(k) - rot * r0.mean(k)) < 1e-12);
    for (Eigen::Index l = 0; l < 4; ++l) {
      const cxd rot2 = std::exp(cxd(0.0, mv(k) - mv(l)));
      CHECK(std::abs(r1.cov(k, l) - rot2 * r0.cov(k, l)) < 1e-12);
    }
  }
}

TEST_CASE("linearized moments match the small-phase closed forms") {
  // theta = exp(jM)(1 + j phi) for a deterministic channel:
  //   mean       = exp(jM) . vec(h)
  //   cov        = (m m^H) . (vec(h) vec(h)^H) . Sigma
  //   pseudo-cov = -(m m^T) . (vec(h) vec(h)^T) . Sigma
  const SoundingPlan plan = regular_plan(2, 3, 1.0, 2.5);
  RngStream rng(104, 0);
  const CMat h = random_cmat(2, 3, rng);

  PhaseErrorModel model;
  model.sigma_phi2 = 0.05;
  model.correlation = PhaseCorrelation::exponential;
  model.tau_c = 2.5;
  model.delta_omega = 0.7;

  const MomentReport rep = linearized_moments(h, plan, model);
  const RMat sigma = build_sigma_phi(plan, model);
  const RVec mv = vec_real(offset_matrix(plan, model.delta_omega));
  const CVec hv = vec(h);

  CHECK(rep.pseudo_cov.rows() == 6);
  for (Eigen::Index k = 0; k < 6; ++k) {
    const cxd mk = std::exp(cxd(0.0, mv(k)));
    CHECK(std::abs(rep.mean(k) - mk * hv(k)) < 1e-12);
    for (Eigen::Index l = 0; l < 6; ++l) {
      const cxd ml = std::exp(cxd(0.0, mv(l)));
      const cxd cov_expect = mk * std::conj(ml) * hv(k) * std::conj(hv(l)) *
                             sigma(k, l);
      const cxd pseudo_expect = -mk * ml * hv(k) * hv(l) * sigma(k, l);
      CHECK(std::abs(rep.cov(k, l) - cov_expect) < 1e-12);
      CHECK(std::abs(rep.pseudo_cov(k, l) - pseudo_expect) < 1e-12);
    }
  }
}

TEST_CASE("exact and linearized moments agree to first order in sigma") {
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  RngStream rng(105, 0);
  const CMat h = random_cmat(2, 2, rng);
  const CMat zero_cov = CMat::Zero(4, 4);

  PhaseErrorModel model;
  model.sigma_phi2 = 1e-4;
  model.correlation = PhaseCorrelation::exponential;
  model.tau_c = 1.7;

  const MomentReport exact = analytic_moments(h, zero_cov, plan, model);
  const MomentReport lin = linearized_moments(h, plan, model);
  // Means differ exactly by the sqrt(kappa) attenuation factor.
  const double root_kappa = std::exp(-model.sigma_phi2 / 2.0);
  CHECK((exact.mean - root_kappa * lin.mean).cwiseAbs().maxCoeff() < 1e-12);
  // Covariances agree to O(sigma^4) ~ 1e-8.
  CHECK((exact.cov - lin.cov).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ricean properness defect") {
  const double sigma2 = 0.3;
  const double kappa = std::exp(-sigma2);
  const cxd h(2.0, 1.0);
  const cxd defect = ricean_properness_defect(h, sigma2);
  const cxd expect = h * h * (kappa * kappa - kappa);
  CHECK(std::abs(defect - expect) < 1e-14);
  CHECK(std::abs(ricean_properness_defect(h, 0.0)) == 0.0);

  // Small-phase limit: kappa^2 - kappa -> -sigma^2, the linearized
  // pseudo-variance of a scalar channel.
  const double small = 1e-5;
  const cxd d_small = ricean_properness_defect(cxd(1.0, 0.0), small);
  CHECK(std::abs(d_small - cxd(-small, 0.0)) < 1e-9);
}

TEST_CASE("empirical moments reproduce the analytic ones") {
  const SoundingPlan plan = regular_plan(2, 2, 1.0, 2.0);
  RngStream setup(106, 0);
  const CMat h_mean = random_cmat(2, 2, setup);
  const CMat cov_h = random_psd(4, setup);
  const CMat cov_root = psd_sqrt(cov_h);

  PhaseErrorModel model;
  model.sigma_phi2 = 0.1;
  model.correlation = PhaseCorrelation::exponential;
  model.tau_c = 1.5;
  model.delta_omega = 0.6;

  const MomentReport analytic = analytic_moments(h_mean, cov_h, plan, model);
  const EffectiveSampler sampler(plan, model);

  const Eigen::Index n = 60000;
  const auto draw = [&](Eigen::Index i) {
    RngStream rng(2077, static_cast<std::uint64_t>(i));
    const CVec fluct = cov_root * complex_std_normal(4, rng);
    const CMat h = h_mean + unvec(fluct, 2, 2);
    return sampler.draw(h, rng, ThetaMode::exact).h_hat;
  };
  const MomentReport emp = empirical_moments(2, 2, n, draw, 2);
  CHECK(emp.sample_count == n);

  // Mean entries: 5 standard errors, SE^2 = Cov_kk / n.
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double se = std::sqrt(analytic.cov(k, k).real() / n);
    CHECK(std::abs(emp.mean(k) - analytic.mean(k)) < 5.0 * se + 1e-12);
  }
  // Covariance entries: second-moment estimates converge ~ c/sqrt(n).
  const double scale = analytic.cov.cwiseAbs().maxCoeff();
  CHECK((emp.cov - analytic.cov).cwiseAbs().maxCoeff() <
        8.0 * scale / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("empirical moments are thread-count invariant") {
  const auto draw = [](Eigen::Index i) {
    RngStream rng(3001, static_cast<std::uint64_t>(i));
    CMat h(2, 2);
    for (Eigen::Index k = 0; k < 4; ++k)
      h(k % 2, k / 2) = cxd(rng.normal(), rng.normal());
    return h;
  };
  const MomentReport a = empirical_moments(2, 2, 4096, draw, 1);
  const MomentReport b = empirical_moments(2, 2, 4096, draw, 4);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empirical moments from stored draws match the generator form") {
  std::vector<CMat> draws;
  draws.reserve(1500);
  for (Eigen::Index i = 0; i < 1500; ++i) {
    RngStream rng(3002, static_cast<std::uint64_t>(i));
    draws.push_back(CMat::NullaryExpr(
        2, 3, [&](Eigen::Index, Eigen::Index) {
          return cxd(rng.normal(), rng.normal());
        }));
  }
  const MomentReport a = empirical_moments(draws);
  const MomentReport b = empirical_moments(
      2, 3, 1500, [&](Eigen::Index i) { return draws[i]; }, 1);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empirical moments reject tiny sample counts") {
  const auto draw = [](Eigen::Index) { return CMat::Zero(2, 2).eval(); };
  CHECK_THROWS_AS(empirical_moments(2, 2, 999, draw, 1), statistics_error);
}

TEST_CASE("normality probe separates gaussian from heavy-tailed data") {
  RngStream rng(107, 0);
  std::vector<cxd> gauss(100000);
  std::vector<cxd> heavy(100000);
  for (auto& v : gauss) v = cxd(rng.normal(), rng.normal());
  for (auto& v : heavy) {
    const double scale = rng.uniform() < 0.1 ? 4.0 : 1.0;
    v = cxd(scale * rng.normal(), scale * rng.normal());
  }
  CHECK(normality_probe(gauss) < 0.1);
  CHECK(normality_probe(heavy) > 0.5);
}
