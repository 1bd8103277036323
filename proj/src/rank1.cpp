// SPDX-License-Identifier: MIT

#include "sounder/rank1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sounder/errors.hpp"
#include "sounder/special.hpp"

namespace sounder {

namespace {

constexpr double kLog2E = 1.4426950408889634073599246810019;

/// log2(1 + e^L), stable for any L.
double log2_one_plus_exp(double l) {
  if (l == -std::numeric_limits<double>::infinity()) return 0.0;
  if (l > 40.0) return kLog2E * (l + std::log1p(std::exp(-l)));
  return std::log2(1.0 + std::exp(l));
}

/// log(sum exp(ls)) over finite entries; -inf when all are -inf.
double log_sum_exp(const std::vector<double>& ls) {
  double m = -std::numeric_limits<double>::infinity();
  for (double l : ls) m = std::max(m, l);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double acc = 0.0;
  for (double l : ls) {
    if (l != -std::numeric_limits<double>::infinity()) {
      acc += std::exp(l - m);
    }
  }
  return m + std::log(acc);
}

void check_sizes(Eigen::Index m_r, Eigen::Index m_t) {
  detail::check_positive_index(m_r, "m_r");
  detail::check_positive_index(m_t, "m_t");
}

void check_bound_args(Eigen::Index m_r, Eigen::Index m_t, double rho,
                      double sigma2) {
  check_sizes(m_r, m_t);
  detail::check_nonnegative(rho, "rho");
  detail::check_nonnegative(sigma2, "sigma2");
}

}  // namespace

double hadamard_rank1_identity_gap(const CVec& g, const CVec& h,
                                   const CMat& theta) {
  if (theta.rows() != g.size() || theta.cols() != h.size()) {
    throw dimension_error("hadamard_rank1_identity_gap: theta is " +
                          std::to_string(theta.rows()) + "x" +
                          std::to_string(theta.cols()) + ", factors give " +
                          std::to_string(g.size()) + "x" +
                          std::to_string(h.size()));
  }
  const CMat lhs = (g * h.transpose()).cwiseProduct(theta);
  const CMat rhs = g.asDiagonal() * theta * h.asDiagonal();
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

DetFactorization det_factorization(const CVec& g, const CVec& h,
                                   const CMat& theta) {
  if (theta.rows() != g.size() || theta.cols() != h.size()) {
    throw dimension_error("det_factorization: theta is " +
                          std::to_string(theta.rows()) + "x" +
                          std::to_string(theta.cols()) + ", factors give " +
                          std::to_string(g.size()) + "x" +
                          std::to_string(h.size()));
  }
  // Reduce to the rows <= cols orientation by transposing the product:
  // (g h^T . Theta)^T = (h g^T) . Theta^T, and both Gram determinants agree.
  if (g.size() > h.size()) {
    return det_factorization(h, g, theta.transpose());
  }
  const CMat h_eff = (g * h.transpose()).cwiseProduct(theta);
  DetFactorization out;
  out.det_effective = gram_eigenvalues(h_eff).prod();
  out.det_theta = gram_eigenvalues(theta).prod();

  const RVec g2 = g.cwiseAbs2();
  const RVec h2 = h.cwiseAbs2();
  const double g2_prod = g2.prod();
  const double h2_min = h2.minCoeff();
  const double h2_max = h2.maxCoeff();
  const Eigen::Index a = g.size();
  out.lower = g2_prod * std::pow(h2_min, static_cast<double>(a)) * out.det_theta;
  out.upper = g2_prod * std::pow(h2_max, static_cast<double>(a)) * out.det_theta;
  if (g.size() == h.size()) {
    out.square_value = g2_prod * h2.prod() * out.det_theta;
  } else {
    out.square_value = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double sample_logdet_effective(Eigen::Index m_r, Eigen::Index m_t,
                               double sigma2, bool linearized,
                               RngStream& rng) {
  check_sizes(m_r, m_t);
  detail::check_nonnegative(sigma2, "sigma2");
  const double sigma = std::sqrt(sigma2);
  // Build the perturbed all-ones matrix in the rows <= cols orientation
  // (transposing does not change the phase statistics: IID either way).
  const Eigen::Index a = std::min(m_r, m_t);
  const Eigen::Index b = std::max(m_r, m_t);
  CMat theta(a, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < a; ++i) {
      const double phi = sigma * rng.normal();
      theta(i, j) = linearized ? cxd(1.0, phi) : std::polar(1.0, phi);
    }
  }
  const GramVolume gv = gram_schmidt_volume(theta);
  if (gv.degenerate) {
    throw numeric_error("sample_logdet_effective: degenerate draw");
  }
  double log2det = 0.0;
  for (Eigen::Index i = 0; i < gv.squared_norms.size(); ++i) {
    log2det += std::log2(gv.squared_norms(i));
  }
  return log2det;
}

double sample_logdet_law(Eigen::Index m_r, Eigen::Index m_t, double sigma2,
                         LogdetLaw law, RngStream& rng) {
  check_sizes(m_r, m_t);
  detail::check_positive(sigma2, "sigma2");
  const int a = static_cast<int>(std::min(m_r, m_t));
  const int b = static_cast<int>(std::max(m_r, m_t));
  const double ab = static_cast<double>(a) * static_cast<double>(b);
  double log2det = 0.0;
  if (law == LogdetLaw::approximate) {
    log2det += std::log2(sample_chi2(b, sigma2, rng) + ab);
    for (int i = 1; i <= a - 1; ++i) {
      log2det += std::log2(sample_chi2(b - i, sigma2, rng));
    }
    return log2det;
  }
  // Exact law: the leading factor couples a chi-square with b - a + 1
  // degrees of freedom to a Beta((b-a+1)/2, (a-1)/2) weight on ab, and the
  // remaining factors gain one degree of freedom each.
  const double beta = sample_beta(0.5 * static_cast<double>(b - a + 1),
                                  0.5 * static_cast<double>(a - 1), rng);
  log2det += std::log2(sample_chi2(b - a + 1, sigma2, rng) + ab * beta);
  for (int i = 1; i <= a - 1; ++i) {
    log2det += std::log2(sample_chi2(b - i + 1, sigma2, rng));
  }
  return log2det;
}

std::uint64_t binomial_exact(int n, int k) {
  if (n < 0 || k < 0 || k > n) {
    throw domain_error("binomial_exact: need 0 <= k <= n, got n = " +
                       std::to_string(n) + ", k = " + std::to_string(k));
  }
  if (n > 32) {
    throw range_error("binomial_exact supports n <= 32, got " +
                      std::to_string(n));
  }
  // Pascal's rule on one row; all intermediates fit comfortably in 64 bits.
  std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j - 1)];
  }
  return row[static_cast<std::size_t>(k)];
}

double capacity_lower_bound_minor_sum(Eigen::Index m_r, Eigen::Index m_t,
                                      double rho, double sigma2) {
  check_bound_args(m_r, m_t, rho, sigma2);
  if (rho == 0.0) return 0.0;
  const int a = static_cast<int>(std::min(m_r, m_t));
  const int b = static_cast<int>(std::max(m_r, m_t));
  if (a > 32) {
    throw range_error("capacity_lower_bound_minor_sum: min(m_r, m_t) <= 32 "
                      "required for exact binomials");
  }
  const double ln_snr = std::log(rho / static_cast<double>(m_t));
  // Precompute ln of the per-level factors 2 sigma2 e^{psi((b-i)/2)}.
  std::vector<double> ln_noise(static_cast<std::size_t>(a));
  for (int i = 0; i < a; ++i) {
    ln_noise[static_cast<std::size_t>(i)] =
        (sigma2 > 0.0)
            ? std::log(2.0 * sigma2) + digamma(0.5 * static_cast<double>(b - i))
            : -std::numeric_limits<double>::infinity();
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(a));
  for (int n = 1; n <= a; ++n) {
    double ln_term = static_cast<double>(n) * ln_snr +
                     std::log(static_cast<double>(binomial_exact(a, n)));
    bool zero = false;
    for (int i = 0; i < n; ++i) {
      // Factor i = 0 carries the deterministic n*b part.
      const double noise = (sigma2 > 0.0)
                               ? std::exp(ln_noise[static_cast<std::size_t>(i)])
                               : 0.0;
      const double factor =
          (i == 0 ? static_cast<double>(n) * static_cast<double>(b) : 0.0) +
          noise;
      if (factor <= 0.0) {
        zero = true;
        break;
      }
      ln_term += std::log(factor);
    }
    if (!zero) terms.push_back(ln_term);
  }
  return log2_one_plus_exp(log_sum_exp(terms));
}

double capacity_lower_bound_stream_split(Eigen::Index m_r, Eigen::Index m_t,
                                         double rho, double sigma2) {
  check_bound_args(m_r, m_t, rho, sigma2);
  const int a = static_cast<int>(std::min(m_r, m_t));
  const int b = static_cast<int>(std::max(m_r, m_t));
  const double snr = rho / static_cast<double>(m_t);
  double bits = 0.0;
  for (int i = 0; i < a; ++i) {
    const double noise =
        (sigma2 > 0.0)
            ? 2.0 * sigma2 *
                  std::exp(digamma(0.5 * static_cast<double>(b - i)))
            : 0.0;
    const double direct =
        (i == 0) ? static_cast<double>(a) * static_cast<double>(b) : 0.0;
    bits += std::log2(1.0 + snr * (direct + noise));
  }
  return bits;
}

double capacity_upper_bound(Eigen::Index m_r, Eigen::Index m_t, double rho,
                            double sigma2) {
  check_bound_args(m_r, m_t, rho, sigma2);
  if (rho == 0.0) return 0.0;
  const int a = static_cast<int>(std::min(m_r, m_t));
  if (static_cast<int>(std::max(m_r, m_t)) > 32) {
    throw range_error("capacity_upper_bound: max(m_r, m_t) <= 32 required "
                      "for exact binomials");
  }
  if (sigma2 == 0.0) {
    return std::log2(1.0 + rho * static_cast<double>(m_r));
  }
  const double ln_snr_s2 = std::log(rho * sigma2 / static_cast<double>(m_t));
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(a));
  double ln_factorial = 0.0;
  for (int n = 1; n <= a; ++n) {
    ln_factorial += std::log(static_cast<double>(n));
    const double ln_term =
        static_cast<double>(n) * ln_snr_s2 +
        std::log(static_cast<double>(binomial_exact(static_cast<int>(m_r), n))) +
        std::log(static_cast<double>(binomial_exact(static_cast<int>(m_t), n))) +
        ln_factorial +
        std::log1p(static_cast<double>(n) / sigma2);
    terms.push_back(ln_term);
  }
  return log2_one_plus_exp(log_sum_exp(terms));
}

double mi_variance_high_snr(Eigen::Index m_r, Eigen::Index m_t,
                            double sigma2) {
  check_sizes(m_r, m_t);
  detail::check_nonnegative(sigma2, "sigma2");
  const int a = static_cast<int>(std::min(m_r, m_t));
  const int b = static_cast<int>(std::max(m_r, m_t));
  double acc = 2.0 * sigma2 * sigma2 /
               (static_cast<double>(b) * static_cast<double>(a) *
                static_cast<double>(a));
  for (int i = 1; i <= a - 1; ++i) {
    acc += trigamma(0.5 * static_cast<double>(b - i));
  }
  return kLog2E * kLog2E * acc;
}

double mi_variance_iid_reference(Eigen::Index m_r, Eigen::Index m_t) {
  check_sizes(m_r, m_t);
  const int a = static_cast<int>(std::min(m_r, m_t));
  const int b = static_cast<int>(std::max(m_r, m_t));
  double acc = 0.0;
  for (int i = 1; i <= a; ++i) {
    acc += trigamma(static_cast<double>(b - i + 1));
  }
  return kLog2E * kLog2E * acc;
}

CMat rank1_shifted_phase_matrix(Eigen::Index m_r, Eigen::Index m_t,
                                double sigma2, RngStream& rng) {
  check_sizes(m_r, m_t);
  detail::check_nonnegative(sigma2, "sigma2");
  const double sigma = std::sqrt(sigma2);
  CMat s(m_r, m_t);
  for (Eigen::Index j = 0; j < m_t; ++j) {
    for (Eigen::Index i = 0; i < m_r; ++i) {
      s(i, j) = cxd(sigma * rng.normal(), 0.0);
    }
  }
  s(0, 0) -= cxd(0.0, std::sqrt(static_cast<double>(m_r) *
                                static_cast<double>(m_t)));
  return s;
}

ProjectorSpectrum projector_spectrum(const CMat& s, Eigen::Index i) {
  if (i < 2 || i > s.rows()) {
    throw domain_error("projector_spectrum: i must be in [2, rows], got " +
                       std::to_string(i));
  }
  if (s.rows() > s.cols()) {
    throw dimension_error("projector_spectrum: need rows <= cols");
  }
  const Eigen::Index b = s.cols();
  const GramVolume gv = gram_schmidt_volume(s.topRows(i - 1));
  if (gv.degenerate) {
    throw numeric_error("projector_spectrum: degenerate orthogonalization");
  }
  CMat a_i = CMat::Identity(b, b);
  for (Eigen::Index n = 0; n < i - 1; ++n) {
    const CVec row = gv.orthogonal_rows.row(n).transpose();
    a_i -= (row * row.adjoint()) / gv.squared_norms(n);
  }
  const CMat re_a = a_i.real().cast<cxd>();
  const EigResult eig = herm_eig(re_a);

  ProjectorSpectrum out;
  out.eigenvalues = eig.values;  // descending
  // Expected layout sorted descending: (b - i) ones, then {1-eta, eta},
  // then (i - 2) zeros.
  const Eigen::Index ones = b - i;
  out.ones_gap = 0.0;
  for (Eigen::Index k = 0; k < ones; ++k) {
    out.ones_gap = std::max(out.ones_gap, std::abs(eig.values(k) - 1.0));
  }
  out.zeros_gap = 0.0;
  for (Eigen::Index k = ones + 2; k < b; ++k) {
    out.zeros_gap = std::max(out.zeros_gap, std::abs(eig.values(k)));
  }
  const double top = eig.values(ones);
  const double bottom = eig.values(ones + 1);
  out.eta = bottom;
  out.pair_sum_gap = std::abs(top + bottom - 1.0);
  return out;
}

double eta2_from_phases(const RVec& phi_row, Eigen::Index m_r) {
  detail::check_positive_index(m_r, "m_r");
  if (phi_row.size() < 1) {
    throw dimension_error("eta2_from_phases: empty phase row");
  }
  const double ab = static_cast<double>(m_r) *
                    static_cast<double>(phi_row.size());
  const double phi1 = phi_row(0);
  const double norm2 = phi_row.squaredNorm();
  const double disc = std::sqrt(4.0 * ab * phi1 * phi1 +
                                (ab - norm2) * (ab - norm2));
  return 0.5 - 0.5 * disc / (ab + norm2);
}

Eta2Moments eta2_moments(Eigen::Index m_r, Eigen::Index m_t, double sigma2) {
  check_sizes(m_r, m_t);
  detail::check_nonnegative(sigma2, "sigma2");
  const double mt = static_cast<double>(m_t);
  const double mr = static_cast<double>(m_r);
  Eta2Moments out;
  out.mean = sigma2 * (mt - 1.0) / (mt * mr);
  out.variance = 2.0 * sigma2 * sigma2 * (mt - 1.0) / (mt * mt * mr * mr);
  return out;
}

RVec lemma_pair_eigenvalues_actual(const CMat& x) {
  if (x.rows() < x.cols() || x.cols() < 1) {
    throw dimension_error("lemma_pair_eigenvalues_actual: need N x n with "
                          "n <= N and n >= 1");
  }
  RMat y(x.rows(), 2 * x.cols());
  y.leftCols(x.cols()) = x.real();
  y.rightCols(x.cols()) = x.imag();
  const RMat gram = y.transpose() * y;
  return herm_eig(gram.cast<cxd>()).values;
}

RVec lemma_pair_eigenvalues_predicted(const CMat& x) {
  if (x.rows() < x.cols() || x.cols() < 1) {
    throw dimension_error("lemma_pair_eigenvalues_predicted: need N x n with "
                          "n <= N and n >= 1");
  }
  const CMat a = (x.transpose() * x) * (x.adjoint() * x.conjugate());
  const EigResult eig = herm_eig(a);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(2 * x.cols()));
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double root = std::sqrt(std::max(eig.values(i), 0.0));
    vals.push_back(0.5 * (1.0 + root));
    vals.push_back(0.5 * (1.0 - root));
  }
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  return Eigen::Map<const RVec>(vals.data(),
                                static_cast<Eigen::Index>(vals.size()));
}

}  // namespace sounder
