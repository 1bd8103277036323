// SPDX-License-Identifier: MIT

#include "sounder/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sounder/errors.hpp"

namespace sounder {

CVec vec(const CMat& a) {
  return Eigen::Map<const CVec>(a.data(), a.size());
}

RVec vec_real(const RMat& a) {
  return Eigen::Map<const RVec>(a.data(), a.size());
}

CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols) {
    throw dimension_error("unvec: vector of size " + std::to_string(v.size()) +
                          " cannot fill " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  return Eigen::Map<const CMat>(v.data(), rows, cols);
}

RMat unvec_real(const RVec& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols) {
    throw dimension_error("unvec_real: vector of size " +
                          std::to_string(v.size()) + " cannot fill " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const RMat>(v.data(), rows, cols);
}

RMat commutation_matrix(Eigen::Index m, Eigen::Index n) {
  detail::check_positive_index(m, "commutation_matrix m");
  detail::check_positive_index(n, "commutation_matrix n");
  RMat k = RMat::Zero(m * n, m * n);
  // vec(A) index of (i, j) for A m x n is j*m + i; vec(A^T) index is i*n + j.
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i * n + j, j * m + i) = 1.0;
    }
  }
  return k;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMat hadamard(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw dimension_error(
        "hadamard: shapes " + std::to_string(a.rows()) + "x" +
        std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
        std::to_string(b.cols()) + " differ");
  }
  return a.cwiseProduct(b);
}

CMat divec(const CMat& a) {
  const CVec v = vec(a);
  CMat d = CMat::Zero(v.size(), v.size());
  d.diagonal() = v;
  return d;
}

namespace {

/// Solve, sort descending, and verify; shared by herm_eig and psd_sqrt.
EigResult herm_eig_impl(const CMat& a, bool clamp_psd, double clamp_tol) {
  if (a.rows() != a.cols()) {
    throw dimension_error("herm_eig: matrix is " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + ", not square");
  }
  const double norm_a = a.norm();
  const double herm_gap = (a - a.adjoint()).norm();
  if (herm_gap > 1e-10 * std::max(norm_a, 1e-300)) {
    throw numeric_error("herm_eig: matrix is not Hermitian (gap " +
                        std::to_string(herm_gap) + ")");
  }
  const CMat sym = 0.5 * (a + a.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("herm_eig: eigensolver failed to converge");
  }
  // Eigen returns ascending order; flip to descending.
  const Eigen::Index n = sym.rows();
  EigResult res;
  res.values = solver.eigenvalues().reverse();
  res.vectors = solver.eigenvectors().rowwise().reverse();

  const double recon_gap =
      (res.vectors * res.values.asDiagonal() * res.vectors.adjoint() - sym)
          .norm();
  if (norm_a > 0.0 && recon_gap > 1e-10 * norm_a) {
    throw numeric_error("herm_eig: reconstruction residual " +
                        std::to_string(recon_gap) + " exceeds tolerance");
  }

  if (clamp_psd) {
    const double lambda_max = std::max(res.values(0), 0.0);
    const double floor = -clamp_tol * std::max(lambda_max, 1e-300);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (res.values(i) < 0.0) {
        if (res.values(i) < floor) {
          throw numeric_error(
              "herm_eig: eigenvalue " + std::to_string(res.values(i)) +
              " is negative beyond the clamping tolerance");
        }
        res.values(i) = 0.0;
      }
    }
  }
  return res;
}

}  // namespace

EigResult herm_eig(const CMat& a, bool clamp_psd) {
  return herm_eig_impl(a, clamp_psd, 1e-10);
}

CMat psd_sqrt(const CMat& a, double clamp_tol) {
  const EigResult e = herm_eig_impl(a, /*clamp_psd=*/true, clamp_tol);
  return e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.adjoint();
}

RMat psd_sqrt_real(const RMat& a, double clamp_tol) {
  return psd_sqrt(a.cast<cxd>(), clamp_tol).real();
}

GramVolume gram_schmidt_volume(const CMat& s) {
  if (s.rows() > s.cols()) {
    throw dimension_error("gram_schmidt_volume: need rows <= cols, got " +
                          std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()));
  }
  const Eigen::Index r = s.rows();
  GramVolume out;
  out.orthogonal_rows = s;
  out.squared_norms = RVec::Zero(r);
  out.degenerate = false;
  const double scale2 = std::max(s.squaredNorm(), 1e-300);
  for (Eigen::Index i = 0; i < r; ++i) {
    // Modified Gram-Schmidt: subtract projections onto earlier residual rows.
    for (Eigen::Index n = 0; n < i; ++n) {
      if (out.squared_norms(n) <= 0.0) continue;
      // dot() is conjugate-linear in its first argument, so this is
      // <row n, row i> / ||row n||^2.
      const cxd coeff =
          out.orthogonal_rows.row(n).dot(out.orthogonal_rows.row(i)) /
          out.squared_norms(n);
      out.orthogonal_rows.row(i) -= coeff * out.orthogonal_rows.row(n);
    }
    double sq = out.orthogonal_rows.row(i).squaredNorm();
    if (sq < 1e-28 * scale2) {
      sq = 0.0;
      out.degenerate = true;
    }
    out.squared_norms(i) = sq;
  }
  out.det_gram = out.degenerate ? 0.0 : out.squared_norms.prod();
  return out;
}

RVec gram_eigenvalues(const CMat& a) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw dimension_error("gram_eigenvalues: empty matrix");
  }
  const CMat gram = (a.rows() <= a.cols()) ? CMat(a * a.adjoint())
                                           : CMat(a.adjoint() * a);
  return herm_eig(gram, /*clamp_psd=*/true).values;
}

double logdet_capacity_kernel(const CMat& h, double rho) {
  if (h.rows() < 1 || h.cols() < 1) {
    throw dimension_error("logdet_capacity_kernel: empty channel matrix");
  }
  detail::check_nonnegative(rho, "rho");
  const RVec eigs = gram_eigenvalues(h);
  const double scale = rho / static_cast<double>(h.cols());
  double bits = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    bits += std::log2(1.0 + scale * eigs(i));
  }
  return bits;
}

}  // namespace sounder
