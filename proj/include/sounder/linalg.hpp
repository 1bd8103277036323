// SPDX-License-Identifier: MIT
//
// Dense linear-algebra primitives shared by the whole library: column-stacking
// vec/unvec, commutation matrices, Kronecker and Hadamard products, diagonal
// embedding of vectorized matrices, guarded Hermitian eigendecomposition, PSD
// square roots, sequential orthogonalization volumes, and the log-det kernel
// behind every mutual-information evaluation.
//
// Conventions: vec() stacks columns top to bottom, so entry (m, n) of an
// M_R x M_T matrix lands at vec index n*M_R + m (0-based).  All eigenvalue
// lists are returned in descending order.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace sounder {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Column-stacking vectorization.
CVec vec(const CMat& a);
RVec vec_real(const RMat& a);

/// Inverse of vec(): reshape v into rows x cols (column-major).
CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols);
RMat unvec_real(const RVec& v, Eigen::Index rows, Eigen::Index cols);

/// Commutation matrix K_{m,n} of size mn x mn: K_{m,n} vec(A) = vec(A^T) for
/// any m x n matrix A.  Entries are exactly 0 or 1.
RMat commutation_matrix(Eigen::Index m, Eigen::Index n);

/// Kronecker product A (x) B.
CMat kron(const CMat& a, const CMat& b);

/// Entrywise (Hadamard) product with dimension check.
CMat hadamard(const CMat& a, const CMat& b);

/// divec(A) = diag(vec(A)): diagonal matrix carrying A's entries in vec order.
CMat divec(const CMat& a);

/// Hermitian eigendecomposition result, eigenvalues descending.
struct EigResult {
  RVec values;   // descending
  CMat vectors;  // columns match values
};

/// Guarded Hermitian eigendecomposition.
///
/// Requires ||A - A^H||_F <= 1e-10 * max(||A||_F, 1e-300)  (numeric_error
/// otherwise), symmetrizes, solves, sorts descending, and verifies the
/// reconstruction V diag(w) V^H against the symmetrized input to 1e-10
/// relative.  With clamp_psd, eigenvalues in (-1e-10 * lambda_max, 0) are
/// clamped to zero and anything more negative raises numeric_error.
EigResult herm_eig(const CMat& a, bool clamp_psd = false);

/// PSD square root via clamped eigendecomposition: eigenvalues in
/// (-clamp_tol * lambda_max, 0) are treated as zero; more negative ones raise
/// numeric_error.  Returns the Hermitian root V sqrt(L) V^H.
CMat psd_sqrt(const CMat& a, double clamp_tol = 1e-12);
RMat psd_sqrt_real(const RMat& a, double clamp_tol = 1e-12);

/// Sequential (Gram-Schmidt) orthogonalization of the rows of S, in row order.
struct GramVolume {
  CMat orthogonal_rows;  // row i = component of S.row(i) orthogonal to rows < i
  RVec squared_norms;    // ||row i||^2 after orthogonalization
  double det_gram;       // prod of squared_norms = det(S S^H); 0 if degenerate
  bool degenerate;       // true if some squared norm underflowed to ~0
};

/// Orthogonalize rows of S (rows <= cols required) and report the Gram
/// determinant det(S S^H) as the product of residual squared norms.
GramVolume gram_schmidt_volume(const CMat& s);

/// Eigenvalues of the smaller Gram form (A A^H or A^H A, whichever is
/// smaller), descending, clamped to be nonnegative.
RVec gram_eigenvalues(const CMat& a);

/// log2 det(I + (rho / M_T) H H^H) where M_T = H.cols(), evaluated through the
/// smaller of the two Gram forms with a clamped Hermitian eigendecomposition.
double logdet_capacity_kernel(const CMat& h, double rho);

}  // namespace sounder
