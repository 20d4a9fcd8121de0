#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "locq/tolerances.hpp"

// Dense complex matrix kernel. Everything downstream (Stiefel geometry,
// channels, objectives) is expressed in terms of these primitives.

namespace locq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest absolute entry of a matrix (0 for empty matrices).
double max_abs(const CMatrix& a);

/// Conjugate transpose.
CMatrix dagger(const CMatrix& a);

/// Matrix product with an explicit dimension check.
CMatrix matmul(const CMatrix& a, const CMatrix& b);

/// Trace of a square matrix.
Complex trace(const CMatrix& a);

/// Kronecker product, block ordering a(i,j) * b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// True when max-abs(a - a^dag) <= tolerance.
bool is_hermitian(const CMatrix& a, double tolerance = tol::hermiticity);

struct Eigensystem {
  RVector eigenvalues;  // sorted descending
  CMatrix eigenvectors; // column k pairs with eigenvalues[k]
};

/// Full eigensystem of a Hermitian matrix. Eigenvalues are sorted in
/// descending order and each eigenvector's first nonzero component is made
/// real positive so repeated runs produce identical output.
/// Throws std::invalid_argument when the input is not Hermitian within
/// tol::hermiticity.
Eigensystem hermitian_eigensystem(const CMatrix& a);

/// Thin QR orthonormalization: returns Q with Q^dag Q = I and the same column
/// span as the input; the R factor's diagonal is made real non-negative so the
/// result is unique. Requires rows >= cols and full column rank (a diagonal
/// entry of R below tol::qr_rank throws std::invalid_argument).
CMatrix thin_qr_orthonormalize(const CMatrix& a);

/// Unitary 0/1 matrix P with (P x)[i] = x[perm[i]]. perm must be a bijection
/// on {0..m-1}.
CMatrix permutation_matrix(const std::vector<Index>& perm);

/// Gathers rows: out.row(i) = m.row(perm[i]). Equivalent to permutation_matrix(perm) * m.
CMatrix permute_rows(const CMatrix& m, const std::vector<Index>& perm);

/// Scatters rows: out.row(perm[i]) = m.row(i). Equivalent to permutation_matrix(perm)^dag * m.
CMatrix unpermute_rows(const CMatrix& m, const std::vector<Index>& perm);

/// Inverse permutation.
std::vector<Index> invert_permutation(const std::vector<Index>& perm);

} // namespace locq
