#include "locq/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace locq {

double max_abs(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

CMatrix dagger(const CMatrix& a) { return a.adjoint(); }

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  return a * b;
}

Complex trace(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("trace: matrix is not square");
  return a.trace();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_hermitian(const CMatrix& a, double tolerance) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tolerance;
}

namespace {

// First component with magnitude above the deflation cutoff is rotated onto
// the positive real axis; eigenvectors then come out phase-fixed.
void fix_column_phases(CMatrix& v) {
  constexpr double cutoff = 1e-12;
  for (Index k = 0; k < v.cols(); ++k) {
    for (Index i = 0; i < v.rows(); ++i) {
      const Complex c = v(i, k);
      if (std::abs(c) > cutoff) {
        v.col(k) *= std::conj(c) / std::abs(c);
        break;
      }
    }
  }
}

} // namespace

Eigensystem hermitian_eigensystem(const CMatrix& a) {
  if (!is_hermitian(a))
    throw std::invalid_argument("hermitian_eigensystem: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (a + a.adjoint()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigensystem: eigensolver failed");
  Eigensystem out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  fix_column_phases(out.eigenvectors);
  return out;
}

CMatrix thin_qr_orthonormalize(const CMatrix& a) {
  if (a.rows() < a.cols())
    throw std::invalid_argument("thin_qr_orthonormalize: more columns than rows");
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
  const CMatrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Index k = 0; k < a.cols(); ++k) {
    const double mag = std::abs(r(k, k));
    if (mag < tol::qr_rank)
      throw std::invalid_argument("thin_qr_orthonormalize: rank-deficient input");
    q.col(k) *= r(k, k) / mag; // makes the implicit R diagonal real non-negative
  }
  return q;
}

CMatrix permutation_matrix(const std::vector<Index>& perm) {
  const Index m = static_cast<Index>(perm.size());
  std::vector<bool> seen(perm.size(), false);
  for (Index v : perm) {
    if (v < 0 || v >= m || seen[static_cast<size_t>(v)])
      throw std::invalid_argument("permutation_matrix: sequence is not a bijection");
    seen[static_cast<size_t>(v)] = true;
  }
  CMatrix p = CMatrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) p(i, perm[static_cast<size_t>(i)]) = 1.0;
  return p;
}

CMatrix permute_rows(const CMatrix& m, const std::vector<Index>& perm) {
  CMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<size_t>(i)]);
  return out;
}

CMatrix unpermute_rows(const CMatrix& m, const std::vector<Index>& perm) {
  CMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(perm[static_cast<size_t>(i)]) = m.row(i);
  return out;
}

std::vector<Index> invert_permutation(const std::vector<Index>& perm) {
  std::vector<Index> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[static_cast<size_t>(perm[i])] = static_cast<Index>(i);
  return inv;
}

} // namespace locq
