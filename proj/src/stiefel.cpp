#include "locq/stiefel.hpp"

#include <stdexcept>

namespace locq {

StiefelPoint::StiefelPoint(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < matrix_.cols())
    throw std::invalid_argument("StiefelPoint: needs n >= l");
  const double residual =
      max_abs(matrix_.adjoint() * matrix_ - CMatrix::Identity(matrix_.cols(), matrix_.cols()));
  if (residual > tol::stiefel_feasibility)
    throw std::invalid_argument("StiefelPoint: columns are not orthonormal");
}

double StiefelPoint::feasibility_residual() const {
  return max_abs(matrix_.adjoint() * matrix_ - CMatrix::Identity(l(), l()));
}

TangentVector::TangentVector(const StiefelPoint& base, CMatrix m) : matrix(std::move(m)) {
  if (matrix.rows() != base.n() || matrix.cols() != base.l())
    throw std::invalid_argument("TangentVector: shape mismatch with base point");
  const CMatrix sym = base.matrix().adjoint() * matrix + matrix.adjoint() * base.matrix();
  if (max_abs(sym) > tol::tangency)
    throw std::invalid_argument("TangentVector: tangency condition violated");
}

double real_hs_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("real_hs_inner: shape mismatch");
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

CMatrix project_to_tangent_raw(const CMatrix& s, const CMatrix& x) {
  if (x.rows() != s.rows() || x.cols() != s.cols())
    throw std::invalid_argument("project_to_tangent: shape mismatch");
  return x - 0.5 * s * (s.adjoint() * x + x.adjoint() * s);
}

TangentVector project_to_tangent(const StiefelPoint& s, const CMatrix& x) {
  return TangentVector(s, project_to_tangent_raw(s.matrix(), x));
}

StiefelPoint retract(const StiefelPoint& s, const CMatrix& step) {
  if (step.rows() != s.n() || step.cols() != s.l())
    throw std::invalid_argument("retract: step shape mismatch");
  return StiefelPoint(thin_qr_orthonormalize(s.matrix() + step));
}

CMatrix random_complex_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

StiefelPoint random_point(Index n, Index l, Rng& rng) {
  if (n < l) throw std::invalid_argument("random_point: needs n >= l");
  return StiefelPoint(thin_qr_orthonormalize(random_complex_gaussian(n, l, rng)));
}

} // namespace locq
