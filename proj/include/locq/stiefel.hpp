#pragma once

#include <random>

#include "locq/linalg.hpp"

// Complex Stiefel manifold V_l(C^n): n x l matrices with orthonormal columns.
// Supplies the tangent projection, QR retraction, Haar-frame random sampling
// and the real Hilbert-Schmidt inner product used as the Riemannian metric.

namespace locq {

using Rng = std::mt19937_64;

class StiefelPoint {
 public:
  /// Validates max-abs(S^dag S - I) <= tol::stiefel_feasibility.
  explicit StiefelPoint(CMatrix matrix);

  const CMatrix& matrix() const { return matrix_; }
  Index n() const { return matrix_.rows(); }
  Index l() const { return matrix_.cols(); }

  double feasibility_residual() const;

 private:
  CMatrix matrix_;
};

struct TangentVector {
  /// Validates the tangency condition S^dag T + T^dag S = 0.
  TangentVector(const StiefelPoint& base, CMatrix matrix);

  CMatrix matrix;
};

/// Re(tr(a^dag b)); the real inner product under which gradients are taken.
double real_hs_inner(const CMatrix& a, const CMatrix& b);

/// pi_S(X) = X - S (S^dag X + X^dag S) / 2, the orthogonal projection onto
/// the tangent space at s.
TangentVector project_to_tangent(const StiefelPoint& s, const CMatrix& x);

/// Same map on raw matrices, without constructing a validated TangentVector.
CMatrix project_to_tangent_raw(const CMatrix& s, const CMatrix& x);

/// thin_qr_orthonormalize(s + step): first-order consistent with the additive
/// update and exactly feasible afterwards.
StiefelPoint retract(const StiefelPoint& s, const CMatrix& step);

/// QR of an n x l matrix with independent standard complex Gaussian entries.
StiefelPoint random_point(Index n, Index l, Rng& rng);

/// Standard complex Gaussian matrix (entries re + i*im, each N(0,1)).
CMatrix random_complex_gaussian(Index rows, Index cols, Rng& rng);

} // namespace locq
