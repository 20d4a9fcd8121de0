#pragma once

#include "locq/linalg.hpp"

namespace locq {

/// Hermitian, unit-trace, positive semidefinite matrix representing a quantum
/// state. The constructor enforces all three properties.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix matrix);

  const CMatrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

  /// tr(rho^2), 1 exactly for pure states.
  double purity() const;

 private:
  CMatrix matrix_;
};

struct BipartiteDims {
  Index n_a = 2;
  Index n_b = 2;

  BipartiteDims(Index a, Index b);
  Index joint() const { return n_a * n_b; }
};

} // namespace locq
