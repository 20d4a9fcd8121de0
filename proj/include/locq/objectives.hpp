#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "locq/channels.hpp"
#include "locq/qinfo.hpp"

// The three differentiable objectives on (local) Stiefel points: expectation
// of an observable, distance to a target state, and post-selected fidelity.
// Gradients are taken in the ambient space and pushed through the
// locality-preserving projection pipeline: first onto the separable subspaces
// S_A (x) C^{n_B x l_B} and C^{n_A x l_A} (x) S_B, then onto the factor
// tangent spaces.

namespace locq {

struct ObservableSet {
  /// Validates Hermiticity and unit Hilbert-Schmidt norm of every operator.
  explicit ObservableSet(std::vector<CMatrix> operators);

  std::vector<CMatrix> operators;
};

/// The 15 normalized two-qubit Pauli products (sigma_mu (x) sigma_nu)/2 with
/// (mu, nu) != (0, 0): a tomographically complete orthonormal set.
ObservableSet tomographic_pauli_set();

/// The four operators spanning the Hermitian operators on span{|Psi+->, |11>},
/// the subspace carrying every R-state of the chosen sign.
ObservableSet r_state_observables(Bell sign = Bell::PsiPlus);

struct LiftedObservable {
  /// lifted = I_{N^2} (x) base, the observable pulled up to the stacked space.
  explicit LiftedObservable(CMatrix base_in);

  CMatrix base;
  CMatrix lifted;
  Index system_dim() const { return base.rows(); }
};

struct ObjectiveValueAndGradient {
  double value = 0.0;
  CMatrix grad_a;       // tangent factor step for S_A
  CMatrix grad_b;       // tangent factor step for S_B
  CMatrix raw_gradient; // ambient gradient on kron(S_A, S_B), pre-projection
  bool used_squared_surrogate = false;
};

// ---------------------------------------------------------------------------
// Matrix-level forms. These accept arbitrary ambient matrices so finite
// difference probes can step off the manifold.
// ---------------------------------------------------------------------------

/// Re(tr(S rho S^dag A)), the basic expectation form.
double expectation_trace(const CMatrix& s, const CMatrix& rho, const CMatrix& a);

/// 2 A S rho, its ambient gradient.
CMatrix ambient_gradient(const CMatrix& s, const CMatrix& rho, const CMatrix& a);

/// U_sigma^dag op U_sigma: an operator on the stacked ordering re-expressed in
/// the tensor row ordering of kron(S_A, S_B).
CMatrix rotate_to_tensor_frame(const CMatrix& op, const std::vector<Index>& sigma);

// ---------------------------------------------------------------------------
// Expectation objective (nonlocal and local)
// ---------------------------------------------------------------------------

double expectation_value(const StiefelPoint& s, const LiftedObservable& o,
                         const DensityMatrix& rho);
CMatrix expectation_gradient(const StiefelPoint& s, const LiftedObservable& o,
                             const DensityMatrix& rho);

double local_expectation(const LocalChannelPoint& c, const LiftedObservable& o,
                         const DensityMatrix& rho);
/// 2 (U_sigma^dag O~ U_sigma) S~ rho, the ambient gradient before any projection.
CMatrix local_gradient_raw(const LocalChannelPoint& c, const LiftedObservable& o,
                           const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Locality-preserving projections
// ---------------------------------------------------------------------------

/// Factor M_B of the projection of g onto S_A (x) C^{n_B x l_B}:
/// M_B = sum_{p,q} conj(S_A[p,q]) g_block[p,q] / |S_A|_F^2, where g is read as
/// an n_A x l_A grid of n_B x l_B blocks.
CMatrix project_factor_b(const CMatrix& g, const LocalChannelPoint& c);

/// Mirror image: factor M_A with P_B(g) = M_A (x) S_B.
CMatrix project_factor_a(const CMatrix& g, const LocalChannelPoint& c);

/// Both factors pushed into their tangent spaces: the directions the
/// alternating updates move along.
std::pair<TangentVector, TangentVector> local_projected_gradients(const LocalChannelPoint& c,
                                                                  const CMatrix& g);

// ---------------------------------------------------------------------------
// Distance-to-target objective
// ---------------------------------------------------------------------------

double distance_objective(const LocalChannelPoint& c, const DensityMatrix& rho_in,
                          const DensityMatrix& rho_target, const ObservableSet& m);

struct DistanceGradient {
  CMatrix gradient;
  bool used_squared_surrogate = false;
};

/// Chain-rule gradient (1/D) sum_i grad(J_i) (J_i - t_i). At D below
/// tol::distance_singular the square-root metric is singular and the gradient
/// of the squared distance is returned instead, with the flag set.
DistanceGradient distance_gradient(const LocalChannelPoint& c, const DensityMatrix& rho_in,
                                   const DensityMatrix& rho_target, const ObservableSet& m);

// ---------------------------------------------------------------------------
// Post-selected objective
// ---------------------------------------------------------------------------

struct PostselectedValue {
  double value = 0.0;        // J_1 / J_2
  double success_prob = 0.0; // J_2
};

PostselectedValue postselected_objective(const LocalChannelPoint& c, const Selector& omega,
                                         const LiftedObservable& o, const DensityMatrix& rho);

/// Quotient-rule gradient grad(J_1)/J_2 - J_1 grad(J_2)/J_2^2.
CMatrix postselected_gradient(const LocalChannelPoint& c, const Selector& omega,
                              const LiftedObservable& o, const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Objective functionals consumed by the optimizer
// ---------------------------------------------------------------------------

class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  virtual double value(const LocalChannelPoint& c) const = 0;
  virtual ObjectiveValueAndGradient evaluate(const LocalChannelPoint& c) const = 0;

  /// Diagnostics stored into trajectories: (fidelity, success probability).
  virtual std::optional<std::pair<double, double>> probe(const LocalChannelPoint&) const {
    return std::nullopt;
  }
};

/// J_loc(S~) = Re tr(S~ rho S~^dag U^dag O~ U). Maximize.
class LocalExpectationObjective : public LocalObjective {
 public:
  LocalExpectationObjective(LiftedObservable o, DensityMatrix rho);

  double value(const LocalChannelPoint& c) const override;
  ObjectiveValueAndGradient evaluate(const LocalChannelPoint& c) const override;

 private:
  LiftedObservable observable_;
  DensityMatrix rho_;
};

/// Value is the distance D; the evaluated gradient is the gradient of D^2/2,
/// which shares minimizers with D and stays smooth all the way to zero where
/// fixed-step descent on the square-root metric would oscillate. Minimize.
class DistanceObjective : public LocalObjective {
 public:
  DistanceObjective(DensityMatrix rho_in, DensityMatrix rho_target, ObservableSet m);

  double value(const LocalChannelPoint& c) const override;
  ObjectiveValueAndGradient evaluate(const LocalChannelPoint& c) const override;

  const std::vector<double>& targets() const { return targets_; }

 private:
  DensityMatrix rho_in_;
  DensityMatrix rho_target_;
  ObservableSet observables_;
  std::vector<double> targets_;
};

/// J_C = J_1 / J_2 restricted to the kept Kraus blocks. Maximize. probe()
/// reports (J_C, J_2), the post-selected fidelity and success probability.
class PostselectedObjective : public LocalObjective {
 public:
  PostselectedObjective(LiftedObservable o, DensityMatrix rho, Selector omega);

  double value(const LocalChannelPoint& c) const override;
  ObjectiveValueAndGradient evaluate(const LocalChannelPoint& c) const override;
  std::optional<std::pair<double, double>> probe(const LocalChannelPoint& c) const override;

  const Selector& selector() const { return omega_; }

 private:
  LiftedObservable observable_;
  DensityMatrix rho_;
  Selector omega_;
};

/// Single-system expectation functional for the unconstrained ascent.
class NonlocalExpectationObjective {
 public:
  NonlocalExpectationObjective(LiftedObservable o, DensityMatrix rho);

  double value(const StiefelPoint& s) const;
  /// Value plus the tangent-projected gradient at s.
  std::pair<double, CMatrix> evaluate(const StiefelPoint& s) const;

 private:
  LiftedObservable observable_;
  DensityMatrix rho_;
};

} // namespace locq
