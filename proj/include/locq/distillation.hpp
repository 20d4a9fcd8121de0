#pragma once

#include <optional>
#include <vector>

#include "locq/optimizer.hpp"

// Entanglement distillation for weakly entangled two-qubit states.
// Approach 1 first optimizes a local channel that drags the input toward an
// R-state and then runs the EPL protocol on two copies of the transformed
// state. Approach 2 directly maximizes the post-selected fidelity with
// |Psi+> over local four-outcome measurements keeping outcome (0, 0).

namespace locq {

struct EplOutcome {
  DensityMatrix output_state; // the surviving A1 B1 pair
  double success_prob = 0.0;
  double fidelity_psi_plus = 0.0;
};

/// EPL protocol on two copies of a two-qubit state: bilateral CNOT
/// (A1->A2, B1->B2), sigma_z measurements on A2 and B2, keep when both
/// read |1>, trace out the measured qubits. Throws MeasureZeroError when the
/// keep probability vanishes.
EplOutcome epl(const DensityMatrix& input_pair);

/// Brute-force reference: explicit CNOT matrices, explicit projector
/// post-selection and an index-loop partial trace on the full 16-dimensional
/// joint state. Exists so the fast path has an in-artifact cross-check.
EplOutcome epl_reference(const DensityMatrix& input_pair);

struct Approach1PerP {
  double p = 0.0;
  Bell sign = Bell::PsiPlus;  // R-state sign that fit best
  double distance = 0.0;      // residual distance to rho_R(p)
  DensityMatrix transformed_state;
  std::optional<EplOutcome> epl; // empty when post-selection had measure zero
};

struct Approach1Result {
  std::vector<double> p_grid;
  std::vector<Approach1PerP> per_p;
  double best_p = 0.0;
  double best_fidelity = 0.0;
  double best_success_prob = 0.0;
  size_t best_index = 0;
};

/// 19 points {0.05, 0.10, ..., 0.95}.
std::vector<double> default_p_grid();

/// For each grid value p: fit the channel minimizing the distance to
/// rho_R(p) over both Bell signs, apply it, run EPL, record fidelity and
/// success probability. The best entry maximizes fidelity, ties broken by
/// larger success probability.
Approach1Result approach1(const DensityMatrix& rho_in, const std::vector<double>& p_grid,
                          const OptimizerConfig& cfg);

struct Approach2Result {
  LocalChannelPoint optimized_channel;
  Trajectory trajectory; // the warm-start run, sampled every (A, B) pair
  double final_fidelity = 0.0;
  double final_success_prob = 0.0;
  double warm_start_fidelity = 0.0; // equals the FEF of the input
};

/// Builds the deterministic fidelity-maximizing local unitary channel as the
/// warm start (Kraus block 0 carries the unitary, all other blocks zero),
/// then maximizes the post-selected fidelity with |Psi+> keeping block 0 of
/// the 16 product outcomes.
Approach2Result approach2(const DensityMatrix& rho_in, const OptimizerConfig& cfg);

struct BatchRecord {
  size_t index = 0;
  double initial_fef = 0.0;
  bool a1_ok = false;
  double a1_fidelity = 0.0;
  double a1_success = 0.0;
  double a1_best_p = 0.0;
  double a1_output_fef = 0.0;
  bool a2_ok = false;
  double a2_fidelity = 0.0;
  double a2_success = 0.0;
  double a2_output_fef = 0.0;
};

/// Runs both pipelines on every state. Per-state failures are recorded and
/// the batch continues.
std::vector<BatchRecord> batch_experiment(const std::vector<DensityMatrix>& states,
                                          const OptimizerConfig& cfg);

} // namespace locq
