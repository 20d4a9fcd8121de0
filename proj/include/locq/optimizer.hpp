#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "locq/objectives.hpp"

// First-order projected gradient ascent/descent with QR retraction: plain
// Stiefel ascent for unconstrained channels, and the alternating two-factor
// scheme for local channels. One iteration of the local scheme is a full
// (A, B) pair of half-steps; stopping compares the objective across pairs.

namespace locq {

enum class OptimizeMode { Maximize, Minimize };

struct OptimizerConfig {
  double step_a = 1e-3; // alpha
  double step_b = 1e-3; // beta
  double tol = 1e-7;    // objective-variation stopping threshold
  long max_iters = 200000;
  int restarts = 8;
  OptimizeMode mode = OptimizeMode::Maximize;
  bool record_trajectory = false;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on non-positive steps/tol, max_iters < 1 or
  /// restarts < 1.
  void validate() const;
};

struct TrajectorySample {
  long iteration = 0;
  double objective = 0.0;
  std::optional<double> fidelity;
  std::optional<double> success_prob;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

struct NonlocalOptimizationResult {
  StiefelPoint best_point;
  double best_value = 0.0;
  long iterations_used = 0;
  bool converged = false;
  std::optional<Trajectory> trajectory;
  int restart_index = 0;
};

struct LocalOptimizationResult {
  LocalChannelPoint best_point;
  double best_value = 0.0;
  long iterations_used = 0;
  bool converged = false;
  std::optional<Trajectory> trajectory;
  int restart_index = 0;
  long transient_dips = 0; // adverse objective changes within the 10*tol slack
  long large_dips = 0;     // adverse changes beyond the slack (should stay 0)
  double final_gradient_norm = 0.0;
};

/// Plain projected gradient iteration S <- retract(S, +-alpha pi_S(G)).
NonlocalOptimizationResult ascend_nonlocal(const NonlocalExpectationObjective& objective,
                                           const StiefelPoint& start, const OptimizerConfig& cfg);

/// Alternating scheme: the A factor moves with S_B frozen, then the B factor
/// with the updated S_A frozen (Eqs. of the two half-steps). Trajectory
/// samples are taken at the start of every pair and once more at the end.
LocalOptimizationResult ascend_local(const LocalObjective& objective,
                                     const LocalChannelPoint& start, const OptimizerConfig& cfg,
                                     int restart_index = 0);

struct FactorShape {
  Index n_a = 8, l_a = 2, n_b = 8, l_b = 2;

  /// Stacked-Kraus shape for local dimensions (N_A, N_B): n = N^3, l = N.
  static FactorShape for_dims(Index dim_a, Index dim_b) {
    return FactorShape{dim_a * dim_a * dim_a, dim_a, dim_b * dim_b * dim_b, dim_b};
  }
};

struct MultiRestartResult {
  LocalOptimizationResult best;
  std::optional<Trajectory> warm_trajectory; // trajectory of the warm-start run, when supplied
  int failed_restarts = 0;
};

/// Runs cfg.restarts independent random starts (restart k seeded with
/// seed + k) plus, when supplied, a warm start with restart index -1. Restarts
/// execute in parallel; the merge keeps the best value, ties going to the
/// lower restart index. Restarts that raise MeasureZeroError or NonFiniteError
/// are recorded as failures and skipped; if every run fails the last error is
/// rethrown.
MultiRestartResult multi_restart(const LocalObjective& objective, const FactorShape& shape,
                                 const OptimizerConfig& cfg,
                                 const std::optional<LocalChannelPoint>& warm_start = std::nullopt);

} // namespace locq
