#pragma once

#include <set>
#include <vector>

#include "locq/density.hpp"
#include "locq/errors.hpp"
#include "locq/stiefel.hpp"

// Kraus families and their Stiefel-manifold packaging. A channel on an
// N-dimensional system is a vertical stack of N^2 Kraus blocks, an N^3 x N
// matrix with orthonormal columns. A local channel on A x B is the pair
// (S_A, S_B) together with the fixed row permutation sigma that turns
// S_A (x) S_B into the stack of the product operators K_i^A (x) K_j^B.

namespace locq {

struct KrausSet {
  /// Validates sum K^dag K = I within tol::kraus_completeness.
  KrausSet(Index dim, std::vector<CMatrix> operators);

  Index dim = 0;
  std::vector<CMatrix> operators;
};

/// Row permutation sending kron(S_A, S_B) to the stack of kron(K_i, K_j),
/// ordered lexicographically in (i, j). Row (i*N_A + p) of S_A combined with
/// row (j*N_B + q) of S_B sits at tensor row (i*N_A + p)*n_B + j*N_B + q and
/// must land in block i*N_B^2 + j at inner row p*N_B + q.
std::vector<Index> build_sigma(Index n_a, Index l_a, Index n_b, Index l_b);

class LocalChannelPoint {
 public:
  LocalChannelPoint(StiefelPoint s_a, StiefelPoint s_b);

  const StiefelPoint& s_a() const { return s_a_; }
  const StiefelPoint& s_b() const { return s_b_; }
  const std::vector<Index>& sigma() const { return sigma_; }

  Index dim_a() const { return s_a_.l(); } // N_A
  Index dim_b() const { return s_b_.l(); } // N_B
  Index joint_dim() const { return dim_a() * dim_b(); }
  Index block_count() const { return dim_a() * dim_a() * dim_b() * dim_b(); }

  /// kron(S_A, S_B), the point written in tensor row order.
  CMatrix product_matrix() const;
  /// U_sigma kron(S_A, S_B): block b is the joint Kraus operator of index b.
  CMatrix stacked_matrix() const;

  LocalChannelPoint with_factors(StiefelPoint s_a, StiefelPoint s_b) const;

 private:
  StiefelPoint s_a_;
  StiefelPoint s_b_;
  std::vector<Index> sigma_;
};

/// Diagonal 0/1 selector keeping whole Kraus blocks.
struct Selector {
  Selector(Index total_blocks, Index block_dim, std::set<Index> kept_blocks);

  /// Selector keeping every block (the trace-preserving channel itself).
  static Selector keep_all(Index total_blocks, Index block_dim);
  /// Selector keeping exactly one block.
  static Selector keep_block(Index total_blocks, Index block_dim, Index block);

  bool keeps(Index block) const { return kept_blocks.count(block) > 0; }
  CMatrix omega_matrix() const;

  Index total_blocks = 0;
  Index block_dim = 0;
  std::set<Index> kept_blocks;
};

/// Stacks the operators (padded with zero blocks to N^2) into an N^3 x N point.
StiefelPoint kraus_to_stiefel(const KrausSet& k);

/// Slices an N^3 x N point back into its N^2 Kraus blocks.
KrausSet stiefel_to_kraus(const StiefelPoint& s);

/// Lambda(rho) = sum_i K_i rho K_i^dag.
DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho);

/// Lambda_A (x) Lambda_B acting on a joint state.
DensityMatrix apply_local_channel(const LocalChannelPoint& c, const DensityMatrix& rho);

struct PostselectedState {
  DensityMatrix state;
  double success_prob = 0.0;
};

/// Keeps only the selected Kraus blocks and renormalizes. Throws
/// MeasureZeroError when the kept probability falls below tol::measure_zero.
PostselectedState apply_postselected(const LocalChannelPoint& c, const Selector& omega,
                                     const DensityMatrix& rho);

} // namespace locq
