#pragma once

#include <vector>

#include "locq/channels.hpp"
#include "locq/density.hpp"

// Two-qubit quantum information toolbox: canonical states, fidelity, fully
// entangled fraction, concurrence, random-state ensembles and the one-sided
// amplitude damping reference channel.

namespace locq {

using CVector = Eigen::VectorXcd;

enum class Bell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class Side { A, B };

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

/// Computational basis column vector |k> in the given dimension.
CVector basis_ket(Index dim, Index k);

CVector bell_vector(Bell which);
DensityMatrix bell_state(Bell which);

/// rho_R(p) = p |Psi+-><Psi+-| + (1-p) |11><11|, p in (0, 1].
DensityMatrix r_state(double p, Bell sign = Bell::PsiPlus);

/// rho_S(p) = p |Psi+><Psi+| + (1-p) |01><01|, p in [0, 1].
DensityMatrix rho_s(double p);

struct PaperTestStates {
  DensityMatrix rho_star;    // FEF exactly 1/2
  DensityMatrix rho_star_ab; // weakly entangled, FEF below 1/2
};
PaperTestStates paper_test_states();

/// tr(rho |psi><psi|) for a rank-1 projector psi.
double fidelity_with_pure(const DensityMatrix& rho, const CMatrix& psi_projector);

struct FefResult {
  double value = 0.0;
  CMatrix u_a; // 2x2 unitaries attaining the maximum in
  CMatrix u_b; // <bell| (Ua^dag (x) Ub^dag) rho (Ua (x) Ub) |bell>
};

/// Fully entangled fraction of a two-qubit state: largest eigenvalue of
/// Re(M) with M the state written in the magic basis, together with the
/// maximizing local unitaries relative to |Phi+>.
FefResult fef(const DensityMatrix& rho);

/// Same maximization relative to an arbitrary Bell state. The value is the
/// FEF; only the reported unitaries change with the target.
FefResult max_bell_overlap(const DensityMatrix& rho, Bell target);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// G G^dag / tr(G G^dag) with G a standard complex Gaussian matrix.
DensityMatrix random_density_matrix(Index dim, Rng& rng);

struct SampleConstraints {
  bool entangled = true;
  double fef_below = 0.5;
  bool real_valued = false;
};

/// Rejection-sampled Wishart states satisfying all constraints. Throws
/// SamplingBudgetError after 10^6 draws.
std::vector<DensityMatrix> sample_weakly_entangled(Index count, Rng& rng,
                                                   const SampleConstraints& constraints);

/// Amplitude damping with rate gamma on one side, identity on the other.
LocalChannelPoint amplitude_damping_local(double gamma, Side side);

/// Partial trace keeping the listed subsystems (ascending order), for a
/// matrix on a tensor product with the given factor dimensions.
CMatrix partial_trace(const CMatrix& m, const std::vector<Index>& dims,
                      const std::vector<Index>& keep);

} // namespace locq
