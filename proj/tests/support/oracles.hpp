#pragma once

#include <functional>

#include "locq/objectives.hpp"
#include "locq/qinfo.hpp"

// Independent reference computations the tests check the library against.

namespace locq::testing {

CMatrix random_hermitian(Index n, Rng& rng);

/// Central finite difference of f along dir at base.
double central_difference(const std::function<double(const CMatrix&)>& f, const CMatrix& base,
                          const CMatrix& dir, double h = 1e-6);

/// Unit-norm random tangent direction at s.
CMatrix random_tangent(const StiefelPoint& s, Rng& rng);

/// SU(2) element from three angles.
CMatrix su2(double theta, double phi, double lambda);

/// Direct numerical maximization of <bell|(Ua^dag (x) Ub^dag) rho (Ua (x) Ub)|bell>
/// over the six local-unitary angles: multi-start random search with a
/// geometrically shrinking step radius.
double fef_search_oracle(const DensityMatrix& rho, Bell target = Bell::PhiPlus, int starts = 24,
                         int iters = 2500, std::uint64_t seed = 7);

/// Literal doubled-basis sums of the factor projections.
CMatrix basis_sum_factor_b(const CMatrix& g, const LocalChannelPoint& c);
CMatrix basis_sum_factor_a(const CMatrix& g, const LocalChannelPoint& c);

} // namespace locq::testing
