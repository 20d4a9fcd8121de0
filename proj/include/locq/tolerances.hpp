#pragma once

// Central numeric tolerance constants. Library code and tests share these so
// that a contract checked here is the same contract asserted there.

namespace locq::tol {

inline constexpr double hermiticity = 1e-10;        // max-abs(A - A^dag)
inline constexpr double orthonormality = 1e-12;     // max-abs(Q^dag Q - I) after QR
inline constexpr double stiefel_feasibility = 1e-10; // max-abs(S^dag S - I) for points
inline constexpr double tangency = 1e-10;           // max-abs(S^dag T + T^dag S)
inline constexpr double psd_floor = -1e-10;         // smallest admissible eigenvalue of a state
inline constexpr double trace_one = 1e-10;          // |tr(rho) - 1|
inline constexpr double kraus_completeness = 1e-9;  // max-abs(sum K^dag K - I)
inline constexpr double qr_rank = 1e-12;            // smallest admissible |R_ii| in thin QR
inline constexpr double measure_zero = 1e-12;       // success probabilities below this fail
inline constexpr double distance_singular = 1e-12;  // switch to squared-distance gradient

} // namespace locq::tol
