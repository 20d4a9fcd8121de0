#pragma once

#include <stdexcept>

namespace locq {

/// Post-selection retained an outcome set of probability below tol::measure_zero.
class MeasureZeroError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration produced a non-finite objective value (divergent step size).
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rejection sampler exhausted its draw budget before filling the request.
class SamplingBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace locq
