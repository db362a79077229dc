#pragma once

#include <stdexcept>
#include <string>

namespace greedylab {

// Invalid arguments are reported with std::invalid_argument; the types below
// cover the failure modes callers are expected to branch on.

/// Norming functional requested for the zero element.
struct UndefinedFunctional : std::domain_error {
  using std::domain_error::domain_error;
};

/// Nonzero residual with zero dual value at every atom: the dictionary does
/// not span the residual's direction.
struct NonSpanningDictionary : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exhaustive search would exceed its combinatorial budget.
struct ProblemTooLarge : std::length_error {
  using std::length_error::length_error;
};

}  // namespace greedylab

namespace greedylab {

/// Malformed or inconsistent serialized data.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace greedylab
