#pragma once

#include <stdexcept>

namespace wamtopo_oracle {

// The oracle library keeps its own exception hierarchy so that it stays
// fully independent of the code it is used to validate.
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Segment pair closer than the quadrature accuracy floor (1e-3 m).
struct SegmentsTooClose : OracleError {
  using OracleError::OracleError;
};

// More points than the O(n^5) brute-force enumeration accepts (16).
struct TooManyPoints : OracleError {
  using OracleError::OracleError;
};

}  // namespace wamtopo_oracle
