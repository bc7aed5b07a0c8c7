#pragma once

#include <stdexcept>
#include <string>

namespace wamtopo {

// Base class for all library errors. Everything thrown on a contract
// violation derives from this, so callers can catch one type at the CLI
// boundary and map it to an exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- geometry / topology ---------------------------------------------------

// A segment shorter than the minimum resolvable length (1e-9 m).
struct DegenerateSegmentError : Error { using Error::Error; };

// Two segments closer than the minimum separation in strict mode; the
// linking integrand is singular there.
struct IntersectingSegmentsError : Error { using Error::Error; };

// A polyline with fewer than two points, or consecutive duplicates.
struct DegeneratePolylineError : Error { using Error::Error; };

// Matrix/observation dimensions do not match what the operation requires.
struct ShapeMismatchError : Error { using Error::Error; };

// Fewer points than a tetrahedralization needs (minimum 4).
struct TooFewPointsError : Error { using Error::Error; };

// Points that stay affinely dependent even after symbolic jitter.
struct DegenerateInputError : Error { using Error::Error; };

// A graph vertex with no incident edges; its local coordinate is undefined.
struct IsolatedVertexError : Error { using Error::Error; };

// Two graph-adjacent points closer than 1e-9 m; inverse-distance weights blow up.
struct CoincidentPointsError : Error { using Error::Error; };

// --- body model / environment ----------------------------------------------

// A joint value outside its configured limits (message lists indices).
struct JointLimitError : Error { using Error::Error; };

// Body dimensions or capsule radii that are non-positive.
struct InvalidDimensionsError : Error { using Error::Error; };

// An action vector containing NaN or infinity.
struct NonFiniteActionError : Error { using Error::Error; };

// --- learning ---------------------------------------------------------------

// A policy standard deviation that is zero or negative.
struct NonPositiveStdError : Error { using Error::Error; };

// Parameters containing NaN/Inf when an update is requested.
struct NonFiniteParamsError : Error { using Error::Error; };

// A gradient that is NaN/Inf after a backward pass (message names the tensor).
struct NonFiniteGradientError : Error { using Error::Error; };

// A checkpoint whose header does not match the requested architecture/config.
struct CheckpointMismatchError : Error { using Error::Error; };

// --- configuration / IO -----------------------------------------------------

// A run or model configuration that fails validation.
struct ConfigError : Error { using Error::Error; };

// A data or output file that cannot be read, written, or parsed.
struct IoError : Error { using Error::Error; };

}  // namespace wamtopo
