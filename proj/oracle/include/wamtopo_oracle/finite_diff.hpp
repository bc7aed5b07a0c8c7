#pragma once

#include <functional>
#include <vector>

namespace wamtopo_oracle {

// Central-difference derivative of `f` with respect to one scalar that the
// caller exposes via get/set closures: f is evaluated at x+eps and x-eps and
// the original value is restored afterwards.
double central_difference(const std::function<double()>& f,
                          const std::function<double()>& get,
                          const std::function<void(double)>& set, double eps);

// Relative error between an analytic derivative and its finite-difference
// estimate, guarded against both being ~0: |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-8);

// Central-difference gradient estimates of a deterministic scalar function
// at `params`, one estimate per entry of `indices` (each an index into the
// parameter vector). The parameter vector is restored between probes.
std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    std::vector<double> params, const std::vector<int>& indices, double step);

}  // namespace wamtopo_oracle
