#include "wamtopo_oracle/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wamtopo_oracle/errors.hpp"

namespace wamtopo_oracle {

double central_difference(const std::function<double()>& f,
                          const std::function<double()>& get,
                          const std::function<void(double)>& set, double eps) {
  const double x0 = get();
  set(x0 + eps);
  const double fp = f();
  set(x0 - eps);
  const double fm = f();
  set(x0);
  return (fp - fm) / (2.0 * eps);
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    std::vector<double> params, const std::vector<int>& indices, double step) {
  if (!(step > 0.0)) {
    throw OracleError("finite-difference step must be positive");
  }
  std::vector<double> estimates;
  estimates.reserve(indices.size());
  for (const int index : indices) {
    if (index < 0 || static_cast<size_t>(index) >= params.size()) {
      throw OracleError("finite-difference index " + std::to_string(index) +
                        " is outside the parameter vector");
    }
    const double saved = params[static_cast<size_t>(index)];
    params[static_cast<size_t>(index)] = saved + step;
    const double f_plus = loss_fn(params);
    params[static_cast<size_t>(index)] = saved - step;
    const double f_minus = loss_fn(params);
    params[static_cast<size_t>(index)] = saved;
    estimates.push_back((f_plus - f_minus) / (2.0 * step));
  }
  return estimates;
}

}  // namespace wamtopo_oracle
