#include "wamtopo/curve_set.hpp"

#include "wamtopo/errors.hpp"

namespace wamtopo {

const char* to_string(Scenario s) {
  return s == Scenario::kUpright ? "upright" : "horizontal";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "upright") return Scenario::kUpright;
  if (s == "horizontal") return Scenario::kHorizontal;
  throw ConfigError("unknown scenario '" + s + "' (expected upright|horizontal)");
}

std::pair<Polyline, Polyline> split_at_middle(const Polyline& curve) {
  const int n = curve.n_points();
  if (n < 3 || n % 2 == 0) {
    throw ShapeMismatchError("split_at_middle needs an odd point count >= 3, got " +
                             std::to_string(n));
  }
  const int mid = n / 2;
  std::vector<Vec3> lower(curve.points().begin(), curve.points().begin() + mid + 1);
  std::vector<Vec3> upper(curve.points().begin() + mid, curve.points().end());
  return {Polyline(std::move(lower), curve.id() + "_lower"),
          Polyline(std::move(upper), curve.id() + "_upper")};
}

void fill_half_curves(HumanoidCurves& hc) {
  std::tie(hc.center_lower, hc.center_upper) = split_at_middle(hc.center);
  std::tie(hc.side_r_lower, hc.side_r_upper) = split_at_middle(hc.side_r);
  std::tie(hc.side_l_lower, hc.side_l_upper) = split_at_middle(hc.side_l);
}

}  // namespace wamtopo
