#include "wamtopo/linking.hpp"

#include <cmath>

namespace wamtopo {

namespace {

template <typename PairGli>
double accumulate_linking(const CurveSet& curves, Scenario scenario, PairGli pair_gli) {
  const RobotCurves& r = curves.robot;
  const HumanoidCurves& h = curves.humanoid;
  double total = 0.0;
  if (scenario == Scenario::kUpright) {
    total += std::abs(pair_gli(r.left, h.side_l));
    total += std::abs(pair_gli(r.left, h.arm_ring));
    total += std::abs(pair_gli(r.right, h.side_r));
    total += std::abs(pair_gli(r.right, h.arm_ring));
  } else {
    total += std::abs(pair_gli(r.right, h.side_r_upper));
    total += std::abs(pair_gli(r.right, h.center_upper));
    total += std::abs(pair_gli(r.right, h.side_l_upper));
    total += std::abs(pair_gli(r.left, h.side_r_lower));
    total += std::abs(pair_gli(r.left, h.center_lower));
    total += std::abs(pair_gli(r.left, h.side_l_lower));
  }
  return total;
}

}  // namespace

double total_linking(const CurveSet& curves, Scenario scenario) {
  return accumulate_linking(curves, scenario, [](const Polyline& a, const Polyline& b) {
    return curve_gli(a, b);
  });
}

ClampedGli total_linking_clamped(const CurveSet& curves, Scenario scenario) {
  bool saturated = false;
  const double total =
      accumulate_linking(curves, scenario, [&saturated](const Polyline& a, const Polyline& b) {
        const ClampedGli g = curve_gli_clamped(a, b);
        saturated = saturated || g.saturated;
        return g.value;
      });
  return {total, saturated};
}

}  // namespace wamtopo
