#pragma once

#include "wamtopo/geometry.hpp"
#include "wamtopo/polyline.hpp"

namespace wamtopo {

// Which interaction picture is being measured. In the upright scenario the
// robot wraps the standing humanoid's torso and arm ring; in the horizontal
// scenario it cradles the lying humanoid's body columns.
enum class Scenario { kUpright, kHorizontal };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

// The two robot arm curves: base -> end effector, 8 points / 7 segments each.
struct RobotCurves {
  Polyline right;  // r_r
  Polyline left;   // r_l
};

// The humanoid body curves. Full-body curves (spine/side columns) have 11
// points / 10 segments; the arm ring (elbow-shoulder-shoulder-elbow) also
// has 11 points. Half curves split a full-body curve at its middle point
// into lower/upper 6-point halves (5 segments each, both oriented along the
// parent). Shoulder keypoints feed the height-punishment term.
struct HumanoidCurves {
  Polyline center;    // h_c: pelvis->head column
  Polyline side_r;    // h_r: right body column
  Polyline side_l;    // h_l: left body column
  Polyline arm_ring;  // h_arm: right elbow -> shoulders -> left elbow

  Polyline center_lower, center_upper;  // h_c halves
  Polyline side_r_lower, side_r_upper;  // h_r halves
  Polyline side_l_lower, side_l_upper;  // h_l halves

  Vec3 shoulder_r;
  Vec3 shoulder_l;
};

struct CurveSet {
  RobotCurves robot;
  HumanoidCurves humanoid;
};

// Split an odd-point polyline at its middle point into (lower, upper)
// halves that share that point and keep the parent orientation.
std::pair<Polyline, Polyline> split_at_middle(const Polyline& curve);

// Fill the six half-curve members of `hc` from its full curves.
void fill_half_curves(HumanoidCurves& hc);

}  // namespace wamtopo
