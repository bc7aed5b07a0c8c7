#pragma once

#include "wamtopo/curve_set.hpp"
#include "wamtopo/gli.hpp"

namespace wamtopo {

// Scalar hug measure: the sum of absolute curve linking integrals over the
// scenario's interaction pairs.
//
// Upright (robot arms around torso columns and the humanoid arm ring):
//   |G(r_l, h_l)| + |G(r_l, h_arm)| + |G(r_r, h_r)| + |G(r_r, h_arm)|
//
// Horizontal (upper body halves with the right arm, lower with the left):
//   sum over |G(r_r, h_*_upper)| + |G(r_l, h_*_lower)| for * in {r, c, l}
//
// Strict mode; throws on near-intersecting geometry.
double total_linking(const CurveSet& curves, Scenario scenario);

// Clamped mode used on simulated states; `saturated` reports clamping.
ClampedGli total_linking_clamped(const CurveSet& curves, Scenario scenario);

}  // namespace wamtopo
