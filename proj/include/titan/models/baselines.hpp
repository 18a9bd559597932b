#pragma once

#include <span>
#include <vector>

#include "titan/data/types.hpp"

namespace titan::models {

// Linear extrapolation from the last two observed centers.  Dimensions are
// held constant unless scale_dims is set, in which case they extrapolate
// linearly too (floored at 0).  Centers are computed identically either way.
std::vector<data::BBox> const_vel_boxes(std::span<const data::BBox> observed,
                                        int horizon, bool scale_dims);

// Linear extrapolation of (alpha, omega) from the last two steps.
std::vector<data::EgoState> const_acc_ego(std::span<const data::EgoState> history,
                                          int horizon);

// Holds the last (alpha, omega) constant.
std::vector<data::EgoState> const_vel_ego(std::span<const data::EgoState> history,
                                          int horizon);

}  // namespace titan::models
