#pragma once

#include <array>
#include <vector>

#include "titan/data/types.hpp"

namespace titan::models {

inline constexpr int kActionFeatureDim = 16;

// Per-frame input features for the action classifier, standing in for a
// video backbone.  Channels 0-7 are box kinematics (center, one-step center
// deltas, dimensions, height delta, visibility); channels 8-15 are
// appearance stand-ins: each label set's normalized class index plus
// Gaussian observation noise.  Noise is a deterministic function of
// (clip_id, track_id, frame, channel), so a frame's feature vector does not
// depend on which window it appears in.
std::vector<std::array<double, kActionFeatureDim>> action_features(
    const data::Clip& clip, const data::AgentTrack& track, int t_start, int len,
    double appearance_noise);

}  // namespace titan::models
