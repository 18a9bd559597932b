#include "titan/models/action_features.hpp"

#include <stdexcept>

#include "titan/core/hash.hpp"
#include "titan/core/rng.hpp"

namespace titan::models {

std::vector<std::array<double, kActionFeatureDim>> action_features(
    const data::Clip& clip, const data::AgentTrack& track, int t_start, int len,
    double appearance_noise) {
  const int n = clip.num_frames();
  if (t_start < 0 || len < 1 || t_start + len > n)
    throw std::invalid_argument("action_features: frame range out of clip");

  const std::uint64_t clip_key = core::fnv1a(clip.clip_id.data(), clip.clip_id.size());
  core::Rng track_rng = core::Rng(clip_key).fork(static_cast<std::uint64_t>(track.track_id));

  std::vector<std::array<double, kActionFeatureDim>> out(len);
  for (int k = 0; k < len; ++k) {
    const int t = t_start + k;
    const data::BBox& box = track.boxes[t];
    const data::BBox& prev = track.boxes[t > 0 ? t - 1 : 0];
    auto& f = out[k];
    f[0] = box.c_u;
    f[1] = box.c_v;
    f[2] = box.c_u - prev.c_u;
    f[3] = box.c_v - prev.c_v;
    f[4] = box.l_u;
    f[5] = box.l_v;
    f[6] = box.l_v - prev.l_v;
    f[7] = track.visibility[t] ? 1.0 : 0.0;

    const auto norm = data::normalized_action(track.actions[t]);
    core::Rng frame_rng = track_rng.fork(static_cast<std::uint64_t>(t));
    for (int c = 0; c < 8; ++c)
      f[8 + c] = norm[c] + appearance_noise * frame_rng.normal();
  }
  return out;
}

}  // namespace titan::models
