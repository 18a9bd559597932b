#include "titan/data/types.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace titan::data {

BBox normalize_box(const BBox& px_box, double image_w, double image_h) {
  return {px_box.c_u / image_w, px_box.c_v / image_h,
          px_box.l_u / image_w, px_box.l_v / image_h};
}

BBox denormalize_box(const BBox& box, double image_w, double image_h) {
  return {box.c_u * image_w, box.c_v * image_h,
          box.l_u * image_w, box.l_v * image_h};
}

ActionVector ActionVector::none_for(AgentType type) {
  (void)type;
  const auto& tax = Taxonomy::get();
  ActionVector a;
  for (int i = 0; i < kNumActionSets; ++i) a.labels[i] = tax.none_index(i);
  return a;
}

std::array<double, kNumActionSets> normalized_action(const ActionVector& a) {
  std::array<double, kNumActionSets> out{};
  for (int i = 0; i < kNumActionSets; ++i)
    out[i] = static_cast<double>(a.labels[i]) /
             static_cast<double>(kSetCardinality[i] - 1);
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("clip validation: " + msg); }

void check_box(const BBox& b, int track_id, int t) {
  const std::string where = "track " + std::to_string(track_id) + " frame " + std::to_string(t);
  if (!std::isfinite(b.c_u) || !std::isfinite(b.c_v) || !std::isfinite(b.l_u) ||
      !std::isfinite(b.l_v))
    fail("non-finite box field at " + where);
  if (b.l_u < 0.0) fail("negative box dimension l_u at " + where);
  if (b.l_v < 0.0) fail("negative box dimension l_v at " + where);
}

void check_actions(const ActionVector& a, AgentType type, int track_id, int t) {
  const auto& tax = Taxonomy::get();
  const std::string where = "track " + std::to_string(track_id) + " frame " + std::to_string(t);
  for (int i = 0; i < kNumActionSets; ++i) {
    if (a.labels[i] < 0 || a.labels[i] >= kSetCardinality[i])
      fail("action index out of range in set " + tax.sets[i].name + " at " + where);
  }
  if (is_person(type)) {
    for (int i = kNumPersonSets; i < kNumActionSets; ++i)
      if (a.labels[i] != tax.none_index(i))
        fail("person carries a non-none vehicle label in set " + tax.sets[i].name + " at " + where);
  } else {
    for (int i = 0; i < kNumPersonSets; ++i)
      if (a.labels[i] != tax.none_index(i))
        fail("vehicle carries a non-none person label in set " + tax.sets[i].name + " at " + where);
  }
}

}  // namespace

void validate_clip(const Clip& clip) {
  if (clip.fps <= 0.0) fail("fps must be positive");
  if (clip.image_width <= 0 || clip.image_height <= 0) fail("image dimensions must be positive");
  const int n = clip.num_frames();
  for (const auto& e : clip.ego)
    if (!std::isfinite(e.alpha) || !std::isfinite(e.omega)) fail("non-finite ego state");
  std::set<int> ids;
  for (const auto& track : clip.agents) {
    if (!ids.insert(track.track_id).second)
      fail("duplicate track_id " + std::to_string(track.track_id));
    if (static_cast<int>(track.boxes.size()) != n ||
        static_cast<int>(track.actions.size()) != n ||
        static_cast<int>(track.visibility.size()) != n)
      fail("track " + std::to_string(track.track_id) + " series length differs from clip length");
    if (is_person(track.agent_type) && !track.age_group.has_value())
      fail("person track " + std::to_string(track.track_id) + " lacks age_group");
    for (int t = 0; t < n; ++t) {
      check_box(track.boxes[t], track.track_id, t);
      check_actions(track.actions[t], track.agent_type, track.track_id, t);
    }
  }
}

std::vector<Window> make_windows(const Clip& clip, int stride) {
  if (stride < 1) throw std::invalid_argument("window stride must be >= 1");
  std::vector<Window> out;
  const int n = clip.num_frames();
  for (int t0 = 0; t0 + kWindowSpan <= n; t0 += stride) {
    Window w;
    w.clip = &clip;
    w.t_start = t0;
    for (int a = 0; a < static_cast<int>(clip.agents.size()); ++a) {
      bool fully_visible = true;
      for (int t = t0; t < t0 + kObsSteps; ++t)
        if (!clip.agents[a].visibility[t]) { fully_visible = false; break; }
      if (fully_visible) w.agent_indices.push_back(a);
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace titan::data
