#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "titan/data/taxonomy.hpp"

namespace titan::data {

inline constexpr int kImageWidth = 1920;
inline constexpr int kImageHeight = 1200;
inline constexpr double kFps = 10.0;
inline constexpr int kObsSteps = 10;   // observed past
inline constexpr int kFutSteps = 20;   // predicted future
inline constexpr int kWindowSpan = kObsSteps + kFutSteps;

// Axis-aligned box: center and side lengths in normalized image coordinates.
struct BBox {
  double c_u = 0.0;
  double c_v = 0.0;
  double l_u = 0.0;
  double l_v = 0.0;
};

BBox normalize_box(const BBox& px_box, double image_w, double image_h);
BBox denormalize_box(const BBox& box, double image_w, double image_h);

// One class index per label set, in set order.  Person sets are 0-4 and
// vehicle sets 5-7; the sets that do not apply to the agent type hold their
// "none" class.
struct ActionVector {
  std::array<int, kNumActionSets> labels{};

  static ActionVector none_for(AgentType type);
  int& operator[](int i) { return labels[i]; }
  int operator[](int i) const { return labels[i]; }
  bool operator==(const ActionVector&) const = default;
};

// Class indices scaled to [0,1] by their set cardinality minus one; the
// 8-wide embedding input used by every model.
std::array<double, kNumActionSets> normalized_action(const ActionVector& a);

struct EgoState {
  double alpha = 0.0;  // longitudinal acceleration, m/s^2
  double omega = 0.0;  // yaw rate, rad/s
};

struct AgentTrack {
  int track_id = 0;
  AgentType agent_type = AgentType::person;
  std::optional<AgeGroup> age_group;
  std::vector<BBox> boxes;            // one per clip frame
  std::vector<ActionVector> actions;  // one per clip frame
  std::vector<bool> visibility;       // false = held from last observed frame
};

struct Clip {
  std::string clip_id;
  double fps = kFps;
  int image_width = kImageWidth;
  int image_height = kImageHeight;
  std::vector<AgentTrack> agents;
  std::vector<EgoState> ego;  // one per frame

  int num_frames() const { return static_cast<int>(ego.size()); }
};

// Throws std::runtime_error naming the offending track/frame/field if any
// invariant fails: finite values, non-negative box dimensions, action indices
// within their set cardinality, type-inapplicable sets held at "none", track
// series exactly clip length, unique track ids.
void validate_clip(const Clip& clip);

// A 30-frame span: kObsSteps observed then kFutSteps future frames.
// agent_indices lists tracks visible over every observation step; the
// remaining tracks stay available through the clip for interaction context.
struct Window {
  const Clip* clip = nullptr;
  int t_start = 0;
  std::vector<int> agent_indices;

  int t_obs_end() const { return t_start + kObsSteps; }  // one past last observed
  int t_end() const { return t_start + kWindowSpan; }    // one past last future
};

// Windows at t_start = 0, stride, 2*stride, ... while a full span fits.
// A clip shorter than 30 frames yields no windows.
std::vector<Window> make_windows(const Clip& clip, int stride);

}  // namespace titan::data
