#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "titan/data/types.hpp"

namespace titan::synth {

enum class MotionModel {
  stationary,
  constant_velocity,
  crossing,        // longitudinal walk, then a lateral turn
  wait_then_cross, // dwell in place, then a lateral cross
  approach_vehicle,// head toward a paired parked vehicle
  curve,           // constant turn rate
};

std::string_view motion_model_name(MotionModel m);

// One agent's plan: per-frame labels plus the motion model that produced the
// executed displacement.  Label sequences always describe the agent's own
// motion (camera-induced box drift never changes labels).
struct BehaviorScript {
  MotionModel motion_model = MotionModel::stationary;
  std::vector<data::ActionVector> action_profile;  // one per frame
  double noise_sigma = 0.0;
  std::optional<int> pair_target;  // track_id of the paired vehicle
};

struct BehaviorWeights {
  double stationary = 1.0;
  double constant_velocity = 1.0;
  double crossing = 1.0;
  double wait_then_cross = 1.0;
  double approach_vehicle = 1.0;
  double curve = 1.0;

  double total() const {
    return stationary + constant_velocity + crossing + wait_then_cross +
           approach_vehicle + curve;
  }
};

// Which information channel disambiguates futures.  "action" keeps behaviors
// whose past kinematics are ambiguous without labels (dwellers that may or
// may not cross, approach targets); "kinematics" keeps label-uninformative
// motion; "mixed" allows everything.
enum class Regime { action_determined, kinematics_determined, mixed };

struct EgoProfile {
  int num_segments = 3;         // piecewise-constant (alpha, omega) pieces
  double alpha_min = -1.2;
  double alpha_max = 1.2;
  double omega_min = -0.12;
  double omega_max = 0.12;
  double speed_min = 4.0;       // initial speed range, m/s
  double speed_max = 11.0;
  bool brake_rule = true;       // decelerate for crossing agents in the corridor
};

// Camera-motion-induced apparent displacement of scene boxes.
struct FlowModel {
  double expand_u = 0.0011;  // horizontal expansion about image center, per m/s per frame
  double expand_v = 0.0011;  // vertical expansion about the horizon line
  double yaw_shift = 0.055;  // horizontal shift per rad/s per frame
  double growth = 0.0007;    // box scale growth per m/s per frame
  double horizon_v = 0.42;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int num_clips = 7;
  int clip_length = 60;
  int agents_min = 3;
  int agents_max = 6;
  BehaviorWeights weights;
  Regime regime = Regime::mixed;
  double noise_sigma = 0.0;      // center jitter, normalized units
  double occlusion_prob = 0.0;   // chance an agent gets one held-from-last gap
  double vehicle_fraction = 0.25;
  EgoProfile ego;
  FlowModel flow;
};

void validate_generator_config(const GeneratorConfig& config);

// Strict JSON parsing: unknown keys are rejected with a nearest-key
// suggestion.  parse_generator_config throws std::runtime_error.
GeneratorConfig parse_generator_config(const std::string& json_text);
GeneratorConfig load_generator_config(const std::string& path);
std::string generator_config_to_json(const GeneratorConfig& config);

// Deterministic in (config, index): the same pair always yields a
// byte-identical clip.  All label sequences are honest to executed motion.
data::Clip generate_clip(const GeneratorConfig& config, int index);

// The scripts backing generate_clip(config, index), in track order
// (diagnostics and behavior-level tests).
std::vector<BehaviorScript> clip_scripts(const GeneratorConfig& config, int index);

struct CorpusLayout {
  std::string root;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::string manifest_path;
};

// Writes <out_dir>/{train,val,test}/<clip_id>.jsonl plus manifest.json with a
// 4:2:1 split by clip count (largest-remainder rounding, train first).
CorpusLayout generate_corpus(const GeneratorConfig& config, const std::string& out_dir);

// Split sizes for n clips in ratio 4:2:1.
std::array<int, 3> split_sizes(int num_clips);

// Ego travel corridor used by the brake rule (shared with tests).
bool in_brake_corridor(double u, double v);
bool near_brake_corridor(double u, double v);
inline constexpr int kBrakeLookahead = 10;

}  // namespace titan::synth
