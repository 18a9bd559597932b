#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "titan/data/types.hpp"
#include "titan/models/gaussian.hpp"
#include "titan/nn/tape.hpp"

namespace titan::models {

// Which context channels the location encoder receives: AP = the target's
// own action embedding, IP = the interaction feature over other agents,
// EP = the ego-motion encoder hidden state.
struct FolAblation {
  bool ap = false;
  bool ep = false;
  bool ip = false;

  int parts() const { return (ap ? 1 : 0) + (ep ? 1 : 0) + (ip ? 1 : 0); }
  bool operator==(const FolAblation&) const = default;
};

// Names: vanilla, AP, EP, IP, EP+AP, EP+IP, EP+IP+AP (order-insensitive on
// parse; canonical name emitted in the order EP, IP, AP).
FolAblation parse_fol_ablation(const std::string& name);
std::string fol_ablation_name(const FolAblation& ablation);

struct FolConfig {
  int width = 512;
  FolAblation ablation;
  double lr = 1e-4;
  int batch = 16;
  int epochs = 80;
  int window_stride = 5;
  std::uint64_t seed = 1;
};

std::string fol_config_to_json(const FolConfig& config);
FolConfig parse_fol_config(const std::string& json_text);

// One agent's state visible to the interaction encoder at one step.
struct SceneAgent {
  int track_id = 0;
  data::BBox box;
  data::ActionVector action;
};

// Raw 24-wide pair concatenation (x_i, a_i normalized, x_j, a_j normalized).
std::array<double, 24> pair_feature(const data::BBox& x_i,
                                    const data::ActionVector& a_i,
                                    const data::BBox& x_j,
                                    const data::ActionVector& a_j);

// Embeds agent pairs and chains them through a recurrent cell in ascending
// track_id order; the interaction feature is the mean of the per-pair hidden
// states.  Fresh zero state per call; no other agents yields a zero vector.
class InteractionEncoder {
 public:
  InteractionEncoder() = default;
  void init(const std::string& name, int width, core::Rng& rng);
  void register_params(nn::ParamStore& store);

  nn::Tape::Id embed_pair(nn::Tape& tape, const std::array<double, 24>& feature);
  nn::Tape::Id encode(nn::Tape& tape, int target_track_id,
                      std::span<const SceneAgent> agents);

  nn::Linear& embedding() { return embed_; }
  nn::GruParams& cell() { return cell_; }

 private:
  nn::Linear embed_;    // 24 -> width, ReLU
  nn::GruParams cell_;  // width -> width
  int width_ = 0;
};

// Everything one forward pass needs for one (window, target) example.
struct FolInputs {
  int target_track_id = 0;
  std::vector<data::BBox> target_boxes;            // T_obs
  std::vector<data::ActionVector> target_actions;  // T_obs
  std::vector<std::vector<SceneAgent>> scene;      // T_obs x all agents
  std::vector<data::EgoState> ego;                 // T_obs
};

// Assembles inputs for one window target; the scene includes every agent in
// the clip (held-from-last boxes participate as interaction partners).
// actions_override, when nonempty, substitutes per-track actions (predicted
// labels at test time): indexed by position in clip.agents.
FolInputs fol_inputs(const data::Window& window, int agent_index,
                     std::span<const data::ActionVector> actions_override = {});

// Encoder-decoder over box sequences with optional context injection; the
// decoder emits 10 sigmoid values per future step, mapped to two bivariate
// Gaussians (see gaussian.hpp).
class FolModel {
 public:
  explicit FolModel(const FolConfig& config);

  nn::ParamStore& params() { return store_; }
  const FolConfig& config() const { return config_; }

  // Final encoder hidden state after T_obs injected steps.
  nn::Tape::Id encode_past(nn::Tape& tape, const FolInputs& in);

  // 20 output nodes, each 10 sigmoid values.
  std::vector<nn::Tape::Id> decode_future(nn::Tape& tape, nn::Tape::Id hidden,
                                          const data::BBox& last_box);

  // Mean NLL loss over the future truth, on the tape.
  nn::Tape::Id nll_loss(nn::Tape& tape, std::span<const nn::Tape::Id> outputs,
                        std::span<const data::BBox> truth);

  BoxForecast predict(const FolInputs& in);

  InteractionEncoder& interaction() { return interaction_; }

 private:
  FolConfig config_;
  nn::Linear box_embed_;   // 4 -> W, plain affine
  nn::GruParams enc_cell_;
  nn::Linear ego_embed_;   // 2 -> W, ReLU (EP)
  nn::GruParams ego_cell_;
  nn::Linear act_embed_;   // 8 -> W, ReLU (AP)
  InteractionEncoder interaction_;  // (IP)
  nn::Linear inject_;      // (parts+1)*W -> W, plain affine
  nn::GruParams dec_cell_;
  nn::Linear h2i_;         // W -> W, ReLU
  nn::Linear out_;         // W -> 10, sigmoid
  nn::ParamStore store_;
};

struct FolTrainLog {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

FolTrainLog train_fol(FolModel& model, std::span<const data::Clip> train,
                      std::span<const data::Clip> val);

}  // namespace titan::models
