#pragma once

#include <span>
#include <string>
#include <vector>

#include "titan/data/types.hpp"
#include "titan/nn/tape.hpp"

namespace titan::models {

// vanilla: past ego only.  fp: adds every agent's future box.  fp_ap: adds
// their last observed actions.  aim_fp / aim: the fp / fp_ap stacks with the
// learned importance weighting applied before aggregation.
enum class EgoVariant { vanilla, fp, fp_ap, aim_fp, aim };

EgoVariant parse_ego_variant(const std::string& name);
std::string ego_variant_name(EgoVariant variant);

struct EgoConfig {
  int width = 128;
  EgoVariant variant = EgoVariant::aim;
  double lr = 1e-4;
  int batch = 64;
  int epochs = 100;
  int window_stride = 5;
  std::uint64_t seed = 1;
};

std::string ego_config_to_json(const EgoConfig& config);
EgoConfig parse_ego_config(const std::string& json_text);

// One agent's contribution at one future step.
struct EgoAgentInput {
  int track_id = 0;
  data::BBox future_box;        // predicted or ground-truth box at that step
  data::ActionVector action;    // labels at the last observed step
};

struct EgoInputs {
  std::vector<data::EgoState> history;              // T_obs
  std::vector<std::vector<EgoAgentInput>> agents;   // T_fut x variable-size set
};

// Per future step, the importance weight of every aggregated agent.
struct ImportanceTrace {
  std::vector<std::vector<std::pair<int, double>>> weights;  // [step] -> (track_id, w)
};

struct EgoPrediction {
  std::vector<data::EgoState> future;  // T_fut predicted (alpha, omega)
  ImportanceTrace importance;          // empty for non-AIM variants
};

class EgoModel {
 public:
  explicit EgoModel(const EgoConfig& config);

  nn::ParamStore& params() { return store_; }
  const EgoConfig& config() const { return config_; }

  bool uses_agents() const { return config_.variant != EgoVariant::vanilla; }
  bool uses_actions() const {
    return config_.variant == EgoVariant::fp_ap || config_.variant == EgoVariant::aim;
  }
  bool uses_importance() const {
    return config_.variant == EgoVariant::aim_fp || config_.variant == EgoVariant::aim;
  }

  // Fused agent feature H^{ei} for one agent at one future step.
  nn::Tape::Id agent_feature(nn::Tape& tape, const EgoAgentInput& agent);

  // Importance-weighted sum over the step's agents; records (track_id, w)
  // into trace when given.  Zero agents yields a zero vector.
  nn::Tape::Id aggregate_agents(nn::Tape& tape,
                                std::span<const EgoAgentInput> agents,
                                std::vector<std::pair<int, double>>* trace);

  // 20 output nodes, each [alpha, omega]; fills importance per step.
  std::vector<nn::Tape::Id> forward(nn::Tape& tape, const EgoInputs& in,
                                    ImportanceTrace* importance);

  // exp(-s1)*SSE_alpha + exp(-s2)*SSE_omega + (s1+s2)/2 on the tape.
  nn::Tape::Id loss(nn::Tape& tape, std::span<const nn::Tape::Id> outputs,
                    std::span<const data::EgoState> truth);

  EgoPrediction predict(const EgoInputs& in);

  double log_var_alpha() const { return s1_.value[0]; }
  double log_var_omega() const { return s2_.value[0]; }

 private:
  EgoConfig config_;
  nn::Linear ego_embed_;    // 2 -> W, ReLU
  nn::GruParams enc_cell_;
  nn::Linear box_embed_;    // 4 -> W, ReLU (agent variants)
  nn::Linear act_embed_;    // 8 -> W, ReLU (action variants)
  nn::Linear fuse_agent_;   // W or 2W -> W, plain affine
  nn::Linear aim_;          // W -> 1, tanh (importance variants)
  nn::Linear fuse_hidden_;  // 2W -> W, plain affine
  nn::GruParams dec_cell_;
  nn::Linear h2i_;          // W -> W, ReLU
  nn::Linear out_;          // W -> 2, plain affine
  nn::Param s1_;
  nn::Param s2_;
  nn::ParamStore store_;
};

// Value-domain transcription of the ego loss.
double ego_loss_value(std::span<const data::EgoState> pred,
                      std::span<const data::EgoState> truth, double s1, double s2);

// Assembles ego inputs from a window with ground-truth agent futures; the
// agent set is the window's fully observed agents.
EgoInputs ego_inputs_from_truth(const data::Window& window);

struct EgoTrainLog {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

EgoTrainLog train_ego(EgoModel& model, std::span<const data::Clip> train,
                      std::span<const data::Clip> val);

}  // namespace titan::models
