#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "titan/data/taxonomy.hpp"
#include "titan/data/types.hpp"
#include "titan/models/action_features.hpp"
#include "titan/nn/tape.hpp"

namespace titan::models {

struct ActionModelConfig {
  int feature_dim = kActionFeatureDim;
  int hidden = 64;
  double lr = 1e-4;
  int batch = 8;
  int epochs = 100;
  double appearance_noise = 0.15;
  int window_stride = 5;
  std::uint64_t seed = 1;
};

std::string action_config_to_json(const ActionModelConfig& config);
ActionModelConfig parse_action_config(const std::string& json_text);

// Heads 0-4 apply to persons, heads 5-7 to vehicles.
std::array<int, 5> person_heads();
std::array<int, 3> vehicle_heads();
std::vector<int> heads_for(data::AgentType type);

// Two-layer recurrent encoder over per-frame features, one affine projection
// head per label set, and one learned log-variance per head.
class ActionModel {
 public:
  explicit ActionModel(const ActionModelConfig& config);

  nn::ParamStore& params() { return store_; }
  const ActionModelConfig& config() const { return config_; }

  // Logits per head for one feature sequence (length T_obs).
  std::array<nn::Tape::Id, data::kNumActionSets> forward(
      nn::Tape& tape, std::span<const std::array<double, kActionFeatureDim>> features);

  // Softmax probabilities per head.
  std::array<std::vector<double>, data::kNumActionSets> classify(
      std::span<const std::array<double, kActionFeatureDim>> features);

  // Most probable class per head, as an ActionVector with inapplicable sets
  // forced to 'none' for the given agent type.
  data::ActionVector predict_labels(
      std::span<const std::array<double, kActionFeatureDim>> features,
      data::AgentType type);

  // Sum over `heads` of ce_i * exp(-s_i) + s_i/2 on the tape.
  nn::Tape::Id multi_task_loss(nn::Tape& tape,
                               const std::array<nn::Tape::Id, data::kNumActionSets>& logits,
                               const data::ActionVector& target,
                               std::span<const int> heads);

  // Person items use heads 0-4, vehicle items 5-7.
  nn::Tape::Id combined_loss(nn::Tape& tape,
                             const std::array<nn::Tape::Id, data::kNumActionSets>& logits,
                             const data::ActionVector& target, data::AgentType type);

  double log_variance(int head) const { return log_var_[head].value[0]; }

 private:
  ActionModelConfig config_;
  nn::GruParams gru1_;
  nn::GruParams gru2_;
  std::array<nn::Linear, data::kNumActionSets> heads_;
  std::array<nn::Param, data::kNumActionSets> log_var_;
  nn::ParamStore store_;
};

// Value-domain transcription of the uncertainty-weighted loss: given
// per-head cross entropies and log-variances s, returns
// sum_i ce_i*exp(-s_i) + s_i/2 over the chosen heads.
double multi_task_loss_value(std::span<const double> cross_entropies,
                             std::span<const double> log_variances,
                             std::span<const int> heads);

// One scored instance for mAP: per-head class scores plus the target labels.
struct ScoredInstance {
  std::array<std::vector<double>, data::kNumActionSets> scores;
  data::ActionVector target;
  data::AgentType type = data::AgentType::person;
};

struct MapResult {
  // Average precision per head and class; -1 marks classes absent from the
  // targets (skipped in macro averages).
  std::array<std::vector<double>, data::kNumActionSets> per_class;
  std::array<double, data::kNumActionSets> per_head{};  // -1 when nothing present
  double overall = 0.0;                                 // mean over valid heads
};

// One-vs-rest average precision per class from score-ranked instances
// (stable ranking), macro-averaged over present classes per head, then
// averaged over heads with at least one present class.  Heads only see
// instances of their agent kind.
MapResult per_frame_map(std::span<const ScoredInstance> instances);

struct ActionTrainLog {
  std::vector<double> train_loss;  // per epoch, mean per-instance loss
  std::vector<double> val_loss;
};

// Trains on all (window, agent) instances of the train clips; deterministic
// in config.seed.  Throws on non-finite loss.
ActionTrainLog train_action(ActionModel& model, std::span<const data::Clip> train,
                            std::span<const data::Clip> val);

}  // namespace titan::models
