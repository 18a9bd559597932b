#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "titan/eval/evaluate.hpp"
#include "titan/models/action_model.hpp"
#include "titan/models/ego_model.hpp"
#include "titan/models/fol_model.hpp"
#include "titan/synth/generator.hpp"

namespace titan::harness {

// One experiment: corpus generation, the three training stages, test-time
// prediction chaining, evaluation, and the report artifacts, all rooted at
// out_dir.  Stage seeds derive from the single experiment seed, so the
// per-stage sections may not set their own seeds; likewise the ablation and
// variant lists own the per-model architecture switches.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs/exp";
  synth::GeneratorConfig generator;
  models::ActionModelConfig action;
  models::FolConfig fol;
  models::EgoConfig ego;
  std::vector<models::FolAblation> fol_ablations;  // default vanilla..EP+IP+AP
  std::vector<models::EgoVariant> ego_variants;    // default vanilla..AIM
  bool action_stage = true;   // classify test agents and chain into FOL/ego
  bool use_gt_actions = false;  // feed ground-truth labels instead
  bool use_gt_futures = false;  // feed ground-truth agent futures to the ego stage
  bool baselines = true;        // add Const-Vel / Const-Acc rows
  int eval_stride = 5;
};

ExperimentConfig default_experiment_config();

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig parse_experiment_config(const std::string& json_text);

struct ConfigIssue {
  std::string path;     // dotted key path, e.g. "fol.learning_rate"
  std::string message;
};

// Collects every detectable problem instead of stopping at the first; an
// empty result means parse_experiment_config would succeed.
std::vector<ConfigIssue> validate_experiment_json(const std::string& json_text);

// Reads the file ("" or missing keys fall back to defaults), validates, and
// throws with the aggregated issue list on any error.
ExperimentConfig load_experiment_config(const std::string& path);

// Localization baseline row names accepted below: "Const-Vel" and
// "Const-Vel-scaled"; ego: "Const-Vel-ego" and "Const-Acc".
struct LocalizationPredictOptions {
  bool gt_actions = false;
  int stride = 5;
  std::vector<std::string> baselines;
};

// Mean-trajectory and score records for every test window: classifier scores
// per agent (when a model is given), one trajectory per (window, agent) per
// localization model, and the requested baseline rows.  A null action model,
// or gt_actions, feeds ground-truth labels to the forecasters; scores are
// still recorded whenever the classifier runs.
eval::PredictionSet predict_localization(
    std::span<const data::Clip> clips, models::ActionModel* action,
    std::span<const std::pair<std::string, models::FolModel*>> fol_models,
    const LocalizationPredictOptions& opts);

struct EgoPredictOptions {
  bool gt_actions = false;
  bool gt_futures = false;
  int stride = 5;
  std::vector<std::string> baselines;
};

// Ego-motion records per window and model.  Agent futures come from the feed
// forecaster's mean trajectories; a null feed, or gt_futures, substitutes
// ground truth.
eval::PredictionSet predict_ego_motion(
    std::span<const data::Clip> clips, models::ActionModel* action,
    models::FolModel* feed,
    std::span<const std::pair<std::string, models::EgoModel*>> ego_models,
    const EgoPredictOptions& opts);

struct RunArtifacts {
  std::string corpus_dir;
  std::map<std::string, std::string> checkpoints;  // stage name -> path
  std::string predictions_path;
  std::string report_path;
  std::string report_dir;
  std::string manifest_path;
  eval::Report report;
};

// Runs every stage in order, reusing any stage output already on disk (same
// config required); a stage failure is rethrown tagged with the stage name
// and everything written so far stays in place.  log, when given, receives
// one line per stage.
RunArtifacts run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace titan::harness
