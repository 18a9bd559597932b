#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "titan/data/taxonomy.hpp"
#include "titan/data/types.hpp"

namespace titan::eval {

// Prediction records, one JSON object per line; each line carries a "kind"
// field ("fol", "ego", or "action") so one file can mix all three.

struct FolPrediction {
  std::string clip_id;
  int t_start = 0;
  int track_id = 0;
  std::string model;  // ablation or baseline row label
  std::vector<data::BBox> trajectory;  // kFutSteps boxes
};

struct EgoPrediction {
  std::string clip_id;
  int t_start = 0;
  std::string model;  // variant or baseline row label
  std::vector<data::EgoState> future;  // kFutSteps
  // Per future step, (track_id, importance weight); empty when the model
  // has no importance module.
  std::vector<std::vector<std::pair<int, double>>> importance;
};

struct ActionPrediction {
  std::string clip_id;
  int t_start = 0;
  int track_id = 0;
  std::array<std::vector<double>, data::kNumActionSets> scores;
};

struct PredictionSet {
  std::vector<FolPrediction> fol;
  std::vector<EgoPrediction> ego;
  std::vector<ActionPrediction> action;
};

std::string predictions_to_jsonl(const PredictionSet& preds);
PredictionSet parse_predictions(const std::string& jsonl_text);
void save_predictions(const PredictionSet& preds, const std::string& path);
PredictionSet load_predictions(const std::string& path);

// Merges b into a.
void append_predictions(PredictionSet& a, const PredictionSet& b);

// Identifies one evaluation instance; track_id is -1 for ego windows.
struct InstanceKey {
  std::string clip_id;
  int t_start = 0;
  int track_id = -1;

  auto operator<=>(const InstanceKey&) const = default;
};

struct LocStats {
  int count = 0;
  double ade_px = 0.0;
  double fde_px = 0.0;
  double fiou = 0.0;
};

struct FolRow {
  std::string name;
  int expected = 0;
  int unmatched = 0;  // predictions with no corresponding truth window
  LocStats overall;
  // Keyed "set/label" by the target's ground-truth primary action (atomic
  // for persons, motion_status for vehicles) at the last observed step.
  std::map<std::string, LocStats> per_class;
  std::vector<InstanceKey> missing;
};

struct EgoRow {
  std::string name;
  int expected = 0;
  int evaluated = 0;
  int unmatched = 0;
  double rmse_alpha = 0.0;
  double rmse_omega = 0.0;
  std::vector<InstanceKey> missing;
};

struct ActionHeadReport {
  std::string set_name;
  double map = -1.0;  // -1 when no class of this head is present
  std::map<std::string, double> per_class;  // label -> AP, -1 when absent
};

struct ActionReport {
  int expected = 0;
  int evaluated = 0;
  int unmatched = 0;
  double overall_map = 0.0;
  std::vector<ActionHeadReport> per_head;
  std::vector<InstanceKey> missing;
};

// Plot payloads embedded in the report so rendering needs no other inputs.
struct FolSample {
  InstanceKey key;
  std::vector<data::BBox> observed;
  std::vector<data::BBox> truth;
  std::map<std::string, std::vector<data::BBox>> predictions;  // model -> boxes
};

struct ImportanceSample {
  InstanceKey key;  // track_id -1
  std::string model;
  std::vector<std::vector<std::pair<int, double>>> steps;
};

struct Report {
  int window_stride = 5;
  std::vector<std::string> test_clips;
  std::vector<FolRow> fol;
  std::vector<EgoRow> ego;
  std::optional<ActionReport> action;
  std::vector<FolSample> fol_samples;
  std::vector<ImportanceSample> importance_samples;
};

struct EvalOptions {
  int window_stride = 5;
  int max_fol_samples = 3;
  int max_importance_samples = 2;
};

// Scores every prediction against the corpus.  Expected instances are all
// (window, agent) pairs for each localization model, all windows for each
// ego model, and all (window, agent) pairs for the action scores; expected
// instances without a prediction are listed per row, never skipped silently.
Report evaluate(const PredictionSet& preds, std::span<const data::Clip> truth,
                const EvalOptions& opts = {});

std::string report_to_json(const Report& report);
Report parse_report(const std::string& json_text);
void save_report(const Report& report, const std::string& path);
Report load_report(const std::string& path);

}  // namespace titan::eval
