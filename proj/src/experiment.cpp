#include "titan/harness/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>

#include "titan/core/hash.hpp"
#include "titan/core/text.hpp"
#include "titan/data/clip_io.hpp"
#include "titan/eval/report.hpp"
#include "titan/models/action_features.hpp"
#include "titan/models/baselines.hpp"
#include "titan/models/gaussian.hpp"
#include "titan/nn/checkpoint.hpp"

namespace titan::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kTopKeys[] = {
    "seed",        "out_dir",       "generator",     "action",
    "fol",         "ego",           "fol_ablations", "ego_variants",
    "action_stage", "use_gt_actions", "use_gt_futures", "baselines",
    "eval_stride"};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parses and collects problems in one pass; parsing continues past each
// issue so the caller sees them all.
ExperimentConfig parse_impl(const std::string& json_text,
                            std::vector<ConfigIssue>& issues) {
  ExperimentConfig c = default_experiment_config();
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    issues.push_back({"", std::string("invalid JSON: ") + e.what()});
    return c;
  }
  if (!root.is_object()) {
    issues.push_back({"", "config must be a JSON object"});
    return c;
  }

  std::vector<std::string> known(std::begin(kTopKeys), std::end(kTopKeys));
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
    std::string msg = "unknown key";
    const std::string suggestion = core::closest_match(it.key(), known);
    if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
    issues.push_back({it.key(), msg});
  }

  auto get_scalar = [&](const char* key, auto& out) {
    if (!root.contains(key)) return;
    try {
      out = root[key].get<std::remove_reference_t<decltype(out)>>();
    } catch (const std::exception& e) {
      issues.push_back({key, e.what()});
    }
  };
  get_scalar("seed", c.seed);
  get_scalar("out_dir", c.out_dir);
  get_scalar("action_stage", c.action_stage);
  get_scalar("use_gt_actions", c.use_gt_actions);
  get_scalar("use_gt_futures", c.use_gt_futures);
  get_scalar("baselines", c.baselines);
  get_scalar("eval_stride", c.eval_stride);
  if (c.eval_stride < 1) issues.push_back({"eval_stride", "must be >= 1"});

  // Stage sections delegate to their own parsers; the keys owned by the
  // experiment level are rejected here first.
  auto section = [&](const char* name, std::initializer_list<const char*> reserved,
                     auto parse, auto& out) {
    if (!root.contains(name)) return;
    json sub = root[name];
    if (!sub.is_object()) {
      issues.push_back({name, "must be a JSON object"});
      return;
    }
    for (const char* key : reserved) {
      if (!sub.contains(key)) continue;
      issues.push_back({std::string(name) + "." + key,
                        std::string("set via ") +
                            (std::string(key) == "seed"
                                 ? "the top-level seed"
                                 : std::string(name) == "fol" ? "fol_ablations"
                                                              : "ego_variants")});
      sub.erase(key);
    }
    try {
      out = parse(sub.dump());
    } catch (const std::exception& e) {
      issues.push_back({name, e.what()});
    }
  };
  section("generator", {"seed"}, synth::parse_generator_config, c.generator);
  section("action", {"seed"}, models::parse_action_config, c.action);
  section("fol", {"seed", "ablation"}, models::parse_fol_config, c.fol);
  section("ego", {"seed", "variant"}, models::parse_ego_config, c.ego);

  auto name_list = [&](const char* key, auto parse, auto& out) {
    if (!root.contains(key)) return;
    if (!root[key].is_array()) {
      issues.push_back({key, "must be an array of names"});
      return;
    }
    std::remove_reference_t<decltype(out)> parsed;
    bool ok = true;
    for (size_t i = 0; i < root[key].size(); ++i) {
      try {
        parsed.push_back(parse(root[key][i].get<std::string>()));
      } catch (const std::exception& e) {
        issues.push_back({std::string(key) + "[" + std::to_string(i) + "]", e.what()});
        ok = false;
      }
    }
    if (ok) out = std::move(parsed);
  };
  name_list("fol_ablations", models::parse_fol_ablation, c.fol_ablations);
  name_list("ego_variants", models::parse_ego_variant, c.ego_variants);

  c.generator.seed = c.seed;
  c.action.seed = c.seed;
  c.fol.seed = c.seed;
  c.ego.seed = c.seed;
  return c;
}

std::string aggregate_message(const std::vector<ConfigIssue>& issues) {
  std::string msg = "experiment config:";
  for (const ConfigIssue& issue : issues) {
    msg += "\n  ";
    if (!issue.path.empty()) msg += issue.path + ": ";
    msg += issue.message;
  }
  return msg;
}

json section_json(const std::string& text, std::initializer_list<const char*> drop) {
  json j = json::parse(text);
  for (const char* key : drop) j.erase(key);
  return j;
}

// Reuses a checkpoint when its stored config matches; otherwise the caller
// must delete it, so config drift never silently evaluates stale weights.
template <typename Model>
bool load_or_train(Model& model, const std::string& kind, const std::string& path,
                   const std::string& config_json, std::ostream* log,
                   const std::function<void()>& train) {
  if (fs::exists(path)) {
    const auto header = nn::read_checkpoint_header(path);
    if (header.second != config_json)
      throw std::runtime_error("checkpoint " + path +
                               " was trained with a different config; delete it to "
                               "retrain");
    nn::load_checkpoint(path, kind, model.params());
    if (log) *log << "  reusing " << path << "\n";
    return false;
  }
  train();
  nn::save_checkpoint(path, kind, config_json, model.params());
  if (log) *log << "  wrote " << path << "\n";
  return true;
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.fol_ablations = {
      models::parse_fol_ablation("vanilla"), models::parse_fol_ablation("EP"),
      models::parse_fol_ablation("EP+IP"), models::parse_fol_ablation("EP+IP+AP")};
  c.ego_variants = {models::EgoVariant::vanilla, models::EgoVariant::aim_fp,
                    models::EgoVariant::aim};
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["seed"] = config.seed;
  j["out_dir"] = config.out_dir;
  j["generator"] =
      section_json(synth::generator_config_to_json(config.generator), {"seed"});
  j["action"] = section_json(models::action_config_to_json(config.action), {"seed"});
  j["fol"] = section_json(models::fol_config_to_json(config.fol),
                          {"seed", "ablation"});
  j["ego"] = section_json(models::ego_config_to_json(config.ego),
                          {"seed", "variant"});
  ordered_json ablations = ordered_json::array();
  for (const models::FolAblation& ab : config.fol_ablations)
    ablations.push_back(models::fol_ablation_name(ab));
  j["fol_ablations"] = std::move(ablations);
  ordered_json variants = ordered_json::array();
  for (models::EgoVariant v : config.ego_variants)
    variants.push_back(models::ego_variant_name(v));
  j["ego_variants"] = std::move(variants);
  j["action_stage"] = config.action_stage;
  j["use_gt_actions"] = config.use_gt_actions;
  j["use_gt_futures"] = config.use_gt_futures;
  j["baselines"] = config.baselines;
  j["eval_stride"] = config.eval_stride;
  return j.dump(2) + "\n";
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  std::vector<ConfigIssue> issues;
  ExperimentConfig c = parse_impl(json_text, issues);
  if (!issues.empty()) throw std::runtime_error(aggregate_message(issues));
  return c;
}

std::vector<ConfigIssue> validate_experiment_json(const std::string& json_text) {
  std::vector<ConfigIssue> issues;
  parse_impl(json_text, issues);
  return issues;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::string text = read_text(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    return default_experiment_config();
  return parse_experiment_config(text);
}

namespace {

// Labels for every clip agent at the window's last observed step: the
// classifier's argmax when chaining, ground truth otherwise.
std::vector<data::ActionVector> window_labels(const data::Clip& clip,
                                              const data::Window& w,
                                              models::ActionModel* action,
                                              bool gt_actions) {
  std::vector<data::ActionVector> labels(clip.agents.size());
  for (size_t i = 0; i < clip.agents.size(); ++i)
    labels[i] = clip.agents[i].actions[w.t_obs_end() - 1];
  if (!action || gt_actions) return labels;
  for (size_t i = 0; i < clip.agents.size(); ++i) {
    const data::AgentTrack& track = clip.agents[i];
    const auto features =
        models::action_features(clip, track, w.t_start, data::kObsSteps,
                                action->config().appearance_noise);
    labels[i] = action->predict_labels(features, track.agent_type);
  }
  return labels;
}

void check_baseline_names(std::span<const std::string> names,
                          std::initializer_list<const char*> allowed) {
  for (const std::string& name : names) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || name == a;
    if (!ok) throw std::runtime_error("unknown baseline \"" + name + "\"");
  }
}

}  // namespace

eval::PredictionSet predict_localization(
    std::span<const data::Clip> clips, models::ActionModel* action,
    std::span<const std::pair<std::string, models::FolModel*>> fol_models,
    const LocalizationPredictOptions& opts) {
  check_baseline_names(opts.baselines, {"Const-Vel", "Const-Vel-scaled"});
  eval::PredictionSet preds;
  const bool gt_actions = opts.gt_actions || action == nullptr;
  for (const data::Clip& clip : clips) {
    for (const data::Window& w : data::make_windows(clip, opts.stride)) {
      const auto labels = window_labels(clip, w, action, gt_actions);
      if (action) {
        for (int a : w.agent_indices) {
          const data::AgentTrack& track = clip.agents[a];
          const auto features =
              models::action_features(clip, track, w.t_start, data::kObsSteps,
                                      action->config().appearance_noise);
          preds.action.push_back({clip.clip_id, w.t_start, track.track_id,
                                  action->classify(features)});
        }
      }
      const std::span<const data::ActionVector> override_span =
          gt_actions ? std::span<const data::ActionVector>{}
                     : std::span<const data::ActionVector>(labels);
      for (const auto& [name, model] : fol_models) {
        for (int a : w.agent_indices) {
          const models::FolInputs in = models::fol_inputs(w, a, override_span);
          preds.fol.push_back({clip.clip_id, w.t_start, clip.agents[a].track_id,
                               name, models::forecast_mean(model->predict(in))});
        }
      }
      for (const std::string& name : opts.baselines) {
        for (int a : w.agent_indices) {
          const data::AgentTrack& track = clip.agents[a];
          std::span<const data::BBox> observed(track.boxes.data() + w.t_start,
                                               data::kObsSteps);
          preds.fol.push_back(
              {clip.clip_id, w.t_start, track.track_id, name,
               models::const_vel_boxes(observed, data::kFutSteps,
                                       name == "Const-Vel-scaled")});
        }
      }
    }
  }
  return preds;
}

eval::PredictionSet predict_ego_motion(
    std::span<const data::Clip> clips, models::ActionModel* action,
    models::FolModel* feed,
    std::span<const std::pair<std::string, models::EgoModel*>> ego_models,
    const EgoPredictOptions& opts) {
  check_baseline_names(opts.baselines, {"Const-Vel-ego", "Const-Acc"});
  eval::PredictionSet preds;
  const bool gt_actions = opts.gt_actions || action == nullptr;
  const bool gt_futures = opts.gt_futures || feed == nullptr;
  for (const data::Clip& clip : clips) {
    for (const data::Window& w : data::make_windows(clip, opts.stride)) {
      const auto labels = window_labels(clip, w, action, gt_actions);
      const std::span<const data::ActionVector> override_span =
          gt_actions ? std::span<const data::ActionVector>{}
                     : std::span<const data::ActionVector>(labels);

      std::map<int, std::vector<data::BBox>> futures;
      if (!gt_futures) {
        for (int a : w.agent_indices) {
          const models::FolInputs in = models::fol_inputs(w, a, override_span);
          futures[clip.agents[a].track_id] =
              models::forecast_mean(feed->predict(in));
        }
      }

      models::EgoInputs ego_in;
      ego_in.history.assign(clip.ego.begin() + w.t_start,
                            clip.ego.begin() + w.t_obs_end());
      ego_in.agents.resize(data::kFutSteps);
      for (int k = 0; k < data::kFutSteps; ++k) {
        for (int a : w.agent_indices) {
          const data::AgentTrack& track = clip.agents[a];
          const data::BBox box =
              gt_futures ? track.boxes[w.t_obs_end() + k]
                         : futures.at(track.track_id)[static_cast<size_t>(k)];
          ego_in.agents[k].push_back({track.track_id, box, labels[a]});
        }
      }
      for (const auto& [name, model] : ego_models) {
        models::EgoPrediction p = model->predict(ego_in);
        preds.ego.push_back({clip.clip_id, w.t_start, name, std::move(p.future),
                             std::move(p.importance.weights)});
      }
      for (const std::string& name : opts.baselines) {
        preds.ego.push_back(
            {clip.clip_id, w.t_start, name,
             name == "Const-Acc"
                 ? models::const_acc_ego(ego_in.history, data::kFutSteps)
                 : models::const_vel_ego(ego_in.history, data::kFutSteps),
             {}});
      }
    }
  }
  return preds;
}

RunArtifacts run_experiment(const ExperimentConfig& config, std::ostream* log) {
  RunArtifacts artifacts;
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "checkpoints");
  write_text((out_dir / "config.json").string(), experiment_config_to_json(config));

  auto stage = [&](const std::string& name, const std::function<void()>& fn) {
    if (log) *log << "[" << name << "]\n";
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
  };

  // Corpus.
  const fs::path corpus_dir = out_dir / "corpus";
  artifacts.corpus_dir = corpus_dir.string();
  stage("generate", [&] {
    const fs::path manifest = corpus_dir / "manifest.json";
    const std::string want = synth::generator_config_to_json(config.generator);
    if (fs::exists(manifest)) {
      const json have = json::parse(read_text(manifest.string()));
      if (have.at("config") != json::parse(want))
        throw std::runtime_error("existing corpus at " + corpus_dir.string() +
                                 " was generated with a different config; delete it");
      if (log) *log << "  reusing " << corpus_dir.string() << "\n";
      return;
    }
    synth::generate_corpus(config.generator, corpus_dir.string());
    if (log) *log << "  wrote " << corpus_dir.string() << "\n";
  });

  std::vector<data::Clip> train_clips;
  std::vector<data::Clip> val_clips;
  std::vector<data::Clip> test_clips;
  stage("load", [&] {
    train_clips = data::load_clip_dir((corpus_dir / "train").string());
    val_clips = data::load_clip_dir((corpus_dir / "val").string());
    test_clips = data::load_clip_dir((corpus_dir / "test").string());
    if (log)
      *log << "  " << train_clips.size() << " train / " << val_clips.size()
           << " val / " << test_clips.size() << " test clips\n";
    if (test_clips.empty())
      throw std::runtime_error("test split is empty; increase num_clips");
  });

  // Training stages.
  std::optional<models::ActionModel> action_model;
  if (config.action_stage) {
    stage("train-action", [&] {
      action_model.emplace(config.action);
      const std::string path = (out_dir / "checkpoints" / "action.ckpt").string();
      load_or_train(*action_model, "action", path,
                    models::action_config_to_json(config.action), log, [&] {
                      const auto tl =
                          models::train_action(*action_model, train_clips, val_clips);
                      if (log && !tl.train_loss.empty())
                        *log << "  final train loss " << tl.train_loss.back() << "\n";
                    });
      artifacts.checkpoints["action"] = path;
    });
  }

  std::vector<std::unique_ptr<models::FolModel>> fol_models;
  stage("train-fol", [&] {
    for (const models::FolAblation& ab : config.fol_ablations) {
      models::FolConfig fc = config.fol;
      fc.ablation = ab;
      const std::string name = models::fol_ablation_name(ab);
      auto model = std::make_unique<models::FolModel>(fc);
      const std::string path =
          (out_dir / "checkpoints" / ("fol_" + name + ".ckpt")).string();
      if (log) *log << "  " << name << "\n";
      load_or_train(*model, "fol", path, models::fol_config_to_json(fc), log, [&] {
        const auto tl = models::train_fol(*model, train_clips, val_clips);
        if (log && !tl.train_loss.empty())
          *log << "  final train loss " << tl.train_loss.back() << "\n";
      });
      artifacts.checkpoints["fol_" + name] = path;
      fol_models.push_back(std::move(model));
    }
  });

  std::vector<std::unique_ptr<models::EgoModel>> ego_models;
  stage("train-ego", [&] {
    for (models::EgoVariant v : config.ego_variants) {
      models::EgoConfig ec = config.ego;
      ec.variant = v;
      const std::string name = models::ego_variant_name(v);
      auto model = std::make_unique<models::EgoModel>(ec);
      const std::string path =
          (out_dir / "checkpoints" / ("ego_" + name + ".ckpt")).string();
      if (log) *log << "  " << name << "\n";
      load_or_train(*model, "ego", path, models::ego_config_to_json(ec), log, [&] {
        const auto tl = models::train_ego(*model, train_clips, val_clips);
        if (log && !tl.train_loss.empty())
          *log << "  final train loss " << tl.train_loss.back() << "\n";
      });
      artifacts.checkpoints["ego_" + name] = path;
      ego_models.push_back(std::move(model));
    }
  });

  // Test-time chain: predicted actions feed localization, whose mean
  // trajectories feed ego prediction (the last listed ablation supplies
  // them), unless the ground-truth toggles say otherwise.
  eval::PredictionSet preds;
  stage("predict", [&] {
    const bool gt_actions = config.use_gt_actions || !config.action_stage;
    models::ActionModel* action = action_model ? &*action_model : nullptr;

    LocalizationPredictOptions lopts;
    lopts.gt_actions = gt_actions;
    lopts.stride = config.eval_stride;
    if (config.baselines) lopts.baselines = {"Const-Vel", "Const-Vel-scaled"};
    std::vector<std::pair<std::string, models::FolModel*>> fol_list;
    for (size_t m = 0; m < fol_models.size(); ++m)
      fol_list.emplace_back(models::fol_ablation_name(config.fol_ablations[m]),
                            fol_models[m].get());
    preds = predict_localization(test_clips, action, fol_list, lopts);

    EgoPredictOptions eopts;
    eopts.gt_actions = gt_actions;
    eopts.gt_futures = config.use_gt_futures;
    eopts.stride = config.eval_stride;
    if (config.baselines) eopts.baselines = {"Const-Vel-ego", "Const-Acc"};
    std::vector<std::pair<std::string, models::EgoModel*>> ego_list;
    for (size_t m = 0; m < ego_models.size(); ++m)
      ego_list.emplace_back(models::ego_variant_name(config.ego_variants[m]),
                            ego_models[m].get());
    models::FolModel* feed = fol_models.empty() ? nullptr : fol_models.back().get();
    eval::append_predictions(
        preds, predict_ego_motion(test_clips, action, feed, ego_list, eopts));

    artifacts.predictions_path = (out_dir / "predictions.jsonl").string();
    eval::save_predictions(preds, artifacts.predictions_path);
    if (log) *log << "  wrote " << artifacts.predictions_path << "\n";
  });

  stage("eval", [&] {
    const eval::PredictionSet loaded =
        eval::load_predictions(artifacts.predictions_path);
    eval::EvalOptions opts;
    opts.window_stride = config.eval_stride;
    artifacts.report = eval::evaluate(loaded, test_clips, opts);
    artifacts.report_path = (out_dir / "report.json").string();
    eval::save_report(artifacts.report, artifacts.report_path);
    if (log) *log << "  wrote " << artifacts.report_path << "\n";
  });

  stage("report", [&] {
    artifacts.report_dir = (out_dir / "report").string();
    eval::write_report_artifacts(artifacts.report, artifacts.report_dir);
    if (log) *log << "  wrote " << artifacts.report_dir << "\n";
  });

  stage("manifest", [&] {
    ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["seed"] = config.seed;
    manifest["config"] = json::parse(experiment_config_to_json(config));
    manifest["config_fingerprint"] =
        core::file_fingerprint((out_dir / "config.json").string());
    manifest["corpus_manifest_fingerprint"] =
        core::file_fingerprint((corpus_dir / "manifest.json").string());
    ordered_json ckpts;
    for (const auto& [name, path] : artifacts.checkpoints)
      ckpts[name] = core::file_fingerprint(path);
    manifest["checkpoint_fingerprints"] = std::move(ckpts);
    manifest["predictions_fingerprint"] =
        core::file_fingerprint(artifacts.predictions_path);
    manifest["report_fingerprint"] = core::file_fingerprint(artifacts.report_path);
    artifacts.manifest_path = (out_dir / "manifest.json").string();
    write_text(artifacts.manifest_path, manifest.dump(2) + "\n");
    if (log) *log << "  wrote " << artifacts.manifest_path << "\n";
  });

  return artifacts;
}

}  // namespace titan::harness
