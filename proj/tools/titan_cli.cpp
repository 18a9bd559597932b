#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "titan/data/clip_io.hpp"
#include "titan/eval/report.hpp"
#include "titan/harness/experiment.hpp"
#include "titan/nn/checkpoint.hpp"
#include "titan/synth/generator.hpp"

namespace {

using namespace titan;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits a corpus root into its train/val/test clip lists; a directory
// holding clips directly is treated as the requested split alone.
struct Corpus {
  std::vector<data::Clip> train;
  std::vector<data::Clip> val;
  std::vector<data::Clip> test;
};

Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  Corpus corpus;
  if (fs::is_directory(fs::path(dir) / "train")) {
    corpus.train = data::load_clip_dir((fs::path(dir) / "train").string());
    corpus.val = data::load_clip_dir((fs::path(dir) / "val").string());
    corpus.test = data::load_clip_dir((fs::path(dir) / "test").string());
  } else {
    corpus.test = data::load_clip_dir(dir);
  }
  return corpus;
}

std::unique_ptr<models::ActionModel> load_action_model(const std::string& path) {
  const auto header = nn::read_checkpoint_header(path);
  if (header.first != "action")
    throw std::runtime_error(path + " holds a \"" + header.first +
                             "\" checkpoint, not \"action\"");
  auto model =
      std::make_unique<models::ActionModel>(models::parse_action_config(header.second));
  nn::load_checkpoint(path, "action", model->params());
  return model;
}

std::unique_ptr<models::FolModel> load_fol_model(const std::string& path) {
  const auto header = nn::read_checkpoint_header(path);
  if (header.first != "fol")
    throw std::runtime_error(path + " holds a \"" + header.first +
                             "\" checkpoint, not \"fol\"");
  auto model =
      std::make_unique<models::FolModel>(models::parse_fol_config(header.second));
  nn::load_checkpoint(path, "fol", model->params());
  return model;
}

std::unique_ptr<models::EgoModel> load_ego_model(const std::string& path) {
  const auto header = nn::read_checkpoint_header(path);
  if (header.first != "ego")
    throw std::runtime_error(path + " holds a \"" + header.first +
                             "\" checkpoint, not \"ego\"");
  auto model =
      std::make_unique<models::EgoModel>(models::parse_ego_config(header.second));
  nn::load_checkpoint(path, "ego", model->params());
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory, action, and ego-motion forecasting toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "Write a synthetic corpus");
  cmd_generate->add_option("--config", config_path, "Generator config JSON");
  cmd_generate->add_option("--out", out_path, "Corpus directory")->required();
  cmd_generate->add_option("--seed", seed, "Override the config seed");

  // shared training options
  std::string corpus_dir;
  std::string ablation_name;
  std::string variant_name;
  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", corpus_dir, "Corpus root (train/ val/ test/)")
        ->required();
    cmd->add_option("--config", config_path, "Model config JSON");
    cmd->add_option("--out", out_path, "Checkpoint path")->required();
    cmd->add_option("--seed", seed, "Override the config seed");
  };
  auto* cmd_train_action =
      app.add_subcommand("train-action", "Train the action classifier");
  add_train_opts(cmd_train_action);
  auto* cmd_train_fol =
      app.add_subcommand("train-fol", "Train a trajectory forecaster");
  add_train_opts(cmd_train_fol);
  cmd_train_fol->add_option("--ablation", ablation_name,
                            "vanilla or a +-combination of EP, IP, AP");
  auto* cmd_train_ego = app.add_subcommand("train-ego", "Train an ego-motion model");
  add_train_opts(cmd_train_ego);
  cmd_train_ego->add_option("--variant", variant_name,
                            "vanilla, FP, FP+AP, AIM_FP, or AIM");

  // predict
  std::vector<std::string> fol_ckpts;
  std::vector<std::string> ego_ckpts;
  std::string action_ckpt;
  std::string feed_ckpt;
  std::vector<std::string> baseline_names;
  bool gt_actions = false;
  bool gt_futures = false;
  int stride = 5;
  auto* cmd_predict =
      app.add_subcommand("predict", "Forecast test-split trajectories");
  cmd_predict->add_option("--corpus", corpus_dir, "Corpus root or clip directory")
      ->required();
  cmd_predict->add_option("--out", out_path, "Predictions JSONL")->required();
  cmd_predict->add_option("--fol", fol_ckpts, "Forecaster checkpoint(s)");
  cmd_predict->add_option("--action", action_ckpt, "Action classifier checkpoint");
  cmd_predict->add_option("--baseline", baseline_names,
                          "Const-Vel and/or Const-Vel-scaled");
  cmd_predict->add_flag("--gt-actions", gt_actions,
                        "Condition on ground-truth labels");
  cmd_predict->add_option("--stride", stride, "Window stride (default 5)");

  auto* cmd_predict_ego =
      app.add_subcommand("predict-ego", "Forecast test-split ego motion");
  cmd_predict_ego->add_option("--corpus", corpus_dir, "Corpus root or clip directory")
      ->required();
  cmd_predict_ego->add_option("--out", out_path, "Predictions JSONL")->required();
  cmd_predict_ego->add_option("--ego", ego_ckpts, "Ego model checkpoint(s)");
  cmd_predict_ego->add_option("--fol", feed_ckpt,
                              "Forecaster checkpoint supplying agent futures");
  cmd_predict_ego->add_option("--action", action_ckpt,
                              "Action classifier checkpoint");
  cmd_predict_ego->add_option("--baseline", baseline_names,
                              "Const-Vel-ego and/or Const-Acc");
  cmd_predict_ego->add_flag("--gt-actions", gt_actions,
                            "Condition on ground-truth labels");
  cmd_predict_ego->add_flag("--gt-futures", gt_futures,
                            "Feed ground-truth agent futures");
  cmd_predict_ego->add_option("--stride", stride, "Window stride (default 5)");

  // eval
  std::vector<std::string> pred_paths;
  std::string truth_dir;
  auto* cmd_eval = app.add_subcommand("eval", "Score predictions against a corpus");
  cmd_eval->add_option("--pred", pred_paths, "Prediction JSONL file(s)")->required();
  cmd_eval->add_option("--truth", truth_dir, "Corpus root or clip directory")
      ->required();
  cmd_eval->add_option("--out", out_path, "Report JSON path")->required();
  cmd_eval->add_option("--stride", stride, "Window stride (default 5)");

  // report
  std::string report_in;
  auto* cmd_report =
      app.add_subcommand("report", "Render tables and plots from a report");
  cmd_report->add_option("--in", report_in, "report.json path")->required();
  cmd_report->add_option("--out", out_path, "Output directory")->required();

  // run
  auto* cmd_run = app.add_subcommand("run", "Full pipeline: generate through report");
  cmd_run->add_option("--config", config_path, "Experiment config JSON");
  cmd_run->add_option("--out", out_path, "Experiment directory");
  cmd_run->add_option("--seed", seed, "Override the config seed");

  CLI11_PARSE(app, argc, argv);
  CLI::App* cmd = app.get_subcommands().front();
  const std::string tag = cmd->get_name();

  try {
    if (cmd == cmd_generate) {
      synth::GeneratorConfig config;
      if (!config_path.empty())
        config = synth::load_generator_config(config_path);
      if (seed) config.seed = *seed;
      const synth::CorpusLayout layout = synth::generate_corpus(config, out_path);
      std::cerr << "generate: " << layout.train_ids.size() << " train / "
                << layout.val_ids.size() << " val / " << layout.test_ids.size()
                << " test clips under " << out_path << "\n";
    } else if (cmd == cmd_train_action) {
      models::ActionModelConfig config;
      if (!config_path.empty())
        config = models::parse_action_config(read_text(config_path));
      if (seed) config.seed = *seed;
      const Corpus corpus = load_corpus(corpus_dir);
      models::ActionModel model(config);
      const auto tl = models::train_action(model, corpus.train, corpus.val);
      nn::save_checkpoint(out_path, "action", models::action_config_to_json(config),
                          model.params());
      std::cerr << "train-action: " << tl.train_loss.size() << " epochs, final "
                << "train loss " << (tl.train_loss.empty() ? 0.0 : tl.train_loss.back())
                << ", wrote " << out_path << "\n";
    } else if (cmd == cmd_train_fol) {
      models::FolConfig config;
      if (!config_path.empty())
        config = models::parse_fol_config(read_text(config_path));
      if (!ablation_name.empty())
        config.ablation = models::parse_fol_ablation(ablation_name);
      if (seed) config.seed = *seed;
      const Corpus corpus = load_corpus(corpus_dir);
      models::FolModel model(config);
      const auto tl = models::train_fol(model, corpus.train, corpus.val);
      nn::save_checkpoint(out_path, "fol", models::fol_config_to_json(config),
                          model.params());
      std::cerr << "train-fol: " << models::fol_ablation_name(config.ablation)
                << ", " << tl.train_loss.size() << " epochs, final train loss "
                << (tl.train_loss.empty() ? 0.0 : tl.train_loss.back()) << ", wrote "
                << out_path << "\n";
    } else if (cmd == cmd_train_ego) {
      models::EgoConfig config;
      if (!config_path.empty())
        config = models::parse_ego_config(read_text(config_path));
      if (!variant_name.empty())
        config.variant = models::parse_ego_variant(variant_name);
      if (seed) config.seed = *seed;
      const Corpus corpus = load_corpus(corpus_dir);
      models::EgoModel model(config);
      const auto tl = models::train_ego(model, corpus.train, corpus.val);
      nn::save_checkpoint(out_path, "ego", models::ego_config_to_json(config),
                          model.params());
      std::cerr << "train-ego: " << models::ego_variant_name(config.variant) << ", "
                << tl.train_loss.size() << " epochs, final train loss "
                << (tl.train_loss.empty() ? 0.0 : tl.train_loss.back()) << ", wrote "
                << out_path << "\n";
    } else if (cmd == cmd_predict) {
      const Corpus corpus = load_corpus(corpus_dir);
      std::unique_ptr<models::ActionModel> action;
      if (!action_ckpt.empty()) action = load_action_model(action_ckpt);
      std::vector<std::unique_ptr<models::FolModel>> owned;
      std::vector<std::pair<std::string, models::FolModel*>> fol_list;
      for (const std::string& path : fol_ckpts) {
        owned.push_back(load_fol_model(path));
        fol_list.emplace_back(
            models::fol_ablation_name(owned.back()->config().ablation),
            owned.back().get());
      }
      harness::LocalizationPredictOptions opts;
      opts.gt_actions = gt_actions;
      opts.stride = stride;
      opts.baselines = baseline_names;
      const eval::PredictionSet preds =
          harness::predict_localization(corpus.test, action.get(), fol_list, opts);
      eval::save_predictions(preds, out_path);
      std::cerr << "predict: " << preds.fol.size() << " trajectories, "
                << preds.action.size() << " score rows, wrote " << out_path << "\n";
    } else if (cmd == cmd_predict_ego) {
      const Corpus corpus = load_corpus(corpus_dir);
      std::unique_ptr<models::ActionModel> action;
      if (!action_ckpt.empty()) action = load_action_model(action_ckpt);
      std::unique_ptr<models::FolModel> feed;
      if (!feed_ckpt.empty()) feed = load_fol_model(feed_ckpt);
      std::vector<std::unique_ptr<models::EgoModel>> owned;
      std::vector<std::pair<std::string, models::EgoModel*>> ego_list;
      for (const std::string& path : ego_ckpts) {
        owned.push_back(load_ego_model(path));
        ego_list.emplace_back(
            models::ego_variant_name(owned.back()->config().variant),
            owned.back().get());
      }
      harness::EgoPredictOptions opts;
      opts.gt_actions = gt_actions;
      opts.gt_futures = gt_futures;
      opts.stride = stride;
      opts.baselines = baseline_names;
      const eval::PredictionSet preds = harness::predict_ego_motion(
          corpus.test, action.get(), feed.get(), ego_list, opts);
      eval::save_predictions(preds, out_path);
      std::cerr << "predict-ego: " << preds.ego.size() << " series, wrote "
                << out_path << "\n";
    } else if (cmd == cmd_eval) {
      eval::PredictionSet preds;
      for (const std::string& path : pred_paths)
        eval::append_predictions(preds, eval::load_predictions(path));
      const Corpus corpus = load_corpus(truth_dir);
      eval::EvalOptions opts;
      opts.window_stride = stride;
      const eval::Report report = eval::evaluate(preds, corpus.test, opts);
      eval::save_report(report, out_path);
      std::cerr << "eval: " << report.fol.size() << " localization rows, "
                << report.ego.size() << " ego rows, wrote " << out_path << "\n";
    } else if (cmd == cmd_report) {
      const eval::Report report = eval::load_report(report_in);
      eval::write_report_artifacts(report, out_path);
      std::cerr << "report: wrote " << out_path << "\n";
    } else if (cmd == cmd_run) {
      harness::ExperimentConfig config;
      if (!config_path.empty())
        config = harness::load_experiment_config(config_path);
      else
        config = harness::default_experiment_config();
      if (seed) {
        config.seed = *seed;
        config.generator.seed = *seed;
        config.action.seed = *seed;
        config.fol.seed = *seed;
        config.ego.seed = *seed;
      }
      if (!out_path.empty()) config.out_dir = out_path;
      harness::run_experiment(config, &std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << tag << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
