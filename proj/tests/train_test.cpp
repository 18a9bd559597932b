#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "titan/core/rng.hpp"
#include "titan/data/types.hpp"
#include "titan/models/action_model.hpp"
#include "titan/models/ego_model.hpp"
#include "titan/models/fol_model.hpp"
#include "titan/synth/generator.hpp"

using namespace titan;

namespace {

synth::GeneratorConfig corpus_config() {
  synth::GeneratorConfig config;
  config.seed = 11;
  config.num_clips = 6;
  config.clip_length = 40;
  config.agents_min = 2;
  config.agents_max = 3;
  config.noise_sigma = 0.002;
  config.vehicle_fraction = 0.3;
  return config;
}

struct Corpus {
  std::vector<data::Clip> train;
  std::vector<data::Clip> val;
  std::vector<data::Clip> test;
};

Corpus toy_corpus() {
  synth::GeneratorConfig config = corpus_config();
  Corpus corpus;
  for (int i = 0; i < config.num_clips; ++i) {
    data::Clip clip = synth::generate_clip(config, i);
    if (i < 4) corpus.train.push_back(std::move(clip));
    else if (i == 4) corpus.val.push_back(std::move(clip));
    else corpus.test.push_back(std::move(clip));
  }
  return corpus;
}

}  // namespace

TEST_CASE("action training separates a toy corpus") {
  Corpus corpus = toy_corpus();

  models::ActionModelConfig config;
  config.hidden = 32;
  config.lr = 3e-3;
  config.batch = 8;
  config.epochs = 100;
  config.appearance_noise = 0.05;
  config.window_stride = 5;
  config.seed = 2;
  models::ActionModel model(config);
  models::ActionTrainLog log = models::train_action(model, corpus.train, corpus.val);

  REQUIRE(log.train_loss.size() == static_cast<std::size_t>(config.epochs));
  REQUIRE(log.val_loss.size() == log.train_loss.size());
  for (double l : log.train_loss) CHECK(std::isfinite(l));
  CHECK(log.train_loss.back() < log.train_loss.front());
  // Cross entropy on the tiny held-out split eventually overfits; the best
  // epoch still has to beat the starting point.
  CHECK(*std::min_element(log.val_loss.begin(), log.val_loss.end()) <
        log.val_loss.front());

  // Held-out windows: the feature channels carry the labels, so a trained
  // classifier should rank the true class near the top on every head.
  std::vector<models::ScoredInstance> instances;
  for (const data::Clip& clip : corpus.test)
    for (const data::Window& w : data::make_windows(clip, config.window_stride))
      for (int a : w.agent_indices) {
        const data::AgentTrack& track = clip.agents[static_cast<std::size_t>(a)];
        auto feats = models::action_features(clip, track, w.t_start, data::kObsSteps,
                                             config.appearance_noise);
        models::ScoredInstance si;
        si.scores = model.classify(feats);
        si.target = track.actions[static_cast<std::size_t>(w.t_obs_end() - 1)];
        si.type = track.agent_type;
        instances.push_back(std::move(si));
      }
  REQUIRE(!instances.empty());
  const models::MapResult result = models::per_frame_map(instances);
  CHECK(result.overall >= 0.9);
}

TEST_CASE("forecast training improves held-out likelihood") {
  Corpus corpus = toy_corpus();

  models::FolConfig config;
  config.width = 12;
  config.ablation = models::parse_fol_ablation("EP+IP+AP");
  config.lr = 1e-3;
  config.batch = 8;
  config.epochs = 3;
  config.window_stride = 10;
  config.seed = 2;
  models::FolModel model(config);
  models::FolTrainLog log = models::train_fol(model, corpus.train, corpus.val);

  REQUIRE(log.train_loss.size() == 3);
  REQUIRE(log.val_loss.size() == 3);
  for (double l : log.train_loss) CHECK(std::isfinite(l));
  CHECK(log.train_loss.back() < log.train_loss.front());
  CHECK(log.val_loss.back() < log.val_loss.front());
}

TEST_CASE("ego training improves held-out likelihood") {
  Corpus corpus = toy_corpus();

  models::EgoConfig config;
  config.width = 12;
  config.variant = models::EgoVariant::aim;
  config.lr = 1e-3;
  config.batch = 8;
  config.epochs = 3;
  config.window_stride = 10;
  config.seed = 2;
  models::EgoModel model(config);
  models::EgoTrainLog log = models::train_ego(model, corpus.train, corpus.val);

  REQUIRE(log.train_loss.size() == 3);
  REQUIRE(log.val_loss.size() == 3);
  for (double l : log.train_loss) CHECK(std::isfinite(l));
  CHECK(log.train_loss.back() < log.train_loss.front());
  CHECK(log.val_loss.back() < log.val_loss.front());
}

TEST_CASE("training is deterministic in the seed") {
  Corpus corpus = toy_corpus();

  models::FolConfig config;
  config.width = 8;
  config.ablation = models::parse_fol_ablation("EP");
  config.lr = 1e-3;
  config.batch = 8;
  config.epochs = 2;
  config.window_stride = 10;
  config.seed = 5;

  models::FolModel a(config);
  models::train_fol(a, corpus.train, corpus.val);
  models::FolModel b(config);
  models::train_fol(b, corpus.train, corpus.val);

  REQUIRE(a.params().items().size() == b.params().items().size());
  for (std::size_t i = 0; i < a.params().items().size(); ++i) {
    const nn::Param* pa = a.params().items()[i];
    const nn::Param* pb = b.params().items()[i];
    REQUIRE(pa->value.size() == pb->value.size());
    for (std::size_t k = 0; k < pa->value.size(); ++k)
      CHECK(pa->value[k] == pb->value[k]);
  }

  config.seed = 6;
  models::FolModel c(config);
  models::train_fol(c, corpus.train, corpus.val);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.params().items().size() && !any_diff; ++i) {
    const auto& va = a.params().items()[i]->value;
    const auto& vc = c.params().items()[i]->value;
    for (std::size_t k = 0; k < va.size(); ++k)
      if (va[k] != vc[k]) {
        any_diff = true;
        break;
      }
  }
  CHECK(any_diff);
}
