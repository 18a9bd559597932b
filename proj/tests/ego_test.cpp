#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "titan/core/rng.hpp"
#include "titan/data/types.hpp"
#include "titan/models/ego_model.hpp"
#include "titan/nn/tape.hpp"

using namespace titan;

namespace {

data::Clip ego_clip() {
  data::Clip clip;
  clip.clip_id = "ego_scene";
  for (int t = 0; t < data::kWindowSpan; ++t)
    clip.ego.push_back({1.0 + 0.05 * t, 0.1 * std::sin(0.2 * t)});

  for (int id : {4, 9}) {
    data::AgentTrack track;
    track.track_id = id;
    track.agent_type = id == 4 ? data::AgentType::person : data::AgentType::vehicle_4wheel;
    for (int t = 0; t < data::kWindowSpan; ++t) {
      track.boxes.push_back(
          {0.3 + 0.01 * id + 0.003 * t, 0.5 - 0.002 * t, 0.05, 0.12});
      data::ActionVector a = data::ActionVector::none_for(track.agent_type);
      if (id == 4) a[0] = 2;
      else a[5] = 1;
      track.actions.push_back(a);
      track.visibility.push_back(true);
    }
    clip.agents.push_back(track);
  }
  return clip;
}

models::EgoConfig small_config(models::EgoVariant variant, int width = 6) {
  models::EgoConfig config;
  config.width = width;
  config.variant = variant;
  config.seed = 3;
  return config;
}

std::vector<data::EgoState> future_ego(const data::Clip& clip, int t_start) {
  return {clip.ego.begin() + t_start + data::kObsSteps,
          clip.ego.begin() + t_start + data::kWindowSpan};
}

}  // namespace

TEST_CASE("ego variant names parse and round-trip") {
  using V = models::EgoVariant;
  const std::pair<V, const char*> table[] = {{V::vanilla, "vanilla"},
                                             {V::fp, "FP"},
                                             {V::fp_ap, "FP+AP"},
                                             {V::aim_fp, "AIM_FP"},
                                             {V::aim, "AIM"}};
  for (const auto& [variant, name] : table) {
    CHECK(models::parse_ego_variant(name) == variant);
    CHECK(models::ego_variant_name(variant) == name);
  }
  CHECK_THROWS_AS(models::parse_ego_variant("aim"), std::runtime_error);
  CHECK_THROWS_AS(models::parse_ego_variant(""), std::runtime_error);
}

TEST_CASE("variant switches control which inputs the model consumes") {
  using V = models::EgoVariant;
  struct Row {
    V variant;
    bool agents, actions, importance;
  };
  const Row rows[] = {{V::vanilla, false, false, false},
                      {V::fp, true, false, false},
                      {V::fp_ap, true, true, false},
                      {V::aim_fp, true, false, true},
                      {V::aim, true, true, true}};
  for (const Row& r : rows) {
    models::EgoModel model(small_config(r.variant));
    CHECK(model.uses_agents() == r.agents);
    CHECK(model.uses_actions() == r.actions);
    CHECK(model.uses_importance() == r.importance);
  }
}

TEST_CASE("agent parameters exist only for the variants that use them") {
  auto names_of = [](models::EgoVariant v) {
    models::EgoModel model(small_config(v));
    std::map<std::string, std::pair<int, int>> shapes;
    for (nn::Param* p : model.params().items()) shapes[p->name] = {p->rows, p->cols};
    return shapes;
  };

  const int w = 6;
  auto vanilla = names_of(models::EgoVariant::vanilla);
  CHECK(vanilla.at("ego.embed.w") == std::pair{w, 2});
  CHECK(vanilla.at("ego.out.w") == std::pair{2, w});
  CHECK(vanilla.at("ego.log_var_alpha") == std::pair{1, 1});
  CHECK(vanilla.count("ego.box_embed.w") == 0);
  CHECK(vanilla.count("ego.aim.w") == 0);
  CHECK(vanilla.count("ego.fuse_hidden.w") == 0);

  auto fp = names_of(models::EgoVariant::fp);
  CHECK(fp.at("ego.box_embed.w") == std::pair{w, 4});
  CHECK(fp.at("ego.fuse_agent.w") == std::pair{w, w});
  CHECK(fp.at("ego.fuse_hidden.w") == std::pair{w, 2 * w});
  CHECK(fp.count("ego.act_embed.w") == 0);
  CHECK(fp.count("ego.aim.w") == 0);

  auto aim = names_of(models::EgoVariant::aim);
  CHECK(aim.at("ego.act_embed.w") == std::pair{w, 8});
  CHECK(aim.at("ego.fuse_agent.w") == std::pair{w, 2 * w});
  CHECK(aim.at("ego.aim.w") == std::pair{1, w});

  auto aim_fp = names_of(models::EgoVariant::aim_fp);
  CHECK(aim_fp.at("ego.fuse_agent.w") == std::pair{w, w});
  CHECK(aim_fp.at("ego.aim.w") == std::pair{1, w});
  CHECK(aim_fp.count("ego.act_embed.w") == 0);
}

TEST_CASE("prediction length and importance trace population") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  models::EgoInputs in = models::ego_inputs_from_truth(w);

  for (auto variant : {models::EgoVariant::vanilla, models::EgoVariant::fp,
                       models::EgoVariant::fp_ap, models::EgoVariant::aim_fp,
                       models::EgoVariant::aim}) {
    models::EgoModel model(small_config(variant));
    models::EgoPrediction pred = model.predict(in);
    REQUIRE(pred.future.size() == static_cast<std::size_t>(data::kFutSteps));
    for (const data::EgoState& e : pred.future) {
      CHECK(std::isfinite(e.alpha));
      CHECK(std::isfinite(e.omega));
    }
    if (model.uses_importance()) {
      REQUIRE(pred.importance.weights.size() ==
              static_cast<std::size_t>(data::kFutSteps));
      for (const auto& step : pred.importance.weights) {
        REQUIRE(step.size() == clip.agents.size());
        CHECK(step[0].first == 4);
        CHECK(step[1].first == 9);
        for (const auto& [track, weight] : step) {
          CHECK(weight > -1.0);
          CHECK(weight < 1.0);
        }
      }
    } else {
      CHECK(pred.importance.weights.empty());
    }
  }
}

TEST_CASE("aggregation over zero agents is the zero vector") {
  models::EgoModel model(small_config(models::EgoVariant::aim));
  nn::Tape tape;
  nn::Tape::Id agg = model.aggregate_agents(tape, {}, nullptr);
  CHECK(tape.dim(agg) == model.config().width);
  for (double v : tape.val(agg)) CHECK(v == 0.0);
}

TEST_CASE("importance weighting scales the agent feature by a tanh gate") {
  models::EgoModel model(small_config(models::EgoVariant::aim_fp));
  models::EgoAgentInput agent;
  agent.track_id = 7;
  agent.future_box = {0.4, 0.6, 0.05, 0.1};
  agent.action = data::ActionVector::none_for(data::AgentType::person);

  nn::Tape tape;
  nn::Tape::Id feature = model.agent_feature(tape, agent);
  std::vector<std::pair<int, double>> trace;
  const models::EgoAgentInput one[] = {agent};
  nn::Tape::Id agg = model.aggregate_agents(tape, one, &trace);

  REQUIRE(trace.size() == 1);
  CHECK(trace[0].first == 7);
  const double gate = trace[0].second;
  CHECK(std::abs(gate) < 1.0);
  for (int i = 0; i < model.config().width; ++i)
    CHECK(tape.val(agg)[i] ==
          doctest::Approx(gate * tape.val(feature)[i]).epsilon(1e-12));
}

TEST_CASE("unweighted aggregation sums the agent features") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  models::EgoInputs in = models::ego_inputs_from_truth(w);
  REQUIRE(in.agents.size() == static_cast<std::size_t>(data::kFutSteps));
  REQUIRE(in.agents[0].size() == 2);

  models::EgoModel model(small_config(models::EgoVariant::fp));
  nn::Tape tape;
  nn::Tape::Id agg = model.aggregate_agents(tape, in.agents[0], nullptr);
  nn::Tape::Id f0 = model.agent_feature(tape, in.agents[0][0]);
  nn::Tape::Id f1 = model.agent_feature(tape, in.agents[0][1]);
  for (int i = 0; i < model.config().width; ++i)
    CHECK(tape.val(agg)[i] ==
          doctest::Approx(tape.val(f0)[i] + tape.val(f1)[i]).epsilon(1e-12));
}

TEST_CASE("ground-truth inputs mirror the window content") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  models::EgoInputs in = models::ego_inputs_from_truth(w);

  REQUIRE(in.history.size() == static_cast<std::size_t>(data::kObsSteps));
  for (int t = 0; t < data::kObsSteps; ++t) {
    CHECK(in.history[static_cast<std::size_t>(t)].alpha ==
          clip.ego[static_cast<std::size_t>(w.t_start + t)].alpha);
    CHECK(in.history[static_cast<std::size_t>(t)].omega ==
          clip.ego[static_cast<std::size_t>(w.t_start + t)].omega);
  }
  for (int k = 0; k < data::kFutSteps; ++k) {
    const auto& step = in.agents[static_cast<std::size_t>(k)];
    REQUIRE(step.size() == 2);
    const int t = w.t_obs_end() + k;
    for (std::size_t a = 0; a < step.size(); ++a) {
      const data::AgentTrack& track = clip.agents[a];
      CHECK(step[a].track_id == track.track_id);
      CHECK(step[a].future_box.c_u == track.boxes[static_cast<std::size_t>(t)].c_u);
      // Actions come from the last observed step, not the future one.
      CHECK(step[a].action ==
            track.actions[static_cast<std::size_t>(w.t_obs_end() - 1)]);
    }
  }
}

TEST_CASE("agent futures and actions only influence the variants that read them") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  const models::EgoInputs base = models::ego_inputs_from_truth(w);

  models::EgoInputs moved = base;
  for (auto& step : moved.agents)
    for (auto& agent : step) agent.future_box.c_u += 0.2;

  models::EgoInputs relabeled = base;
  for (auto& step : relabeled.agents)
    for (auto& agent : step) agent.action[0] = 5;

  auto equal = [](const models::EgoPrediction& a, const models::EgoPrediction& b) {
    for (std::size_t t = 0; t < a.future.size(); ++t)
      if (a.future[t].alpha != b.future[t].alpha ||
          a.future[t].omega != b.future[t].omega)
        return false;
    return true;
  };

  models::EgoModel vanilla(small_config(models::EgoVariant::vanilla));
  CHECK(equal(vanilla.predict(base), vanilla.predict(moved)));
  CHECK(equal(vanilla.predict(base), vanilla.predict(relabeled)));

  models::EgoModel fp(small_config(models::EgoVariant::fp));
  CHECK_FALSE(equal(fp.predict(base), fp.predict(moved)));
  CHECK(equal(fp.predict(base), fp.predict(relabeled)));

  models::EgoModel aim(small_config(models::EgoVariant::aim));
  CHECK_FALSE(equal(aim.predict(base), aim.predict(moved)));
  CHECK_FALSE(equal(aim.predict(base), aim.predict(relabeled)));
}

TEST_CASE("ego loss reduces to the summed squared error at zero log-variance") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  models::EgoInputs in = models::ego_inputs_from_truth(w);
  std::vector<data::EgoState> truth = future_ego(clip, w.t_start);

  models::EgoModel model(small_config(models::EgoVariant::aim));
  CHECK(model.log_var_alpha() == 0.0);
  CHECK(model.log_var_omega() == 0.0);

  nn::Tape tape;
  auto outputs = model.forward(tape, in, nullptr);
  REQUIRE(outputs.size() == static_cast<std::size_t>(data::kFutSteps));
  for (nn::Tape::Id y : outputs) CHECK(tape.dim(y) == 2);

  double sse = 0.0;
  std::vector<data::EgoState> pred;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    const auto v = tape.val(outputs[t]);
    pred.push_back({v[0], v[1]});
    const double da = v[0] - truth[t].alpha;
    const double dw = v[1] - truth[t].omega;
    sse += da * da + dw * dw;
  }
  const double on_tape = tape.val(model.loss(tape, outputs, truth))[0];
  CHECK(on_tape == doctest::Approx(sse).epsilon(1e-9));
  CHECK(models::ego_loss_value(pred, truth, 0.0, 0.0) ==
        doctest::Approx(on_tape).epsilon(1e-9));
}

TEST_CASE("log-variances reweight the two error channels") {
  std::vector<data::EgoState> pred = {{1.0, 0.5}, {2.0, -0.5}};
  std::vector<data::EgoState> truth = {{0.0, 0.0}, {0.0, 0.0}};
  const double sse_alpha = 1.0 + 4.0;
  const double sse_omega = 0.25 + 0.25;

  CHECK(models::ego_loss_value(pred, truth, 0.0, 0.0) ==
        doctest::Approx(sse_alpha + sse_omega).epsilon(1e-12));
  const double s1 = 0.7;
  const double s2 = -0.3;
  CHECK(models::ego_loss_value(pred, truth, s1, s2) ==
        doctest::Approx(std::exp(-s1) * sse_alpha + std::exp(-s2) * sse_omega +
                        0.5 * (s1 + s2))
            .epsilon(1e-12));

  // The per-channel optimum sits at s = log(2*SSE).
  auto value = [&](double s) { return models::ego_loss_value(pred, truth, s, 0.0); };
  const double best = std::log(2.0 * sse_alpha);
  CHECK(value(best) < value(best - 0.05));
  CHECK(value(best) < value(best + 0.05));
}

TEST_CASE("ego loss gradients match finite differences") {
  data::Clip clip = ego_clip();
  auto w = data::make_windows(clip, 5)[0];
  models::EgoInputs in = models::ego_inputs_from_truth(w);
  std::vector<data::EgoState> truth = future_ego(clip, w.t_start);

  for (auto variant : {models::EgoVariant::vanilla, models::EgoVariant::aim}) {
    models::EgoModel model(small_config(variant, 5));
    auto loss_value = [&]() {
      nn::Tape tape;
      auto outputs = model.forward(tape, in, nullptr);
      return tape.val(model.loss(tape, outputs, truth))[0];
    };
    auto compute_grads = [&]() {
      model.params().zero_grads();
      nn::Tape tape;
      auto outputs = model.forward(tape, in, nullptr);
      tape.backward(model.loss(tape, outputs, truth));
    };
    CHECK(test::max_grad_rel_error(model.params(), loss_value, compute_grads) < 1e-4);
  }
}

TEST_CASE("ego config round-trips through json and rejects unknown keys") {
  models::EgoConfig config;
  config.width = 32;
  config.variant = models::EgoVariant::aim_fp;
  config.lr = 3e-4;
  config.batch = 16;
  config.epochs = 9;
  config.window_stride = 4;
  config.seed = 12;
  auto parsed = models::parse_ego_config(models::ego_config_to_json(config));
  CHECK(parsed.width == config.width);
  CHECK(parsed.variant == config.variant);
  CHECK(parsed.lr == config.lr);
  CHECK(parsed.batch == config.batch);
  CHECK(parsed.epochs == config.epochs);
  CHECK(parsed.window_stride == config.window_stride);
  CHECK(parsed.seed == config.seed);

  CHECK_THROWS_WITH_AS(models::parse_ego_config("{\"learningrate\": 0.1}"),
                       doctest::Contains("learning_rate"), std::runtime_error);
  CHECK_THROWS_WITH_AS(models::parse_ego_config("{\"variant\": \"bogus\"}"),
                       doctest::Contains("bogus"), std::runtime_error);
}
