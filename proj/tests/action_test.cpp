#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "titan/core/rng.hpp"
#include "titan/data/taxonomy.hpp"
#include "titan/data/types.hpp"
#include "titan/models/action_features.hpp"
#include "titan/models/action_model.hpp"
#include "titan/nn/tape.hpp"

using namespace titan;

namespace {

data::Clip feature_clip(int frames) {
  data::Clip clip;
  clip.clip_id = "feature_clip";
  clip.ego.assign(frames, data::EgoState{0.1, 0.0});

  data::AgentTrack person;
  person.track_id = 3;
  person.agent_type = data::AgentType::person;
  for (int t = 0; t < frames; ++t) {
    data::BBox box;
    box.c_u = 400.0 + 6.0 * t;
    box.c_v = 500.0 + 1.5 * t;
    box.l_u = 60.0;
    box.l_v = 150.0 - 0.5 * t;
    person.boxes.push_back(box);
    data::ActionVector a = data::ActionVector::none_for(person.agent_type);
    a[0] = t % 3;
    a[3] = t % 2;
    person.actions.push_back(a);
    person.visibility.push_back(t != 4);
  }
  clip.agents.push_back(person);
  return clip;
}

std::vector<std::array<double, models::kActionFeatureDim>> random_features(
    core::Rng& rng, int len) {
  std::vector<std::array<double, models::kActionFeatureDim>> out(len);
  for (auto& f : out)
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
  return out;
}

data::ActionVector random_labels(core::Rng& rng) {
  data::ActionVector a;
  for (int h = 0; h < data::kNumActionSets; ++h)
    a[h] = static_cast<int>(rng.index(static_cast<std::size_t>(data::kSetCardinality[h])));
  return a;
}

double cross_entropy(std::span<const double> logits, int target) {
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - max_logit);
  return std::log(denom) - (logits[static_cast<std::size_t>(target)] - max_logit);
}

// Average precision by sweeping a decision threshold over the distinct
// scores: integrates precision over recall steps.  Agrees with rank-based
// averaging whenever scores are tie-free.
double threshold_sweep_ap(std::vector<std::pair<double, bool>> scored) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  int total_pos = 0;
  for (const auto& [s, pos] : scored) total_pos += pos ? 1 : 0;
  REQUIRE(total_pos > 0);

  double ap = 0.0;
  int tp = 0;
  int predicted = 0;
  double prev_recall = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    for (std::size_t k = i; k < j; ++k) {
      tp += scored[k].second ? 1 : 0;
      ++predicted;
    }
    double recall = static_cast<double>(tp) / total_pos;
    double precision = static_cast<double>(tp) / predicted;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

models::ScoredInstance random_instance(core::Rng& rng, data::AgentType type) {
  models::ScoredInstance inst;
  inst.type = type;
  inst.target = random_labels(rng);
  for (int h = 0; h < data::kNumActionSets; ++h) {
    inst.scores[h].resize(static_cast<std::size_t>(data::kSetCardinality[h]));
    for (double& s : inst.scores[h]) s = rng.uniform(0.0, 1.0);
  }
  return inst;
}

}  // namespace

TEST_CASE("action features transcribe box kinematics and labels") {
  data::Clip clip = feature_clip(12);
  const data::AgentTrack& track = clip.agents[0];
  auto feats = models::action_features(clip, track, 0, 12, 0.0);

  for (int t = 0; t < 12; ++t) {
    const data::BBox& box = track.boxes[static_cast<std::size_t>(t)];
    CHECK(feats[static_cast<std::size_t>(t)][0] == box.c_u);
    CHECK(feats[static_cast<std::size_t>(t)][1] == box.c_v);
    CHECK(feats[static_cast<std::size_t>(t)][4] == box.l_u);
    CHECK(feats[static_cast<std::size_t>(t)][5] == box.l_v);
  }
  // Deltas vanish on the first frame and match one-step differences after.
  CHECK(feats[0][2] == 0.0);
  CHECK(feats[0][3] == 0.0);
  CHECK(feats[0][6] == 0.0);
  CHECK(feats[5][2] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(feats[5][3] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(feats[5][6] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(feats[4][7] == 0.0);
  CHECK(feats[5][7] == 1.0);

  // With zero appearance noise the label channels are exactly the
  // normalized action vector.
  for (int t = 0; t < 12; ++t) {
    auto norm = data::normalized_action(track.actions[static_cast<std::size_t>(t)]);
    for (int c = 0; c < 8; ++c)
      CHECK(feats[static_cast<std::size_t>(t)][8 + c] == norm[c]);
  }
}

TEST_CASE("action features are independent of window placement") {
  data::Clip clip = feature_clip(40);
  const data::AgentTrack& track = clip.agents[0];
  auto full = models::action_features(clip, track, 0, 40, 0.3);
  auto window = models::action_features(clip, track, 7, 10, 0.3);
  for (int k = 0; k < 10; ++k)
    for (int c = 0; c < models::kActionFeatureDim; ++c)
      CHECK(window[static_cast<std::size_t>(k)][c] ==
            full[static_cast<std::size_t>(7 + k)][c]);

  CHECK_THROWS_AS(models::action_features(clip, track, 35, 10, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(models::action_features(clip, track, -1, 5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("classifier head widths follow the label set cardinalities") {
  models::ActionModelConfig config;
  config.hidden = 16;
  config.seed = 5;
  models::ActionModel model(config);

  core::Rng rng(42);
  auto feats = random_features(rng, data::kObsSteps);
  nn::Tape tape;
  auto logits = model.forward(tape, feats);
  auto probs = model.classify(feats);
  for (int h = 0; h < data::kNumActionSets; ++h) {
    CHECK(tape.dim(logits[h]) == data::kSetCardinality[h]);
    CHECK(static_cast<int>(probs[h].size()) == data::kSetCardinality[h]);
  }
}

TEST_CASE("zeroed parameters give uniform class probabilities") {
  models::ActionModelConfig config;
  config.hidden = 12;
  models::ActionModel model(config);
  for (nn::Param* p : model.params().items())
    std::fill(p->value.begin(), p->value.end(), 0.0);

  core::Rng rng(7);
  auto feats = random_features(rng, data::kObsSteps);
  auto probs = model.classify(feats);
  for (int h = 0; h < data::kNumActionSets; ++h) {
    double sum = 0.0;
    for (double p : probs[h]) {
      CHECK(p == doctest::Approx(1.0 / data::kSetCardinality[h]).epsilon(1e-12));
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("class probabilities sum to one and factor across heads") {
  models::ActionModelConfig config;
  config.hidden = 16;
  config.seed = 9;
  models::ActionModel model(config);

  core::Rng rng(11);
  auto feats = random_features(rng, data::kObsSteps);
  auto probs = model.classify(feats);
  for (int h = 0; h < data::kNumActionSets; ++h) {
    double sum = 0.0;
    for (double p : probs[h]) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }

  // Scaling one head's projection leaves every other head's distribution
  // untouched: the joint factorizes into independent per-head softmaxes.
  auto before = probs;
  for (nn::Param* p : model.params().items()) {
    if (p->name != "action.head0.w") continue;
    for (double& v : p->value) v *= 3.0;
  }
  auto after = model.classify(feats);
  bool head0_changed = false;
  for (std::size_t c = 0; c < after[0].size(); ++c)
    head0_changed = head0_changed || after[0][c] != before[0][c];
  CHECK(head0_changed);
  for (int h = 1; h < data::kNumActionSets; ++h)
    for (std::size_t c = 0; c < after[h].size(); ++c)
      CHECK(after[h][c] == before[h][c]);
}

TEST_CASE("multi-task loss equals summed cross entropy at zero log-variance") {
  models::ActionModelConfig config;
  config.hidden = 8;
  models::ActionModel model(config);  // log-variances initialize to zero
  for (int h = 0; h < data::kNumActionSets; ++h) CHECK(model.log_variance(h) == 0.0);

  core::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    nn::Tape tape;
    std::array<nn::Tape::Id, data::kNumActionSets> logits;
    std::array<std::vector<double>, data::kNumActionSets> raw;
    for (int h = 0; h < data::kNumActionSets; ++h) {
      raw[h].resize(static_cast<std::size_t>(data::kSetCardinality[h]));
      for (double& v : raw[h]) v = rng.uniform(-2.0, 2.0);
      logits[h] = tape.leaf(raw[h]);
    }
    data::ActionVector target = random_labels(rng);
    auto type = trial % 2 == 0 ? data::AgentType::person : data::AgentType::vehicle_4wheel;
    std::vector<int> heads = models::heads_for(type);

    double expected = 0.0;
    for (int h : heads) expected += cross_entropy(raw[h], target[h]);

    nn::Tape::Id loss = model.multi_task_loss(tape, logits, target, heads);
    CHECK(tape.val(loss)[0] == doctest::Approx(expected).epsilon(1e-9));

    nn::Tape::Id combined = model.combined_loss(tape, logits, target, type);
    CHECK(tape.val(combined)[0] == doctest::Approx(tape.val(loss)[0]).epsilon(1e-12));
  }
}

TEST_CASE("uncertainty weighting is minimized at log of twice the cross entropy") {
  const int head[] = {0};
  for (double ce : {0.3, 1.0, 2.5}) {
    const double ce_arr[] = {ce};
    auto value = [&](double s) {
      const double s_arr[] = {s};
      return models::multi_task_loss_value(ce_arr, s_arr, head);
    };
    double best = std::log(2.0 * ce);
    CHECK(value(best) < value(best - 0.05));
    CHECK(value(best) < value(best + 0.05));
    // Closed form at the optimum: 1/2 + log(2*ce)/2.
    CHECK(value(best) == doctest::Approx(0.5 + 0.5 * std::log(2.0 * ce)).epsilon(1e-12));
  }
}

TEST_CASE("classification loss gradients match finite differences") {
  models::ActionModelConfig config;
  config.hidden = 6;
  config.seed = 3;
  models::ActionModel model(config);

  core::Rng rng(31);
  auto feats = random_features(rng, data::kObsSteps);
  data::ActionVector target = random_labels(rng);

  for (auto type : {data::AgentType::person, data::AgentType::vehicle_4wheel}) {
    auto loss_value = [&]() {
      nn::Tape tape;
      auto logits = model.forward(tape, feats);
      nn::Tape::Id loss = model.combined_loss(tape, logits, target, type);
      return tape.val(loss)[0];
    };
    auto compute_grads = [&]() {
      model.params().zero_grads();
      nn::Tape tape;
      auto logits = model.forward(tape, feats);
      nn::Tape::Id loss = model.combined_loss(tape, logits, target, type);
      tape.backward(loss);
    };
    double err = test::max_grad_rel_error(model.params(), loss_value, compute_grads);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("predict_labels forces inapplicable sets to none") {
  models::ActionModelConfig config;
  config.hidden = 10;
  config.seed = 13;
  models::ActionModel model(config);

  core::Rng rng(17);
  auto feats = random_features(rng, data::kObsSteps);
  auto probs = model.classify(feats);

  data::ActionVector person = model.predict_labels(feats, data::AgentType::person);
  data::ActionVector vehicle = model.predict_labels(feats, data::AgentType::vehicle_4wheel);
  const auto& tax = data::Taxonomy::get();
  for (int h = 0; h < data::kNumActionSets; ++h) {
    int argmax = static_cast<int>(
        std::max_element(probs[h].begin(), probs[h].end()) - probs[h].begin());
    if (h < data::kNumPersonSets) {
      CHECK(person[h] == argmax);
      CHECK(vehicle[h] == tax.none_index(h));
    } else {
      CHECK(vehicle[h] == argmax);
      CHECK(person[h] == tax.none_index(h));
    }
  }
}

TEST_CASE("average precision fixtures") {
  auto make = [](double score, bool positive) {
    core::Rng filler(1);
    models::ScoredInstance inst = random_instance(filler, data::AgentType::person);
    inst.scores[0].assign(10, 0.0);
    inst.scores[0][0] = score;
    inst.target[0] = positive ? 0 : 1;
    return inst;
  };

  SUBCASE("perfect ranking scores one") {
    std::vector<models::ScoredInstance> instances;
    for (int i = 0; i < 4; ++i) instances.push_back(make(1.0 - 0.1 * i, i < 2));
    auto result = models::per_frame_map(instances);
    CHECK(result.per_class[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("single positive ranked last of N scores 1/N") {
    const int n = 6;
    std::vector<models::ScoredInstance> instances;
    for (int i = 0; i < n; ++i) instances.push_back(make(1.0 - 0.1 * i, i == n - 1));
    auto result = models::per_frame_map(instances);
    CHECK(result.per_class[0][0] == doctest::Approx(1.0 / n).epsilon(1e-12));
  }

  SUBCASE("positives at ranks one and three of four score 5/6") {
    std::vector<models::ScoredInstance> instances;
    instances.push_back(make(0.9, true));
    instances.push_back(make(0.8, false));
    instances.push_back(make(0.7, true));
    instances.push_back(make(0.6, false));
    auto result = models::per_frame_map(instances);
    CHECK(result.per_class[0][0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("average precision matches a threshold-sweep oracle") {
  core::Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(30));
    std::vector<models::ScoredInstance> instances;
    instances.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      instances.push_back(random_instance(
          rng, rng.bernoulli(0.5) ? data::AgentType::person : data::AgentType::vehicle_4wheel));

    auto result = models::per_frame_map(instances);
    for (int h = 0; h < data::kNumActionSets; ++h) {
      const bool person_head = h < data::kNumPersonSets;
      for (int c = 0; c < data::kSetCardinality[h]; ++c) {
        std::vector<std::pair<double, bool>> scored;
        for (const auto& inst : instances) {
          if (data::is_person(inst.type) != person_head) continue;
          scored.emplace_back(inst.scores[h][static_cast<std::size_t>(c)],
                              inst.target[h] == c);
        }
        int positives = 0;
        for (const auto& [s, pos] : scored) positives += pos ? 1 : 0;
        if (positives == 0) {
          CHECK(result.per_class[h][static_cast<std::size_t>(c)] == -1.0);
          continue;
        }
        CHECK(result.per_class[h][static_cast<std::size_t>(c)] ==
              doctest::Approx(threshold_sweep_ap(scored)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("macro averages skip absent classes and empty heads") {
  core::Rng rng(55);
  std::vector<models::ScoredInstance> instances;
  for (int i = 0; i < 8; ++i) {
    auto inst = random_instance(rng, data::AgentType::person);
    inst.target[0] = i % 2;  // only atomic classes 0 and 1 appear
    instances.push_back(inst);
  }
  auto result = models::per_frame_map(instances);

  for (int c = 2; c < data::kSetCardinality[0]; ++c)
    CHECK(result.per_class[0][static_cast<std::size_t>(c)] == -1.0);
  double expect_head0 = (result.per_class[0][0] + result.per_class[0][1]) / 2.0;
  CHECK(result.per_head[0] == doctest::Approx(expect_head0).epsilon(1e-12));

  // No vehicles present, so the vehicle heads carry no score at all.
  for (int h = data::kNumPersonSets; h < data::kNumActionSets; ++h) {
    CHECK(result.per_head[h] == -1.0);
    for (double ap : result.per_class[h]) CHECK(ap == -1.0);
  }
  double head_sum = 0.0;
  for (int h = 0; h < data::kNumPersonSets; ++h) head_sum += result.per_head[h];
  CHECK(result.overall == doctest::Approx(head_sum / data::kNumPersonSets).epsilon(1e-12));

  CHECK_THROWS_AS(models::per_frame_map({}), std::invalid_argument);
}

TEST_CASE("vehicle instances do not perturb person head precision") {
  core::Rng rng(77);
  std::vector<models::ScoredInstance> persons;
  for (int i = 0; i < 12; ++i) persons.push_back(random_instance(rng, data::AgentType::person));
  auto alone = models::per_frame_map(persons);

  std::vector<models::ScoredInstance> mixed = persons;
  for (int i = 0; i < 9; ++i) {
    auto inst = random_instance(rng, i % 2 == 0 ? data::AgentType::vehicle_4wheel
                                                : data::AgentType::vehicle_2wheel);
    for (int h = 0; h < data::kNumPersonSets; ++h)
      for (double& s : inst.scores[h]) s = 1e6 * rng.uniform(-1.0, 1.0);
    mixed.push_back(inst);
  }
  auto with_vehicles = models::per_frame_map(mixed);

  for (int h = 0; h < data::kNumPersonSets; ++h) {
    CHECK(with_vehicles.per_head[h] == alone.per_head[h]);
    for (int c = 0; c < data::kSetCardinality[h]; ++c)
      CHECK(with_vehicles.per_class[h][static_cast<std::size_t>(c)] ==
            alone.per_class[h][static_cast<std::size_t>(c)]);
  }
  for (int h = data::kNumPersonSets; h < data::kNumActionSets; ++h)
    CHECK(with_vehicles.per_head[h] >= 0.0);
}

TEST_CASE("action config round-trips through json and rejects unknown keys") {
  models::ActionModelConfig config;
  config.hidden = 24;
  config.lr = 5e-4;
  config.batch = 4;
  config.epochs = 17;
  config.appearance_noise = 0.05;
  config.window_stride = 3;
  config.seed = 99;
  auto parsed = models::parse_action_config(models::action_config_to_json(config));
  CHECK(parsed.hidden == config.hidden);
  CHECK(parsed.lr == config.lr);
  CHECK(parsed.batch == config.batch);
  CHECK(parsed.epochs == config.epochs);
  CHECK(parsed.appearance_noise == config.appearance_noise);
  CHECK(parsed.window_stride == config.window_stride);
  CHECK(parsed.seed == config.seed);

  CHECK_THROWS_WITH_AS(models::parse_action_config("{\"learningrate\": 0.1}"),
                       doctest::Contains("learning_rate"), std::runtime_error);
}
