#include "titan/models/action_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "titan/core/rng.hpp"
#include "titan/core/text.hpp"
#include "titan/nn/optimizer.hpp"

namespace titan::models {

namespace {

using nn::Tape;

void check_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end()) continue;
    std::string msg = "action config: unknown key \"" + it.key() + "\"";
    const std::string suggestion = core::closest_match(it.key(), allowed);
    if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
    throw std::runtime_error(msg);
  }
}

}  // namespace

std::string action_config_to_json(const ActionModelConfig& config) {
  nlohmann::ordered_json j;
  j["feature_dim"] = config.feature_dim;
  j["hidden"] = config.hidden;
  j["learning_rate"] = config.lr;
  j["batch"] = config.batch;
  j["epochs"] = config.epochs;
  j["appearance_noise"] = config.appearance_noise;
  j["window_stride"] = config.window_stride;
  j["seed"] = config.seed;
  return j.dump(2);
}

ActionModelConfig parse_action_config(const std::string& json_text) {
  nlohmann::json root = nlohmann::json::parse(json_text);
  check_keys(root, {"feature_dim", "hidden", "learning_rate", "batch", "epochs",
                    "appearance_noise", "window_stride", "seed"});
  ActionModelConfig c;
  if (root.contains("feature_dim")) c.feature_dim = root["feature_dim"].get<int>();
  if (root.contains("hidden")) c.hidden = root["hidden"].get<int>();
  if (root.contains("learning_rate")) c.lr = root["learning_rate"].get<double>();
  if (root.contains("batch")) c.batch = root["batch"].get<int>();
  if (root.contains("epochs")) c.epochs = root["epochs"].get<int>();
  if (root.contains("appearance_noise"))
    c.appearance_noise = root["appearance_noise"].get<double>();
  if (root.contains("window_stride")) c.window_stride = root["window_stride"].get<int>();
  if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
  if (c.hidden < 1 || c.batch < 1 || c.epochs < 0 || c.lr <= 0.0)
    throw std::runtime_error("action config: invalid hyperparameters");
  return c;
}

std::array<int, 5> person_heads() { return {0, 1, 2, 3, 4}; }
std::array<int, 3> vehicle_heads() { return {5, 6, 7}; }

std::vector<int> heads_for(data::AgentType type) {
  if (data::is_person(type)) return {0, 1, 2, 3, 4};
  return {5, 6, 7};
}

ActionModel::ActionModel(const ActionModelConfig& config) : config_(config) {
  core::Rng rng(config.seed);
  gru1_.init("action.gru1", config.feature_dim, config.hidden, rng);
  gru2_.init("action.gru2", config.hidden, config.hidden, rng);
  for (int h = 0; h < data::kNumActionSets; ++h) {
    heads_[h].init("action.head" + std::to_string(h), data::kSetCardinality[h],
                   config.hidden, rng);
    log_var_[h].resize("action.log_var" + std::to_string(h), 1, 1);
  }
  store_.add(gru1_);
  store_.add(gru2_);
  for (auto& head : heads_) store_.add(head);
  for (auto& s : log_var_) store_.add(s);
}

std::array<Tape::Id, data::kNumActionSets> ActionModel::forward(
    Tape& tape, std::span<const std::array<double, kActionFeatureDim>> features) {
  if (static_cast<int>(features.size()) != data::kObsSteps)
    throw std::invalid_argument("action forward: expected " +
                                std::to_string(data::kObsSteps) + " feature frames");
  Tape::Id h1 = tape.zeros(config_.hidden);
  Tape::Id h2 = tape.zeros(config_.hidden);
  for (const auto& frame : features) {
    Tape::Id x = tape.leaf(std::span<const double>(frame.data(), frame.size()));
    h1 = tape.gru_step(gru1_, x, h1);
    h2 = tape.gru_step(gru2_, h1, h2);
  }
  std::array<Tape::Id, data::kNumActionSets> logits;
  for (int h = 0; h < data::kNumActionSets; ++h) logits[h] = tape.affine(heads_[h], h2);
  return logits;
}

std::array<std::vector<double>, data::kNumActionSets> ActionModel::classify(
    std::span<const std::array<double, kActionFeatureDim>> features) {
  Tape tape;
  const auto logits = forward(tape, features);
  std::array<std::vector<double>, data::kNumActionSets> probs;
  for (int h = 0; h < data::kNumActionSets; ++h) {
    const auto& lv = tape.val(logits[h]);
    double m = lv[0];
    for (double v : lv) m = std::max(m, v);
    double z = 0.0;
    probs[h].resize(lv.size());
    for (size_t i = 0; i < lv.size(); ++i) z += std::exp(lv[i] - m);
    for (size_t i = 0; i < lv.size(); ++i) probs[h][i] = std::exp(lv[i] - m) / z;
  }
  return probs;
}

data::ActionVector ActionModel::predict_labels(
    std::span<const std::array<double, kActionFeatureDim>> features,
    data::AgentType type) {
  const auto probs = classify(features);
  data::ActionVector out = data::ActionVector::none_for(type);
  for (int h : heads_for(type)) {
    const auto& p = probs[h];
    out.labels[h] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  return out;
}

Tape::Id ActionModel::multi_task_loss(
    Tape& tape, const std::array<Tape::Id, data::kNumActionSets>& logits,
    const data::ActionVector& target, std::span<const int> heads) {
  if (heads.empty()) throw std::invalid_argument("multi_task_loss: empty head set");
  std::vector<Tape::Id> terms;
  for (int h : heads) {
    if (target.labels[h] < 0 || target.labels[h] >= data::kSetCardinality[h])
      throw std::out_of_range("multi_task_loss: target out of range for head " +
                              std::to_string(h));
    Tape::Id ce = tape.softmax_cross_entropy(logits[h], target.labels[h]);
    Tape::Id s = tape.param(log_var_[h]);
    Tape::Id term =
        tape.add(tape.mul(ce, tape.exp(tape.scale(s, -1.0))), tape.scale(s, 0.5));
    terms.push_back(term);
  }
  Tape::Id total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = tape.add(total, terms[i]);
  return total;
}

Tape::Id ActionModel::combined_loss(
    Tape& tape, const std::array<Tape::Id, data::kNumActionSets>& logits,
    const data::ActionVector& target, data::AgentType type) {
  const std::vector<int> heads = heads_for(type);
  return multi_task_loss(tape, logits, target, heads);
}

double multi_task_loss_value(std::span<const double> cross_entropies,
                             std::span<const double> log_variances,
                             std::span<const int> heads) {
  if (heads.empty()) throw std::invalid_argument("multi_task_loss: empty head set");
  double total = 0.0;
  for (int h : heads)
    total += cross_entropies[h] * std::exp(-log_variances[h]) + log_variances[h] / 2.0;
  return total;
}

MapResult per_frame_map(std::span<const ScoredInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("per_frame_map: empty input");
  MapResult result;
  double head_sum = 0.0;
  int head_count = 0;
  for (int h = 0; h < data::kNumActionSets; ++h) {
    const bool person_head = h < 5;
    std::vector<int> rows;
    for (size_t i = 0; i < instances.size(); ++i)
      if (data::is_person(instances[i].type) == person_head)
        rows.push_back(static_cast<int>(i));

    const int cardinality = data::kSetCardinality[h];
    result.per_class[h].assign(cardinality, -1.0);
    double class_sum = 0.0;
    int class_count = 0;
    for (int c = 0; c < cardinality; ++c) {
      int positives = 0;
      for (int i : rows) positives += instances[i].target.labels[h] == c ? 1 : 0;
      if (positives == 0) continue;  // class absent from targets

      std::vector<int> order = rows;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return instances[a].scores[h][c] > instances[b].scores[h][c];
      });
      double ap = 0.0;
      int seen_pos = 0;
      for (size_t rank = 0; rank < order.size(); ++rank) {
        if (instances[order[rank]].target.labels[h] != c) continue;
        ++seen_pos;
        ap += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
      }
      ap /= positives;
      result.per_class[h][c] = ap;
      class_sum += ap;
      ++class_count;
    }
    result.per_head[h] = class_count > 0 ? class_sum / class_count : -1.0;
    if (class_count > 0) {
      head_sum += result.per_head[h];
      ++head_count;
    }
  }
  result.overall = head_count > 0 ? head_sum / head_count : 0.0;
  return result;
}

ActionTrainLog train_action(ActionModel& model, std::span<const data::Clip> train,
                            std::span<const data::Clip> val) {
  const ActionModelConfig& config = model.config();

  struct Instance {
    const data::Clip* clip;
    const data::AgentTrack* track;
    int t_start;
  };
  auto collect = [&](std::span<const data::Clip> clips) {
    std::vector<Instance> items;
    for (const data::Clip& clip : clips) {
      for (const data::Window& w : data::make_windows(clip, config.window_stride))
        for (int a : w.agent_indices)
          items.push_back({&clip, &clip.agents[a], w.t_start});
    }
    return items;
  };
  const std::vector<Instance> train_items = collect(train);
  const std::vector<Instance> val_items = collect(val);
  if (train_items.empty())
    throw std::runtime_error("train_action: no training instances");

  auto instance_loss = [&](const Instance& item, bool learn) {
    nn::Tape tape;
    const auto features =
        action_features(*item.clip, *item.track, item.t_start, data::kObsSteps,
                        config.appearance_noise);
    const auto logits = model.forward(tape, features);
    const data::ActionVector& target =
        item.track->actions[item.t_start + data::kObsSteps - 1];
    const nn::Tape::Id loss =
        model.combined_loss(tape, logits, target, item.track->agent_type);
    if (learn) tape.backward(loss);
    return tape.val(loss)[0];
  };

  nn::RmsProp opt{config.lr, 0.99, 1e-8};
  core::Rng rng = core::Rng(config.seed).fork(17);
  ActionTrainLog log;
  std::vector<int> order(train_items.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    int in_batch = 0;
    model.params().zero_grads();
    for (size_t k = 0; k < order.size(); ++k) {
      const double loss = instance_loss(train_items[order[k]], true);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_action: non-finite loss at epoch " +
                                 std::to_string(epoch));
      epoch_loss += loss;
      if (++in_batch == config.batch || k + 1 == order.size()) {
        opt.step(model.params());
        model.params().zero_grads();
        in_batch = 0;
      }
    }
    log.train_loss.push_back(epoch_loss / static_cast<double>(train_items.size()));

    if (!val_items.empty()) {
      double val_loss = 0.0;
      for (const Instance& item : val_items) val_loss += instance_loss(item, false);
      log.val_loss.push_back(val_loss / static_cast<double>(val_items.size()));
    }
  }
  return log;
}

}  // namespace titan::models
