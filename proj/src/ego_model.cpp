#include "titan/models/ego_model.hpp"

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
    std::string msg = "ego config: unknown key \"" + it.key() + "\"";
    const std::string suggestion = core::closest_match(it.key(), allowed);
    if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
    throw std::runtime_error(msg);
  }
}

}  // namespace

EgoVariant parse_ego_variant(const std::string& name) {
  if (name == "vanilla") return EgoVariant::vanilla;
  if (name == "FP") return EgoVariant::fp;
  if (name == "FP+AP") return EgoVariant::fp_ap;
  if (name == "AIM_FP") return EgoVariant::aim_fp;
  if (name == "AIM") return EgoVariant::aim;
  throw std::runtime_error("unknown ego variant \"" + name +
                           "\" (expected vanilla, FP, FP+AP, AIM_FP, or AIM)");
}

std::string ego_variant_name(EgoVariant variant) {
  switch (variant) {
    case EgoVariant::vanilla: return "vanilla";
    case EgoVariant::fp: return "FP";
    case EgoVariant::fp_ap: return "FP+AP";
    case EgoVariant::aim_fp: return "AIM_FP";
    case EgoVariant::aim: return "AIM";
  }
  throw std::logic_error("ego variant out of range");
}

std::string ego_config_to_json(const EgoConfig& config) {
  nlohmann::ordered_json j;
  j["width"] = config.width;
  j["variant"] = ego_variant_name(config.variant);
  j["learning_rate"] = config.lr;
  j["batch"] = config.batch;
  j["epochs"] = config.epochs;
  j["window_stride"] = config.window_stride;
  j["seed"] = config.seed;
  return j.dump(2);
}

EgoConfig parse_ego_config(const std::string& json_text) {
  nlohmann::json root = nlohmann::json::parse(json_text);
  check_keys(root, {"width", "variant", "learning_rate", "batch", "epochs", "window_stride",
                    "seed"});
  EgoConfig c;
  if (root.contains("width")) c.width = root["width"].get<int>();
  if (root.contains("variant"))
    c.variant = parse_ego_variant(root["variant"].get<std::string>());
  if (root.contains("learning_rate")) c.lr = root["learning_rate"].get<double>();
  if (root.contains("batch")) c.batch = root["batch"].get<int>();
  if (root.contains("epochs")) c.epochs = root["epochs"].get<int>();
  if (root.contains("window_stride")) c.window_stride = root["window_stride"].get<int>();
  if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
  if (c.width < 1 || c.batch < 1 || c.epochs < 0 || c.lr <= 0.0)
    throw std::runtime_error("ego config: invalid hyperparameters");
  return c;
}

EgoModel::EgoModel(const EgoConfig& config) : config_(config) {
  core::Rng rng(config.seed);
  const int w = config.width;
  ego_embed_.init("ego.embed", w, 2, rng);
  enc_cell_.init("ego.enc_cell", w, w, rng);
  if (uses_agents()) {
    box_embed_.init("ego.box_embed", w, 4, rng);
    if (uses_actions()) act_embed_.init("ego.act_embed", w, 8, rng);
    fuse_agent_.init("ego.fuse_agent", w, uses_actions() ? 2 * w : w, rng);
    if (uses_importance()) aim_.init("ego.aim", 1, w, rng);
    fuse_hidden_.init("ego.fuse_hidden", w, 2 * w, rng);
    // Decoder state passes through this affine every step.  Start it as the
    // identity on the hidden block with the aggregate block zeroed (the
    // aggregate occupies the first half), so agent context fades in from a
    // working ego-only decoder.
    std::fill(fuse_hidden_.w.value.begin(), fuse_hidden_.w.value.end(), 0.0);
    for (int r = 0; r < w; ++r)
      fuse_hidden_.w.value[static_cast<size_t>(r) * fuse_hidden_.w.cols + w + r] = 1.0;
    std::fill(fuse_hidden_.b.value.begin(), fuse_hidden_.b.value.end(), 0.0);
  }
  dec_cell_.init("ego.dec_cell", w, w, rng);
  h2i_.init("ego.h2i", w, w, rng);
  out_.init("ego.out", 2, w, rng);
  s1_.resize("ego.log_var_alpha", 1, 1);
  s2_.resize("ego.log_var_omega", 1, 1);

  store_.add(ego_embed_);
  store_.add(enc_cell_);
  if (uses_agents()) {
    store_.add(box_embed_);
    if (uses_actions()) store_.add(act_embed_);
    store_.add(fuse_agent_);
    if (uses_importance()) store_.add(aim_);
    store_.add(fuse_hidden_);
  }
  store_.add(dec_cell_);
  store_.add(h2i_);
  store_.add(out_);
  store_.add(s1_);
  store_.add(s2_);
}

Tape::Id EgoModel::agent_feature(Tape& tape, const EgoAgentInput& agent) {
  const data::BBox& b = agent.future_box;
  Tape::Id box =
      tape.relu(tape.affine(box_embed_, tape.leaf({b.c_u, b.c_v, b.l_u, b.l_v})));
  if (!uses_actions()) return tape.affine(fuse_agent_, box);
  const auto na = data::normalized_action(agent.action);
  Tape::Id act = tape.relu(
      tape.affine(act_embed_, tape.leaf(std::span<const double>(na.data(), na.size()))));
  return tape.affine(fuse_agent_, tape.concat({act, box}));
}

Tape::Id EgoModel::aggregate_agents(Tape& tape, std::span<const EgoAgentInput> agents,
                                    std::vector<std::pair<int, double>>* trace) {
  if (agents.empty()) return tape.zeros(config_.width);
  std::vector<Tape::Id> terms;
  terms.reserve(agents.size());
  for (const EgoAgentInput& agent : agents) {
    Tape::Id f = agent_feature(tape, agent);
    if (uses_importance()) {
      Tape::Id w = tape.tanh(tape.affine(aim_, f));
      if (trace) trace->emplace_back(agent.track_id, tape.val(w)[0]);
      f = tape.broadcast_mul(w, f);
    }
    terms.push_back(f);
  }
  return tape.sum_stack(terms);
}

std::vector<Tape::Id> EgoModel::forward(Tape& tape, const EgoInputs& in,
                                        ImportanceTrace* importance) {
  if (static_cast<int>(in.history.size()) != data::kObsSteps)
    throw std::invalid_argument("ego forward: expected " +
                                std::to_string(data::kObsSteps) + " history steps");
  if (uses_agents() && static_cast<int>(in.agents.size()) != data::kFutSteps)
    throw std::invalid_argument("ego forward: expected agent sets for " +
                                std::to_string(data::kFutSteps) + " future steps");

  Tape::Id h = tape.zeros(config_.width);
  for (const data::EgoState& e : in.history) {
    Tape::Id x = tape.relu(tape.affine(ego_embed_, tape.leaf({e.alpha, e.omega})));
    h = tape.gru_step(enc_cell_, x, h);
  }

  if (importance) importance->weights.assign(uses_importance() ? data::kFutSteps : 0, {});

  const data::EgoState& last = in.history.back();
  Tape::Id input =
      tape.relu(tape.affine(ego_embed_, tape.leaf({last.alpha, last.omega})));
  std::vector<Tape::Id> outputs;
  outputs.reserve(data::kFutSteps);
  for (int k = 0; k < data::kFutSteps; ++k) {
    Tape::Id fused = h;
    if (uses_agents()) {
      std::vector<std::pair<int, double>>* row =
          (importance && uses_importance()) ? &importance->weights[k] : nullptr;
      Tape::Id agg = aggregate_agents(tape, in.agents[k], row);
      fused = tape.affine(fuse_hidden_, tape.concat({agg, h}));
    }
    h = tape.gru_step(dec_cell_, input, fused);
    outputs.push_back(tape.affine(out_, h));
    input = tape.relu(tape.affine(h2i_, h));
  }
  return outputs;
}

Tape::Id EgoModel::loss(Tape& tape, std::span<const Tape::Id> outputs,
                        std::span<const data::EgoState> truth) {
  if (outputs.empty() || outputs.size() != truth.size())
    throw std::invalid_argument("ego loss: outputs and truth must match");
  std::vector<Tape::Id> sq;
  sq.reserve(outputs.size());
  for (size_t k = 0; k < outputs.size(); ++k) {
    Tape::Id d = tape.sub(outputs[k], tape.leaf({truth[k].alpha, truth[k].omega}));
    sq.push_back(tape.mul(d, d));
  }
  Tape::Id sse = tape.sum_stack(sq);
  Tape::Id sse_alpha = tape.slice(sse, 0, 1);
  Tape::Id sse_omega = tape.slice(sse, 1, 1);
  Tape::Id s1 = tape.param(s1_);
  Tape::Id s2 = tape.param(s2_);
  Tape::Id weighted = tape.add(tape.mul(tape.exp(tape.scale(s1, -1.0)), sse_alpha),
                               tape.mul(tape.exp(tape.scale(s2, -1.0)), sse_omega));
  return tape.add(weighted, tape.scale(tape.add(s1, s2), 0.5));
}

EgoPrediction EgoModel::predict(const EgoInputs& in) {
  Tape tape;
  EgoPrediction pred;
  const auto outputs = forward(tape, in, &pred.importance);
  pred.future.reserve(outputs.size());
  for (Tape::Id id : outputs) {
    const auto& v = tape.val(id);
    pred.future.push_back({v[0], v[1]});
  }
  return pred;
}

double ego_loss_value(std::span<const data::EgoState> pred,
                      std::span<const data::EgoState> truth, double s1, double s2) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::invalid_argument("ego loss: outputs and truth must match");
  double sse_alpha = 0.0;
  double sse_omega = 0.0;
  for (size_t k = 0; k < pred.size(); ++k) {
    const double da = pred[k].alpha - truth[k].alpha;
    const double dw = pred[k].omega - truth[k].omega;
    sse_alpha += da * da;
    sse_omega += dw * dw;
  }
  return std::exp(-s1) * sse_alpha + std::exp(-s2) * sse_omega + 0.5 * (s1 + s2);
}

EgoInputs ego_inputs_from_truth(const data::Window& window) {
  const data::Clip& clip = *window.clip;
  EgoInputs in;
  in.history.assign(clip.ego.begin() + window.t_start,
                    clip.ego.begin() + window.t_obs_end());
  in.agents.resize(data::kFutSteps);
  for (int k = 0; k < data::kFutSteps; ++k) {
    for (int a : window.agent_indices) {
      const data::AgentTrack& track = clip.agents[a];
      in.agents[k].push_back({track.track_id, track.boxes[window.t_obs_end() + k],
                              track.actions[window.t_obs_end() - 1]});
    }
  }
  return in;
}

EgoTrainLog train_ego(EgoModel& model, std::span<const data::Clip> train,
                      std::span<const data::Clip> val) {
  const EgoConfig& config = model.config();

  struct Instance {
    const data::Clip* clip;
    data::Window window;
  };
  auto collect = [&](std::span<const data::Clip> clips) {
    std::vector<Instance> items;
    for (const data::Clip& clip : clips)
      for (const data::Window& w : data::make_windows(clip, config.window_stride))
        items.push_back({&clip, w});
    return items;
  };
  const std::vector<Instance> train_items = collect(train);
  const std::vector<Instance> val_items = collect(val);
  if (train_items.empty()) throw std::runtime_error("train_ego: no training instances");

  auto instance_loss = [&](const Instance& item, bool learn) {
    nn::Tape tape;
    const EgoInputs in = ego_inputs_from_truth(item.window);
    const auto outputs = model.forward(tape, in, nullptr);
    std::span<const data::EgoState> truth(
        item.clip->ego.data() + item.window.t_obs_end(), data::kFutSteps);
    const Tape::Id loss = model.loss(tape, outputs, truth);
    if (learn) tape.backward(loss);
    return tape.val(loss)[0];
  };

  nn::RmsProp opt{config.lr, 0.99, 1e-8};
  core::Rng rng = core::Rng(config.seed).fork(43);
  EgoTrainLog log;
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
        throw std::runtime_error("train_ego: non-finite loss at epoch " +
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
