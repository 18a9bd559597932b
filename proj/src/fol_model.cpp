#include "titan/models/fol_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "titan/core/text.hpp"
#include "titan/nn/optimizer.hpp"

namespace titan::models {

namespace {

using nn::Tape;

// On-tape version of the sigmoid-output transform in gaussian.hpp: slices a
// 10-wide node into the two 5-wide Gaussian parameter vectors.
Tape::Id gaussian_params(Tape& tape, Tape::Id y10, int base) {
  Tape::Id mu = tape.slice(y10, base, 2);
  Tape::Id sigma =
      tape.add_const(tape.scale(tape.slice(y10, base + 2, 2), kSigmaMax - kSigmaMin),
                     kSigmaMin);
  Tape::Id rho = tape.add_const(tape.scale(tape.slice(y10, base + 4, 1), 1.98),
                                -kRhoBound);
  return tape.concat({mu, sigma, rho});
}

void check_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end()) continue;
    std::string msg = "fol config: unknown key \"" + it.key() + "\"";
    const std::string suggestion = core::closest_match(it.key(), allowed);
    if (!suggestion.empty()) msg += " (did you mean \"" + suggestion + "\"?)";
    throw std::runtime_error(msg);
  }
}

}  // namespace

FolAblation parse_fol_ablation(const std::string& name) {
  if (name == "vanilla") return {};
  FolAblation ab;
  size_t pos = 0;
  if (name.empty())
    throw std::runtime_error(
        "unknown ablation \"\" (expected vanilla or a +-combination of EP, IP, AP)");
  while (pos < name.size()) {
    size_t next = name.find('+', pos);
    if (next == std::string::npos) next = name.size();
    const std::string part = name.substr(pos, next - pos);
    if (part == "AP") ab.ap = true;
    else if (part == "EP") ab.ep = true;
    else if (part == "IP") ab.ip = true;
    else
      throw std::runtime_error(
          "unknown ablation \"" + name +
          "\" (expected vanilla or a +-combination of EP, IP, AP)");
    pos = next + 1;
  }
  return ab;
}

std::string fol_ablation_name(const FolAblation& ablation) {
  if (ablation.parts() == 0) return "vanilla";
  std::string name;
  for (const auto& [on, tag] : {std::pair{ablation.ep, "EP"}, {ablation.ip, "IP"},
                                {ablation.ap, "AP"}}) {
    if (!on) continue;
    if (!name.empty()) name += '+';
    name += tag;
  }
  return name;
}

std::string fol_config_to_json(const FolConfig& config) {
  nlohmann::ordered_json j;
  j["width"] = config.width;
  j["ablation"] = fol_ablation_name(config.ablation);
  j["learning_rate"] = config.lr;
  j["batch"] = config.batch;
  j["epochs"] = config.epochs;
  j["window_stride"] = config.window_stride;
  j["seed"] = config.seed;
  return j.dump(2);
}

FolConfig parse_fol_config(const std::string& json_text) {
  nlohmann::json root = nlohmann::json::parse(json_text);
  check_keys(root, {"width", "ablation", "learning_rate", "batch", "epochs", "window_stride",
                    "seed"});
  FolConfig c;
  if (root.contains("width")) c.width = root["width"].get<int>();
  if (root.contains("ablation"))
    c.ablation = parse_fol_ablation(root["ablation"].get<std::string>());
  if (root.contains("learning_rate")) c.lr = root["learning_rate"].get<double>();
  if (root.contains("batch")) c.batch = root["batch"].get<int>();
  if (root.contains("epochs")) c.epochs = root["epochs"].get<int>();
  if (root.contains("window_stride")) c.window_stride = root["window_stride"].get<int>();
  if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
  if (c.width < 1 || c.batch < 1 || c.epochs < 0 || c.lr <= 0.0)
    throw std::runtime_error("fol config: invalid hyperparameters");
  return c;
}

std::array<double, 24> pair_feature(const data::BBox& x_i,
                                    const data::ActionVector& a_i,
                                    const data::BBox& x_j,
                                    const data::ActionVector& a_j) {
  std::array<double, 24> f{};
  const auto ai = data::normalized_action(a_i);
  const auto aj = data::normalized_action(a_j);
  f[0] = x_i.c_u; f[1] = x_i.c_v; f[2] = x_i.l_u; f[3] = x_i.l_v;
  std::copy(ai.begin(), ai.end(), f.begin() + 4);
  f[12] = x_j.c_u; f[13] = x_j.c_v; f[14] = x_j.l_u; f[15] = x_j.l_v;
  std::copy(aj.begin(), aj.end(), f.begin() + 16);
  return f;
}

void InteractionEncoder::init(const std::string& name, int width, core::Rng& rng) {
  width_ = width;
  embed_.init(name + ".pair_embed", width, 24, rng);
  cell_.init(name + ".cell", width, width, rng);
}

void InteractionEncoder::register_params(nn::ParamStore& store) {
  store.add(embed_);
  store.add(cell_);
}

Tape::Id InteractionEncoder::embed_pair(Tape& tape,
                                        const std::array<double, 24>& feature) {
  Tape::Id raw = tape.leaf(std::span<const double>(feature.data(), feature.size()));
  return tape.relu(tape.affine(embed_, raw));
}

Tape::Id InteractionEncoder::encode(Tape& tape, int target_track_id,
                                    std::span<const SceneAgent> agents) {
  const SceneAgent* target = nullptr;
  std::vector<const SceneAgent*> others;
  for (const SceneAgent& agent : agents) {
    if (agent.track_id == target_track_id) target = &agent;
    else others.push_back(&agent);
  }
  if (target == nullptr)
    throw std::invalid_argument("interaction encode: target not in scene");
  if (others.empty()) return tape.zeros(width_);

  std::sort(others.begin(), others.end(),
            [](const SceneAgent* a, const SceneAgent* b) {
              return a->track_id < b->track_id;
            });
  Tape::Id h = tape.zeros(width_);
  std::vector<Tape::Id> hidden_states;
  for (const SceneAgent* other : others) {
    Tape::Id v = embed_pair(
        tape, pair_feature(target->box, target->action, other->box, other->action));
    h = tape.gru_step(cell_, v, h);
    hidden_states.push_back(h);
  }
  return tape.mean_stack(hidden_states);
}

FolInputs fol_inputs(const data::Window& window, int agent_index,
                     std::span<const data::ActionVector> actions_override) {
  const data::Clip& clip = *window.clip;
  if (!actions_override.empty() && actions_override.size() != clip.agents.size())
    throw std::invalid_argument("fol_inputs: actions_override size mismatch");
  FolInputs in;
  const data::AgentTrack& target = clip.agents[agent_index];
  in.target_track_id = target.track_id;
  for (int k = 0; k < data::kObsSteps; ++k) {
    const int t = window.t_start + k;
    in.target_boxes.push_back(target.boxes[t]);
    in.target_actions.push_back(actions_override.empty()
                                    ? target.actions[t]
                                    : actions_override[agent_index]);
    in.ego.push_back(clip.ego[t]);
    std::vector<SceneAgent> frame;
    for (size_t a = 0; a < clip.agents.size(); ++a) {
      const data::AgentTrack& track = clip.agents[a];
      frame.push_back({track.track_id, track.boxes[t],
                       actions_override.empty() ? track.actions[t]
                                                : actions_override[a]});
    }
    in.scene.push_back(std::move(frame));
  }
  return in;
}

FolModel::FolModel(const FolConfig& config) : config_(config) {
  const int w = config.width;
  core::Rng rng(config.seed);
  box_embed_.init("fol.box_embed", w, 4, rng);
  enc_cell_.init("fol.enc_cell", w, w, rng);
  store_.add(box_embed_);
  store_.add(enc_cell_);
  if (config.ablation.ep) {
    ego_embed_.init("fol.ego_embed", w, 2, rng);
    ego_cell_.init("fol.ego_cell", w, w, rng);
    store_.add(ego_embed_);
    store_.add(ego_cell_);
  }
  if (config.ablation.ap) {
    act_embed_.init("fol.act_embed", w, 8, rng);
    store_.add(act_embed_);
  }
  if (config.ablation.ip) {
    interaction_.init("fol.interaction", w, rng);
    interaction_.register_params(store_);
  }
  if (config.ablation.parts() > 0) {
    inject_.init("fol.inject", w, (config.ablation.parts() + 1) * w, rng);
    // The recurrent carry passes through this affine every step.  Start it
    // as the identity on the hidden block with the context blocks zeroed, so
    // the injected model begins as the plain encoder and learns how much of
    // each context channel to mix in.
    const int offset = config.ablation.parts() * w;
    std::fill(inject_.w.value.begin(), inject_.w.value.end(), 0.0);
    for (int r = 0; r < w; ++r)
      inject_.w.value[static_cast<size_t>(r) * inject_.w.cols + offset + r] = 1.0;
    std::fill(inject_.b.value.begin(), inject_.b.value.end(), 0.0);
    store_.add(inject_);
  }
  dec_cell_.init("fol.dec_cell", w, w, rng);
  h2i_.init("fol.h2i", w, w, rng);
  out_.init("fol.out", 10, w, rng);
  store_.add(dec_cell_);
  store_.add(h2i_);
  store_.add(out_);
}

Tape::Id FolModel::encode_past(Tape& tape, const FolInputs& in) {
  const size_t steps = data::kObsSteps;
  if (in.target_boxes.size() != steps || in.target_actions.size() != steps ||
      in.ego.size() != steps || in.scene.size() != steps)
    throw std::invalid_argument("fol encode: series must have length " +
                                std::to_string(steps));
  const FolAblation& ab = config_.ablation;

  std::vector<Tape::Id> ego_hidden;
  if (ab.ep) {
    Tape::Id h = tape.zeros(config_.width);
    for (const data::EgoState& e : in.ego) {
      Tape::Id x = tape.relu(tape.affine(ego_embed_, tape.leaf({e.alpha, e.omega})));
      h = tape.gru_step(ego_cell_, x, h);
      ego_hidden.push_back(h);
    }
  }

  Tape::Id h = tape.zeros(config_.width);
  for (size_t t = 0; t < steps; ++t) {
    Tape::Id hidden = h;
    if (ab.parts() > 0) {
      std::vector<Tape::Id> parts;
      if (ab.ap) {
        const auto a = data::normalized_action(in.target_actions[t]);
        Tape::Id an = tape.leaf(std::span<const double>(a.data(), a.size()));
        parts.push_back(tape.relu(tape.affine(act_embed_, an)));
      }
      if (ab.ip)
        parts.push_back(
            interaction_.encode(tape, in.target_track_id, in.scene[t]));
      if (ab.ep) parts.push_back(tape.relu(ego_hidden[t]));
      parts.push_back(h);
      hidden = tape.affine(inject_, tape.concat(parts));
    }
    const data::BBox& b = in.target_boxes[t];
    Tape::Id x = tape.affine(box_embed_, tape.leaf({b.c_u, b.c_v, b.l_u, b.l_v}));
    h = tape.gru_step(enc_cell_, x, hidden);
  }
  return h;
}

std::vector<Tape::Id> FolModel::decode_future(Tape& tape, Tape::Id hidden,
                                              const data::BBox& last_box) {
  std::vector<Tape::Id> outputs;
  Tape::Id input = tape.affine(
      box_embed_, tape.leaf({last_box.c_u, last_box.c_v, last_box.l_u, last_box.l_v}));
  Tape::Id h = hidden;
  for (int k = 0; k < data::kFutSteps; ++k) {
    h = tape.gru_step(dec_cell_, input, h);
    outputs.push_back(tape.sigmoid(tape.affine(out_, h)));
    input = tape.relu(tape.affine(h2i_, h));
  }
  return outputs;
}

Tape::Id FolModel::nll_loss(Tape& tape, std::span<const Tape::Id> outputs,
                            std::span<const data::BBox> truth) {
  if (outputs.empty() || outputs.size() != truth.size())
    throw std::invalid_argument("fol loss: length mismatch");
  std::vector<Tape::Id> step_losses;
  for (size_t t = 0; t < outputs.size(); ++t) {
    Tape::Id nll_c = tape.bivariate_nll(gaussian_params(tape, outputs[t], 0),
                                        truth[t].c_u, truth[t].c_v);
    Tape::Id nll_l = tape.bivariate_nll(gaussian_params(tape, outputs[t], 5),
                                        truth[t].l_u, truth[t].l_v);
    step_losses.push_back(tape.add(nll_c, nll_l));
  }
  return tape.scale(tape.sum(tape.concat(step_losses)),
                    1.0 / static_cast<double>(outputs.size()));
}

BoxForecast FolModel::predict(const FolInputs& in) {
  Tape tape;
  Tape::Id hidden = encode_past(tape, in);
  const auto outputs = decode_future(tape, hidden, in.target_boxes.back());
  BoxForecast forecast;
  for (Tape::Id y : outputs) forecast.push_back(transform_output(tape.val(y)));
  return forecast;
}

FolTrainLog train_fol(FolModel& model, std::span<const data::Clip> train,
                      std::span<const data::Clip> val) {
  const FolConfig& config = model.config();

  struct Instance {
    const data::Clip* clip;
    data::Window window;
    int agent_index;
  };
  auto collect = [&](std::span<const data::Clip> clips) {
    std::vector<Instance> items;
    for (const data::Clip& clip : clips)
      for (const data::Window& w : data::make_windows(clip, config.window_stride))
        for (int a : w.agent_indices) items.push_back({&clip, w, a});
    return items;
  };
  const std::vector<Instance> train_items = collect(train);
  const std::vector<Instance> val_items = collect(val);
  if (train_items.empty()) throw std::runtime_error("train_fol: no training instances");

  auto instance_loss = [&](const Instance& item, bool learn) {
    nn::Tape tape;
    const FolInputs in = fol_inputs(item.window, item.agent_index);
    Tape::Id hidden = model.encode_past(tape, in);
    const auto outputs = model.decode_future(tape, hidden, in.target_boxes.back());
    const data::AgentTrack& track = item.clip->agents[item.agent_index];
    std::vector<data::BBox> truth(
        track.boxes.begin() + item.window.t_start + data::kObsSteps,
        track.boxes.begin() + item.window.t_start + data::kWindowSpan);
    const Tape::Id loss = model.nll_loss(tape, outputs, truth);
    if (learn) tape.backward(loss);
    return tape.val(loss)[0];
  };

  nn::RmsProp opt{config.lr, 0.99, 1e-8};
  core::Rng rng = core::Rng(config.seed).fork(29);
  FolTrainLog log;
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
        throw std::runtime_error("train_fol: non-finite loss at epoch " +
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
