#include "titan/eval/evaluate.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "titan/metrics/metrics.hpp"
#include "titan/models/action_model.hpp"

namespace titan::eval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Fixed ladder positions keep report rows in ablation order regardless of
// prediction file order; unknown names sort after, alphabetically.
int fol_rank(const std::string& name) {
  static const std::vector<std::string> ladder = {
      "vanilla", "AP", "IP", "EP", "EP+AP", "EP+IP", "EP+IP+AP",
      "Const-Vel", "Const-Vel-scaled"};
  for (size_t i = 0; i < ladder.size(); ++i)
    if (ladder[i] == name) return static_cast<int>(i);
  return static_cast<int>(ladder.size());
}

int ego_rank(const std::string& name) {
  static const std::vector<std::string> ladder = {
      "vanilla", "FP", "FP+AP", "AIM_FP", "AIM", "Const-Vel-ego", "Const-Acc"};
  for (size_t i = 0; i < ladder.size(); ++i)
    if (ladder[i] == name) return static_cast<int>(i);
  return static_cast<int>(ladder.size());
}

ordered_json box_json(const data::BBox& b) {
  return ordered_json::array({b.c_u, b.c_v, b.l_u, b.l_v});
}

data::BBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error("box must be a 4-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

ordered_json key_json(const InstanceKey& k) {
  ordered_json j;
  j["clip_id"] = k.clip_id;
  j["t_start"] = k.t_start;
  j["track_id"] = k.track_id;
  return j;
}

InstanceKey parse_key(const json& j) {
  InstanceKey k;
  k.clip_id = j.at("clip_id").get<std::string>();
  k.t_start = j.at("t_start").get<int>();
  k.track_id = j.at("track_id").get<int>();
  return k;
}

ordered_json importance_json(
    const std::vector<std::vector<std::pair<int, double>>>& steps) {
  ordered_json out = ordered_json::array();
  for (const auto& step : steps) {
    ordered_json row = ordered_json::array();
    for (const auto& [track_id, w] : step)
      row.push_back(ordered_json::array({track_id, w}));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::vector<std::pair<int, double>>> parse_importance(const json& j) {
  std::vector<std::vector<std::pair<int, double>>> steps;
  for (const auto& row : j) {
    std::vector<std::pair<int, double>> step;
    for (const auto& e : row)
      step.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    steps.push_back(std::move(step));
  }
  return steps;
}

struct LocAccum {
  int count = 0;
  double ade = 0.0;
  double fde = 0.0;
  double fiou = 0.0;

  void add(double a, double f, double i) {
    ++count;
    ade += a;
    fde += f;
    fiou += i;
  }

  LocStats stats() const {
    LocStats s;
    s.count = count;
    if (count > 0) {
      s.ade_px = ade / count;
      s.fde_px = fde / count;
      s.fiou = fiou / count;
    }
    return s;
  }
};

}  // namespace

std::string predictions_to_jsonl(const PredictionSet& preds) {
  std::string out;
  for (const FolPrediction& p : preds.fol) {
    ordered_json j;
    j["kind"] = "fol";
    j["clip_id"] = p.clip_id;
    j["t_start"] = p.t_start;
    j["track_id"] = p.track_id;
    j["model"] = p.model;
    ordered_json traj = ordered_json::array();
    for (const data::BBox& b : p.trajectory) traj.push_back(box_json(b));
    j["trajectory"] = std::move(traj);
    out += j.dump();
    out += '\n';
  }
  for (const EgoPrediction& p : preds.ego) {
    ordered_json j;
    j["kind"] = "ego";
    j["clip_id"] = p.clip_id;
    j["t_start"] = p.t_start;
    j["model"] = p.model;
    ordered_json alpha = ordered_json::array();
    ordered_json omega = ordered_json::array();
    for (const data::EgoState& e : p.future) {
      alpha.push_back(e.alpha);
      omega.push_back(e.omega);
    }
    j["alpha"] = std::move(alpha);
    j["omega"] = std::move(omega);
    if (!p.importance.empty()) j["importance"] = importance_json(p.importance);
    out += j.dump();
    out += '\n';
  }
  for (const ActionPrediction& p : preds.action) {
    ordered_json j;
    j["kind"] = "action";
    j["clip_id"] = p.clip_id;
    j["t_start"] = p.t_start;
    j["track_id"] = p.track_id;
    ordered_json scores = ordered_json::array();
    for (const auto& head : p.scores) scores.push_back(head);
    j["scores"] = std::move(scores);
    out += j.dump();
    out += '\n';
  }
  return out;
}

PredictionSet parse_predictions(const std::string& jsonl_text) {
  PredictionSet preds;
  std::istringstream in(jsonl_text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "fol") {
        FolPrediction p;
        p.clip_id = j.at("clip_id").get<std::string>();
        p.t_start = j.at("t_start").get<int>();
        p.track_id = j.at("track_id").get<int>();
        p.model = j.at("model").get<std::string>();
        for (const auto& b : j.at("trajectory")) p.trajectory.push_back(parse_box(b));
        preds.fol.push_back(std::move(p));
      } else if (kind == "ego") {
        EgoPrediction p;
        p.clip_id = j.at("clip_id").get<std::string>();
        p.t_start = j.at("t_start").get<int>();
        p.model = j.at("model").get<std::string>();
        const auto& alpha = j.at("alpha");
        const auto& omega = j.at("omega");
        if (alpha.size() != omega.size())
          throw std::runtime_error("alpha/omega length mismatch");
        for (size_t i = 0; i < alpha.size(); ++i)
          p.future.push_back({alpha[i].get<double>(), omega[i].get<double>()});
        if (j.contains("importance")) p.importance = parse_importance(j["importance"]);
        preds.ego.push_back(std::move(p));
      } else if (kind == "action") {
        ActionPrediction p;
        p.clip_id = j.at("clip_id").get<std::string>();
        p.t_start = j.at("t_start").get<int>();
        p.track_id = j.at("track_id").get<int>();
        const auto& scores = j.at("scores");
        if (scores.size() != static_cast<size_t>(data::kNumActionSets))
          throw std::runtime_error("expected one score list per label set");
        for (int h = 0; h < data::kNumActionSets; ++h)
          p.scores[h] = scores[h].get<std::vector<double>>();
        preds.action.push_back(std::move(p));
      } else {
        throw std::runtime_error("unknown kind \"" + kind + "\"");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("predictions line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return preds;
}

void save_predictions(const PredictionSet& preds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::string body = predictions_to_jsonl(preds);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

PredictionSet load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str());
}

void append_predictions(PredictionSet& a, const PredictionSet& b) {
  a.fol.insert(a.fol.end(), b.fol.begin(), b.fol.end());
  a.ego.insert(a.ego.end(), b.ego.begin(), b.ego.end());
  a.action.insert(a.action.end(), b.action.begin(), b.action.end());
}

Report evaluate(const PredictionSet& preds, std::span<const data::Clip> truth,
                const EvalOptions& opts) {
  Report report;
  report.window_stride = opts.window_stride;

  std::map<std::string, const data::Clip*> clips;
  for (const data::Clip& c : truth) {
    if (!clips.emplace(c.clip_id, &c).second)
      throw std::runtime_error("evaluate: duplicate clip id " + c.clip_id);
  }
  for (const auto& [id, c] : clips) report.test_clips.push_back(id);

  // Truth lookup per instance; map order doubles as the deterministic
  // iteration order everywhere below.
  struct AgentInstance {
    const data::Clip* clip;
    const data::AgentTrack* track;
    data::Window window;
  };
  std::map<InstanceKey, AgentInstance> agent_truth;
  std::map<InstanceKey, data::Window> window_truth;  // track_id -1
  for (const auto& [id, clip] : clips) {
    for (const data::Window& w : data::make_windows(*clip, opts.window_stride)) {
      window_truth.emplace(InstanceKey{id, w.t_start, -1}, w);
      for (int a : w.agent_indices) {
        const data::AgentTrack& track = clip->agents[a];
        agent_truth.emplace(InstanceKey{id, w.t_start, track.track_id},
                            AgentInstance{clip, &track, w});
      }
    }
  }

  auto class_key = [](const AgentInstance& inst, int t_label) {
    const data::ActionSet set = data::is_person(inst.track->agent_type)
                                    ? data::ActionSet::atomic
                                    : data::ActionSet::motion_status;
    const auto& label_set = data::Taxonomy::get().set(set);
    const int cls = inst.track->actions[t_label][static_cast<int>(set)];
    return label_set.name + "/" + label_set.classes[cls];
  };

  // Localization rows.
  std::map<std::string, std::vector<const FolPrediction*>> fol_by_model;
  for (const FolPrediction& p : preds.fol) fol_by_model[p.model].push_back(&p);
  std::vector<std::string> fol_names;
  for (const auto& [name, list] : fol_by_model) fol_names.push_back(name);
  std::sort(fol_names.begin(), fol_names.end(),
            [](const std::string& a, const std::string& b) {
              const int ra = fol_rank(a);
              const int rb = fol_rank(b);
              return ra != rb ? ra < rb : a < b;
            });

  for (const std::string& name : fol_names) {
    FolRow row;
    row.name = name;
    row.expected = static_cast<int>(agent_truth.size());
    std::map<InstanceKey, const FolPrediction*> have;
    for (const FolPrediction* p : fol_by_model[name]) {
      if (p->trajectory.size() != static_cast<size_t>(data::kFutSteps))
        throw std::runtime_error("evaluate: trajectory for " + p->clip_id +
                                 " must have " + std::to_string(data::kFutSteps) +
                                 " steps");
      const InstanceKey key{p->clip_id, p->t_start, p->track_id};
      if (!agent_truth.count(key) || !have.emplace(key, p).second) ++row.unmatched;
    }
    LocAccum overall;
    std::map<std::string, LocAccum> per_class;
    for (const auto& [key, inst] : agent_truth) {
      auto it = have.find(key);
      if (it == have.end()) {
        row.missing.push_back(key);
        continue;
      }
      std::span<const data::BBox> gt(
          inst.track->boxes.data() + inst.window.t_obs_end(), data::kFutSteps);
      const double w = inst.clip->image_width;
      const double h = inst.clip->image_height;
      const double a = metrics::ade(it->second->trajectory, gt, w, h);
      const double f = metrics::fde(it->second->trajectory, gt, w, h);
      const double i = metrics::fiou(it->second->trajectory.back(), gt.back());
      overall.add(a, f, i);
      per_class[class_key(inst, inst.window.t_obs_end() - 1)].add(a, f, i);
    }
    row.overall = overall.stats();
    for (const auto& [k, acc] : per_class) row.per_class[k] = acc.stats();
    report.fol.push_back(std::move(row));
  }

  // Ego rows.
  std::map<std::string, std::vector<const EgoPrediction*>> ego_by_model;
  for (const EgoPrediction& p : preds.ego) ego_by_model[p.model].push_back(&p);
  std::vector<std::string> ego_names;
  for (const auto& [name, list] : ego_by_model) ego_names.push_back(name);
  std::sort(ego_names.begin(), ego_names.end(),
            [](const std::string& a, const std::string& b) {
              const int ra = ego_rank(a);
              const int rb = ego_rank(b);
              return ra != rb ? ra < rb : a < b;
            });

  for (const std::string& name : ego_names) {
    EgoRow row;
    row.name = name;
    row.expected = static_cast<int>(window_truth.size());
    std::map<InstanceKey, const EgoPrediction*> have;
    for (const EgoPrediction* p : ego_by_model[name]) {
      if (p->future.size() != static_cast<size_t>(data::kFutSteps))
        throw std::runtime_error("evaluate: ego series for " + p->clip_id +
                                 " must have " + std::to_string(data::kFutSteps) +
                                 " steps");
      const InstanceKey key{p->clip_id, p->t_start, -1};
      if (!window_truth.count(key) || !have.emplace(key, p).second) ++row.unmatched;
    }
    metrics::EgoRmseAccum accum;
    for (const auto& [key, window] : window_truth) {
      auto it = have.find(key);
      if (it == have.end()) {
        row.missing.push_back(key);
        continue;
      }
      ++row.evaluated;
      std::span<const data::EgoState> gt(
          window.clip->ego.data() + window.t_obs_end(), data::kFutSteps);
      accum.add(it->second->future, gt);
    }
    if (row.evaluated > 0) {
      const metrics::EgoRmse rmse = accum.value();
      row.rmse_alpha = rmse.alpha;
      row.rmse_omega = rmse.omega;
    }
    report.ego.push_back(std::move(row));
  }

  // Action scores: one model, instances shared with the localization rows.
  if (!preds.action.empty()) {
    ActionReport ar;
    ar.expected = static_cast<int>(agent_truth.size());
    std::map<InstanceKey, const ActionPrediction*> have;
    for (const ActionPrediction& p : preds.action) {
      for (int h = 0; h < data::kNumActionSets; ++h)
        if (p.scores[h].size() != static_cast<size_t>(data::kSetCardinality[h]))
          throw std::runtime_error("evaluate: score list " + std::to_string(h) +
                                   " for " + p.clip_id + " has wrong cardinality");
      const InstanceKey key{p.clip_id, p.t_start, p.track_id};
      if (!agent_truth.count(key) || !have.emplace(key, &p).second) ++ar.unmatched;
    }
    std::vector<models::ScoredInstance> instances;
    for (const auto& [key, inst] : agent_truth) {
      auto it = have.find(key);
      if (it == have.end()) {
        ar.missing.push_back(key);
        continue;
      }
      ++ar.evaluated;
      models::ScoredInstance si;
      si.scores = it->second->scores;
      si.target = inst.track->actions[inst.window.t_obs_end() - 1];
      si.type = inst.track->agent_type;
      instances.push_back(std::move(si));
    }
    const models::MapResult mr = models::per_frame_map(instances);
    ar.overall_map = mr.overall;
    for (int h = 0; h < data::kNumActionSets; ++h) {
      const auto& label_set = data::Taxonomy::get().sets[h];
      ActionHeadReport head;
      head.set_name = label_set.name;
      head.map = mr.per_head[h];
      for (int c = 0; c < data::kSetCardinality[h]; ++c)
        head.per_class[label_set.classes[c]] =
            instances.empty() ? -1.0 : mr.per_class[h][c];
      ar.per_head.push_back(std::move(head));
    }
    report.action = std::move(ar);
  }

  // Plot payloads: the first few instances in key order.
  if (!preds.fol.empty()) {
    std::map<InstanceKey, std::map<std::string, const FolPrediction*>> by_key;
    for (const FolPrediction& p : preds.fol) {
      const InstanceKey key{p.clip_id, p.t_start, p.track_id};
      if (agent_truth.count(key)) by_key[key][p.model] = &p;
    }
    for (const auto& [key, models_here] : by_key) {
      if (static_cast<int>(report.fol_samples.size()) >= opts.max_fol_samples) break;
      const AgentInstance& inst = agent_truth.at(key);
      FolSample sample;
      sample.key = key;
      sample.observed.assign(
          inst.track->boxes.begin() + inst.window.t_start,
          inst.track->boxes.begin() + inst.window.t_obs_end());
      sample.truth.assign(inst.track->boxes.begin() + inst.window.t_obs_end(),
                          inst.track->boxes.begin() + inst.window.t_end());
      for (const auto& [model, p] : models_here)
        sample.predictions[model] = p->trajectory;
      report.fol_samples.push_back(std::move(sample));
    }
  }
  for (const std::string& name : ego_names) {
    if (static_cast<int>(report.importance_samples.size()) >=
        opts.max_importance_samples)
      break;
    std::map<InstanceKey, const EgoPrediction*> by_key;
    for (const EgoPrediction* p : ego_by_model[name]) {
      if (p->importance.empty()) continue;
      const InstanceKey key{p->clip_id, p->t_start, -1};
      if (window_truth.count(key)) by_key.emplace(key, p);
    }
    for (const auto& [key, p] : by_key) {
      if (static_cast<int>(report.importance_samples.size()) >=
          opts.max_importance_samples)
        break;
      ImportanceSample sample;
      sample.key = key;
      sample.model = name;
      sample.steps = p->importance;
      report.importance_samples.push_back(std::move(sample));
    }
  }

  return report;
}

std::string report_to_json(const Report& report) {
  ordered_json root;
  root["schema_version"] = 1;
  root["window_stride"] = report.window_stride;
  root["test_clips"] = report.test_clips;

  ordered_json fol = ordered_json::array();
  for (const FolRow& row : report.fol) {
    ordered_json r;
    r["name"] = row.name;
    r["expected"] = row.expected;
    r["evaluated"] = row.overall.count;
    r["unmatched"] = row.unmatched;
    r["ade_px"] = row.overall.ade_px;
    r["fde_px"] = row.overall.fde_px;
    r["fiou"] = row.overall.fiou;
    ordered_json per_class;
    for (const auto& [k, s] : row.per_class) {
      ordered_json c;
      c["count"] = s.count;
      c["ade_px"] = s.ade_px;
      c["fde_px"] = s.fde_px;
      c["fiou"] = s.fiou;
      per_class[k] = std::move(c);
    }
    r["per_class"] = std::move(per_class);
    ordered_json missing = ordered_json::array();
    for (const InstanceKey& k : row.missing) missing.push_back(key_json(k));
    r["missing"] = std::move(missing);
    fol.push_back(std::move(r));
  }
  root["fol"] = std::move(fol);

  ordered_json ego = ordered_json::array();
  for (const EgoRow& row : report.ego) {
    ordered_json r;
    r["name"] = row.name;
    r["expected"] = row.expected;
    r["evaluated"] = row.evaluated;
    r["unmatched"] = row.unmatched;
    r["rmse_alpha"] = row.rmse_alpha;
    r["rmse_omega"] = row.rmse_omega;
    ordered_json missing = ordered_json::array();
    for (const InstanceKey& k : row.missing) missing.push_back(key_json(k));
    r["missing"] = std::move(missing);
    ego.push_back(std::move(r));
  }
  root["ego"] = std::move(ego);

  if (report.action) {
    const ActionReport& ar = *report.action;
    ordered_json a;
    a["expected"] = ar.expected;
    a["evaluated"] = ar.evaluated;
    a["unmatched"] = ar.unmatched;
    a["overall_map"] = ar.overall_map;
    ordered_json heads = ordered_json::array();
    for (const ActionHeadReport& head : ar.per_head) {
      ordered_json h;
      h["set"] = head.set_name;
      h["map"] = head.map;
      ordered_json per_class;
      for (const auto& [label, ap] : head.per_class) per_class[label] = ap;
      h["per_class"] = std::move(per_class);
      heads.push_back(std::move(h));
    }
    a["per_head"] = std::move(heads);
    ordered_json missing = ordered_json::array();
    for (const InstanceKey& k : ar.missing) missing.push_back(key_json(k));
    a["missing"] = std::move(missing);
    root["action"] = std::move(a);
  } else {
    root["action"] = nullptr;
  }

  ordered_json samples;
  ordered_json fol_samples = ordered_json::array();
  for (const FolSample& s : report.fol_samples) {
    ordered_json j;
    j["key"] = key_json(s.key);
    ordered_json observed = ordered_json::array();
    for (const data::BBox& b : s.observed) observed.push_back(box_json(b));
    j["observed"] = std::move(observed);
    ordered_json truth = ordered_json::array();
    for (const data::BBox& b : s.truth) truth.push_back(box_json(b));
    j["truth"] = std::move(truth);
    ordered_json predictions;
    for (const auto& [model, boxes] : s.predictions) {
      ordered_json traj = ordered_json::array();
      for (const data::BBox& b : boxes) traj.push_back(box_json(b));
      predictions[model] = std::move(traj);
    }
    j["predictions"] = std::move(predictions);
    fol_samples.push_back(std::move(j));
  }
  samples["fol"] = std::move(fol_samples);
  ordered_json imp_samples = ordered_json::array();
  for (const ImportanceSample& s : report.importance_samples) {
    ordered_json j;
    j["key"] = key_json(s.key);
    j["model"] = s.model;
    j["steps"] = importance_json(s.steps);
    imp_samples.push_back(std::move(j));
  }
  samples["importance"] = std::move(imp_samples);
  root["samples"] = std::move(samples);

  return root.dump(2) + "\n";
}

Report parse_report(const std::string& json_text) {
  const json root = json::parse(json_text);
  if (root.at("schema_version").get<int>() != 1)
    throw std::runtime_error("report: unsupported schema version");
  Report report;
  report.window_stride = root.at("window_stride").get<int>();
  report.test_clips = root.at("test_clips").get<std::vector<std::string>>();

  for (const auto& r : root.at("fol")) {
    FolRow row;
    row.name = r.at("name").get<std::string>();
    row.expected = r.at("expected").get<int>();
    row.unmatched = r.at("unmatched").get<int>();
    row.overall.count = r.at("evaluated").get<int>();
    row.overall.ade_px = r.at("ade_px").get<double>();
    row.overall.fde_px = r.at("fde_px").get<double>();
    row.overall.fiou = r.at("fiou").get<double>();
    for (const auto& [k, c] : r.at("per_class").items()) {
      LocStats s;
      s.count = c.at("count").get<int>();
      s.ade_px = c.at("ade_px").get<double>();
      s.fde_px = c.at("fde_px").get<double>();
      s.fiou = c.at("fiou").get<double>();
      row.per_class[k] = s;
    }
    for (const auto& k : r.at("missing")) row.missing.push_back(parse_key(k));
    report.fol.push_back(std::move(row));
  }

  for (const auto& r : root.at("ego")) {
    EgoRow row;
    row.name = r.at("name").get<std::string>();
    row.expected = r.at("expected").get<int>();
    row.evaluated = r.at("evaluated").get<int>();
    row.unmatched = r.at("unmatched").get<int>();
    row.rmse_alpha = r.at("rmse_alpha").get<double>();
    row.rmse_omega = r.at("rmse_omega").get<double>();
    for (const auto& k : r.at("missing")) row.missing.push_back(parse_key(k));
    report.ego.push_back(std::move(row));
  }

  if (!root.at("action").is_null()) {
    const auto& a = root.at("action");
    ActionReport ar;
    ar.expected = a.at("expected").get<int>();
    ar.evaluated = a.at("evaluated").get<int>();
    ar.unmatched = a.at("unmatched").get<int>();
    ar.overall_map = a.at("overall_map").get<double>();
    for (const auto& h : a.at("per_head")) {
      ActionHeadReport head;
      head.set_name = h.at("set").get<std::string>();
      head.map = h.at("map").get<double>();
      for (const auto& [label, ap] : h.at("per_class").items())
        head.per_class[label] = ap.get<double>();
      ar.per_head.push_back(std::move(head));
    }
    for (const auto& k : a.at("missing")) ar.missing.push_back(parse_key(k));
    report.action = std::move(ar);
  }

  const auto& samples = root.at("samples");
  for (const auto& j : samples.at("fol")) {
    FolSample s;
    s.key = parse_key(j.at("key"));
    for (const auto& b : j.at("observed")) s.observed.push_back(parse_box(b));
    for (const auto& b : j.at("truth")) s.truth.push_back(parse_box(b));
    for (const auto& [model, traj] : j.at("predictions").items()) {
      std::vector<data::BBox> boxes;
      for (const auto& b : traj) boxes.push_back(parse_box(b));
      s.predictions[model] = std::move(boxes);
    }
    report.fol_samples.push_back(std::move(s));
  }
  for (const auto& j : samples.at("importance")) {
    ImportanceSample s;
    s.key = parse_key(j.at("key"));
    s.model = j.at("model").get<std::string>();
    s.steps = parse_importance(j.at("steps"));
    report.importance_samples.push_back(std::move(s));
  }

  return report;
}

void save_report(const Report& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::string body = report_to_json(report);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Report load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

}  // namespace titan::eval
