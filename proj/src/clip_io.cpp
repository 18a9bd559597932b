#include "titan/data/clip_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace titan::data {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

const json& field(const json& rec, const char* key, const std::string& path, int line) {
  auto it = rec.find(key);
  if (it == rec.end()) fail_at(path, line, std::string("missing field '") + key + "'");
  return *it;
}

double num_field(const json& rec, const char* key, const std::string& path, int line) {
  const json& v = field(rec, key, path, line);
  if (!v.is_number()) fail_at(path, line, std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

int int_field(const json& rec, const char* key, const std::string& path, int line) {
  const json& v = field(rec, key, path, line);
  if (!v.is_number_integer()) fail_at(path, line, std::string("field '") + key + "' is not an integer");
  return v.get<int>();
}

std::string str_field(const json& rec, const char* key, const std::string& path, int line) {
  const json& v = field(rec, key, path, line);
  if (!v.is_string()) fail_at(path, line, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

struct PendingTrack {
  AgentType agent_type = AgentType::person;
  std::optional<AgeGroup> age_group;
  std::map<int, std::tuple<BBox, ActionVector, bool>> frames;
};

}  // namespace

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string clip_to_jsonl(const Clip& clip) {
  std::ostringstream out;
  out << "{\"clip_id\":\"" << clip.clip_id << "\",\"fps\":" << fmt6(clip.fps)
      << ",\"image_width\":" << clip.image_width
      << ",\"image_height\":" << clip.image_height
      << ",\"num_frames\":" << clip.num_frames() << "}\n";

  std::vector<int> order(clip.agents.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return clip.agents[a].track_id < clip.agents[b].track_id;
  });

  for (int t = 0; t < clip.num_frames(); ++t) {
    out << "{\"t\":" << t << ",\"alpha\":" << fmt6(clip.ego[t].alpha)
        << ",\"omega\":" << fmt6(clip.ego[t].omega) << "}\n";
    for (int idx : order) {
      const AgentTrack& tr = clip.agents[idx];
      out << "{\"t\":" << t << ",\"track_id\":" << tr.track_id
          << ",\"agent_type\":\"" << agent_type_name(tr.agent_type) << "\""
          << ",\"age_group\":\""
          << (tr.age_group ? age_group_name(*tr.age_group) : "none") << "\""
          << ",\"box\":[" << fmt6(tr.boxes[t].c_u) << ',' << fmt6(tr.boxes[t].c_v)
          << ',' << fmt6(tr.boxes[t].l_u) << ',' << fmt6(tr.boxes[t].l_v) << ']'
          << ",\"actions\":[";
      for (int i = 0; i < kNumActionSets; ++i) {
        if (i) out << ',';
        out << tr.actions[t].labels[i];
      }
      out << "],\"visible\":" << (tr.visibility[t] ? "true" : "false") << "}\n";
    }
  }
  return out.str();
}

void save_clip(const Clip& clip, const std::string& path) {
  validate_clip(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::string body = clip_to_jsonl(clip);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Clip load_clip(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open clip file: " + path);

  Clip clip;
  int num_frames = -1;
  std::map<int, PendingTrack> tracks;
  std::vector<bool> ego_seen;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) fail_at(path, line_no, "record is not an object");

    if (line_no == 1) {
      clip.clip_id = str_field(rec, "clip_id", path, line_no);
      clip.fps = num_field(rec, "fps", path, line_no);
      clip.image_width = int_field(rec, "image_width", path, line_no);
      clip.image_height = int_field(rec, "image_height", path, line_no);
      num_frames = int_field(rec, "num_frames", path, line_no);
      if (num_frames < 0) fail_at(path, line_no, "num_frames is negative");
      clip.ego.resize(num_frames);
      ego_seen.assign(num_frames, false);
      continue;
    }
    if (num_frames < 0) fail_at(path, line_no, "missing header record");

    const int t = int_field(rec, "t", path, line_no);
    if (t < 0 || t >= num_frames) fail_at(path, line_no, "frame index out of range");

    if (!rec.contains("track_id")) {
      if (ego_seen[t]) fail_at(path, line_no, "duplicate ego record for frame");
      clip.ego[t].alpha = num_field(rec, "alpha", path, line_no);
      clip.ego[t].omega = num_field(rec, "omega", path, line_no);
      ego_seen[t] = true;
      continue;
    }

    const int track_id = int_field(rec, "track_id", path, line_no);
    PendingTrack& pt = tracks[track_id];
    AgentType type;
    if (!parse_agent_type(str_field(rec, "agent_type", path, line_no), type))
      fail_at(path, line_no, "unknown agent_type");
    const std::string age = str_field(rec, "age_group", path, line_no);
    std::optional<AgeGroup> age_group;
    if (age != "none") {
      AgeGroup g;
      if (!parse_age_group(age, g)) fail_at(path, line_no, "unknown age_group");
      age_group = g;
    }
    if (!pt.frames.empty() && (pt.agent_type != type || pt.age_group != age_group))
      fail_at(path, line_no, "track attributes change across frames");
    pt.agent_type = type;
    pt.age_group = age_group;

    const json& box = field(rec, "box", path, line_no);
    if (!box.is_array() || box.size() != 4) fail_at(path, line_no, "field 'box' is not a 4-array");
    BBox b{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
           box[3].get<double>()};

    const json& acts = field(rec, "actions", path, line_no);
    if (!acts.is_array() || acts.size() != kNumActionSets)
      fail_at(path, line_no, "field 'actions' is not an 8-array");
    ActionVector a;
    for (int i = 0; i < kNumActionSets; ++i) {
      if (!acts[i].is_number_integer())
        fail_at(path, line_no, "field 'actions' holds a non-integer");
      a.labels[i] = acts[i].get<int>();
    }

    const json& vis = field(rec, "visible", path, line_no);
    if (!vis.is_boolean()) fail_at(path, line_no, "field 'visible' is not a boolean");

    if (!pt.frames.emplace(t, std::make_tuple(b, a, vis.get<bool>())).second)
      fail_at(path, line_no, "duplicate track record for frame");
  }

  if (num_frames < 0) fail_at(path, 1, "empty file");
  for (int t = 0; t < num_frames; ++t)
    if (!ego_seen[t]) fail_at(path, line_no, "missing ego record for frame " + std::to_string(t));

  for (auto& [track_id, pt] : tracks) {
    AgentTrack tr;
    tr.track_id = track_id;
    tr.agent_type = pt.agent_type;
    tr.age_group = pt.age_group;
    tr.boxes.resize(num_frames);
    tr.actions.resize(num_frames);
    tr.visibility.assign(num_frames, false);
    // Fill gaps by holding the nearest earlier record, or the first later one
    // for leading frames; held frames stay marked not-visible.
    const auto first = pt.frames.begin();
    for (int t = 0; t < num_frames; ++t) {
      auto it = pt.frames.upper_bound(t);
      if (it == pt.frames.begin()) {
        tr.boxes[t] = std::get<0>(first->second);
        tr.actions[t] = std::get<1>(first->second);
        tr.visibility[t] = false;
      } else {
        --it;
        const bool exact = (it->first == t);
        tr.boxes[t] = std::get<0>(it->second);
        tr.actions[t] = std::get<1>(it->second);
        tr.visibility[t] = exact ? std::get<2>(it->second) : false;
      }
    }
    clip.agents.push_back(std::move(tr));
  }

  validate_clip(clip);
  return clip;
}

std::vector<Clip> load_clip_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error("not a clip directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  std::vector<Clip> clips;
  clips.reserve(paths.size());
  for (const std::string& path : paths) clips.push_back(load_clip(path));
  return clips;
}

}  // namespace titan::data
