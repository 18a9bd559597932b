#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "titan/core/rng.hpp"
#include "titan/data/clip_io.hpp"
#include "titan/data/taxonomy.hpp"
#include "titan/data/types.hpp"

using namespace titan::data;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

Clip tiny_clip(int frames, int num_agents) {
  titan::core::Rng rng(5);
  Clip clip;
  clip.clip_id = "tiny";
  clip.ego.resize(frames);
  for (int t = 0; t < frames; ++t) {
    clip.ego[t].alpha = rng.uniform(-2.0, 2.0);
    clip.ego[t].omega = rng.uniform(-0.3, 0.3);
  }
  for (int a = 0; a < num_agents; ++a) {
    AgentTrack tr;
    tr.track_id = a + 1;
    tr.agent_type = a % 2 == 0 ? AgentType::person : AgentType::vehicle_4wheel;
    if (is_person(tr.agent_type)) tr.age_group = AgeGroup::adult;
    for (int t = 0; t < frames; ++t) {
      tr.boxes.push_back({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9),
                          rng.uniform(0.01, 0.2), rng.uniform(0.05, 0.3)});
      tr.actions.push_back(ActionVector::none_for(tr.agent_type));
      tr.visibility.push_back(true);
    }
    clip.agents.push_back(std::move(tr));
  }
  return clip;
}

}  // namespace

TEST_CASE("taxonomy has eight sets with the fixed cardinalities and one none each") {
  const auto& tax = Taxonomy::get();
  REQUIRE(static_cast<int>(tax.sets.size()) == 8);
  const int expected[8] = {10, 13, 7, 4, 4, 4, 3, 3};
  for (int i = 0; i < 8; ++i) {
    CHECK(tax.cardinality(i) == expected[i]);
    int nones = 0;
    for (const auto& c : tax.sets[i].classes)
      if (c == "none") ++nones;
    CHECK(nones == 1);
    CHECK(tax.sets[i].classes[tax.none_index(i)] == "none");
  }
  CHECK(tax.class_index(ActionSet::simple_contextual, "waiting_to_cross_street") == 2);
  CHECK(tax.class_index(ActionSet::atomic, "no_such_label") == -1);
}

TEST_CASE("box normalization round-trips and hits the fixed example") {
  BBox px{960, 600, 192, 120};
  BBox n = normalize_box(px, 1920, 1200);
  CHECK(n.c_u == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(n.c_v == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(n.l_u == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(n.l_v == doctest::Approx(0.1).epsilon(1e-12));

  BBox zero = normalize_box({0, 0, 0, 0}, 1920, 1200);
  CHECK(zero.c_u == 0.0);
  CHECK(zero.l_v == 0.0);

  titan::core::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    BBox b{rng.uniform(0, 1920), rng.uniform(0, 1200), rng.uniform(0, 300),
           rng.uniform(0, 300)};
    BBox back = denormalize_box(normalize_box(b, 1920, 1200), 1920, 1200);
    CHECK(std::abs(back.c_u - b.c_u) < 1e-9);
    CHECK(std::abs(back.c_v - b.c_v) < 1e-9);
    CHECK(std::abs(back.l_u - b.l_u) < 1e-9);
    CHECK(std::abs(back.l_v - b.l_v) < 1e-9);
  }
}

TEST_CASE("window extraction counts and start offsets") {
  CHECK(make_windows(tiny_clip(30, 1), 1).size() == 1);
  auto ws = make_windows(tiny_clip(40, 1), 10);
  REQUIRE(ws.size() == 2);
  CHECK(ws[0].t_start == 0);
  CHECK(ws[1].t_start == 10);
  CHECK(make_windows(tiny_clip(29, 1), 1).empty());

  for (int length : {30, 31, 45, 90}) {
    for (int stride : {1, 3, 10}) {
      const auto wins = make_windows(tiny_clip(length, 1), stride);
      CHECK(static_cast<int>(wins.size()) == (length - 30) / stride + 1);
    }
  }
}

TEST_CASE("windows exclude agents not fully visible over the observed span") {
  Clip clip = tiny_clip(30, 2);
  clip.agents[1].visibility[4] = false;
  auto ws = make_windows(clip, 1);
  REQUIRE(ws.size() == 1);
  REQUIRE(ws[0].agent_indices.size() == 1);
  CHECK(ws[0].agent_indices[0] == 0);
}

TEST_CASE("validation rejects broken clips with a named location") {
  Clip clip = tiny_clip(30, 1);
  clip.agents[0].boxes[3].l_u = -0.1;
  CHECK_THROWS_WITH_AS(validate_clip(clip),
                       doctest::Contains("negative box dimension"),
                       std::runtime_error);

  Clip dup = tiny_clip(30, 2);
  dup.agents[1].track_id = dup.agents[0].track_id;
  CHECK_THROWS_WITH_AS(validate_clip(dup), doctest::Contains("duplicate track_id"),
                       std::runtime_error);

  Clip bad_action = tiny_clip(30, 1);
  bad_action.agents[0].actions[0].labels[0] = 10;
  CHECK_THROWS(validate_clip(bad_action));

  Clip person_vehicle_label = tiny_clip(30, 1);
  person_vehicle_label.agents[0].actions[0].labels[5] = 0;
  CHECK_THROWS(validate_clip(person_vehicle_label));
}

TEST_CASE("minimal hand-written clip file loads") {
  const auto path = temp_file("titan_minimal.jsonl");
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"clip_id":"m","fps":10.000000,"image_width":1920,"image_height":1200,"num_frames":2})"
        << "\n";
    out << R"({"t":0,"alpha":0.100000,"omega":0.000000})" << "\n";
    out << R"({"t":0,"track_id":1,"agent_type":"person","age_group":"adult","box":[0.500000,0.500000,0.050000,0.100000],"actions":[0,12,6,3,3,3,2,2],"visible":true})"
        << "\n";
    out << R"({"t":1,"alpha":0.100000,"omega":0.000000})" << "\n";
    out << R"({"t":1,"track_id":1,"agent_type":"person","age_group":"adult","box":[0.510000,0.500000,0.050000,0.100000],"actions":[0,12,6,3,3,3,2,2],"visible":true})"
        << "\n";
  }
  Clip clip = load_clip(path.string());
  CHECK(clip.num_frames() == 2);
  REQUIRE(clip.agents.size() == 1);
  CHECK(clip.agents[0].boxes[1].c_u == doctest::Approx(0.51));
  std::filesystem::remove(path);
}

TEST_CASE("load reports the offending line for malformed input") {
  const auto path = temp_file("titan_broken.jsonl");
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"clip_id":"m","fps":10.0,"image_width":1920,"image_height":1200,"num_frames":1})"
        << "\n";
    out << "{not json}\n";
  }
  CHECK_THROWS_WITH_AS(load_clip(path.string()), doctest::Contains(":2:"),
                       std::runtime_error);

  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"clip_id":"m","fps":10.0,"image_width":1920,"image_height":1200,"num_frames":1})"
        << "\n";
    out << R"({"t":0,"omega":0.0})" << "\n";
  }
  CHECK_THROWS_WITH_AS(load_clip(path.string()), doctest::Contains("alpha"),
                       std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("save and load invert each other") {
  titan::core::Rng seeds(1234);
  for (int trial = 0; trial < 8; ++trial) {
    Clip clip = tiny_clip(30 + trial * 7, 1 + trial % 4);
    const auto path = temp_file("titan_rt_" + std::to_string(trial) + ".jsonl");
    save_clip(clip, path.string());
    Clip loaded = load_clip(path.string());
    const auto path2 = temp_file("titan_rt2_" + std::to_string(trial) + ".jsonl");
    save_clip(loaded, path2.string());

    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
  }
}

TEST_CASE("empty-agents clip writes header and ego records only") {
  Clip clip = tiny_clip(30, 0);
  const std::string body = clip_to_jsonl(clip);
  int lines = 0;
  for (char c : body)
    if (c == '\n') ++lines;
  CHECK(lines == 31);
  CHECK(body.find("track_id") == std::string::npos);
}

TEST_CASE("canonical float formatting") {
  CHECK(fmt6(0.5) == "0.500000");
  CHECK(fmt6(-0.0000001) == "0.000000");
  CHECK(fmt6(-1.25) == "-1.250000");
}
