#include "titan/data/taxonomy.hpp"

#include <stdexcept>

namespace titan::data {

namespace {

Taxonomy build() {
  Taxonomy t;
  auto fill = [](Taxonomy::LabelSet& s, std::string name,
                 std::vector<std::string> classes) {
    s.name = std::move(name);
    s.classes = std::move(classes);
    s.none_index = -1;
    for (int i = 0; i < static_cast<int>(s.classes.size()); ++i)
      if (s.classes[i] == "none") s.none_index = i;
    if (s.none_index < 0) throw std::logic_error("label set lacks a none class");
  };

  fill(t.sets[0], "atomic",
       {"standing", "running", "bending", "kneeling", "walking", "sitting",
        "squatting", "jumping", "laying_down", "none"});
  fill(t.sets[1], "simple_contextual",
       {"crossing_at_pedestrian_crossing", "jaywalking", "waiting_to_cross_street",
        "motorcycling", "biking", "walking_along_the_side_of_the_road",
        "walking_on_the_road", "cleaning", "closing", "opening",
        "exiting_a_building", "entering_a_building", "none"});
  fill(t.sets[2], "complex_contextual",
       {"unloading", "loading", "getting_in_4_wheel_vehicle",
        "getting_out_of_4_wheel_vehicle", "getting_on_2_wheel_vehicle",
        "getting_off_2_wheel_vehicle", "none"});
  fill(t.sets[3], "communicative",
       {"looking_at_phone", "talking_on_phone", "talking_in_group", "none"});
  fill(t.sets[4], "transportive",
       {"pushing", "carrying_with_both_hands", "pulling", "none"});
  fill(t.sets[5], "motion_status", {"stopped", "moving", "parked", "none"});
  fill(t.sets[6], "trunk_status", {"open", "closed", "none"});
  fill(t.sets[7], "door_status", {"open", "closed", "none"});

  for (int i = 0; i < kNumActionSets; ++i)
    if (static_cast<int>(t.sets[i].classes.size()) != kSetCardinality[i])
      throw std::logic_error("label set cardinality mismatch");
  return t;
}

}  // namespace

const Taxonomy& Taxonomy::get() {
  static const Taxonomy t = build();
  return t;
}

int Taxonomy::class_index(ActionSet s, std::string_view class_name) const {
  const auto& classes = set(s).classes;
  for (int i = 0; i < static_cast<int>(classes.size()); ++i)
    if (classes[i] == class_name) return i;
  return -1;
}

bool is_person(AgentType t) { return t == AgentType::person; }
bool is_vehicle(AgentType t) { return !is_person(t); }

std::string_view agent_type_name(AgentType t) {
  switch (t) {
    case AgentType::person: return "person";
    case AgentType::vehicle_2wheel: return "vehicle_2wheel";
    case AgentType::vehicle_4wheel: return "vehicle_4wheel";
  }
  return "person";
}

std::string_view age_group_name(AgeGroup g) {
  switch (g) {
    case AgeGroup::child: return "child";
    case AgeGroup::adult: return "adult";
    case AgeGroup::senior: return "senior";
  }
  return "adult";
}

bool parse_agent_type(std::string_view name, AgentType& out) {
  if (name == "person") out = AgentType::person;
  else if (name == "vehicle_2wheel") out = AgentType::vehicle_2wheel;
  else if (name == "vehicle_4wheel") out = AgentType::vehicle_4wheel;
  else return false;
  return true;
}

bool parse_age_group(std::string_view name, AgeGroup& out) {
  if (name == "child") out = AgeGroup::child;
  else if (name == "adult") out = AgeGroup::adult;
  else if (name == "senior") out = AgeGroup::senior;
  else return false;
  return true;
}

}  // namespace titan::data
